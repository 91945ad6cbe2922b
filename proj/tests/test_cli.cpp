#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "mcq/cli.hpp"
#include "test_util.hpp"

namespace mcq {
namespace {

using testing::slurp;
using testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  TempDir dir;

  std::string path(const std::string& name) const { return (dir / name).string(); }

  // Seeded synthetic bank in <dir>/<name>.
  std::string simulate(const std::string& name, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"simulate", "--seed", "7", "--n-items", "60", "--levels", "B1,B2,C1",
                                  "--out-dir", path(name)};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run_cli(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return path(name);
  }

  std::vector<std::string> inputs(const std::string& bank) const {
    return {"--items", bank + "/items.jsonl", "--distributions", bank + "/distributions.jsonl",
            "--predictions", bank + "/predictions.json"};
  }

  std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) const {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  }
};

TEST_F(CliTest, ValidateAcceptsSimulatedBank) {
  const auto bank = simulate("bank", {"--distortion", "temperature", "--distortion-value", "0.3"});
  const auto r = run_cli(with({"validate"}, inputs(bank)));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("ok: 60 items"), std::string::npos);
}

TEST_F(CliTest, ExitCodeMatrix) {
  const auto bank = simulate("bank");
  // Usage errors.
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"validate", "--items", "x"}).code, 1);
  EXPECT_EQ(run_cli(with({"detect", "--score-source", "sideways", "--out-dir", path("o")}, inputs(bank))).code, 1);
  // Help is not a failure.
  EXPECT_EQ(run_cli({"--help"}).code, 0);

  // Missing file: I/O failure.
  auto missing = inputs(bank);
  missing[1] = path("nope.jsonl");
  EXPECT_EQ(run_cli(with({"validate"}, missing)).code, 2);
  EXPECT_EQ(run_cli(with({"fit", "--out-dir", path("fit")}, missing)).code, 2);

  // Malformed and invalid content: validation failure.
  dir.write("bad.jsonl", "{not json\n");
  auto malformed = inputs(bank);
  malformed[1] = path("bad.jsonl");
  EXPECT_EQ(run_cli(with({"validate"}, malformed)).code, 1);

  dir.write("sum.jsonl", R"({"item_id":"item-00000","fractions":[0.5,0.5,0.1,0.0]})" "\n");
  auto bad_sum = inputs(bank);
  bad_sum[3] = path("sum.jsonl");
  const auto r = run_cli(with({"validate"}, bad_sum));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("item-00000"), std::string::npos);

  // Validate is strict about coverage; the other commands are not unless asked.
  dir.write("partial.jsonl", slurp(bank + "/distributions.jsonl").substr(0, slurp(bank + "/distributions.jsonl").find('\n') + 1));
  auto partial = inputs(bank);
  partial[3] = path("partial.jsonl");
  EXPECT_EQ(run_cli(with({"validate"}, partial)).code, 1);
  EXPECT_EQ(run_cli(with({"fit", "--out-dir", path("p1")}, partial)).code, 0);
  EXPECT_EQ(run_cli(with({"fit", "--strict", "--out-dir", path("p2")}, partial)).code, 1);

  // Domain errors.
  EXPECT_EQ(run_cli(with({"fit", "--level", "A1", "--out-dir", path("f")}, inputs(bank))).code, 1);
  EXPECT_EQ(run_cli(with({"detect", "--score-source", "reshaped", "--out-dir", path("d")}, inputs(bank))).code, 1);
  EXPECT_EQ(run_cli({"simulate", "--seed", "1", "--options", "1", "--out-dir", path("s")}).code, 1);

  // Output directory that cannot be created.
  dir.write("file", "x");
  EXPECT_EQ(run_cli(with({"evaluate", "--out-dir", path("file") + "/sub"}, inputs(bank))).code, 2);
}

TEST_F(CliTest, UnknownLevelMessageListsAvailableLevels) {
  const auto bank = simulate("bank");
  const auto r = run_cli(with({"evaluate", "--level", "C2", "--out-dir", path("e")}, inputs(bank)));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("B1, B2, C1"), std::string::npos) << r.err;
}

TEST_F(CliTest, ReportIsByteIdenticalAcrossRuns) {
  const auto bank = simulate("bank", {"--distortion", "noise", "--distortion-value", "0.8"});
  for (const char* out : {"r1", "r2"}) {
    ASSERT_EQ(run_cli(with({"report", "--fit", "--out-dir", path(out)}, inputs(bank))).code, 0);
  }
  for (const char* f : {"report.json", "accuracy.csv", "calibration.csv", "readability.csv", "cdf_points.csv", "pr_points.csv",
                        "flagged_distractors.csv"}) {
    EXPECT_EQ(slurp(path("r1") + "/" + f), slurp(path("r2") + "/" + f)) << f;
  }
  // Same for the simulator itself.
  simulate("bank2", {"--distortion", "noise", "--distortion-value", "0.8"});
  for (const char* f : {"items.jsonl", "distributions.jsonl", "predictions.json"}) {
    EXPECT_EQ(slurp(bank + "/" + f), slurp(path("bank2") + "/" + f)) << f;
  }
}

TEST_F(CliTest, FitWritesLoadableParams) {
  const auto bank = simulate("bank", {"--distortion", "temperature", "--distortion-value", "2"});
  const auto r = run_cli(with({"fit", "--params", path("params.json")}, inputs(bank)));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto params = load_params(path("params.json"));
  ASSERT_EQ(params.size(), 3u);
  for (const auto& [_, p] : params) EXPECT_NEAR(p.tau, 2.0, 1e-2);

  const auto ev = run_cli(with({"evaluate", "--params", path("params.json"), "--out-dir", path("ev")}, inputs(bank)));
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_NE(slurp(path("ev") + "/calibration.csv").find("B2,reshaped,"), std::string::npos);
}

TEST_F(CliTest, ReportNumbersMatchLibrary) {
  const auto bank = simulate("bank", {"--distortion", "noise", "--distortion-value", "1.2", "--poor-rate", "0.3"});
  ASSERT_EQ(run_cli(with({"report", "--fit", "--out-dir", path("r")}, inputs(bank))).code, 0);
  const json report = json::parse(slurp(path("r") + "/report.json"));

  const auto joined = join(load_item_bank(bank + "/items.jsonl"), load_candidate_distributions(bank + "/distributions.jsonl"),
                           load_predictions(bank + "/predictions.json"));
  const auto params = fit_all_levels(joined);
  for (const auto& name : joined.level_names()) {
    const auto& lv = report["levels"][name];
    const auto p = params.at(name);
    EXPECT_EQ(lv["params"]["tau"].get<double>(), p.tau);
    EXPECT_EQ(lv["params"]["alpha"].get<double>(), p.alpha);
    const auto raw = aggregate_divergences(joined.level(name), Source::model);
    EXPECT_EQ(lv["calibration"]["raw"]["divergence"]["kl"].get<double>(), raw.kl);
    const auto reshaped = aggregate_divergences(joined.level(name), Source::reshaped, p.shape());
    EXPECT_EQ(lv["calibration"]["reshaped"]["divergence"]["hellinger"].get<double>(), reshaped.hellinger);
    EXPECT_EQ(lv["accuracy"]["model_tcp"].get<double>(), true_class_probability(joined.level(name), Source::model));
  }
  const auto curve = pr_curve(extract_distractors(joined.all_entries(), ScoreSource::raw));
  EXPECT_EQ(report["detection"]["global"]["average_precision"].get<double>(), curve.average_precision);
  EXPECT_NEAR(report["detection"]["random_baseline"].get<double>(), 0.3, 1.0 / 180.0);

  const auto& inputs_json = report["provenance"]["inputs"];
  ASSERT_EQ(inputs_json.size(), 3u);
  EXPECT_EQ(inputs_json[0]["sha256"].get<std::string>().size(), 64u);
}

TEST_F(CliTest, IdentityBankFitsIdentity) {
  const auto bank = simulate("bank");
  const auto r = run_cli(with({"report", "--fit", "--out-dir", path("r")}, inputs(bank)));
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = json::parse(slurp(path("r") + "/report.json"));
  for (const auto& [name, lv] : report["levels"].items()) {
    EXPECT_LE(lv["params"]["alpha"].get<double>(), 1e-9) << name;
    EXPECT_LE(std::abs(lv["params"]["tau"].get<double>() - 1.0), 1e-3) << name;
    for (const char* m : {"kl", "hellinger", "total_variation"}) {
      EXPECT_LE(lv["calibration"]["reshaped"]["divergence"][m].get<double>(), 1e-9) << name << " " << m;
    }
  }
}

TEST_F(CliTest, LevelFilterAndPerLevelDetection) {
  const auto bank = simulate("bank", {"--poor-rate", "0.4"});
  const auto r = run_cli(with({"detect", "--per-level", "--out-dir", path("d")}, inputs(bank)));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\nB2,"), std::string::npos);
  const auto one = run_cli(with({"report", "--level", "B2", "--fit", "--out-dir", path("r")}, inputs(bank)));
  ASSERT_EQ(one.code, 0) << one.err;
  const json report = json::parse(slurp(path("r") + "/report.json"));
  EXPECT_EQ(report["levels"].size(), 1u);
  EXPECT_TRUE(report["levels"].contains("B2"));
  EXPECT_EQ(report["detection"]["global"]["total"].get<int>(), 20 * 3);
}

TEST_F(CliTest, ReadabilityTable) {
  const auto bank = simulate("bank");
  dir.write("complexity.json", R"({"item-00000":[0.2,0.5,0.3],"item-00003":[0,0,1]})");
  const auto r = run_cli({"readability", "--items", bank + "/items.jsonl", "--complexity", path("complexity.json"),
                          "--out-dir", path("rd")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(path("rd") + "/readability.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "metric,B1_mean,B1_std,B2_mean,B2_std,C1_mean,C1_std");
  // item-00000 and item-00003 are both B1 (round-robin over three levels).
  EXPECT_NE(csv.find("\nComplexity,77.5,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("\nLinsear,"), std::string::npos);
}

TEST_F(CliTest, ConfigFileMirrorsFlags) {
  const auto bank = simulate("bank");
  dir.write("run.toml", "[validate]\nitems = \"" + bank + "/items.jsonl\"\ndistributions = \"" + bank +
                            "/distributions.jsonl\"\npredictions = \"" + bank + "/predictions.json\"\n");
  const auto r = run_cli({"--config", path("run.toml"), "validate"});
  EXPECT_EQ(r.code, 0) << r.err << r.out;
}

#ifdef MCQ_BINARY
TEST(CliBinary, ProcessExitCodes) {
  TempDir dir;
  const std::string bin = MCQ_BINARY;
  auto code = [](const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  EXPECT_EQ(code(bin + " simulate --seed 1 --out-dir " + (dir / "b").string()), 0);
  const std::string in = " --items " + (dir / "b/items.jsonl").string() + " --distributions " +
                         (dir / "b/distributions.jsonl").string() + " --predictions " +
                         (dir / "b/predictions.json").string();
  EXPECT_EQ(code(bin + " validate" + in), 0);
  EXPECT_EQ(code(bin + " validate --items /nonexistent" + in.substr(in.find(" --distributions"))), 2);
  EXPECT_EQ(code(bin + " nonsense"), 1);
}
#endif

}  // namespace
}  // namespace mcq
