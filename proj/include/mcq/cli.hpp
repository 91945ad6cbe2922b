#pragma once

#include <openssl/evp.h>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcq/distractor.hpp"
#include "mcq/divergence.hpp"
#include "mcq/error.hpp"
#include "mcq/item_bank.hpp"
#include "mcq/readability.hpp"
#include "mcq/report.hpp"
#include "mcq/reshape.hpp"
#include "mcq/synthetic.hpp"

namespace mcq::cli {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitIo = 2 };

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return ss.str();
}

// Flags shared across subcommands. Paths are kept as given so reports do not
// depend on the working directory.
struct Options {
  std::string items;
  std::string distributions;
  std::string predictions;
  std::string params;
  std::string complexity;
  std::string level;
  std::string score_source = "raw";
  std::string out_dir = ".";
  std::string text_unit = "full";
  std::string dale_list;
  std::string spache_list;
  std::vector<std::string> allowed_levels = {"B1", "B2", "C1", "C2"};
  bool strict = false;
  bool fit = false;
  bool per_level = false;
  double flag_threshold = kPoorDistractorThreshold;

  // simulate
  std::uint64_t seed = 0;
  std::size_t n_items = 100;
  std::size_t options_per_item = 4;
  double ability = 0.3;
  std::string distortion = "none";
  double distortion_value = 0.0;
  std::vector<std::string> levels = {"B1"};
  std::optional<double> poor_rate;
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Pre-test evaluation of multiple-choice items: distribution matching, "
                 "divergences, distractor detection and readability."};
    app.name("mcq");
    app.set_config("--config", "", "TOML-style file mirroring the command-line flags");
    app.require_subcommand(1);
    build(app);

    std::vector<const char*> argv{"mcq"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out_, err_);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out_, err_);
    } catch (const CLI::ParseError& e) {
      app.exit(e, out_, err_);
      return kExitFailure;
    }

    try {
      return dispatch();
    } catch (const IoError& e) {
      err_ << "error: " << e.what() << "\n";
      return kExitIo;
    } catch (const ValidationError& e) {
      for (const auto& f : e.findings()) err_ << "finding: " << f << "\n";
      return kExitFailure;
    } catch (const Error& e) {
      err_ << "error: " << e.what() << "\n";
      return kExitFailure;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return kExitIo;
    }
  }

 private:
  void add_inputs(CLI::App* sub, bool predictions = true) {
    sub->add_option("--items", o_.items, "Items file (JSON lines or JSON array)")->required();
    sub->add_option("--distributions", o_.distributions, "Candidate distributions file")->required();
    if (predictions) sub->add_option("--predictions", o_.predictions, "Model predictions file")->required();
    sub->add_option("--allowed-levels", o_.allowed_levels, "Accepted level labels (empty accepts any)")
        ->delimiter(',');
    sub->add_flag("--strict", o_.strict, "Fail when any item lacks a distribution or prediction");
  }

  void build(CLI::App& app) {
    auto* validate = app.add_subcommand("validate", "Check the three input files and their join");
    add_inputs(validate);

    auto* fit = app.add_subcommand("fit", "Fit per-level (alpha, tau) reshaping parameters");
    add_inputs(fit);
    fit->add_option("--level", o_.level, "Only fit this level");
    fit->add_option("--params", o_.params, "Output path (default <out-dir>/params.json)");
    fit->add_option("--out-dir", o_.out_dir);

    auto* evaluate = app.add_subcommand("evaluate", "Accuracy, tcp and divergence tables");
    add_inputs(evaluate);
    evaluate->add_option("--params", o_.params, "Fitted parameters (raw-only tables if absent)");
    evaluate->add_option("--level", o_.level);
    evaluate->add_option("--out-dir", o_.out_dir);

    auto* detect = app.add_subcommand("detect", "Underperforming distractor detection");
    add_inputs(detect);
    detect->add_option("--params", o_.params, "Fitted parameters, needed for reshaped scores");
    detect->add_option("--level", o_.level);
    detect->add_option("--score-source", o_.score_source, "Score distractors by raw or reshaped probability")
        ->check(CLI::IsMember({"raw", "reshaped"}));
    detect->add_flag("--per-level", o_.per_level, "Rank within each level instead of globally");
    detect->add_option("--flag-threshold", o_.flag_threshold, "Flag distractors scored below this");
    detect->add_option("--out-dir", o_.out_dir);

    auto* readability = app.add_subcommand("readability", "Readability and complexity table");
    readability->add_option("--items", o_.items)->required();
    readability->add_option("--allowed-levels", o_.allowed_levels)->delimiter(',');
    readability->add_option("--complexity", o_.complexity, "Classifier probabilities per item");
    readability->add_option("--text-unit", o_.text_unit)->check(CLI::IsMember({"full", "context"}));
    readability->add_option("--dale-list", o_.dale_list, "Dale-Chall familiar words, one per line");
    readability->add_option("--spache-list", o_.spache_list, "Spache familiar words, one per line");
    readability->add_option("--out-dir", o_.out_dir);

    auto* simulate = app.add_subcommand("simulate", "Write a seeded synthetic bank");
    simulate->add_option("--seed", o_.seed)->required();
    simulate->add_option("--n-items", o_.n_items);
    simulate->add_option("--options", o_.options_per_item);
    simulate->add_option("--ability", o_.ability);
    simulate->add_option("--distortion", o_.distortion)
        ->check(CLI::IsMember({"none", "temperature", "redistribution", "noise"}));
    simulate->add_option("--distortion-value", o_.distortion_value);
    simulate->add_option("--levels", o_.levels)->delimiter(',');
    simulate->add_option("--poor-rate", o_.poor_rate, "Exact share of poor distractors");
    simulate->add_option("--out-dir", o_.out_dir)->required();

    auto* report = app.add_subcommand("report", "Full evaluation report");
    add_inputs(report);
    report->add_option("--params", o_.params);
    report->add_flag("--fit", o_.fit, "Fit parameters on the same bank when --params is absent");
    report->add_option("--level", o_.level, "Restrict every table to one level");
    report->add_option("--score-source", o_.score_source)->check(CLI::IsMember({"raw", "reshaped"}));
    report->add_flag("--per-level", o_.per_level);
    report->add_option("--flag-threshold", o_.flag_threshold);
    report->add_option("--complexity", o_.complexity);
    report->add_option("--text-unit", o_.text_unit)->check(CLI::IsMember({"full", "context"}));
    report->add_option("--dale-list", o_.dale_list);
    report->add_option("--spache-list", o_.spache_list);
    report->add_option("--out-dir", o_.out_dir)->required();

    for (auto* sub : {validate, fit, evaluate, detect, readability, simulate, report}) {
      sub->callback([this, sub] { command_ = sub->get_name(); });
    }
  }

  int dispatch() {
    if (command_ == "validate") return cmd_validate();
    if (command_ == "fit") return cmd_fit();
    if (command_ == "evaluate") return cmd_evaluate();
    if (command_ == "detect") return cmd_detect();
    if (command_ == "readability") return cmd_readability();
    if (command_ == "simulate") return cmd_simulate();
    if (command_ == "report") return cmd_report();
    throw DomainError("no subcommand");
  }

  // -------------------------------------------------------------------------

  LoadOptions load_options() const {
    LoadOptions lo;
    lo.allowed_levels = std::set<std::string>(o_.allowed_levels.begin(), o_.allowed_levels.end());
    return lo;
  }

  std::optional<std::string> level_filter() const {
    if (o_.level.empty()) return std::nullopt;
    return o_.level;
  }

  struct Loaded {
    std::vector<Item> items;
    std::vector<CandidateDistribution> dists;
    PredictionSet predictions;
    JoinedBank bank;
  };

  Loaded load_all() {
    Loaded l;
    l.items = load_item_bank(o_.items, load_options(), &warnings_);
    l.dists = load_candidate_distributions(o_.distributions);
    l.predictions = load_predictions(o_.predictions);
    l.bank = join(l.items, l.dists, l.predictions, {.strict = o_.strict});
    for (const auto& f : l.bank.report().findings()) warnings_.push_back("dropped: " + f);
    flush_warnings();
    return l;
  }

  void flush_warnings() {
    for (const auto& w : warnings_) err_ << "warning: " << w << "\n";
    warnings_.clear();
  }

  std::filesystem::path out_dir() const {
    std::filesystem::path dir(o_.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
      throw IoError("cannot create output directory '" + dir.string() + "'");
    }
    return dir;
  }

  std::optional<ParamsByLevel> params_if_given() const {
    if (o_.params.empty()) return std::nullopt;
    return load_params(o_.params);
  }

  // -------------------------------------------------------------------------

  int cmd_validate() {
    std::vector<std::string> findings;
    bool io_failure = false;
    std::vector<Item> items;
    std::vector<CandidateDistribution> dists;
    PredictionSet preds;
    bool all_loaded = true;

    auto attempt = [&](auto&& fn) {
      try {
        fn();
      } catch (const IoError& e) {
        err_ << "error: " << e.what() << "\n";
        io_failure = true;
        all_loaded = false;
      } catch (const ValidationError& e) {
        findings.insert(findings.end(), e.findings().begin(), e.findings().end());
        all_loaded = false;
      } catch (const Error& e) {
        findings.emplace_back(e.what());
        all_loaded = false;
      }
    };
    attempt([&] { items = load_item_bank(o_.items, load_options(), &warnings_); });
    attempt([&] { dists = load_candidate_distributions(o_.distributions); });
    attempt([&] { preds = load_predictions(o_.predictions); });
    if (all_loaded) attempt([&] { (void)join(items, dists, preds, {.strict = true}); });

    flush_warnings();
    for (const auto& f : findings) out_ << "finding: " << f << "\n";
    if (io_failure) return kExitIo;
    if (!findings.empty()) return kExitFailure;
    out_ << "ok: " << items.size() << " items, " << dists.size() << " distributions, "
         << preds.entries.size() << " predictions (" << to_string(preds.variant) << ")\n";
    return kExitOk;
  }

  int cmd_fit() {
    const Loaded l = load_all();
    ParamsByLevel fitted;
    for (const auto& name : select_levels(l.bank, level_filter())) {
      fitted.emplace(name, fit_params(l.bank.level(name), name));
    }
    const std::filesystem::path path =
        o_.params.empty() ? out_dir() / "params.json" : std::filesystem::path(o_.params);
    write_text_file(path, serialize_params(fitted));

    out_ << "level,tau,alpha,target_accuracy,accuracy,target_tcp,tcp,tau_at_boundary\n";
    for (const auto& [name, p] : fitted) {
      const auto& d = p.diagnostics;
      out_ << name << "," << format_double(p.tau) << "," << format_double(p.alpha) << ","
           << format_double(d.target_accuracy) << "," << format_double(d.achieved_accuracy) << ","
           << format_double(d.target_tcp) << "," << format_double(d.achieved_tcp) << ","
           << (d.tau_at_boundary ? "true" : "false") << "\n";
    }
    return kExitOk;
  }

  int cmd_evaluate() {
    const Loaded l = load_all();
    const auto params = params_if_given();
    const ParamsByLevel* pp = params ? &*params : nullptr;
    const auto blocks = evaluate_levels(l.bank, pp, level_filter());
    const auto dir = out_dir();
    write_text_file(dir / "accuracy.csv", accuracy_csv(blocks));
    write_text_file(dir / "calibration.csv", calibration_csv(blocks));
    write_text_file(dir / "cdf_points.csv", cdf_csv(l.bank, pp, level_filter()));
    out_ << calibration_csv(blocks);
    return kExitOk;
  }

  std::vector<JoinedEntry> detection_entries(const JoinedBank& bank) const {
    if (!level_filter()) return bank.all_entries();
    const auto span = bank.level(*level_filter());
    return {span.begin(), span.end()};
  }

  ScoreSource score_source() const {
    return o_.score_source == "reshaped" ? ScoreSource::reshaped : ScoreSource::raw;
  }

  int cmd_detect() {
    const Loaded l = load_all();
    const auto params = params_if_given();
    const auto entries = detection_entries(l.bank);
    const auto records = extract_distractors(entries, score_source(), params ? &*params : nullptr);
    const PRCurve curve = pr_curve(records);
    const auto flagged = flagged_distractors(records, o_.flag_threshold);
    const auto dir = out_dir();
    write_text_file(dir / "pr_points.csv", pr_points_csv(curve));
    write_text_file(dir / "flagged_distractors.csv", flagged_csv(flagged));
    out_ << "scope,average_precision,prevalence,positives,distractors\n";
    out_ << "all," << format_double(curve.average_precision) << "," << format_double(curve.prevalence) << ","
         << curve.positives << "," << curve.total << "\n";
    if (o_.per_level) {
      for (const auto& [name, lv] : per_level_curves(records)) {
        out_ << name << "," << format_double(lv.average_precision) << "," << format_double(lv.prevalence) << ","
             << lv.positives << "," << lv.total << "\n";
      }
    }
    return kExitOk;
  }

  // Levels without any poor distractor are left out.
  static std::map<std::string, PRCurve> per_level_curves(const std::vector<DistractorRecord>& records) {
    std::map<std::string, std::vector<DistractorRecord>> by_level;
    for (const auto& r : records) by_level[r.level].push_back(r);
    std::map<std::string, PRCurve> out;
    for (const auto& [name, rs] : by_level) {
      if (random_baseline(rs) > 0.0) out.emplace(name, pr_curve(rs));
    }
    return out;
  }

  ReadabilityTable build_readability(const std::vector<Item>& items) {
    std::optional<std::map<std::string, ComplexityProbs>> complexity;
    if (!o_.complexity.empty()) complexity = load_complexity_probs(o_.complexity);
    std::optional<WordList> dale, spache;
    if (!o_.dale_list.empty()) dale = WordList::load(o_.dale_list);
    if (!o_.spache_list.empty()) spache = WordList::load(o_.spache_list);
    ReadabilityOptions ro;
    ro.text_unit = o_.text_unit == "context" ? TextUnit::context_only : TextUnit::full_item;
    ro.dale = dale ? &*dale : nullptr;
    ro.spache = spache ? &*spache : nullptr;
    return readability_table(items, complexity ? &*complexity : nullptr, ro);
  }

  int cmd_readability() {
    const auto items = load_item_bank(o_.items, load_options(), &warnings_);
    flush_warnings();
    const auto table = build_readability(items);
    write_text_file(out_dir() / "readability.csv", readability_csv(table));
    out_ << readability_csv(table);
    if (table.skipped_items > 0) err_ << "warning: " << table.skipped_items << " items without scorable text\n";
    return kExitOk;
  }

  int cmd_simulate() {
    SynthConfig c;
    c.seed = o_.seed;
    c.n_items = o_.n_items;
    c.options_per_item = o_.options_per_item;
    c.ability = o_.ability;
    c.distortion = {parse_distortion_kind(o_.distortion), o_.distortion_value};
    c.levels = o_.levels;
    const SyntheticBank bank = o_.poor_rate ? gen_poor_distractors(c, *o_.poor_rate) : gen_bank(c);
    const auto dir = out_dir();
    write_item_bank(bank.items, dir / "items.jsonl");
    write_candidate_distributions(bank.distributions, dir / "distributions.jsonl");
    write_predictions(bank.predictions, dir / "predictions.json");
    out_ << "wrote " << bank.items.size() << " items to " << dir.string() << "\n";
    return kExitOk;
  }

  json input_digest(const char* role, const std::string& path) const {
    return {{"role", role}, {"path", path}, {"sha256", sha256_hex(read_text_file(path))}};
  }

  int cmd_report() {
    const Loaded l = load_all();
    std::optional<ParamsByLevel> params = params_if_given();
    if (!params && o_.fit) params = fit_all_levels(l.bank);
    const ParamsByLevel* pp = params ? &*params : nullptr;
    const auto level = level_filter();
    const auto blocks = evaluate_levels(l.bank, pp, level);
    const auto dir = out_dir();

    json report;
    report["toolkit"] = {{"name", kToolkitName}, {"version", kToolkitVersion}};
    json inputs = json::array({input_digest("items", o_.items), input_digest("distributions", o_.distributions),
                               input_digest("predictions", o_.predictions)});
    if (!o_.params.empty()) inputs.push_back(input_digest("params", o_.params));
    if (!o_.complexity.empty()) inputs.push_back(input_digest("complexity", o_.complexity));
    report["provenance"] = {
        {"inputs", inputs},
        {"config",
         {{"level", o_.level}, {"score_source", o_.score_source}, {"strict", o_.strict},
          {"fit", o_.fit}, {"per_level", o_.per_level}, {"flag_threshold", o_.flag_threshold},
          {"text_unit", o_.text_unit}, {"allowed_levels", o_.allowed_levels},
          {"dale_list", o_.dale_list}, {"spache_list", o_.spache_list}}}};
    report["prediction_variant"] = to_string(l.predictions.variant);
    report["join"] = {{"level_counts", l.bank.report().level_counts}, {"dropped", l.bank.report().findings()}};

    json levels = json::object();
    for (const auto& b : blocks) levels[b.level] = level_block_json(b);
    report["levels"] = levels;

    write_text_file(dir / "accuracy.csv", accuracy_csv(blocks));
    write_text_file(dir / "calibration.csv", calibration_csv(blocks));
    write_text_file(dir / "cdf_points.csv", cdf_csv(l.bank, pp, level));

    json detection = {{"score_source", o_.score_source},
                      {"mode", o_.per_level ? "per_level" : "global"},
                      {"flag_threshold", o_.flag_threshold}};
    const auto entries = detection_entries(l.bank);
    const auto records = extract_distractors(entries, score_source(), pp);
    if (random_baseline(records) > 0.0) {
      const PRCurve curve = pr_curve(records);
      detection["global"] = pr_curve_json(curve);
      detection["random_baseline"] = random_baseline(records);
      write_text_file(dir / "pr_points.csv", pr_points_csv(curve));
      detection["pr_points"] = "pr_points.csv";
      if (o_.per_level) {
        json per = json::object();
        for (const auto& [name, c] : per_level_curves(records)) per[name] = pr_curve_json(c);
        detection["per_level"] = per;
      }
    } else {
      detection["error"] = "undefined recall: no poor distractors";
      write_text_file(dir / "pr_points.csv", "recall,precision\n");
    }
    write_text_file(dir / "flagged_distractors.csv", flagged_csv(flagged_distractors(records, o_.flag_threshold)));
    detection["flagged"] = "flagged_distractors.csv";
    report["detection"] = detection;

    const auto table = build_readability(l.items);
    write_text_file(dir / "readability.csv", readability_csv(table));
    json readability = readability_json(table);
    readability["table"] = "readability.csv";
    report["readability"] = readability;

    report["files"] = {{"accuracy", "accuracy.csv"},       {"calibration", "calibration.csv"},
                       {"readability", "readability.csv"},       {"cdf_points", "cdf_points.csv"},
                       {"pr_points", "pr_points.csv"}, {"flagged_distractors", "flagged_distractors.csv"}};
    write_text_file(dir / "report.json", report.dump(2) + "\n");
    out_ << calibration_csv(blocks);
    return kExitOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  Options o_;
  std::string command_;
  std::vector<std::string> warnings_;
};

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  Runner runner(out, err);
  return runner.run(args);
}

}  // namespace mcq::cli
