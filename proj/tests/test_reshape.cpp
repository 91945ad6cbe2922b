#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mcq/reshape.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace mcq {
namespace {

using testing::entry;

void expect_vector_near(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "index " << i;
}

double sum(const std::vector<double>& v) { return pairwise_sum(v); }

TEST(MassRedistribute, Examples) {
  EXPECT_EQ(mass_redistribute(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 2, 0.0),
            (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
  EXPECT_EQ(mass_redistribute(std::vector<double>{0.5, 0.3, 0.1, 0.1}, 0, 1.0),
            (std::vector<double>{1, 0, 0, 0}));
  expect_vector_near(mass_redistribute(std::vector<double>{0.5, 0.3, 0.1, 0.1}, 1, 0.5), {0.25, 0.65, 0.05, 0.05},
                     1e-15);
}

TEST(MassRedistribute, RejectsAlphaOutsideUnitInterval) {
  const std::vector<double> p{0.5, 0.5};
  EXPECT_THROW(mass_redistribute(p, 0, -0.1), DomainError);
  EXPECT_THROW(mass_redistribute(p, 0, 1.1), DomainError);
  EXPECT_THROW(mass_redistribute(p, 2, 0.5), DomainError);
}

TEST(TemperatureAnneal, Examples) {
  EXPECT_EQ(temperature_anneal(std::vector<double>{0.9, 0.1}, 1.0), (std::vector<double>{0.9, 0.1}));
  expect_vector_near(temperature_anneal(std::vector<double>{0.9, 0.1}, 2.0), {0.75, 0.25}, 1e-15);
  expect_vector_near(temperature_anneal(std::vector<double>{0.7, 0.2, 0.1}, 1e6), {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-5);
}

TEST(TemperatureAnneal, RejectsNonPositiveTau) {
  const std::vector<double> p{0.5, 0.5};
  EXPECT_THROW(temperature_anneal(p, 0.0), DomainError);
  EXPECT_THROW(temperature_anneal(p, -1.0), DomainError);
}

TEST(Reshape, Examples) {
  const std::vector<double> p{0.5, 0.3, 0.1, 0.1};
  EXPECT_EQ(reshape(p, 1, Shape{0.0, 1.0}), p);
  // sqrt([0.25, 0.65, 0.05, 0.05]) renormalized.
  expect_vector_near(reshape(p, 1, Shape{0.5, 2.0}),
                     {0.285153857305002, 0.4597967791028943, 0.1275246817960519, 0.1275246817960519}, 1e-12);
  const auto delta = reshape(floor_probabilities(p), 2, Shape{1.0, 0.37});
  expect_vector_near(delta, {0, 0, 1, 0}, 1e-8);
}

TEST(Statistics, ModeAccuracyAndTcp) {
  const std::vector<JoinedEntry> one{entry({0.1, 0.6, 0.2, 0.1}, {0.1, 0.6, 0.2, 0.1}, 1)};
  EXPECT_EQ(mode_accuracy(one, Source::model), 1.0);
  EXPECT_EQ(true_class_probability(one, Source::model), 0.6);

  const std::vector<JoinedEntry> two{entry({0.5, 0.5}, {0.7, 0.3}, 0), entry({0.5, 0.5}, {0.7, 0.3}, 1)};
  EXPECT_EQ(mode_accuracy(two, Source::model), 0.5);
  // Tie broken toward the lowest index.
  EXPECT_EQ(mode_accuracy(two, Source::candidate), 0.5);

  const std::vector<JoinedEntry> uniform{entry({0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}, 3)};
  EXPECT_EQ(true_class_probability(uniform, Source::candidate), 0.25);

  EXPECT_THROW(mode_accuracy(std::vector<JoinedEntry>{}, Source::model), DomainError);
  EXPECT_THROW(true_class_probability(std::vector<JoinedEntry>{}, Source::model), DomainError);
}

// ---------------------------------------------------------------------------
// Randomized properties

class ReshapeProperties : public ::testing::Test {
 protected:
  std::mt19937_64 rng{20240601};
  std::vector<double> draw(std::size_t k) { return oracle::random_distribution(rng, k); }
  std::size_t options() { return 2 + rng() % 6; }
  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
  double log_tau() { return std::exp(std::uniform_real_distribution<double>(std::log(1e-2), std::log(1e2))(rng)); }
};

TEST_F(ReshapeProperties, EndpointsAreExact) {
  for (int t = 0; t < 1000; ++t) {
    const auto p = draw(options());
    const std::size_t ans = rng() % p.size();
    EXPECT_EQ(mass_redistribute(p, ans, 0.0), p);
    std::vector<double> delta(p.size(), 0.0);
    delta[ans] = 1.0;
    EXPECT_EQ(mass_redistribute(p, ans, 1.0), delta);
  }
}

TEST_F(ReshapeProperties, TcpIsLinearInAlpha) {
  for (int t = 0; t < 1000; ++t) {
    const auto p = draw(options());
    const std::size_t ans = rng() % p.size();
    const double a = unit();
    EXPECT_NEAR(mass_redistribute(p, ans, a)[ans], (1 - a) * p[ans] + a, 1e-12);
  }
}

TEST_F(ReshapeProperties, ArgmaxInvariantUnderTemperature) {
  for (int t = 0; t < 1000; ++t) {
    const auto p = draw(options());
    const double tau = log_tau();
    const auto q = temperature_anneal(p, tau);
    EXPECT_EQ(argmax(q), argmax(p)) << "tau " << tau;
  }
}

TEST_F(ReshapeProperties, ReshapedVectorsAreDistributions) {
  for (int t = 0; t < 1000; ++t) {
    const auto p = draw(options());
    const auto q = reshape(p, rng() % p.size(), Shape{unit(), log_tau()});
    EXPECT_NEAR(sum(q), 1.0, 1e-12);
    for (double v : q) EXPECT_GE(v, 0.0);
  }
}

TEST_F(ReshapeProperties, AccuracyNondecreasingInAlphaAndConstantInTau) {
  for (int t = 0; t < 1000; ++t) {
    std::vector<JoinedEntry> items;
    const std::size_t n = 1 + rng() % 10;
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = draw(options());
      items.push_back(entry(p, p, rng() % p.size()));
    }
    std::vector<double> alphas{unit(), unit(), unit()};
    std::sort(alphas.begin(), alphas.end());
    double prev = -1.0;
    for (double a : alphas) {
      const double acc = mode_accuracy(items, Source::reshaped, {a, 1.0});
      EXPECT_GE(acc, prev);
      EXPECT_EQ(mode_accuracy(items, Source::reshaped, {a, log_tau()}), acc);
      prev = acc;
    }
  }
}

// ---------------------------------------------------------------------------
// fit_alpha

std::vector<JoinedEntry> to_entries(const oracle::Instance& inst) {
  std::vector<JoinedEntry> out;
  for (std::size_t i = 0; i < inst.probs.size(); ++i) out.push_back(entry(inst.probs[i], inst.probs[i], inst.answers[i]));
  return out;
}

TEST(FitAlpha, AlreadyAtTargetGivesZero) {
  const std::vector<JoinedEntry> items{entry({0.2, 0.8}, {0.2, 0.8}, 1), entry({0.6, 0.4}, {0.6, 0.4}, 1)};
  EXPECT_EQ(fit_alpha(items, 0.5), 0.0);
}

TEST(FitAlpha, TargetOneReachesFullAccuracy) {
  std::mt19937_64 rng(3);
  std::vector<JoinedEntry> items;
  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    auto p = oracle::random_distribution(rng, 4);
    const std::size_t ans = rng() % 4;
    const double comp = [&] {
      double m = 0;
      for (std::size_t j = 0; j < 4; ++j)
        if (j != ans) m = std::max(m, p[j]);
      return m;
    }();
    if (comp > p[ans]) worst = std::max(worst, (comp - p[ans]) / (1 + comp - p[ans]));
    items.push_back(entry(p, p, ans));
  }
  const double a = fit_alpha(items, 1.0);
  EXPECT_NEAR(a, worst + kAlphaNudge, 1e-15);
  EXPECT_EQ(mode_accuracy(items, Source::reshaped, {a, 1.0}), 1.0);
}

TEST(FitAlpha, MatchesExhaustiveGrid) {
  std::mt19937_64 rng(99);
  for (int bank = 0; bank < 100; ++bank) {
    oracle::Instance inst;
    const std::size_t n = 1 + rng() % 50;
    for (std::size_t i = 0; i < n; ++i) {
      inst.probs.push_back(oracle::random_distribution(rng, 2 + rng() % 4));
      inst.answers.push_back(rng() % inst.probs.back().size());
    }
    const double target = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto items = to_entries(inst);
    const double fitted = fit_alpha(items, target);
    const auto grid = oracle::grid_fit_alpha(inst, target);
    const double fitted_acc = oracle::accuracy_at(inst, fitted);
    const double fitted_err = std::abs(fitted_acc - target);
    EXPECT_LE(fitted_err, grid.error + 1e-15) << "bank " << bank;
    if (fitted_err == grid.error && oracle::accuracy_at(inst, grid.alpha) == fitted_acc) {
      EXPECT_LE(std::abs(fitted - grid.alpha), 1e-4 + 2 * kAlphaNudge) << "bank " << bank;
    }
  }
}

TEST(FitAlpha, AccuracyModelAgreesWithDirectEvaluation) {
  std::mt19937_64 rng(5);
  oracle::Instance inst;
  for (int i = 0; i < 30; ++i) {
    inst.probs.push_back(oracle::random_distribution(rng, 4));
    inst.answers.push_back(rng() % 4);
  }
  const auto items = to_entries(inst);
  for (int k = 0; k <= 1000; ++k) {
    const double a = k / 1000.0;
    EXPECT_EQ(mode_accuracy(items, Source::reshaped, {a, 1.0}), oracle::accuracy_at(inst, a));
  }
}

// ---------------------------------------------------------------------------
// fit_tau and fit_params

std::vector<JoinedEntry> constructed_level(std::uint64_t seed, std::size_t n, Shape truth) {
  std::mt19937_64 rng(seed);
  std::vector<JoinedEntry> items;
  for (std::size_t i = 0; i < n; ++i) {
    // Tilted toward the answer so tcp responds to tau.
    auto pred = oracle::random_distribution(rng, 4);
    const std::size_t ans = rng() % 4;
    for (std::size_t j = 0; j < pred.size(); ++j) pred[j] = 0.6 * pred[j] + (j == ans ? 0.4 : 0.0);
    items.push_back(entry(reshape(pred, ans, truth), pred, ans));
  }
  return items;
}

TEST(FitTau, IdentityWhenStatisticsAlreadyMatch) {
  const auto items = constructed_level(1, 200, {});
  const auto search = search_tau(items, 0.0, true_class_probability(items, Source::candidate));
  EXPECT_EQ(search.tau, 1.0);
  EXPECT_FALSE(search.at_boundary);
}

TEST(FitTau, RecoversConstructedTemperature) {
  const auto items = constructed_level(2, 300, {0.0, 3.0});
  EXPECT_NEAR(fit_tau(items, 0.0, true_class_probability(items, Source::candidate)), 3.0, 1e-2);
}

TEST(FitTau, OverconfidentModelGetsTauAboveOne) {
  const auto items = constructed_level(3, 300, {0.0, 4.0});
  EXPECT_GT(true_class_probability(items, Source::model), true_class_probability(items, Source::candidate));
  EXPECT_GT(fit_tau(items, 0.0, true_class_probability(items, Source::candidate)), 1.0);
}

TEST(FitTau, UnreachableTargetIsReportedAtBoundary) {
  const std::vector<JoinedEntry> items{entry({0.5, 0.5}, {0.3, 0.7}, 1)};
  // Any tau keeps the answer above 0.5; target 0.2 is out of reach.
  const auto search = search_tau(items, 0.0, 0.2);
  EXPECT_TRUE(search.at_boundary);
  EXPECT_NEAR(search.tau, kTauMax, 1e-9);
}

TEST(FitParams, IdentityBank) {
  const auto items = constructed_level(4, 500, {});
  const auto p = fit_params(items);
  EXPECT_EQ(p.alpha, 0.0);
  EXPECT_EQ(p.tau, 1.0);
  EXPECT_EQ(p.diagnostics.accuracy_residual, 0.0);
  EXPECT_EQ(p.diagnostics.tcp_residual, 0.0);
  EXPECT_EQ(p.level, "B1");
}

TEST(FitParams, ConstructAndRecover) {
  const Shape truth{0.3, 2.0};
  const auto items = constructed_level(5, 400, truth);
  const auto p = fit_params(items);
  const double n = static_cast<double>(items.size());
  const auto& d = p.diagnostics;
  EXPECT_LE(std::abs(d.accuracy_residual), 1.0 / n);
  EXPECT_LE(std::abs(d.tcp_residual), 1e-2);

  const double truth_acc_res = std::abs(mode_accuracy(items, Source::reshaped, truth) - d.target_accuracy);
  const double truth_tcp_res = std::abs(true_class_probability(items, Source::reshaped, truth) - d.target_tcp);
  EXPECT_LE(std::abs(d.accuracy_residual), truth_acc_res);
  EXPECT_LE(std::abs(d.tcp_residual), truth_tcp_res + 1e-12);
}

TEST(FitParams, DiagnosticsReproducibleBitForBit) {
  const auto items = constructed_level(6, 250, {0.1, 0.5});
  const auto p = fit_params(items);
  EXPECT_EQ(p.diagnostics.achieved_accuracy, mode_accuracy(items, Source::reshaped, p.shape()));
  EXPECT_EQ(p.diagnostics.achieved_tcp, true_class_probability(items, Source::reshaped, p.shape()));
}

TEST(FitParams, SerializationRoundTrip) {
  ParamsByLevel params;
  params["B1"] = fit_params(constructed_level(7, 100, {0.05, 3.0}), "B1");
  params["C1"] = fit_params(constructed_level(8, 100, {0.0, 0.7}), "C1");
  const auto back = parse_params(serialize_params(params), "mem");
  ASSERT_EQ(back.size(), 2u);
  for (const auto& [level, p] : params) {
    EXPECT_EQ(back.at(level).alpha, p.alpha);
    EXPECT_EQ(back.at(level).tau, p.tau);
    EXPECT_EQ(back.at(level).diagnostics.achieved_tcp, p.diagnostics.achieved_tcp);
  }
  EXPECT_THROW(parse_params(R"([{"level":"B1","alpha":1.5,"tau":1}])", "mem"), ValidationError);
  EXPECT_THROW(parse_params(R"([{"level":"B1","alpha":0.5,"tau":0}])", "mem"), ValidationError);
}

}  // namespace
}  // namespace mcq
