#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mcq/error.hpp"
#include "mcq/item_bank.hpp"
#include "mcq/numeric.hpp"

namespace mcq {

// Two-parameter reshaping of model probabilities: redistribute a fraction
// `alpha` of the mass onto the keyed answer, then anneal with temperature
// `tau`. (0, 1) is the identity.
struct Shape {
  double alpha = 0.0;
  double tau = 1.0;
};

struct FitDiagnostics {
  double target_accuracy = 0.0;
  double target_tcp = 0.0;
  double achieved_accuracy = 0.0;
  double achieved_tcp = 0.0;
  double accuracy_residual = 0.0;  // achieved - target
  double tcp_residual = 0.0;       // achieved - target
  bool tau_at_boundary = false;
};

struct ReshapeParams {
  std::string level;
  double alpha = 0.0;
  double tau = 1.0;
  FitDiagnostics diagnostics;

  Shape shape() const noexcept { return {alpha, tau}; }
};

using ParamsByLevel = std::map<std::string, ReshapeParams>;

struct LevelStats {
  double mode_accuracy = 0.0;
  double true_class_prob = 0.0;
  std::size_t n_items = 0;
};

// Which distribution of a joined entry a statistic is computed on.
enum class Source { model, candidate, reshaped };

inline constexpr double kTauMin = 1e-2;
inline constexpr double kTauMax = 1e2;
inline constexpr std::size_t kTauGridPoints = 1000;

// Added to the exact overtake point so the answer strictly beats the
// competitor after redistribution.
inline constexpr double kAlphaNudge = 1e-9;

// ---------------------------------------------------------------------------
// Transforms

inline std::vector<double> mass_redistribute(std::span<const double> p, std::size_t answer_index,
                                             double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError("alpha " + format_double(alpha) + " outside [0, 1]");
  }
  if (answer_index >= p.size()) throw DomainError("answer index out of range");
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = (1.0 - alpha) * p[i];
  out[answer_index] += alpha;
  return out;
}

namespace detail {

// Writes the annealed distribution of p into out (same size). Zero entries
// stay zero; everything is computed relative to the largest entry so that
// small tau does not overflow.
inline void anneal_into(std::span<const double> p, double tau, std::span<double> out) {
  if (tau == 1.0) {
    std::copy(p.begin(), p.end(), out.begin());
    return;
  }
  const double log_max = std::log(p[argmax(p)]);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = p[i] > 0.0 ? std::exp((std::log(p[i]) - log_max) / tau) : 0.0;
    sum += out[i];
  }
  for (double& v : out) v /= sum;
}

inline void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw DomainError("tau " + format_double(tau) + " must be positive and finite");
  }
}

}  // namespace detail

// Componentwise p^(1/tau), renormalized. tau > 1 flattens, tau < 1 sharpens;
// the argmax set is unchanged for every tau > 0.
inline std::vector<double> temperature_anneal(std::span<const double> p, double tau) {
  detail::check_tau(tau);
  if (p.empty()) throw DomainError("cannot anneal an empty vector");
  bool any_positive = false;
  for (double v : p) {
    if (!(v >= 0.0)) throw DomainError("negative probability in annealing input");
    any_positive = any_positive || v > 0.0;
  }
  if (!any_positive) throw DomainError("annealing input has no positive entry");
  std::vector<double> out(p.size());
  detail::anneal_into(p, tau, out);
  return out;
}

// Redistribute first, then anneal the redistributed distribution.
inline std::vector<double> reshape(std::span<const double> p, std::size_t answer_index,
                                   const Shape& shape) {
  return temperature_anneal(mass_redistribute(p, answer_index, shape.alpha), shape.tau);
}

inline std::vector<double> reshape(std::span<const double> p, std::size_t answer_index,
                                   const ReshapeParams& params) {
  return reshape(p, answer_index, params.shape());
}

inline std::vector<double> distribution_of(const JoinedEntry& e, Source source, const Shape& shape = {}) {
  switch (source) {
    case Source::model:
      return e.model;
    case Source::candidate:
      return e.candidate;
    case Source::reshaped:
      return reshape(e.model, e.item.answer_index, shape);
  }
  return e.model;
}

// ---------------------------------------------------------------------------
// Summary statistics

// Fraction of items whose most probable option is the keyed answer.
inline double mode_accuracy(std::span<const JoinedEntry> entries, Source source,
                            const Shape& shape = {}) {
  if (entries.empty()) throw DomainError("mode accuracy of an empty item list");
  std::size_t correct = 0;
  for (const auto& e : entries) {
    if (argmax(distribution_of(e, source, shape)) == e.item.answer_index) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(entries.size());
}

// Mean probability mass on the keyed answer.
inline double true_class_probability(std::span<const JoinedEntry> entries, Source source,
                                     const Shape& shape = {}) {
  if (entries.empty()) throw DomainError("true class probability of an empty item list");
  std::vector<double> mass(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    mass[i] = distribution_of(entries[i], source, shape)[entries[i].item.answer_index];
  }
  return mean(mass);
}

inline LevelStats level_stats(std::span<const JoinedEntry> entries, Source source,
                              const Shape& shape = {}) {
  return {mode_accuracy(entries, source, shape), true_class_probability(entries, source, shape),
          entries.size()};
}

// ---------------------------------------------------------------------------
// Fitting

namespace detail {

// Smallest alpha at which the item becomes correct, for an item that is
// wrong at alpha = 0. Answer a beats competitor m once
// (1 - alpha) m < (1 - alpha) p_a + alpha, i.e. alpha > (m - p_a) / (1 + m - p_a).
inline double overtake_alpha(std::span<const double> p, std::size_t answer) {
  double competitor = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j != answer) competitor = std::max(competitor, p[j]);
  }
  const double gap = competitor - p[answer];
  const double critical = gap / (1.0 + gap);
  return std::min(1.0, std::max(0.0, critical) + kAlphaNudge);
}

// Tcp of the reshaped model distributions, reusing one scratch buffer.
class ReshapedTcp {
 public:
  ReshapedTcp(std::span<const JoinedEntry> entries, double alpha) : mass_(entries.size()) {
    redistributed_.reserve(entries.size());
    for (const auto& e : entries) {
      redistributed_.push_back(mass_redistribute(e.model, e.item.answer_index, alpha));
      answers_.push_back(e.item.answer_index);
    }
  }

  double operator()(double tau) {
    for (std::size_t i = 0; i < redistributed_.size(); ++i) {
      scratch_.resize(redistributed_[i].size());
      anneal_into(redistributed_[i], tau, scratch_);
      mass_[i] = scratch_[answers_[i]];
    }
    return mean(mass_);
  }

 private:
  std::vector<std::vector<double>> redistributed_;
  std::vector<std::size_t> answers_;
  std::vector<double> scratch_;
  std::vector<double> mass_;
};

}  // namespace detail

// Smallest alpha in [0, 1] whose reshaped mode accuracy is closest to the
// target. Accuracy does not depend on tau and is a nondecreasing step
// function of alpha, so only the per-item overtake points need checking.
inline double fit_alpha(std::span<const JoinedEntry> entries, double target_accuracy) {
  if (entries.empty()) throw DomainError("cannot fit alpha on an empty item list");
  if (!(target_accuracy >= 0.0 && target_accuracy <= 1.0)) {
    throw DomainError("target accuracy outside [0, 1]");
  }
  std::size_t correct_at_zero = 0;
  std::vector<double> breakpoints;
  for (const auto& e : entries) {
    if (argmax(e.model) == e.item.answer_index) {
      ++correct_at_zero;
    } else {
      breakpoints.push_back(detail::overtake_alpha(e.model, e.item.answer_index));
    }
  }
  std::sort(breakpoints.begin(), breakpoints.end());

  const auto n = static_cast<double>(entries.size());
  double best_alpha = 0.0;
  double best_err = std::abs(static_cast<double>(correct_at_zero) / n - target_accuracy);
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    // Only the last of a run of equal breakpoints gives the accuracy there.
    if (i + 1 < breakpoints.size() && breakpoints[i + 1] == breakpoints[i]) continue;
    const double acc = static_cast<double>(correct_at_zero + i + 1) / n;
    const double err = std::abs(acc - target_accuracy);
    if (err < best_err) {
      best_err = err;
      best_alpha = breakpoints[i];
    }
  }
  return best_alpha;
}

struct TauSearch {
  double tau = 1.0;
  double residual = 0.0;  // |tcp(tau) - target|
  bool at_boundary = false;
};

// Dense log-spaced grid over [1e-2, 1e2], then golden-section refinement of
// |tcp - target| inside the bracket around the best grid point. tau = 1 is
// preferred whenever it is as good as the search result.
inline TauSearch search_tau(std::span<const JoinedEntry> entries, double alpha, double target_tcp) {
  if (entries.empty()) throw DomainError("cannot fit tau on an empty item list");
  if (!(target_tcp >= 0.0 && target_tcp <= 1.0)) throw DomainError("target tcp outside [0, 1]");
  detail::ReshapedTcp tcp(entries, alpha);
  auto objective = [&](double log_tau) { return std::abs(tcp(std::exp(log_tau)) - target_tcp); };

  const double lo = std::log(kTauMin);
  const double hi = std::log(kTauMax);
  const double step = (hi - lo) / static_cast<double>(kTauGridPoints - 1);
  auto grid = [&](std::size_t i) { return i + 1 == kTauGridPoints ? hi : lo + step * static_cast<double>(i); };

  std::size_t best_i = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kTauGridPoints; ++i) {
    const double err = objective(grid(i));
    if (err < best_err) {
      best_err = err;
      best_i = i;
    }
  }
  double best_u = grid(best_i);

  double a = grid(best_i == 0 ? 0 : best_i - 1);
  double b = grid(std::min(best_i + 1, kTauGridPoints - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  for (int iter = 0; iter < 200 && (b - a) > 1e-13; ++iter) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  const double golden_u = fc <= fd ? c : d;
  const double golden_err = std::min(fc, fd);
  if (golden_err < best_err) {
    best_err = golden_err;
    best_u = golden_u;
  }

  TauSearch result{std::exp(best_u), best_err, false};
  const double identity_err = objective(0.0);
  if (identity_err <= best_err + 1e-12) {
    result = {1.0, identity_err, false};
  }
  result.at_boundary = best_u <= lo + step / 2 || best_u >= hi - step / 2;
  if (result.tau == 1.0) result.at_boundary = false;
  return result;
}

inline double fit_tau(std::span<const JoinedEntry> entries, double alpha, double target_tcp) {
  return search_tau(entries, alpha, target_tcp).tau;
}

// Fits (alpha, tau) for one test level against that level's own candidate
// statistics: alpha first from accuracy (which tau cannot change), then tau
// from the true class probability.
inline ReshapeParams fit_params(std::span<const JoinedEntry> entries, std::string level = {}) {
  if (entries.empty()) throw DomainError("cannot fit parameters on an empty level");
  if (level.empty()) level = entries.front().item.level;
  ReshapeParams params;
  params.level = std::move(level);
  auto& diag = params.diagnostics;
  diag.target_accuracy = mode_accuracy(entries, Source::candidate);
  diag.target_tcp = true_class_probability(entries, Source::candidate);

  params.alpha = fit_alpha(entries, diag.target_accuracy);
  const TauSearch ts = search_tau(entries, params.alpha, diag.target_tcp);
  params.tau = ts.tau;
  diag.tau_at_boundary = ts.at_boundary;

  diag.achieved_accuracy = mode_accuracy(entries, Source::reshaped, params.shape());
  diag.achieved_tcp = true_class_probability(entries, Source::reshaped, params.shape());
  diag.accuracy_residual = diag.achieved_accuracy - diag.target_accuracy;
  diag.tcp_residual = diag.achieved_tcp - diag.target_tcp;
  return params;
}

inline ParamsByLevel fit_all_levels(const JoinedBank& bank) {
  ParamsByLevel out;
  for (const auto& [name, entries] : bank.levels()) out.emplace(name, fit_params(entries, name));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline json params_to_json(const ReshapeParams& p) {
  const auto& d = p.diagnostics;
  return {{"level", p.level},
          {"alpha", p.alpha},
          {"tau", p.tau},
          {"diagnostics",
           {{"target_accuracy", d.target_accuracy},
            {"target_tcp", d.target_tcp},
            {"achieved_accuracy", d.achieved_accuracy},
            {"achieved_tcp", d.achieved_tcp},
            {"accuracy_residual", d.accuracy_residual},
            {"tcp_residual", d.tcp_residual},
            {"tau_at_boundary", d.tau_at_boundary}}}};
}

inline std::string serialize_params(const ParamsByLevel& params) {
  json arr = json::array();
  for (const auto& [_, p] : params) arr.push_back(params_to_json(p));
  return arr.dump(2) + "\n";
}

inline ParamsByLevel parse_params(std::string_view text, std::string_view source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(source) + ": " + e.what());
  }
  if (doc.is_object()) doc = json::array({doc});
  if (!doc.is_array()) throw ParseError(std::string(source) + ": expected an array of parameter records");
  ParamsByLevel out;
  std::vector<std::string> findings;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const detail::Record rec{std::string(source) + ":record " + std::to_string(i + 1), doc[i]};
    ReshapeParams p;
    p.level = detail::require_string(rec, "level");
    const json& alpha = detail::require(rec, "alpha");
    const json& tau = detail::require(rec, "tau");
    if (!alpha.is_number() || !tau.is_number()) throw ParseError(rec.locator + ": alpha and tau must be numbers");
    p.alpha = alpha.get<double>();
    p.tau = tau.get<double>();
    if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) findings.push_back(rec.locator + ": alpha outside [0, 1]");
    if (!(p.tau > 0.0) || !std::isfinite(p.tau)) findings.push_back(rec.locator + ": tau must be positive");
    if (auto it = doc[i].find("diagnostics"); it != doc[i].end() && it->is_object()) {
      auto& d = p.diagnostics;
      d.target_accuracy = it->value("target_accuracy", 0.0);
      d.target_tcp = it->value("target_tcp", 0.0);
      d.achieved_accuracy = it->value("achieved_accuracy", 0.0);
      d.achieved_tcp = it->value("achieved_tcp", 0.0);
      d.accuracy_residual = it->value("accuracy_residual", 0.0);
      d.tcp_residual = it->value("tcp_residual", 0.0);
      d.tau_at_boundary = it->value("tau_at_boundary", false);
    }
    if (!out.emplace(p.level, p).second) findings.push_back(rec.locator + ": duplicate level '" + p.level + "'");
  }
  if (!findings.empty()) throw ValidationError(std::move(findings));
  return out;
}

inline ParamsByLevel load_params(const std::filesystem::path& path) {
  return parse_params(read_text_file(path), path.string());
}

}  // namespace mcq
