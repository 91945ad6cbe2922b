#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mcq/error.hpp"
#include "mcq/item_bank.hpp"
#include "mcq/numeric.hpp"
#include "mcq/reshape.hpp"

namespace mcq {

// Distances between candidate distributions (p) and model distributions (q).
// KL uses the natural log and treats 0 * log(0 / q) as 0.

namespace detail {
inline void check_lengths(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw DomainError("distribution length mismatch: " + std::to_string(p.size()) + " vs " +
                      std::to_string(q.size()));
  }
}
}  // namespace detail

inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  detail::check_lengths(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (!(q[i] > 0.0)) throw DomainError("KL divergence undefined: q is zero where p is positive");
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, sum);
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  detail::check_lengths(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return std::min(1.0, 0.5 * sum);
}

inline double hellinger(std::span<const double> p, std::span<const double> q) {
  detail::check_lengths(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    sum += d * d;
  }
  return std::min(1.0, std::sqrt(0.5 * sum));
}

struct DivergenceRow {
  std::string level;
  double kl = 0.0;
  double hellinger = 0.0;
  double total_variation = 0.0;
  std::size_t n_items = 0;
};

// Unweighted per-item mean of each divergence between the candidate
// distribution and the chosen model-side distribution.
inline DivergenceRow aggregate_divergences(std::span<const JoinedEntry> entries, Source source,
                                           const Shape& shape = {}, std::string level = {}) {
  if (entries.empty()) throw DomainError("cannot aggregate divergences over an empty item list");
  std::vector<double> kl(entries.size()), h(entries.size()), tv(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto q = distribution_of(entries[i], source, shape);
    const auto& p = entries[i].candidate;
    kl[i] = kl_divergence(p, q);
    h[i] = hellinger(p, q);
    tv[i] = total_variation(p, q);
  }
  if (level.empty()) level = entries.front().item.level;
  return {std::move(level), mean(kl), mean(h), mean(tv), entries.size()};
}

struct CdfPoint {
  double threshold = 0.0;
  double fraction = 0.0;  // fraction of values <= threshold
  bool operator==(const CdfPoint&) const = default;
};

// Right-continuous step CDF; one point per distinct value.
inline std::vector<CdfPoint> empirical_cdf(std::span<const double> values) {
  if (values.empty()) throw DomainError("empirical CDF of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out;
  const auto n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    out.push_back({sorted[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

// Every option probability of every item, pooled, for CDF plots.
inline std::vector<double> pooled_probabilities(std::span<const JoinedEntry> entries, Source source,
                                                const Shape& shape = {}) {
  std::vector<double> out;
  for (const auto& e : entries) {
    const auto p = distribution_of(e, source, shape);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

}  // namespace mcq
