#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mcq/error.hpp"

namespace mcq {

// Probabilities below this are raised to it before any logarithm is taken.
inline constexpr double kProbabilityFloor = 1e-10;

// Tolerance for accepting a probability vector as normalized on load.
inline constexpr double kUnitSumTolerance = 1e-6;

// Pairwise (cascade) summation. The recursion splits at fixed midpoints, so
// the result depends only on the input order and never on threading.
inline double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 8;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

inline double mean(std::span<const double> values) {
  if (values.empty()) throw DomainError("mean of an empty sequence");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

// Sample (n-1) standard deviation; 0 for a single value.
inline double sample_stddev(std::span<const double> values) {
  if (values.empty()) throw DomainError("standard deviation of an empty sequence");
  if (values.size() == 1) return 0.0;
  const double m = mean(values);
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(),
                 [m](double v) { return (v - m) * (v - m); });
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(values.size() - 1));
}

// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> p) {
  if (p.empty()) throw DomainError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return best;
}

// Divides by the sum. Throws if the sum is not positive.
inline std::vector<double> normalize(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) s += v;
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("cannot normalize a vector with non-positive sum");
  std::vector<double> out(p.begin(), p.end());
  for (double& v : out) v /= s;
  return out;
}

// Raises every entry to at least `floor` and renormalizes.
inline std::vector<double> floor_probabilities(std::span<const double> p,
                                               double floor = kProbabilityFloor) {
  std::vector<double> out(p.begin(), p.end());
  for (double& v : out) v = std::max(v, floor);
  return normalize(out);
}

// Shortest decimal representation that round-trips. Locale independent.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

}  // namespace mcq
