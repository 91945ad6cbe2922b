#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "mcq/error.hpp"
#include "mcq/item_bank.hpp"
#include "mcq/numeric.hpp"
#include "mcq/reshape.hpp"

namespace mcq {

// Counter-based generator: draw k of stream `seed` is splitmix64(seed + k * G)
// with G = 0x9E3779B97F4A7C15. Only integer arithmetic is involved, so the
// stream is identical on every platform and easy to reproduce elsewhere.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in the open interval (0, 1), 53-bit resolution.
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  // Approximately standard normal (Irwin-Hall, 12 uniforms).
  double standard_normal() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform();
    return s - 6.0;
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

// How model predictions are derived from the candidate distributions.
//   temperature:     predictions = anneal(candidates, 1 / value), so annealing
//                    the predictions with tau = value recovers the candidates
//   redistribution:  candidates = mass_redistribute(predictions, answer, value)
//   noise:           predictions = normalize(candidates * exp(value * z))
struct Distortion {
  enum class Kind { none, temperature, redistribution, noise };
  Kind kind = Kind::none;
  double value = 0.0;
};

inline Distortion::Kind parse_distortion_kind(std::string_view s) {
  if (s == "none") return Distortion::Kind::none;
  if (s == "temperature") return Distortion::Kind::temperature;
  if (s == "redistribution") return Distortion::Kind::redistribution;
  if (s == "noise") return Distortion::Kind::noise;
  throw DomainError("unknown distortion '" + std::string(s) + "'");
}

inline std::string to_string(Distortion::Kind k) {
  switch (k) {
    case Distortion::Kind::none: return "none";
    case Distortion::Kind::temperature: return "temperature";
    case Distortion::Kind::redistribution: return "redistribution";
    case Distortion::Kind::noise: return "noise";
  }
  return "none";
}

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_items = 100;
  std::size_t options_per_item = 4;
  double ability = 0.3;  // mass tilted toward the keyed answer
  Distortion distortion;
  std::vector<std::string> levels = {"B1"};  // assigned round-robin
};

struct SyntheticBank {
  std::vector<Item> items;
  std::vector<CandidateDistribution> distributions;
  PredictionSet predictions;

  JoinedBank joined() const { return join(items, distributions, predictions, {.strict = true}); }
};

namespace detail {

inline constexpr std::array<std::string_view, 40> kSynthVocabulary = {
    "the",       "river",     "village",   "teacher",     "travelled", "because",  "museum",
    "remember",  "quickly",   "garden",    "festival",    "decided",   "across",   "beautiful",
    "city",      "morning",   "library",   "interesting", "children",  "photograph", "walked",
    "mountain",  "yesterday", "important", "family",      "opened",    "window",   "explained",
    "journey",   "small",     "carefully", "market",      "evening",   "student",  "finally",
    "building",  "weather",   "arrived",   "discovery",   "island"};

inline std::string synth_sentence(CounterRng& rng, std::size_t min_words, std::size_t max_words,
                                  char terminator) {
  const std::size_t n = min_words + rng.below(max_words - min_words + 1);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    std::string w(kSynthVocabulary[rng.below(kSynthVocabulary.size())]);
    if (i == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    if (i > 0) s += ' ';
    s += w;
  }
  if (terminator != '\0') s += terminator;
  return s;
}

inline std::string padded(std::string_view prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05zu", i);
  return std::string(prefix) + buf;
}

inline void check_config(const SynthConfig& c) {
  if (c.n_items == 0) throw DomainError("n_items must be positive");
  if (c.options_per_item < 2) throw DomainError("options_per_item must be at least 2");
  if (!(c.ability >= 0.0 && c.ability <= 1.0)) throw DomainError("ability outside [0, 1]");
  if (c.levels.empty()) throw DomainError("at least one level is required");
  const double v = c.distortion.value;
  switch (c.distortion.kind) {
    case Distortion::Kind::temperature:
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("temperature distortion must be positive");
      break;
    case Distortion::Kind::redistribution:
      if (!(v >= 0.0 && v < 1.0)) throw DomainError("redistribution distortion must be in [0, 1)");
      break;
    case Distortion::Kind::noise:
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("noise distortion must be non-negative");
      break;
    case Distortion::Kind::none:
      break;
  }
}

inline Item synth_item(CounterRng& rng, const SynthConfig& c, std::size_t i) {
  Item item;
  item.item_id = padded("item-", i);
  item.context_id = padded("ctx-", i / 5);
  item.level = c.levels[i % c.levels.size()];
  const std::size_t n_sentences = 3 + rng.below(3);
  for (std::size_t s = 0; s < n_sentences; ++s) {
    if (s > 0) item.context += ' ';
    item.context += synth_sentence(rng, 5, 12, '.');
  }
  item.question = synth_sentence(rng, 4, 8, '?');
  for (std::size_t k = 0; k < c.options_per_item; ++k) {
    item.options.push_back(synth_sentence(rng, 2, 5, '\0'));
  }
  item.answer_index = static_cast<std::size_t>(rng.below(c.options_per_item));
  item.candidate_count = static_cast<std::int64_t>(100 + rng.below(400));
  return item;
}

// Normalized uniform weights, bounded away from zero.
inline std::vector<double> dirichlet_style(CounterRng& rng, std::size_t k) {
  std::vector<double> w(k);
  for (auto& v : w) v = 0.05 + rng.uniform();
  return normalize(w);
}

}  // namespace detail

// Seeded bank with known relationship between candidates and predictions.
inline SyntheticBank gen_bank(const SynthConfig& config) {
  detail::check_config(config);
  CounterRng rng(config.seed);
  SyntheticBank bank;
  bank.predictions.variant = Variant::QOC;
  const auto& d = config.distortion;
  for (std::size_t i = 0; i < config.n_items; ++i) {
    Item item = detail::synth_item(rng, config, i);
    const auto base = detail::dirichlet_style(rng, config.options_per_item);
    std::vector<double> candidate = mass_redistribute(base, item.answer_index, config.ability);
    std::vector<double> prediction = candidate;
    switch (d.kind) {
      case Distortion::Kind::none:
        break;
      case Distortion::Kind::temperature:
        prediction = temperature_anneal(candidate, 1.0 / d.value);
        break;
      case Distortion::Kind::redistribution:
        candidate = mass_redistribute(prediction, item.answer_index, d.value);
        break;
      case Distortion::Kind::noise:
        for (auto& p : prediction) p *= std::exp(d.value * rng.standard_normal());
        prediction = normalize(prediction);
        break;
    }
    bank.distributions.push_back({item.item_id, normalize(candidate)});
    bank.predictions.entries.emplace(item.item_id, floor_probabilities(prediction));
    bank.items.push_back(std::move(item));
  }
  return bank;
}

// Bank whose share of poor distractors (candidate fraction < 0.10) is exactly
// round(poor_rate * total distractors). Poor distractors get fractions in
// [0.005, 0.095), the others at least 0.12, the answer the remainder.
// `ability` is not used here. Predictions are the distorted candidates; a
// redistribution distortion moves prediction mass onto the answer.
inline SyntheticBank gen_poor_distractors(const SynthConfig& config, double poor_rate) {
  detail::check_config(config);
  if (!(poor_rate >= 0.0 && poor_rate <= 1.0)) throw DomainError("poor_rate outside [0, 1]");
  const std::size_t k = config.options_per_item;
  const std::size_t total = config.n_items * (k - 1);
  const auto n_poor = static_cast<std::size_t>(poor_rate * static_cast<double>(total) + 0.5);

  CounterRng rng(config.seed);
  SyntheticBank bank;
  for (std::size_t i = 0; i < config.n_items; ++i) bank.items.push_back(detail::synth_item(rng, config, i));

  // Partial Fisher-Yates over distractor slots.
  std::vector<std::size_t> slots(total);
  for (std::size_t s = 0; s < total; ++s) slots[s] = s;
  for (std::size_t s = 0; s < n_poor; ++s) {
    const std::size_t j = s + static_cast<std::size_t>(rng.below(total - s));
    std::swap(slots[s], slots[j]);
  }
  std::vector<bool> poor(total, false);
  for (std::size_t s = 0; s < n_poor; ++s) poor[slots[s]] = true;

  constexpr double kNonPoorMin = 0.12;
  constexpr double kAnswerMin = 0.05;
  const auto& d = config.distortion;
  for (std::size_t i = 0; i < config.n_items; ++i) {
    const Item& item = bank.items[i];
    std::vector<double> frac(k, 0.0);
    double poor_mass = 0.0;
    std::size_t n_nonpoor = 0;
    std::size_t slot = i * (k - 1);
    std::vector<std::size_t> nonpoor_options;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == item.answer_index) continue;
      if (poor[slot++]) {
        frac[j] = 0.005 + 0.09 * rng.uniform();
        poor_mass += frac[j];
      } else {
        frac[j] = kNonPoorMin + 0.18 * rng.uniform();
        nonpoor_options.push_back(j);
        ++n_nonpoor;
      }
    }
    const double floor_mass = poor_mass + kNonPoorMin * static_cast<double>(n_nonpoor);
    if (floor_mass + kAnswerMin > 1.0) {
      throw DomainError("poor_rate " + format_double(poor_rate) + " is infeasible with " +
                        std::to_string(k) + " options per item");
    }
    double excess = 0.0;
    for (auto j : nonpoor_options) excess += frac[j] - kNonPoorMin;
    const double room = 1.0 - kAnswerMin - floor_mass;
    if (excess > room) {
      for (auto j : nonpoor_options) frac[j] = kNonPoorMin + (frac[j] - kNonPoorMin) * (room / excess);
    }
    double used = 0.0;
    for (double f : frac) used += f;
    frac[item.answer_index] = 1.0 - used;
    const auto candidate = normalize(frac);

    std::vector<double> prediction = candidate;
    switch (d.kind) {
      case Distortion::Kind::none:
        break;
      case Distortion::Kind::temperature:
        prediction = temperature_anneal(candidate, 1.0 / d.value);
        break;
      case Distortion::Kind::redistribution:
        prediction = mass_redistribute(candidate, item.answer_index, d.value);
        break;
      case Distortion::Kind::noise:
        for (auto& p : prediction) p *= std::exp(d.value * rng.standard_normal());
        prediction = normalize(prediction);
        break;
    }
    bank.distributions.push_back({item.item_id, candidate});
    bank.predictions.entries.emplace(item.item_id, floor_probabilities(prediction));
  }
  return bank;
}

}  // namespace mcq
