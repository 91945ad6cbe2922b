#pragma once

#include <map>
#include <set>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcq/distractor.hpp"
#include "mcq/divergence.hpp"
#include "mcq/item_bank.hpp"
#include "mcq/readability.hpp"
#include "mcq/reshape.hpp"

namespace mcq {

inline constexpr const char* kToolkitName = "mcq-eval";
inline constexpr const char* kToolkitVersion = "0.1.0";

// Accuracy / tcp / divergences for one level, raw and (when parameters are
// known) reshaped.
struct LevelBlock {
  std::string level;
  std::size_t n_items = 0;
  LevelStats candidate;
  LevelStats model;
  DivergenceRow raw;
  std::optional<ReshapeParams> params;
  std::optional<LevelStats> reshaped_stats;
  std::optional<DivergenceRow> reshaped;
};

inline LevelBlock evaluate_level(std::span<const JoinedEntry> entries, const std::string& level,
                                 const ReshapeParams* params = nullptr) {
  LevelBlock b;
  b.level = level;
  b.n_items = entries.size();
  b.candidate = level_stats(entries, Source::candidate);
  b.model = level_stats(entries, Source::model);
  b.raw = aggregate_divergences(entries, Source::model, {}, level);
  if (params != nullptr) {
    b.params = *params;
    b.reshaped_stats = level_stats(entries, Source::reshaped, params->shape());
    b.reshaped = aggregate_divergences(entries, Source::reshaped, params->shape(), level);
  }
  return b;
}

// Levels to evaluate: all of them, or only `only` (which must exist).
inline std::vector<std::string> select_levels(const JoinedBank& bank,
                                              const std::optional<std::string>& only) {
  if (!only) return bank.level_names();
  (void)bank.level(*only);  // throws with the available levels
  return {*only};
}

inline std::vector<LevelBlock> evaluate_levels(const JoinedBank& bank, const ParamsByLevel* params,
                                               const std::optional<std::string>& only = {}) {
  std::vector<LevelBlock> blocks;
  for (const auto& name : select_levels(bank, only)) {
    const ReshapeParams* p = nullptr;
    if (params != nullptr) {
      auto it = params->find(name);
      if (it == params->end()) throw DomainError("no fitted parameters for level '" + name + "'");
      p = &it->second;
    }
    blocks.push_back(evaluate_level(bank.level(name), name, p));
  }
  return blocks;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}
}  // namespace detail

inline std::string accuracy_csv(std::span<const LevelBlock> blocks) {
  std::string out = "level,n_items,candidate_accuracy,model_accuracy,candidate_tcp,model_tcp\n";
  for (const auto& b : blocks) {
    out += detail::csv_field(b.level) + "," + std::to_string(b.n_items) + "," +
           format_double(b.candidate.mode_accuracy) + "," + format_double(b.model.mode_accuracy) + "," +
           format_double(b.candidate.true_class_prob) + "," + format_double(b.model.true_class_prob) + "\n";
  }
  return out;
}

inline std::string calibration_csv(std::span<const LevelBlock> blocks) {
  std::string out = "level,setting,tau,alpha,accuracy,tcp,kl,hellinger,total_variation\n";
  auto row = [&](const std::string& level, const char* setting, double tau, double alpha,
                 const LevelStats& s, const DivergenceRow& d) {
    out += detail::csv_field(level) + "," + setting + "," + format_double(tau) + "," + format_double(alpha) +
           "," + format_double(s.mode_accuracy) + "," + format_double(s.true_class_prob) + "," +
           format_double(d.kl) + "," + format_double(d.hellinger) + "," + format_double(d.total_variation) +
           "\n";
  };
  for (const auto& b : blocks) {
    row(b.level, "raw", 1.0, 0.0, b.model, b.raw);
    if (b.params) row(b.level, "reshaped", b.params->tau, b.params->alpha, *b.reshaped_stats, *b.reshaped);
  }
  return out;
}

// Pooled option-probability CDFs per level and source.
inline std::string cdf_csv(const JoinedBank& bank, const ParamsByLevel* params,
                           const std::optional<std::string>& only = {}) {
  std::string out = "level,source,threshold,cumulative_fraction\n";
  for (const auto& name : select_levels(bank, only)) {
    const auto entries = bank.level(name);
    auto emit = [&](const char* source, const std::vector<double>& values) {
      for (const auto& pt : empirical_cdf(values)) {
        out += detail::csv_field(name) + "," + source + "," + format_double(pt.threshold) + "," +
               format_double(pt.fraction) + "\n";
      }
    };
    emit("candidate", pooled_probabilities(entries, Source::candidate));
    emit("model", pooled_probabilities(entries, Source::model));
    if (params != nullptr) {
      auto it = params->find(name);
      if (it != params->end()) emit("reshaped", pooled_probabilities(entries, Source::reshaped, it->second.shape()));
    }
  }
  return out;
}

inline std::string pr_points_csv(const PRCurve& curve) {
  std::string out = "recall,precision\n";
  for (const auto& p : curve.points) out += format_double(p.recall) + "," + format_double(p.precision) + "\n";
  return out;
}

inline std::string flagged_csv(std::span<const DistractorRecord> flagged) {
  std::string out = "item_id,option_index,score,candidate_fraction\n";
  for (const auto& r : flagged) {
    out += detail::csv_field(r.item_id) + "," + std::to_string(r.option_index) + "," +
           format_double(r.model_probability) + "," + format_double(r.candidate_fraction) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Readability table: rows are metrics, columns are levels.

struct ReadabilityTable {
  std::vector<std::string> metrics;  // row order
  std::vector<std::string> levels;   // column order
  std::map<std::string, std::map<std::string, SummaryCell>> cells;  // metric -> level -> cell
  std::size_t skipped_items = 0;  // no words or no sentences
};

struct ReadabilityOptions {
  TextUnit text_unit = TextUnit::full_item;
  const WordList* dale = nullptr;    // defaults to the embedded subset
  const WordList* spache = nullptr;  // defaults to the embedded subset
};

inline ReadabilityTable readability_table(std::span<const Item> items,
                                          const std::map<std::string, ComplexityProbs>* complexity,
                                          const ReadabilityOptions& options = {}) {
  const WordList& dale = options.dale ? *options.dale : default_dale_chall_list();
  const WordList& spache = options.spache ? *options.spache : default_spache_list();

  std::map<std::string, std::map<std::string, std::vector<double>>> scores;  // metric -> level -> values
  ReadabilityTable table;
  if (complexity != nullptr) table.metrics.push_back("Complexity");
  for (const auto& [name, _] : ReadabilityIndices{}.named()) table.metrics.push_back(name);

  std::set<std::string> levels;
  for (const auto& item : items) {
    levels.insert(item.level);
    if (complexity != nullptr) {
      if (auto it = complexity->find(item.item_id); it != complexity->end()) {
        scores["Complexity"][item.level].push_back(complexity_score(it->second));
      }
    }
    const TextStats stats = text_stats(item_text(item, options.text_unit), dale, spache);
    if (stats.words == 0 || stats.sentences == 0) {
      ++table.skipped_items;
      continue;
    }
    for (const auto& [name, value] : readability_indices(stats).named()) {
      scores[name][item.level].push_back(value);
    }
  }
  table.levels.assign(levels.begin(), levels.end());
  for (const auto& [metric, by_level] : scores) table.cells[metric] = level_summary(by_level);
  return table;
}

inline std::string readability_csv(const ReadabilityTable& t) {
  std::string out = "metric";
  for (const auto& l : t.levels) out += "," + detail::csv_field(l + "_mean") + "," + detail::csv_field(l + "_std");
  out += "\n";
  for (const auto& m : t.metrics) {
    out += m;
    for (const auto& l : t.levels) {
      auto mit = t.cells.find(m);
      if (mit == t.cells.end() || !mit->second.contains(l)) {
        out += ",,";
        continue;
      }
      const auto& c = mit->second.at(l);
      out += "," + format_double(c.mean) + "," + format_double(c.stddev);
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON fragments

inline json stats_json(const LevelStats& s) {
  return {{"mode_accuracy", s.mode_accuracy}, {"true_class_prob", s.true_class_prob}, {"n_items", s.n_items}};
}

inline json divergence_json(const DivergenceRow& d) {
  return {{"kl", d.kl}, {"hellinger", d.hellinger}, {"total_variation", d.total_variation}, {"n_items", d.n_items}};
}

inline json level_block_json(const LevelBlock& b) {
  json j = {{"n_items", b.n_items},
            {"accuracy",
             {{"candidate_accuracy", b.candidate.mode_accuracy},
              {"model_accuracy", b.model.mode_accuracy},
              {"candidate_tcp", b.candidate.true_class_prob},
              {"model_tcp", b.model.true_class_prob}}}};
  json t4 = {{"raw", {{"tau", 1.0}, {"alpha", 0.0}, {"accuracy", b.model.mode_accuracy},
                      {"tcp", b.model.true_class_prob}, {"divergence", divergence_json(b.raw)}}}};
  if (b.params) {
    t4["reshaped"] = {{"tau", b.params->tau}, {"alpha", b.params->alpha},
                      {"accuracy", b.reshaped_stats->mode_accuracy}, {"tcp", b.reshaped_stats->true_class_prob},
                      {"divergence", divergence_json(*b.reshaped)}};
    j["params"] = params_to_json(*b.params);
  }
  j["calibration"] = t4;
  return j;
}

inline json pr_curve_json(const PRCurve& c) {
  return {{"average_precision", c.average_precision}, {"prevalence", c.prevalence},
          {"positives", c.positives}, {"total", c.total}};
}

inline json readability_json(const ReadabilityTable& t) {
  json summary = json::object();
  for (const auto& [metric, by_level] : t.cells) {
    for (const auto& [level, c] : by_level) {
      summary[metric][level] = {{"mean", c.mean}, {"std", c.stddev}, {"n", c.n}, {"single_item", c.single_item}};
    }
  }
  return {{"metrics", t.metrics}, {"levels", t.levels}, {"summary", summary}, {"skipped_items", t.skipped_items}};
}

}  // namespace mcq
