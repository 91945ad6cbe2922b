#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "mcq/error.hpp"
#include "mcq/item_bank.hpp"
#include "mcq/reshape.hpp"

namespace mcq {

// A distractor is poor when strictly fewer than this fraction of candidates
// select it.
inline constexpr double kPoorDistractorThreshold = 0.10;

enum class ScoreSource { raw, reshaped };

inline std::string to_string(ScoreSource s) { return s == ScoreSource::raw ? "raw" : "reshaped"; }

struct DistractorRecord {
  std::string item_id;
  std::string level;
  std::size_t option_index = 0;
  double candidate_fraction = 0.0;
  double model_probability = 0.0;  // detection score; low = suspect
  bool is_poor = false;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct PRCurve {
  std::vector<PrPoint> points;
  double average_precision = 0.0;
  double prevalence = 0.0;
  std::size_t positives = 0;
  std::size_t total = 0;
};

// One record per (item, non-answer option). Reshaped scores need fitted
// parameters for every level that occurs in `entries`.
inline std::vector<DistractorRecord> extract_distractors(std::span<const JoinedEntry> entries,
                                                         ScoreSource source,
                                                         const ParamsByLevel* params = nullptr) {
  if (source == ScoreSource::reshaped && params == nullptr) {
    throw DomainError("reshaped distractor scores require fitted parameters");
  }
  std::vector<DistractorRecord> out;
  for (const auto& e : entries) {
    std::vector<double> scores = e.model;
    if (source == ScoreSource::reshaped) {
      auto it = params->find(e.item.level);
      if (it == params->end()) {
        throw DomainError("no fitted parameters for level '" + e.item.level + "'");
      }
      scores = reshape(e.model, e.item.answer_index, it->second);
    }
    for (std::size_t j = 0; j < e.item.option_count(); ++j) {
      if (j == e.item.answer_index) continue;
      out.push_back({e.item.item_id, e.item.level, j, e.candidate[j], scores[j],
                     e.candidate[j] < kPoorDistractorThreshold});
    }
  }
  return out;
}

// Ranks records by ascending score. Records with equal scores form one block
// and precision/recall are only taken at block ends, so the curve does not
// depend on the order of tied records. AP is the mean, over positives, of the
// precision at the end of the positive's block.
inline PRCurve pr_curve(std::span<const DistractorRecord> records) {
  if (records.empty()) throw DomainError("precision-recall curve of an empty record list");
  std::vector<std::pair<double, bool>> ranked;
  ranked.reserve(records.size());
  std::size_t positives = 0;
  for (const auto& r : records) {
    ranked.emplace_back(r.model_probability, r.is_poor);
    positives += r.is_poor ? 1 : 0;
  }
  if (positives == 0) throw DomainError("undefined recall: no poor distractors among the records");
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  PRCurve curve;
  curve.positives = positives;
  curve.total = records.size();
  curve.prevalence = static_cast<double>(positives) / static_cast<double>(records.size());
  const auto p = static_cast<double>(positives);
  std::size_t tp = 0;
  double ap_sum = 0.0;
  std::size_t i = 0;
  while (i < ranked.size()) {
    std::size_t j = i;
    std::size_t block_tp = 0;
    while (j < ranked.size() && ranked[j].first == ranked[i].first) {
      block_tp += ranked[j].second ? 1 : 0;
      ++j;
    }
    tp += block_tp;
    const double precision = static_cast<double>(tp) / static_cast<double>(j);
    ap_sum += static_cast<double>(block_tp) * precision;
    curve.points.push_back({static_cast<double>(tp) / p, precision});
    i = j;
  }
  curve.average_precision = ap_sum / p;
  return curve;
}

// Precision of a uniformly random ranking: the prevalence of poor distractors.
inline double random_baseline(std::span<const DistractorRecord> records) {
  if (records.empty()) throw DomainError("random baseline of an empty record list");
  const auto poor = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.is_poor; });
  return static_cast<double>(poor) / static_cast<double>(records.size());
}

// Records whose score falls below `threshold`, most suspect first.
inline std::vector<DistractorRecord> flagged_distractors(std::span<const DistractorRecord> records,
                                                         double threshold = kPoorDistractorThreshold) {
  std::vector<DistractorRecord> out;
  for (const auto& r : records) {
    if (r.model_probability < threshold) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.model_probability, a.item_id, a.option_index) <
           std::tie(b.model_probability, b.item_id, b.option_index);
  });
  return out;
}

}  // namespace mcq
