#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mcq/error.hpp"
#include "mcq/numeric.hpp"

namespace mcq {

using json = nlohmann::json;

// Pretest convention: every item should have been answered by at least this
// many candidates. Smaller counts only warn.
inline constexpr std::int64_t kMinCandidateCount = 100;

inline std::set<std::string> default_levels() { return {"B1", "B2", "C1", "C2"}; }

struct Item {
  std::string item_id;
  std::string context_id;
  std::string context;
  std::string question;
  std::vector<std::string> options;
  std::size_t answer_index = 0;
  std::string level;
  std::optional<std::vector<double>> discrimination;  // opaque metadata
  std::optional<std::int64_t> candidate_count;

  std::size_t option_count() const noexcept { return options.size(); }
  bool operator==(const Item&) const = default;
};

struct CandidateDistribution {
  std::string item_id;
  std::vector<double> fractions;
  bool operator==(const CandidateDistribution&) const = default;
};

enum class Variant { QOC, QO };

inline std::string to_string(Variant v) { return v == Variant::QOC ? "QOC" : "QO"; }

inline Variant parse_variant(std::string_view s) {
  if (s == "QOC") return Variant::QOC;
  if (s == "QO") return Variant::QO;
  throw DomainError("unknown prediction variant '" + std::string(s) + "' (expected QOC or QO)");
}

struct PredictionSet {
  Variant variant = Variant::QOC;
  std::map<std::string, std::vector<double>> entries;
  bool operator==(const PredictionSet&) const = default;
};

struct LoadOptions {
  // Empty set accepts any level label.
  std::set<std::string> allowed_levels = default_levels();
};

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_text_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw IoError("cannot read '" + path.string() + "': not a readable file");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

namespace detail {

struct Record {
  std::string locator;
  json value;
};

// Accepts either a JSON array of records or one JSON object per line.
inline std::vector<Record> read_records(std::string_view text, std::string_view source) {
  std::vector<Record> records;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return records;
  if (text[first] == '[') {
    json arr;
    try {
      arr = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string(source) + ":byte " + std::to_string(e.byte) + ": " + e.what());
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      records.push_back({std::string(source) + ":record " + std::to_string(i + 1), arr[i]});
    }
    return records;
  }
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    const std::string locator = std::string(source) + ":line " + std::to_string(line_no);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        records.push_back({locator, json::parse(line)});
      } catch (const json::parse_error& e) {
        throw ParseError(locator + ": " + e.what());
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return records;
}

inline const json& require(const Record& r, const char* key) {
  if (!r.value.is_object()) throw ParseError(r.locator + ": record is not a JSON object");
  auto it = r.value.find(key);
  if (it == r.value.end()) throw ParseError(r.locator + ": missing required field '" + key + "'");
  return *it;
}

inline std::string require_string(const Record& r, const char* key) {
  const json& v = require(r, key);
  if (!v.is_string()) throw ParseError(r.locator + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline std::vector<double> as_number_array(const json& v, const std::string& locator,
                                           const char* key) {
  if (!v.is_array()) throw ParseError(locator + ": field '" + key + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) throw ParseError(locator + ": field '" + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline json item_to_json(const Item& item) {
  json j = {{"item_id", item.item_id},   {"context_id", item.context_id},
            {"context", item.context},   {"question", item.question},
            {"options", item.options},   {"answer_index", item.answer_index},
            {"level", item.level}};
  if (item.discrimination) j["discrimination"] = *item.discrimination;
  if (item.candidate_count) j["candidate_count"] = *item.candidate_count;
  return j;
}

inline std::string to_json_lines(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

// Checks sign and unit sum; returns the findings (empty when valid).
inline std::vector<std::string> check_distribution(std::span<const double> p,
                                                   const std::string& who) {
  std::vector<std::string> findings;
  if (p.empty()) {
    findings.push_back(who + ": empty probability vector");
    return findings;
  }
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) {
      findings.push_back(who + ": negative or non-finite probability " + format_double(v));
      return findings;
    }
    if (v > 1.0) {
      findings.push_back(who + ": probability above 1 (" + format_double(v) + ")");
      return findings;
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kUnitSumTolerance) {
    findings.push_back(who + ": probabilities sum to " + format_double(sum) +
                       ", not 1 within 1e-6");
  }
  return findings;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Items

// Parses an items file body. Warnings (candidate_count below the pretest
// convention) are appended to `warnings` when given.
inline std::vector<Item> parse_item_bank(std::string_view text, std::string_view source,
                                         const LoadOptions& options = {},
                                         std::vector<std::string>* warnings = nullptr) {
  std::vector<Item> items;
  std::vector<std::string> findings;
  std::set<std::string> seen;
  for (const auto& rec : detail::read_records(text, source)) {
    Item item;
    item.item_id = detail::require_string(rec, "item_id");
    item.context_id = detail::require_string(rec, "context_id");
    item.context = detail::require_string(rec, "context");
    item.question = detail::require_string(rec, "question");
    item.level = detail::require_string(rec, "level");

    const json& opts = detail::require(rec, "options");
    if (!opts.is_array()) throw ParseError(rec.locator + ": field 'options' must be an array");
    for (const auto& o : opts) {
      if (!o.is_string()) throw ParseError(rec.locator + ": options must be strings");
      item.options.push_back(o.get<std::string>());
    }

    const json& ans = detail::require(rec, "answer_index");
    if (!ans.is_number_integer()) {
      throw ParseError(rec.locator + ": field 'answer_index' must be an integer");
    }
    const auto ans_value = ans.get<std::int64_t>();

    const std::string who = rec.locator + " item '" + item.item_id + "'";
    if (item.options.size() < 2) findings.push_back(who + ": fewer than 2 options");
    for (std::size_t i = 0; i < item.options.size(); ++i) {
      if (item.options[i].empty()) findings.push_back(who + ": option " + std::to_string(i) + " is empty");
    }
    if (ans_value < 0 || static_cast<std::uint64_t>(ans_value) >= item.options.size()) {
      findings.push_back(who + ": answer_index " + std::to_string(ans_value) + " out of range for " +
                         std::to_string(item.options.size()) + " options");
    } else {
      item.answer_index = static_cast<std::size_t>(ans_value);
    }
    if (!options.allowed_levels.empty() && !options.allowed_levels.contains(item.level)) {
      findings.push_back(who + ": level '" + item.level + "' is not an allowed level");
    }
    if (!seen.insert(item.item_id).second) {
      findings.push_back(who + ": duplicate item_id");
    }

    if (auto it = rec.value.find("discrimination"); it != rec.value.end() && !it->is_null()) {
      item.discrimination = detail::as_number_array(*it, rec.locator, "discrimination");
      if (item.discrimination->size() != item.options.size()) {
        findings.push_back(who + ": discrimination has " + std::to_string(item.discrimination->size()) +
                           " values for " + std::to_string(item.options.size()) + " options");
      }
    }
    if (auto it = rec.value.find("candidate_count"); it != rec.value.end() && !it->is_null()) {
      if (!it->is_number_integer()) {
        throw ParseError(rec.locator + ": field 'candidate_count' must be an integer");
      }
      item.candidate_count = it->get<std::int64_t>();
      if (*item.candidate_count <= 0) {
        findings.push_back(who + ": candidate_count must be positive");
      } else if (*item.candidate_count < kMinCandidateCount && warnings != nullptr) {
        warnings->push_back(who + ": only " + std::to_string(*item.candidate_count) +
                            " candidates (pretest convention is at least 100)");
      }
    }
    items.push_back(std::move(item));
  }
  if (!findings.empty()) throw ValidationError(std::move(findings));
  return items;
}

inline std::vector<Item> load_item_bank(const std::filesystem::path& path,
                                        const LoadOptions& options = {},
                                        std::vector<std::string>* warnings = nullptr) {
  return parse_item_bank(read_text_file(path), path.string(), options, warnings);
}

inline std::string serialize_item_bank(const std::vector<Item>& items) {
  std::vector<json> rows;
  rows.reserve(items.size());
  for (const auto& item : items) rows.push_back(detail::item_to_json(item));
  return detail::to_json_lines(rows);
}

inline void write_item_bank(const std::vector<Item>& items, const std::filesystem::path& path) {
  write_text_file(path, serialize_item_bank(items));
}

// ---------------------------------------------------------------------------
// Candidate distributions

// Each record is renormalized to unit sum; records further than 1e-6 from
// unit sum, or with negative entries, are rejected.
inline std::vector<CandidateDistribution> parse_candidate_distributions(std::string_view text,
                                                                        std::string_view source) {
  std::vector<CandidateDistribution> out;
  std::vector<std::string> findings;
  std::set<std::string> seen;
  for (const auto& rec : detail::read_records(text, source)) {
    CandidateDistribution d;
    d.item_id = detail::require_string(rec, "item_id");
    d.fractions = detail::as_number_array(detail::require(rec, "fractions"), rec.locator, "fractions");
    const std::string who = rec.locator + " item '" + d.item_id + "'";
    auto problems = detail::check_distribution(d.fractions, who);
    if (!seen.insert(d.item_id).second) problems.push_back(who + ": duplicate distribution");
    if (problems.empty()) {
      d.fractions = normalize(d.fractions);
    } else {
      findings.insert(findings.end(), problems.begin(), problems.end());
    }
    out.push_back(std::move(d));
  }
  if (!findings.empty()) throw ValidationError(std::move(findings));
  return out;
}

inline std::vector<CandidateDistribution> load_candidate_distributions(
    const std::filesystem::path& path) {
  return parse_candidate_distributions(read_text_file(path), path.string());
}

inline std::string serialize_candidate_distributions(const std::vector<CandidateDistribution>& dists) {
  std::vector<json> rows;
  rows.reserve(dists.size());
  for (const auto& d : dists) rows.push_back({{"item_id", d.item_id}, {"fractions", d.fractions}});
  return detail::to_json_lines(rows);
}

inline void write_candidate_distributions(const std::vector<CandidateDistribution>& dists,
                                          const std::filesystem::path& path) {
  write_text_file(path, serialize_candidate_distributions(dists));
}

// ---------------------------------------------------------------------------
// Predictions

// Entries are validated, then floored at kProbabilityFloor and renormalized
// so that every later logarithm is defined.
inline PredictionSet parse_predictions(std::string_view text, std::string_view source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(source) + ":byte " + std::to_string(e.byte) + ": " + e.what());
  }
  const detail::Record rec{std::string(source), doc};
  PredictionSet set;
  try {
    set.variant = parse_variant(detail::require_string(rec, "variant"));
  } catch (const DomainError& e) {
    throw ParseError(std::string(source) + ": " + e.what());
  }
  const json& entries = detail::require(rec, "entries");
  if (!entries.is_object()) throw ParseError(std::string(source) + ": 'entries' must be an object");
  std::vector<std::string> findings;
  for (const auto& [id, value] : entries.items()) {
    const std::string locator = std::string(source) + ":entry '" + id + "'";
    auto p = detail::as_number_array(value, locator, "entries");
    auto problems = detail::check_distribution(p, locator);
    if (problems.empty()) {
      set.entries.emplace(id, floor_probabilities(p));
    } else {
      findings.insert(findings.end(), problems.begin(), problems.end());
    }
  }
  if (!findings.empty()) throw ValidationError(std::move(findings));
  return set;
}

inline PredictionSet load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_text_file(path), path.string());
}

inline std::string serialize_predictions(const PredictionSet& set) {
  json entries = json::object();
  for (const auto& [id, p] : set.entries) entries[id] = p;
  json doc = {{"variant", to_string(set.variant)}, {"entries", entries}};
  return doc.dump() + "\n";
}

inline void write_predictions(const PredictionSet& set, const std::filesystem::path& path) {
  write_text_file(path, serialize_predictions(set));
}

// ---------------------------------------------------------------------------
// Join

// One aligned (item, candidate distribution, model probabilities) triple.
struct JoinedEntry {
  Item item;
  std::vector<double> candidate;
  std::vector<double> model;
};

struct JoinReport {
  std::vector<std::string> missing_distribution;  // item without a distribution
  std::vector<std::string> missing_prediction;    // item without a prediction
  std::vector<std::string> unknown_distribution;  // distribution for no item
  std::vector<std::string> unknown_prediction;    // prediction for no item
  std::map<std::string, std::size_t> level_counts;

  bool total() const noexcept {
    return missing_distribution.empty() && missing_prediction.empty() &&
           unknown_distribution.empty() && unknown_prediction.empty();
  }

  std::vector<std::string> findings() const {
    std::vector<std::string> out;
    for (const auto& id : missing_distribution) out.push_back("item '" + id + "': no candidate distribution");
    for (const auto& id : missing_prediction) out.push_back("item '" + id + "': no model prediction");
    for (const auto& id : unknown_distribution) out.push_back("distribution '" + id + "': no such item");
    for (const auto& id : unknown_prediction) out.push_back("prediction '" + id + "': no such item");
    return out;
  }
};

// Aligned triples grouped by level. Immutable once built.
class JoinedBank {
 public:
  JoinedBank() = default;

  explicit JoinedBank(std::vector<JoinedEntry> entries, JoinReport report = {})
      : report_(std::move(report)) {
    report_.level_counts.clear();
    for (auto& e : entries) {
      ++report_.level_counts[e.item.level];
      levels_[e.item.level].push_back(std::move(e));
    }
  }

  const std::map<std::string, std::vector<JoinedEntry>>& levels() const noexcept { return levels_; }

  std::span<const JoinedEntry> level(const std::string& name) const {
    auto it = levels_.find(name);
    if (it == levels_.end()) throw DomainError("level '" + name + "' not present (available: " + level_list() + ")");
    return it->second;
  }

  bool has_level(const std::string& name) const { return levels_.contains(name); }

  std::vector<std::string> level_names() const {
    std::vector<std::string> names;
    for (const auto& [name, _] : levels_) names.push_back(name);
    return names;
  }

  // All entries, level by level in level-name order.
  std::vector<JoinedEntry> all_entries() const {
    std::vector<JoinedEntry> out;
    for (const auto& [_, v] : levels_) out.insert(out.end(), v.begin(), v.end());
    return out;
  }

  std::size_t size() const noexcept {
    std::size_t n = 0;
    for (const auto& [_, v] : levels_) n += v.size();
    return n;
  }

  const JoinReport& report() const noexcept { return report_; }

 private:
  std::string level_list() const {
    std::string out;
    for (const auto& [name, _] : levels_) out += (out.empty() ? "" : ", ") + name;
    return out.empty() ? "none" : out;
  }

  std::map<std::string, std::vector<JoinedEntry>> levels_;
  JoinReport report_;
};

struct JoinOptions {
  bool strict = false;
};

// Aligns the three inputs by item_id. Shape mismatches are always errors;
// missing or unknown ids are errors only in strict mode and are otherwise
// dropped and listed in the report.
inline JoinedBank join(const std::vector<Item>& items,
                       const std::vector<CandidateDistribution>& dists,
                       const PredictionSet& predictions, const JoinOptions& options = {}) {
  std::map<std::string, const CandidateDistribution*> by_id;
  for (const auto& d : dists) by_id.emplace(d.item_id, &d);

  JoinReport report;
  std::vector<std::string> mismatches;
  std::vector<JoinedEntry> entries;
  std::set<std::string> item_ids;
  for (const auto& item : items) {
    item_ids.insert(item.item_id);
    auto d = by_id.find(item.item_id);
    auto p = predictions.entries.find(item.item_id);
    if (d == by_id.end()) report.missing_distribution.push_back(item.item_id);
    if (p == predictions.entries.end()) report.missing_prediction.push_back(item.item_id);
    if (d == by_id.end() || p == predictions.entries.end()) continue;

    const std::size_t k = item.option_count();
    bool ok = true;
    if (d->second->fractions.size() != k) {
      mismatches.push_back("item '" + item.item_id + "': distribution has " +
                           std::to_string(d->second->fractions.size()) + " values for " +
                           std::to_string(k) + " options");
      ok = false;
    }
    if (p->second.size() != k) {
      mismatches.push_back("item '" + item.item_id + "': prediction has " +
                           std::to_string(p->second.size()) + " values for " + std::to_string(k) +
                           " options");
      ok = false;
    }
    if (ok) entries.push_back({item, d->second->fractions, p->second});
  }
  for (const auto& d : dists) {
    if (!item_ids.contains(d.item_id)) report.unknown_distribution.push_back(d.item_id);
  }
  for (const auto& [id, _] : predictions.entries) {
    if (!item_ids.contains(id)) report.unknown_prediction.push_back(id);
  }
  if (!mismatches.empty()) throw ValidationError(std::move(mismatches));
  if (options.strict && !report.total()) throw ValidationError(report.findings());
  return JoinedBank(std::move(entries), std::move(report));
}

}  // namespace mcq
