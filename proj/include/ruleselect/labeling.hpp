// Copyright 2026 The RuleSelect Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Binary preference labels from aggregated rule scores.

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ruleselect/error.hpp"
#include "ruleselect/io.hpp"
#include "ruleselect/rating.hpp"
#include "ruleselect/selection.hpp"

namespace ruleselect {

enum class Choice { kA, kB };

inline const char* to_string(Choice c) { return c == Choice::kA ? "A" : "B"; }

inline Choice parse_choice(const std::string& s) {
  if (s == "A") return Choice::kA;
  if (s == "B") return Choice::kB;
  throw ConsistencyError("chosen must be \"A\" or \"B\", got \"" + s + "\"");
}

// A wins only on a strict inequality; everything else, ties included, goes
// to B.
inline Choice choose(double phi_a, double phi_b) {
  return phi_a > phi_b ? Choice::kA : Choice::kB;
}

struct PreferenceRecord {
  std::string trio_id;
  Choice chosen = Choice::kB;
  double phi_a = 0.0;
  double phi_b = 0.0;
  std::vector<std::size_t> selected_rules;
  bool tie = false;

  bool operator==(const PreferenceRecord&) const = default;
};

inline PreferenceRecord label_preference(const TrioScores& scores,
                                         const SelectionVector& selection,
                                         double tie_epsilon = 0.0) {
  if (!(tie_epsilon >= 0.0)) {
    throw ArgumentError("tie_epsilon must be >= 0");
  }
  const AggregatedScores phi = aggregate_phi(scores, selection);
  PreferenceRecord rec;
  rec.trio_id = scores.trio_id;
  rec.phi_a = phi.phi_a;
  rec.phi_b = phi.phi_b;
  rec.chosen = choose(phi.phi_a, phi.phi_b);
  rec.selected_rules = selection.selected_ids();
  rec.tie = std::abs(phi.phi_a - phi.phi_b) <= tie_epsilon;
  return rec;
}

struct DatasetSummary {
  std::size_t trios = 0;    // input trios
  std::size_t records = 0;  // emitted records
  std::size_t ties = 0;
  std::size_t dropped = 0;
  double tie_rate = 0.0;
  double chosen_a_fraction = 0.0;
};

struct LabeledDataset {
  std::vector<PreferenceRecord> records;
  DatasetSummary summary;
};

// Labels every trio. Selections are matched to scores by trio_id; any
// missing, extra, or duplicate id is a consistency error listing offenders.
inline LabeledDataset build_dataset(const std::vector<TrioScores>& scores,
                                    const std::vector<SelectionRecord>& selections,
                                    double tie_epsilon, bool drop_ties) {
  std::map<std::string, const SelectionRecord*> by_id;
  std::set<std::string> duplicates;
  for (const auto& sel : selections) {
    if (!by_id.emplace(sel.trio_id, &sel).second) duplicates.insert(sel.trio_id);
  }
  std::set<std::string> score_ids;
  std::vector<std::string> missing;
  for (const auto& s : scores) {
    if (!score_ids.insert(s.trio_id).second) duplicates.insert(s.trio_id);
    if (!by_id.count(s.trio_id)) missing.push_back(s.trio_id);
  }
  std::vector<std::string> extra;
  for (const auto& [id, _] : by_id) {
    if (!score_ids.count(id)) extra.push_back(id);
  }
  if (!duplicates.empty() || !missing.empty() || !extra.empty()) {
    auto join = [](const auto& ids) {
      std::string out;
      for (const auto& id : ids) out += (out.empty() ? "" : ", ") + id;
      return out;
    };
    std::string msg = "scores and selections do not align:";
    if (!duplicates.empty()) msg += " duplicate trio_ids [" + join(duplicates) + "]";
    if (!missing.empty()) msg += " no selection for [" + join(missing) + "]";
    if (!extra.empty()) msg += " no scores for [" + join(extra) + "]";
    throw ConsistencyError(msg);
  }

  LabeledDataset out;
  out.summary.trios = scores.size();
  std::size_t chosen_a = 0;
  for (const auto& s : scores) {
    PreferenceRecord rec =
        label_preference(s, by_id.at(s.trio_id)->selection, tie_epsilon);
    if (rec.tie) ++out.summary.ties;
    if (rec.tie && drop_ties) {
      ++out.summary.dropped;
      continue;
    }
    if (rec.chosen == Choice::kA) ++chosen_a;
    out.records.push_back(std::move(rec));
  }
  out.summary.records = out.records.size();
  if (out.summary.trios > 0) {
    out.summary.tie_rate = static_cast<double>(out.summary.ties) /
                           static_cast<double>(out.summary.trios);
  }
  if (!out.records.empty()) {
    out.summary.chosen_a_fraction =
        static_cast<double>(chosen_a) / static_cast<double>(out.records.size());
  }
  return out;
}

// Trio with the two responses exchanged.
inline TrioScores swap_scores(const TrioScores& s) {
  TrioScores out = s;
  std::swap(out.scores_a, out.scores_b);
  return out;
}

// Exchanges A and B in every record and relabels. Non-tied labels flip; an
// exactly equal pair stays B. Applying it twice restores the input.
inline std::vector<PreferenceRecord> augment_swap(
    const std::vector<PreferenceRecord>& records) {
  std::vector<PreferenceRecord> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    PreferenceRecord swapped = rec;
    std::swap(swapped.phi_a, swapped.phi_b);
    swapped.chosen = choose(swapped.phi_a, swapped.phi_b);
    out.push_back(std::move(swapped));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Preference files: {"trio_id", "chosen", "phi_a", "phi_b",
// "selected_rules", "tie"}.

inline Json preference_row(const PreferenceRecord& rec) {
  return Json{{"trio_id", rec.trio_id},
              {"chosen", to_string(rec.chosen)},
              {"phi_a", rec.phi_a},
              {"phi_b", rec.phi_b},
              {"selected_rules", rec.selected_rules},
              {"tie", rec.tie}};
}

inline PreferenceRecord parse_preference(const Json& row, const std::string& where) {
  PreferenceRecord rec;
  rec.trio_id = require_field<std::string>(row, "trio_id", where);
  rec.chosen = parse_choice(require_field<std::string>(row, "chosen", where));
  rec.phi_a = require_field<double>(row, "phi_a", where);
  rec.phi_b = require_field<double>(row, "phi_b", where);
  rec.selected_rules = require_field<std::vector<std::size_t>>(row, "selected_rules", where);
  rec.tie = row.value("tie", false);
  return rec;
}

inline std::string preferences_to_jsonl(const std::vector<PreferenceRecord>& records) {
  std::vector<Json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(preference_row(r));
  return to_jsonl(rows);
}

inline std::vector<PreferenceRecord> read_preferences(const std::filesystem::path& path) {
  std::vector<PreferenceRecord> out;
  const auto rows = read_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back(parse_preference(rows[i], path.string() + " line " + std::to_string(i + 1)));
  }
  return out;
}

inline Json summary_json(const DatasetSummary& s) {
  return Json{{"trios", s.trios},       {"records", s.records},
              {"ties", s.ties},         {"dropped", s.dropped},
              {"tie_rate", s.tie_rate}, {"chosen_a_fraction", s.chosen_a_fraction}};
}

}  // namespace ruleselect
