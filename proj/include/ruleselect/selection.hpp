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

// Max-discrepancy rule selection with relevance regularization.
//
// Each rule i gets the value
//
//   v_i = |psi_i(A) - psi_i(B)| + gamma * sim(x, u_i)
//
// and a selection s scores sum_i s_i * v_i. The regularizer is applied per
// rule (inside the sum), which makes the objective separable: the best
// r-subset is simply the r largest values.

#include <cmath>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ruleselect/common.hpp"
#include "ruleselect/error.hpp"
#include "ruleselect/io.hpp"
#include "ruleselect/rating.hpp"
#include "ruleselect/selection_vector.hpp"

namespace ruleselect {

struct SelectionConfig {
  std::size_t r = 5;
  double gamma = 2.0;
  // Map scores onto [0,1] before computing discrepancies so gamma has the
  // same meaning regardless of the rater's range.
  bool normalize = true;

  void validate(std::size_t pool_size) const {
    if (r < 1 || r > pool_size) {
      throw ArgumentError("selection budget r=" + std::to_string(r) +
                          " must be in [1, " + std::to_string(pool_size) + "]");
    }
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
      throw ArgumentError("gamma must be a finite value >= 0");
    }
  }
};

inline std::vector<double> per_rule_values(const TrioScores& raw,
                                           const SelectionConfig& config) {
  const TrioScores scores =
      config.normalize ? normalize_scores(raw, ScoreRange::unit()) : raw;
  std::vector<double> values(scores.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::abs(scores.scores_a[i] - scores.scores_b[i]) +
                config.gamma * scores.relevance[i];
  }
  return values;
}

namespace selection_detail {

// Summation in ascending rule order, shared by every route so objective
// values compare exactly.
inline double sum_selected(std::span<const double> values,
                           std::span<const std::size_t> ids) {
  double acc = 0.0;
  for (std::size_t id : ids) acc += values[id];
  return acc;
}

inline void check_scores(const TrioScores& scores) {
  if (scores.scores_b.size() != scores.size() ||
      scores.relevance.size() != scores.size()) {
    throw ArgumentError("trio " + scores.trio_id +
                        ": score and relevance vectors differ in length");
  }
}

}  // namespace selection_detail

inline double selection_objective(const TrioScores& scores,
                                  std::span<const std::uint8_t> bits,
                                  const SelectionConfig& config) {
  selection_detail::check_scores(scores);
  if (bits.size() != scores.size()) {
    throw ArgumentError("selection_objective: bits length " +
                        std::to_string(bits.size()) + " != pool size " +
                        std::to_string(scores.size()));
  }
  const auto values = per_rule_values(scores, config);
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) ids.push_back(i);
  }
  return selection_detail::sum_selected(values, ids);
}

// Top-r rules by per-rule value; ties go to the lowest rule id.
inline SelectionVector select_max_discrepancy(const TrioScores& scores,
                                              const SelectionConfig& config) {
  selection_detail::check_scores(scores);
  config.validate(scores.size());
  const auto values = per_rule_values(scores, config);
  const auto ids = top_k_indices(values, config.r);
  return SelectionVector::from_ids(scores.size(), ids,
                                   selection_detail::sum_selected(values, ids));
}

inline constexpr std::uint64_t kBruteForceLimit = 2'000'000;

// Exhaustive argmax over all r-subsets; ties go to the lexicographically
// smallest subset.
inline SelectionVector select_brute_force(const TrioScores& scores,
                                          const SelectionConfig& config) {
  selection_detail::check_scores(scores);
  config.validate(scores.size());
  const std::uint64_t count = binomial(scores.size(), config.r);
  if (count > kBruteForceLimit) {
    throw SizeError("select_brute_force: C(" + std::to_string(scores.size()) +
                    "," + std::to_string(config.r) + ") subsets exceed the limit");
  }
  const auto values = per_rule_values(scores, config);
  std::vector<std::size_t> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for_each_combination(scores.size(), config.r,
                       [&](const std::vector<std::size_t>& subset) {
                         const double v =
                             selection_detail::sum_selected(values, subset);
                         if (v > best_value) {
                           best_value = v;
                           best = subset;
                         }
                       });
  return SelectionVector::from_ids(scores.size(), best, best_value);
}

// ---------------------------------------------------------------------------
// Selection files: {"trio_id", "selected_rules", "objective",
// optional "per_rule_values"}.

struct SelectionRecord {
  std::string trio_id;
  SelectionVector selection;
  std::vector<double> per_rule_values;  // empty unless requested
};

inline Json selection_row(const SelectionRecord& rec) {
  Json row{{"trio_id", rec.trio_id},
           {"selected_rules", rec.selection.selected_ids()},
           {"objective", rec.selection.objective_value()}};
  if (!rec.per_rule_values.empty()) row["per_rule_values"] = rec.per_rule_values;
  return row;
}

// `pool_size` comes from the matching scores; selections only list ids.
inline SelectionRecord parse_selection(const Json& row, std::size_t pool_size,
                                       const std::string& where) {
  SelectionRecord rec;
  rec.trio_id = require_field<std::string>(row, "trio_id", where);
  const auto ids = require_field<std::vector<std::size_t>>(row, "selected_rules", where);
  rec.selection = SelectionVector::from_ids(pool_size, ids,
                                            row.value("objective", 0.0));
  if (row.contains("per_rule_values")) {
    rec.per_rule_values = row.at("per_rule_values").get<std::vector<double>>();
  }
  return rec;
}

}  // namespace ruleselect
