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

#include "ruleselect/labeling.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "ruleselect/selection.hpp"
#include "test_util.hpp"

namespace ruleselect {
namespace {

// Synthetic trios; every fifth one has identical responses, so it ties.
std::vector<TrioScores> synthetic_trios(std::size_t n, std::size_t rules, std::uint64_t seed) {
  std::vector<TrioScores> out;
  for (std::size_t i = 0; i < n; ++i) {
    TrioScores s = testing::random_scores(rules, derive_seed(seed, i), "trio-" + std::to_string(i));
    if (i % 5 == 0) s.scores_b = s.scores_a;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SelectionRecord> select_all_trios(const std::vector<TrioScores>& scores,
                                              const SelectionConfig& config) {
  std::vector<SelectionRecord> out;
  for (const auto& s : scores) out.push_back({s.trio_id, select_max_discrepancy(s, config), {}});
  return out;
}

TEST(Choose, StrictInequalityOtherwiseB) {
  EXPECT_EQ(choose(0.6, 0.4), Choice::kA);
  EXPECT_EQ(choose(0.5, 0.5), Choice::kB);
  EXPECT_EQ(choose(0.3, 0.7), Choice::kB);
}

TEST(LabelPreference, TieFlag) {
  TrioScores s;
  s.trio_id = "x";
  s.scores_a = {0.6, 0.5};
  s.scores_b = {0.4, 0.6};
  s.relevance = {0, 0};
  const PreferenceRecord a = label_preference(s, SelectionVector::from_bits({1, 0}));
  EXPECT_EQ(a.chosen, Choice::kA);
  EXPECT_FALSE(a.tie);
  s.scores_b = s.scores_a;
  const PreferenceRecord t = label_preference(s, SelectionVector::all(2));
  EXPECT_EQ(t.chosen, Choice::kB);
  EXPECT_TRUE(t.tie);
  EXPECT_THROW(label_preference(s, SelectionVector::all(2), -1.0), ArgumentError);
}

TEST(BuildDataset, EmptyInput) {
  const LabeledDataset ds = build_dataset({}, {}, 0.0, false);
  EXPECT_TRUE(ds.records.empty());
  EXPECT_EQ(ds.summary.trios, 0u);
  EXPECT_EQ(ds.summary.ties, 0u);
  EXPECT_EQ(ds.summary.tie_rate, 0.0);
  EXPECT_EQ(ds.summary.chosen_a_fraction, 0.0);
}

TEST(BuildDataset, DominatingAGivesAllA) {
  auto scores = synthetic_trios(50, 12, 3);
  for (auto& s : scores) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      s.scores_a[i] = 0.9;
      s.scores_b[i] = std::min(s.scores_b[i], 0.8);
    }
  }
  const LabeledDataset ds = build_dataset(scores, select_all_trios(scores, {4, 2.0}), 0.0, false);
  EXPECT_EQ(ds.summary.chosen_a_fraction, 1.0);
}

TEST(BuildDataset, DropTiesCountsDirectly) {
  const auto scores = synthetic_trios(1000, 20, 7);
  const auto selections = select_all_trios(scores, {5, 2.0});
  std::size_t ties = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto phi = aggregate_phi(scores[i], selections[i].selection);
    if (std::abs(phi.phi_a - phi.phi_b) <= 1e-9) ++ties;
  }
  ASSERT_EQ(ties, 200u);
  const LabeledDataset ds = build_dataset(scores, selections, 1e-9, true);
  EXPECT_EQ(ds.records.size(), 1000u - ties);
  EXPECT_EQ(ds.summary.ties, ties);
  EXPECT_EQ(ds.summary.dropped, ties);
  EXPECT_DOUBLE_EQ(ds.summary.tie_rate, 0.2);
  const LabeledDataset kept = build_dataset(scores, selections, 1e-9, false);
  EXPECT_EQ(kept.records.size(), 1000u);
}

TEST(BuildDataset, MisalignedInputsNameIds) {
  const auto scores = synthetic_trios(3, 6, 1);
  auto selections = select_all_trios(scores, {2, 1.0});
  selections.pop_back();
  selections.push_back({"stray", SelectionVector::all(6), {}});
  try {
    build_dataset(scores, selections, 0.0, false);
    FAIL() << "expected ConsistencyError";
  } catch (const ConsistencyError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("no selection for [trio-2]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("no scores for [stray]"), std::string::npos) << msg;
  }
  selections = select_all_trios(scores, {2, 1.0});
  selections.push_back(selections.front());
  EXPECT_THROW(build_dataset(scores, selections, 0.0, false), ConsistencyError);
}

TEST(AugmentSwap, FlipsAndRestores) {
  const auto scores = synthetic_trios(200, 10, 11);
  const LabeledDataset ds = build_dataset(scores, select_all_trios(scores, {3, 2.0}), 0.0, true);
  const auto swapped = augment_swap(ds.records);
  std::size_t chosen_a = 0;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    EXPECT_NE(swapped[i].chosen, ds.records[i].chosen);
    chosen_a += (ds.records[i].chosen == Choice::kA) + (swapped[i].chosen == Choice::kA);
  }
  EXPECT_EQ(2 * chosen_a, 2 * ds.records.size());
  EXPECT_EQ(augment_swap(swapped), ds.records);
  EXPECT_EQ(preferences_to_jsonl(augment_swap(swapped)), preferences_to_jsonl(ds.records));
}

TEST(AugmentSwap, MatchesRelabelingSwappedScores) {
  const auto scores = synthetic_trios(50, 8, 5);
  const auto selections = select_all_trios(scores, {3, 1.0});
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (i % 5 == 0) continue;
    const PreferenceRecord rec = label_preference(scores[i], selections[i].selection);
    const PreferenceRecord direct = label_preference(swap_scores(scores[i]), selections[i].selection);
    EXPECT_EQ(augment_swap({rec}).front(), direct);
  }
}

TEST(PreferenceIo, RoundTrip) {
  const auto scores = synthetic_trios(20, 6, 2);
  const LabeledDataset ds = build_dataset(scores, select_all_trios(scores, {2, 2.0}), 0.0, false);
  std::vector<PreferenceRecord> back;
  const auto rows = parse_jsonl(preferences_to_jsonl(ds.records), "mem");
  for (const auto& row : rows) back.push_back(parse_preference(row, "mem"));
  EXPECT_EQ(back, ds.records);
  EXPECT_THROW(parse_choice("C"), ConsistencyError);
}

}  // namespace
}  // namespace ruleselect
