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

#include "ruleselect/rating.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "test_util.hpp"

namespace ruleselect {
namespace {

Trio make_trio(const std::string& id, std::vector<double> prompt_embedding = {1, 0, 0}) {
  Trio t;
  t.trio_id = id;
  t.prompt_id = id;
  t.response_a_id = id + "/a";
  t.response_b_id = id + "/b";
  t.prompt_embedding = std::move(prompt_embedding);
  return t;
}

TrioScores scores_for(std::vector<double> a, std::vector<double> b) {
  TrioScores s;
  s.trio_id = "t";
  s.relevance.assign(a.size(), 0.0);
  s.scores_a = std::move(a);
  s.scores_b = std::move(b);
  return s;
}

TEST(Trio, SameResponseIdsRejected) {
  Trio t = make_trio("x");
  t.response_b_id = t.response_a_id;
  EXPECT_THROW(validate_trio(t), InvariantError);
}

TEST(SyntheticBackend, DeterministicForFixedSeed) {
  const RulePool pool = testing::random_pool(20, 3, 5);
  const SyntheticBackend backend;
  for (int i = 0; i < 5; ++i) {
    const Trio t = make_trio("trio-" + std::to_string(i));
    const TrioScores first = rate_trio(backend, t, pool, 42);
    const TrioScores second = rate_trio(backend, t, pool, 42);
    EXPECT_EQ(first.scores_a, second.scores_a);
    EXPECT_EQ(first.scores_b, second.scores_b);
    EXPECT_EQ(first.relevance, second.relevance);
    EXPECT_NO_THROW(validate_scores(first));
  }
  const Trio t = make_trio("trio-0");
  EXPECT_NE(rate_trio(backend, t, pool, 1).scores_a, rate_trio(backend, t, pool, 2).scores_a);
}

TEST(SyntheticBackend, RelevanceIsPromptCosine) {
  const RulePool pool = testing::random_pool(6, 3, 9);
  const Trio t = make_trio("p", {0.3, -1.0, 2.0});
  const TrioScores s = rate_trio(SyntheticBackend{}, t, pool, 0);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& e = pool[i].embedding;
    const double expect =
        (0.3 * e[0] - e[1] + 2.0 * e[2]) /
        (std::sqrt(0.09 + 1.0 + 4.0) * std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]));
    EXPECT_NEAR(s.relevance[i], expect, 1e-14);
  }
}

TEST(SyntheticBackend, VotesFollowHiddenPreference) {
  // Stronger discrepancies agree with the hidden label more often.
  const RulePool pool = testing::random_pool(50, 3, 1);
  const SyntheticBackend backend;
  int agree_strong = 0, total_strong = 0, agree_weak = 0, total_weak = 0;
  for (int n = 0; n < 200; ++n) {
    const Trio t = make_trio("v" + std::to_string(n));
    const int h = SyntheticBackend::hidden_preference(t, 3);
    const TrioScores s = rate_trio(backend, t, pool, 3);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double d = s.scores_a[i] - s.scores_b[i];
      const bool agree = (d > 0) == (h > 0);
      if (std::abs(d) > 1.4) {
        agree_strong += agree;
        ++total_strong;
      } else if (std::abs(d) < 0.2) {
        agree_weak += agree;
        ++total_weak;
      }
    }
  }
  EXPECT_GT(static_cast<double>(agree_strong) / total_strong,
            static_cast<double>(agree_weak) / total_weak + 0.2);
}

TEST(FileBackend, PassesScoresThroughVerbatim) {
  const RulePool pool = testing::random_pool(3, 2, 4);
  TrioScores row = scores_for({0.1, -0.2, 0.3}, {0.4, 0.5, -0.6});
  row.trio_id = "t0";
  row.relevance = {0.9, 0.8, 0.7};
  const FileBackend backend({row}, ScoreRange::signed_unit());
  Trio t = make_trio("t0");
  t.prompt_embedding.reset();
  const TrioScores s = rate_trio(backend, t, pool, 0);
  EXPECT_EQ(s.scores_a, row.scores_a);
  EXPECT_EQ(s.scores_b, row.scores_b);
  EXPECT_EQ(s.relevance, row.relevance);
}

TEST(FileBackend, MissingEntryNamesTrioAndRule) {
  const RulePool pool = testing::random_pool(10, 2, 4);
  std::vector<TrioScores> rows;
  for (int i = 0; i < 5; ++i) {
    TrioScores s = scores_for(std::vector<double>(10, 0.0), std::vector<double>(10, 0.0));
    s.trio_id = std::to_string(i);
    rows.push_back(s);
  }
  rows[3].scores_a[7] = std::nan("");
  const FileBackend backend(rows, ScoreRange::signed_unit());
  try {
    rate_trio(backend, make_trio("3"), pool, 0);
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.trio_id(), "3");
    EXPECT_EQ(e.rule_id(), 7u);
    EXPECT_NE(std::string(e.what()).find("trio 3, rule 7"), std::string::npos);
  }
  EXPECT_THROW(rate_trio(backend, make_trio("99"), pool, 0), BackendError);
}

TEST(FileBackend, OutOfRangeScoreRejected) {
  const RulePool pool = testing::random_pool(2, 2, 4);
  TrioScores row = scores_for({0.5, 1.5}, {0.0, 0.0});
  row.trio_id = "t";
  const FileBackend backend({row}, ScoreRange::signed_unit());
  EXPECT_THROW(rate_trio(backend, make_trio("t"), pool, 0), BackendError);
}

TEST(NormalizeScores, SignedToUnit) {
  TrioScores s = scores_for({0.0, 1.0, -1.0}, {-1.0, 0.0, 0.5});
  const TrioScores n = normalize_scores(s, ScoreRange::unit());
  EXPECT_DOUBLE_EQ(n.scores_a[0], 0.5);
  EXPECT_DOUBLE_EQ(n.scores_a[1], 1.0);
  EXPECT_EQ(n.scores_b, (std::vector<double>{0.0, 0.5, 0.75}));
  EXPECT_EQ(n.score_range, ScoreRange::unit());
}

TEST(NormalizeScores, IdentityWhenRangesMatch) {
  TrioScores s = scores_for({0.3}, {0.7});
  s.score_range = ScoreRange::unit();
  EXPECT_EQ(normalize_scores(s, ScoreRange::unit()).scores_a, s.scores_a);
}

TEST(NormalizeScores, RoundTripOrderPreserving) {
  const TrioScores s = testing::random_scores(30, 8);
  const TrioScores back = normalize_scores(normalize_scores(s, ScoreRange::unit()),
                                           ScoreRange::signed_unit());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(back.scores_a[i], s.scores_a[i], 1e-15);
}

TEST(AggregatePhi, Means) {
  const TrioScores s = scores_for({0.1, 0.3, 0.5, 0.7, 0.9}, {0.2, 0.2, 0.2, 0.2, 0.2});
  const auto all = SelectionVector::all(5);
  const AggregatedScores phi = aggregate_phi(s, all, 5);
  EXPECT_NEAR(phi.phi_a, 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(phi.phi_b, 0.2);

  const TrioScores two = scores_for({0.2, 0.8, 0.0}, {0, 0, 0});
  const std::vector<std::size_t> ids{0, 1};
  EXPECT_DOUBLE_EQ(aggregate_phi(two, SelectionVector::from_ids(3, ids)).phi_a, 0.5);
}

TEST(AggregatePhi, ConstantScoresGiveConstant) {
  const double c = 0.1 + 0.2;  // not exactly representable
  const TrioScores s = scores_for(std::vector<double>(7, c), std::vector<double>(7, -c));
  const std::vector<std::size_t> ids{0, 2, 3, 6};
  const AggregatedScores phi = aggregate_phi(s, SelectionVector::from_ids(7, ids));
  EXPECT_EQ(phi.phi_a, c);
  EXPECT_EQ(phi.phi_b, -c);
}

TEST(AggregatePhi, ShapeErrors) {
  const TrioScores s = scores_for({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3});
  EXPECT_THROW(aggregate_phi(s, SelectionVector::all(4)), InvariantError);
  EXPECT_THROW(aggregate_phi(s, SelectionVector::from_bits({0, 0, 0})), InvariantError);
  EXPECT_THROW(aggregate_phi(s, SelectionVector::all(3), 2), InvariantError);
}

TEST(ScoresIo, RoundTripWithNullAsMissing) {
  const Json row = Json::parse(
      R"({"trio_id":"q","scores_a":[0.5,null],"scores_b":[0.1,0.2],"relevance":[0.0,1.0],"score_range":"[0,1]"})");
  const TrioScores s = parse_trio_scores(row, "mem");
  EXPECT_TRUE(std::isnan(s.scores_a[1]));
  EXPECT_EQ(s.score_range, ScoreRange::unit());
  EXPECT_THROW(ScoreRange::parse("[0,2]"), ArgumentError);

  const TrioScores clean = testing::random_scores(4, 2, "c");
  const TrioScores back = parse_trio_scores(trio_scores_row(clean), "mem");
  EXPECT_EQ(back.scores_a, clean.scores_a);
  EXPECT_EQ(back.relevance, clean.relevance);
}

TEST(TrioIo, RoundTrip) {
  Trio t = make_trio("z", {1.0, 2.0});
  t.prompt = "How do I...";
  const Trio back = parse_trio(trio_row(t), "mem");
  EXPECT_EQ(back.trio_id, "z");
  EXPECT_EQ(back.response_b_id, "z/b");
  EXPECT_EQ(*back.prompt, *t.prompt);
  EXPECT_EQ(*back.prompt_embedding, *t.prompt_embedding);
  EXPECT_FALSE(back.response_a.has_value());
}

}  // namespace
}  // namespace ruleselect
