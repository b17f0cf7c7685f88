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

#include "ruleselect/infotheory.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_util.hpp"

namespace ruleselect {
namespace {

// Reference values computed at 40 significant digits.
constexpr double kSigmoid1 = 0.7310585786300049;
constexpr double kEntropySigmoid1 = 0.5822031088882180;
constexpr double kKl73 = 0.3389191441548814;
constexpr double kJs1 = 0.1109440716717274;
constexpr double kJs2 = 0.3278133254727377;
constexpr double kJointMi12 = 0.37547803313492988;

TEST(BinaryEntropy, Values) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 0.6931471805599453);
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(kSigmoid1), kEntropySigmoid1, 1e-15);
  EXPECT_NEAR(binary_entropy(0.1), 0.32508297339144824, 1e-15);
  EXPECT_THROW(binary_entropy(1.5), DomainError);
  EXPECT_THROW(binary_entropy(std::nan("")), DomainError);
}

TEST(LogisticEntropy, MatchesBinaryEntropyAndIsEven) {
  for (double d = -30.0; d <= 30.0; d += 0.37) {
    EXPECT_NEAR(logistic_entropy(d), binary_entropy(sigmoid(d)), 1e-14);
    EXPECT_EQ(logistic_entropy(d), logistic_entropy(-d));
  }
}

TEST(KlDivergence, Values) {
  EXPECT_EQ(kl_divergence(SignedBernoulli(0.3), SignedBernoulli(0.3)).value, 0.0);
  EXPECT_NEAR(kl_divergence(SignedBernoulli(1.0), SignedBernoulli(0.5)).value, kLn2, 1e-15);
  EXPECT_NEAR(kl_divergence(SignedBernoulli(0.7), SignedBernoulli(0.3)).value, kKl73, 1e-15);
  const KlResult inf = kl_divergence(SignedBernoulli(0.5), SignedBernoulli(1.0));
  EXPECT_FALSE(inf.finite);
  EXPECT_TRUE(std::isinf(inf.value));
}

TEST(JsDivergence, Values) {
  const SignedBernoulli u(0.3);
  EXPECT_EQ(js_divergence(u, u), 0.0);
  EXPECT_NEAR(js_divergence(SignedBernoulli(1.0), SignedBernoulli(0.0)), kLn2, 1e-15);
  EXPECT_NEAR(js_divergence(SignedBernoulli(sigmoid(1)), SignedBernoulli(sigmoid(-1))), kJs1, 1e-15);
}

TEST(JsDivergence, SymmetricAndBounded) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const SignedBernoulli a(rng.uniform()), b(rng.uniform());
    const double ab = js_divergence(a, b);
    EXPECT_NEAR(ab, js_divergence(b, a), 1e-16);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, kLn2);
  }
}

TEST(JsClosedForm, Values) {
  EXPECT_EQ(js_closed_form(0.0), 0.0);
  EXPECT_NEAR(js_closed_form(1.0), kJs1, 1e-15);
  EXPECT_NEAR(js_closed_form(2.0), kJs2, 1e-15);
  EXPECT_NEAR(js_closed_form(10.0), 0.6926478029737041, 1e-15);
  EXPECT_NEAR(js_closed_form(0.1), 0.0012484392342684132, 1e-16);
  EXPECT_NEAR(js_closed_form(-3.0), 0.50228220945350291, 1e-15);
  EXPECT_THROW(js_closed_form(INFINITY), DomainError);
}

TEST(JsClosedForm, EqualsDirectMixtureKl) {
  for (double d = -10.0; d <= 10.0; d += 0.01) {
    const double direct = js_divergence(SignedBernoulli(sigmoid(d)), SignedBernoulli(sigmoid(-d)));
    EXPECT_NEAR(direct, js_closed_form(d), 1e-12) << d;
  }
}

TEST(MiOfSelection, Values) {
  const RuleInfoProfile p = RuleInfoProfile::from_discrepancies({1.0, 2.0, 0.0});
  EXPECT_EQ(mi_of_selection(p, std::vector<std::uint8_t>{0, 0, 0}), 0.0);
  EXPECT_EQ(mi_of_selection(p, std::vector<std::uint8_t>{0, 0, 1}), 0.0);
  EXPECT_NEAR(mi_of_selection(p, std::vector<std::uint8_t>{1, 1, 0}), kJs1 + kJs2, 1e-15);
  EXPECT_NEAR(mi_of_selection(p, std::vector<std::size_t>{0, 1}), 0.4387573971444651, 1e-15);
  EXPECT_THROW(mi_of_selection(p, std::vector<std::uint8_t>{1}), ArgumentError);
}

TEST(MiOfSelection, FromScoresUsesDifferences) {
  const std::vector<double> a{0.5, 1.0}, b{-0.5, -1.0};
  const RuleInfoProfile p = RuleInfoProfile::from_scores(a, b);
  EXPECT_NEAR(p.js[0], kJs1, 1e-15);
  EXPECT_NEAR(p.js[1], kJs2, 1e-15);
}

TEST(JointVoteMi, ExactEnumeration) {
  const std::vector<double> one{1.0}, two{1.0, 2.0}, three{0.5, -1.5, 2.5};
  EXPECT_NEAR(joint_vote_mi(one), kJs1, 1e-15);
  EXPECT_NEAR(joint_vote_mi(two), kJointMi12, 1e-15);
  EXPECT_NEAR(joint_vote_mi(three), 0.49673898155849428, 1e-15);
  // Votes overlap in what they reveal about H, so the joint value is below the sum.
  EXPECT_LT(joint_vote_mi(two), kJs1 + kJs2);
}

TEST(JointVoteMi, TopAbsDMaximizesJointMi) {
  Rng rng(17);
  for (int inst = 0; inst < 50; ++inst) {
    std::vector<double> d(8);
    for (double& x : d) x = rng.uniform(-2.0, 2.0);
    std::vector<double> abs_d(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) abs_d[i] = std::abs(d[i]);
    const auto top = top_k_indices(abs_d, 3);
    auto mi_of = [&](const std::vector<std::size_t>& ids) {
      std::vector<double> sub;
      for (std::size_t id : ids) sub.push_back(d[id]);
      return joint_vote_mi(sub);
    };
    const double top_mi = mi_of(top);
    for_each_combination(8, 3, [&](const std::vector<std::size_t>& s) {
      EXPECT_LE(mi_of(s), top_mi + 1e-15);
    });
  }
}

TEST(VerifyTheorem, Examples) {
  const TheoremReport rep =
      verify_theorem(RuleInfoProfile::from_discrepancies({3, 2, 1, 0.5}), 2, true);
  EXPECT_EQ(rep.brute_force_argmax, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(rep.top_abs_d, (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(rep.equal);
  EXPECT_EQ(rep.subsets_enumerated, 6u);
  EXPECT_EQ(rep.mi_values.size(), 6u);

  const TheoremReport tie = verify_theorem(RuleInfoProfile::from_discrepancies({1.5, -1.5, 0.2}), 1);
  EXPECT_TRUE(tie.equal);
  EXPECT_TRUE(tie.tie_at_boundary);
  EXPECT_EQ(tie.top_abs_d, (std::vector<std::size_t>{0}));

  const TheoremReport full = verify_theorem(RuleInfoProfile::from_discrepancies({0.3, -2, 1}), 3);
  EXPECT_EQ(full.brute_force_argmax, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(full.equal);
  EXPECT_THROW(verify_theorem(RuleInfoProfile::from_discrepancies({1}), 2), ArgumentError);
}

}  // namespace
}  // namespace ruleselect
