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

#include "ruleselect/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_util.hpp"

namespace ruleselect {
namespace {

TEST(SampleVotes, UninformativeRuleIsUncorrelated) {
  const std::size_t n = 100000;
  const auto samples = sample_votes(std::vector<double>{0.0}, n, 1);
  double corr = 0.0;
  for (const auto& s : samples) corr += s.votes[0] * s.h;
  EXPECT_LT(std::abs(corr / n), 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(SampleVotes, SaturatedRuleCopiesH) {
  const auto samples = sample_votes(std::vector<double>{50.0, -50.0}, 5000, 2);
  for (const auto& s : samples) {
    EXPECT_EQ(s.votes[0], s.h);
    EXPECT_EQ(s.votes[1], -s.h);
  }
}

TEST(SampleVotes, AgreementRateIsSigmoid) {
  const auto samples = sample_votes(std::vector<double>{1.0}, 100000, 3);
  double plus = 0, up = 0;
  for (const auto& s : samples) {
    if (s.h > 0) {
      ++plus;
      up += s.votes[0] > 0;
    }
  }
  EXPECT_NEAR(up / plus, 0.731, 0.005);
}

TEST(SampleVotes, Deterministic) {
  const std::vector<double> d{0.3, -1.0, 2.0};
  const auto a = sample_votes(d, 100, 9), b = sample_votes(d, 100, 9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].h, b[i].h);
    EXPECT_EQ(a[i].votes, b[i].votes);
  }
}

TEST(EmpiricalMi, IndependentVotesNearZero) {
  const std::vector<double> d{0.0, 0.0, 0.0};
  const auto samples = sample_votes(d, 100000, 4);
  const std::vector<std::uint8_t> bits{1, 1, 1};
  const double mi = empirical_mi(samples, bits);
  const double se = bootstrap_mi_se(samples, bits, 200, 5);
  EXPECT_LE(mi, 3.0 * se);
}

TEST(EmpiricalMi, PerfectChannelApproachesLn2) {
  const auto samples = sample_votes(std::vector<double>{50.0}, 100000, 6);
  EXPECT_NEAR(empirical_mi(samples, std::vector<std::uint8_t>{1}), kLn2, 1e-3);
}

TEST(EmpiricalMi, MatchesExactJointMi) {
  const std::vector<double> d{1.0, 2.0};
  const auto samples = sample_votes(d, 100000, 7);
  const std::vector<std::uint8_t> bits{1, 1};
  const double mi = empirical_mi(samples, bits);
  const double se = bootstrap_mi_se(samples, bits, 200, 8);
  EXPECT_LT(std::abs(mi - joint_vote_mi(d)), 3.0 * se) << mi << " se " << se;
}

TEST(EmpiricalMi, SingleRuleMatchesClosedForm) {
  const std::vector<double> d{1.5, -0.4};
  const auto samples = sample_votes(d, 100000, 9);
  const std::vector<std::uint8_t> bits{1, 0};
  const double se = bootstrap_mi_se(samples, bits, 200, 10);
  EXPECT_LT(std::abs(empirical_mi(samples, bits) - js_closed_form(1.5)), 3.0 * se);
}

TEST(EmpiricalMi, Errors) {
  const auto samples = sample_votes(std::vector<double>(17, 0.1), 10, 1);
  EXPECT_THROW(empirical_mi(samples, std::vector<std::uint8_t>(17, 1)), SizeError);
  EXPECT_THROW(empirical_mi(samples, std::vector<std::uint8_t>(3, 1)), ArgumentError);
  EXPECT_THROW(empirical_mi({}, std::vector<std::uint8_t>{1}), ArgumentError);
}

TEST(CompareStrategies, FullBudgetCoincides) {
  SimConfig config;
  config.R = 6;
  config.r = 6;
  config.n_trios = 20;
  config.seed = 3;
  const StrategyReport report = compare_strategies(config);
  for (std::size_t i = 0; i < report.rows.size(); i += 4) {
    for (std::size_t k = 1; k < 4; ++k) {
      EXPECT_NEAR(report.rows[i + k].exact_mi, report.rows[i].exact_mi, 1e-15);
      EXPECT_NEAR(report.rows[i + k].empirical_mi, report.rows[i].empirical_mi, 1e-15);
    }
  }
  EXPECT_TRUE(report.dominance_holds);
}

TEST(CompareStrategies, EqualDiscrepanciesTie) {
  SimConfig config;
  config.R = 10;
  config.r = 3;
  config.n_trios = 10;
  config.d_lo = config.d_hi = 1.0;
  const StrategyReport report = compare_strategies(config);
  const double expect = 3 * js_closed_form(1.0);
  for (const char* name : {kStrategyMaxDiscrepancy, kStrategyRandom, kStrategyFixed}) {
    EXPECT_NEAR(report.summary.at(name).mean_exact_mi, expect, 1e-14) << name;
  }
}

TEST(CompareStrategies, DefaultConfigMaxDiscrepancyWins) {
  SimConfig config;
  config.seed = 11;
  const StrategyReport report = compare_strategies(config);
  EXPECT_TRUE(report.dominance_holds);
  EXPECT_GT(report.summary.at(kStrategyMaxDiscrepancy).mean_exact_mi,
            report.summary.at(kStrategyRandom).mean_exact_mi);
  EXPECT_GT(report.summary.at(kStrategyMaxDiscrepancy).mean_exact_mi,
            report.summary.at(kStrategyFixed).mean_exact_mi);
  // The all-rules selection is too wide for a contingency table at R=100.
  EXPECT_TRUE(std::isnan(report.summary.at(kStrategyAll).mean_empirical_mi));
  EXPECT_EQ(report.rows.size(), 4 * config.n_trios);
}

TEST(CompareStrategies, CsvIsDeterministic) {
  SimConfig config;
  config.R = 12;
  config.r = 2;
  config.n_trios = 5;
  config.seed = 5;
  const std::string csv = strategy_report_csv(compare_strategies(config));
  EXPECT_EQ(csv, strategy_report_csv(compare_strategies(config)));
  EXPECT_EQ(csv.rfind("instance,strategy,exact_mi,empirical_mi,label_agreement\n", 0), 0u);
  config.seed = 6;
  EXPECT_NE(csv, strategy_report_csv(compare_strategies(config)));
}

TEST(CompareStrategies, Validation) {
  SimConfig config;
  config.n_samples = 999;
  EXPECT_THROW(compare_strategies(config), ArgumentError);
  config = SimConfig{};
  config.r = 101;
  EXPECT_THROW(compare_strategies(config), ArgumentError);
}

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(std::nan("")), "");
  EXPECT_EQ(format_number(2.0), "2");
}

}  // namespace
}  // namespace ruleselect
