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

#include "ruleselect/adapter.hpp"

#include <gtest/gtest.h>

#include <vector>

#include "test_util.hpp"

namespace ruleselect {
namespace {

// Group g contributes rule 2g when feature g is positive and rule 2g+1
// otherwise; two extra features are noise.
std::vector<AdapterExample> threshold_task(std::size_t n, std::size_t groups,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<AdapterExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    AdapterExample ex;
    for (std::size_t g = 0; g < groups + 2; ++g) ex.features.push_back(rng.uniform(-1.0, 1.0));
    for (std::size_t g = 0; g < groups; ++g) ex.target.push_back(ex.features[g] > 0 ? 2 * g : 2 * g + 1);
    out.push_back(std::move(ex));
  }
  return out;
}

TEST(Adapter, LearnsThresholdTask) {
  const AdapterConfig config{6, 3, 2.0, 2000, 1};
  const AdapterFit fit = train_adapter(threshold_task(400, 3, 1), config);
  EXPECT_LT(fit.loss_trace.back(), fit.loss_trace.front());
  EXPECT_GE(mean_jaccard(fit.model, threshold_task(200, 3, 2), 3), 0.8);
}

TEST(Adapter, LossTraceStartsAtLn2) {
  const AdapterFit fit = train_adapter(threshold_task(10, 2, 3), {4, 2, 0.5, 3, 0});
  ASSERT_EQ(fit.loss_trace.size(), 4u);
  EXPECT_DOUBLE_EQ(fit.loss_trace.front(), kLn2);
}

TEST(Adapter, MemorizesSingleExample) {
  const std::vector<AdapterExample> one{{{0.3, -1.2, 0.5}, {4, 1}}};
  const AdapterFit fit = train_adapter(one, {6, 2, 1.0, 200, 0});
  EXPECT_EQ(predict_rules(fit.model, one[0].features, 2), (std::vector<std::size_t>{1, 4}));
}

TEST(Adapter, ZeroEpochsTieBreaksToLowestIds) {
  const auto data = threshold_task(5, 3, 4);
  const AdapterFit fit = train_adapter(data, {6, 3, 1.0, 0, 0});
  EXPECT_TRUE(fit.model.trained());
  for (double a : fit.model.activations(data[0].features)) EXPECT_EQ(a, 0.5);
  EXPECT_EQ(predict_rules(fit.model, data[0].features, 3), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Adapter, PredictTopActivations) {
  AdapterModel model(3, 1);
  // Activations sigmoid(b): choose biases for [0.9, 0.1, 0.8].
  model.biases() = {std::log(9.0), std::log(1.0 / 9.0), std::log(4.0)};
  model.mark_trained();
  const std::vector<double> x{0.0};
  EXPECT_EQ(predict_rules(model, x, 2), (std::vector<std::size_t>{0, 2}));
  model.biases() = {0.0, 0.0, 0.0};
  EXPECT_EQ(predict_rules(model, x, 2), (std::vector<std::size_t>{0, 1}));
}

TEST(Adapter, Errors) {
  EXPECT_THROW(predict_rules(AdapterModel(3, 1), std::vector<double>{0.0}, 1), StateError);
  EXPECT_THROW(train_adapter({}, {}), ArgumentError);
  const std::vector<AdapterExample> dup{{{1.0}, {0, 0}}};
  EXPECT_THROW(train_adapter(dup, {3, 2, 0.1, 1, 0}), ArgumentError);
  const std::vector<AdapterExample> wrong_r{{{1.0}, {0}}};
  EXPECT_THROW(train_adapter(wrong_r, {3, 2, 0.1, 1, 0}), ArgumentError);
  auto huge = threshold_task(3, 2, 0);
  for (auto& ex : huge) {
    for (double& x : ex.features) x *= 1e200;
  }
  EXPECT_THROW(train_adapter(huge, {4, 2, 1e200, 5, 0}), DivergenceError);
}

TEST(Adapter, JsonRoundTrip) {
  const AdapterConfig config{6, 3, 1.0, 50, 9};
  const AdapterFit fit = train_adapter(threshold_task(30, 3, 5), config);
  const AdapterModel back = adapter_from_json(Json::parse(adapter_to_json(fit.model, config).dump()), "mem");
  const std::vector<double> x{0.2, -0.4, 0.9, 0.0, 0.1};
  EXPECT_EQ(back.activations(x), fit.model.activations(x));
  EXPECT_THROW(adapter_from_json(Json{{"kind", "other"}}, "mem"), ConsistencyError);
}

}  // namespace
}  // namespace ruleselect
