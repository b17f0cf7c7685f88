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

// Rule adapter: predicts the critical rule set of a trio from a numeric
// feature vector. One logistic head per rule, trained jointly by full-batch
// gradient descent on binary cross-entropy (multi-label, one-vs-rest).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "ruleselect/common.hpp"
#include "ruleselect/error.hpp"
#include "ruleselect/io.hpp"

namespace ruleselect {

struct AdapterExample {
  std::vector<double> features;
  std::vector<std::size_t> target;  // r distinct rule ids
};

struct AdapterConfig {
  std::size_t num_rules = 0;  // R; 0 means infer as max target id + 1
  std::size_t r = 5;
  double learning_rate = 0.5;
  std::size_t epochs = 500;
  // Recorded with the model. Full-batch training from zero weights does not
  // consume randomness.
  std::uint64_t seed = 0;
};

class AdapterModel {
 public:
  AdapterModel() = default;
  AdapterModel(std::size_t num_rules, std::size_t feature_dim)
      : weights_(num_rules, std::vector<double>(feature_dim, 0.0)),
        biases_(num_rules, 0.0),
        feature_dim_(feature_dim) {}

  std::size_t num_rules() const { return biases_.size(); }
  std::size_t feature_dim() const { return feature_dim_; }
  bool trained() const { return trained_; }
  void mark_trained() { trained_ = true; }

  std::vector<std::vector<double>>& weights() { return weights_; }
  const std::vector<std::vector<double>>& weights() const { return weights_; }
  std::vector<double>& biases() { return biases_; }
  const std::vector<double>& biases() const { return biases_; }

  // Per-head probabilities for one feature vector.
  std::vector<double> activations(std::span<const double> x) const {
    if (x.size() != feature_dim_) {
      throw ArgumentError("adapter expects " + std::to_string(feature_dim_) +
                          " features, got " + std::to_string(x.size()));
    }
    std::vector<double> out(num_rules());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = sigmoid(dot(weights_[i], x) + biases_[i]);
    }
    return out;
  }

 private:
  std::vector<std::vector<double>> weights_;
  std::vector<double> biases_;
  std::size_t feature_dim_ = 0;
  bool trained_ = false;
};

struct AdapterFit {
  AdapterModel model;
  std::vector<double> loss_trace;  // loss before training, then per epoch
};

// Mean binary cross-entropy over examples and heads.
inline double adapter_loss(const AdapterModel& model,
                           const std::vector<AdapterExample>& data) {
  RunningMean loss;
  for (const auto& ex : data) {
    std::vector<std::uint8_t> y(model.num_rules(), 0);
    for (std::size_t id : ex.target) y[id] = 1;
    for (std::size_t i = 0; i < model.num_rules(); ++i) {
      const double z = dot(model.weights()[i], ex.features) + model.biases()[i];
      loss.add(softplus(z) - (y[i] ? z : 0.0));
    }
  }
  return loss.value();
}

inline AdapterFit train_adapter(const std::vector<AdapterExample>& data,
                                const AdapterConfig& config) {
  if (data.empty()) throw ArgumentError("train_adapter: empty dataset");
  if (!(config.learning_rate > 0.0)) {
    throw ArgumentError("train_adapter: learning rate must be positive");
  }
  const std::size_t dim = data.front().features.size();
  std::size_t num_rules = config.num_rules;
  std::size_t max_id = 0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto& ex = data[n];
    if (ex.features.size() != dim) {
      throw ArgumentError("train_adapter: example " + std::to_string(n) +
                          " has " + std::to_string(ex.features.size()) +
                          " features, expected " + std::to_string(dim));
    }
    if (!all_finite(ex.features)) {
      throw DomainError("train_adapter: example " + std::to_string(n) +
                        " has non-finite features");
    }
    if (ex.target.size() != config.r) {
      throw ArgumentError("train_adapter: example " + std::to_string(n) +
                          " has " + std::to_string(ex.target.size()) +
                          " target rules, expected r=" + std::to_string(config.r));
    }
    for (std::size_t id : ex.target) max_id = std::max(max_id, id);
  }
  if (num_rules == 0) num_rules = max_id + 1;
  for (std::size_t n = 0; n < data.size(); ++n) {
    std::vector<std::uint8_t> seen(num_rules, 0);
    for (std::size_t id : data[n].target) {
      if (id >= num_rules || seen[id]) {
        throw ArgumentError("train_adapter: example " + std::to_string(n) +
                            " target is not an r-subset of the rule pool");
      }
      seen[id] = 1;
    }
  }
  if (config.r > num_rules) {
    throw ArgumentError("train_adapter: r exceeds the number of rules");
  }

  AdapterFit fit{AdapterModel(num_rules, dim), {}};
  AdapterModel& model = fit.model;
  fit.loss_trace.push_back(adapter_loss(model, data));

  const double scale = 1.0 / (static_cast<double>(data.size()) *
                              static_cast<double>(num_rules));
  std::vector<std::vector<double>> grad_w(num_rules, std::vector<double>(dim));
  std::vector<double> grad_b(num_rules);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (auto& g : grad_w) std::fill(g.begin(), g.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    for (const auto& ex : data) {
      std::vector<std::uint8_t> y(num_rules, 0);
      for (std::size_t id : ex.target) y[id] = 1;
      for (std::size_t i = 0; i < num_rules; ++i) {
        const double z = dot(model.weights()[i], ex.features) + model.biases()[i];
        const double residual = sigmoid(z) - (y[i] ? 1.0 : 0.0);
        for (std::size_t j = 0; j < dim; ++j) grad_w[i][j] += residual * ex.features[j];
        grad_b[i] += residual;
      }
    }
    for (std::size_t i = 0; i < num_rules; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        model.weights()[i][j] -= config.learning_rate * scale * grad_w[i][j];
      }
      model.biases()[i] -= config.learning_rate * scale * grad_b[i];
    }
    const double loss = adapter_loss(model, data);
    if (!std::isfinite(loss)) {
      throw DivergenceError("train_adapter: loss became non-finite at epoch " +
                            std::to_string(epoch));
    }
    fit.loss_trace.push_back(loss);
  }
  model.mark_trained();
  return fit;
}

// Top-r heads by activation; ties go to the lowest rule id.
inline std::vector<std::size_t> predict_rules(const AdapterModel& model,
                                              std::span<const double> features,
                                              std::size_t r) {
  if (!model.trained()) throw StateError("predict_rules: adapter is not trained");
  if (r < 1 || r > model.num_rules()) {
    throw ArgumentError("predict_rules: r must be in [1, " +
                        std::to_string(model.num_rules()) + "]");
  }
  return top_k_indices(model.activations(features), r);
}

// Mean Jaccard index between predicted and target rule sets.
inline double mean_jaccard(const AdapterModel& model,
                           const std::vector<AdapterExample>& data,
                           std::size_t r) {
  RunningMean jac;
  for (const auto& ex : data) {
    const auto pred = predict_rules(model, ex.features, r);
    std::vector<std::size_t> target = ex.target;
    std::sort(target.begin(), target.end());
    std::vector<std::size_t> inter;
    std::set_intersection(pred.begin(), pred.end(), target.begin(), target.end(),
                          std::back_inserter(inter));
    const double uni = static_cast<double>(pred.size() + target.size() - inter.size());
    jac.add(uni == 0.0 ? 1.0 : static_cast<double>(inter.size()) / uni);
  }
  return jac.value();
}

// ---------------------------------------------------------------------------
// Files. Training data: {"features": [...], "target": [ids...]}.
// Model: {"kind": "rule-adapter", "num_rules", "feature_dim", "r", "seed",
// "weights", "biases"}.

inline std::vector<AdapterExample> read_adapter_data(const std::filesystem::path& path) {
  std::vector<AdapterExample> out;
  const auto rows = read_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string where = path.string() + " line " + std::to_string(i + 1);
    out.push_back({require_field<std::vector<double>>(rows[i], "features", where),
                   require_field<std::vector<std::size_t>>(rows[i], "target", where)});
  }
  return out;
}

inline Json adapter_to_json(const AdapterModel& model, const AdapterConfig& config) {
  return Json{{"kind", "rule-adapter"},
              {"num_rules", model.num_rules()},
              {"feature_dim", model.feature_dim()},
              {"r", config.r},
              {"seed", config.seed},
              {"weights", model.weights()},
              {"biases", model.biases()}};
}

inline AdapterModel adapter_from_json(const Json& doc, const std::string& where) {
  if (doc.value("kind", std::string{}) != "rule-adapter") {
    throw ConsistencyError(where + ": not a rule-adapter model");
  }
  const auto num_rules = require_field<std::size_t>(doc, "num_rules", where);
  const auto dim = require_field<std::size_t>(doc, "feature_dim", where);
  AdapterModel model(num_rules, dim);
  model.weights() = require_field<std::vector<std::vector<double>>>(doc, "weights", where);
  model.biases() = require_field<std::vector<double>>(doc, "biases", where);
  if (model.weights().size() != num_rules || model.biases().size() != num_rules) {
    throw ConsistencyError(where + ": expected " + std::to_string(num_rules) + " heads");
  }
  for (const auto& w : model.weights()) {
    if (w.size() != dim || !all_finite(w)) {
      throw ConsistencyError(where + ": malformed head weights");
    }
  }
  model.mark_trained();
  return model;
}

}  // namespace ruleselect
