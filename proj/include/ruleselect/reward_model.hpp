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

// Bradley-Terry reward model over fixed-dimension feature vectors:
//   P(A preferred over B) = sigmoid(score(v_A) - score(v_B)),
// trained by minimizing the mean negative log-likelihood over
// (chosen, rejected) pairs with full-batch gradient descent.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ruleselect/common.hpp"
#include "ruleselect/error.hpp"
#include "ruleselect/io.hpp"

namespace ruleselect {

using FeatureVector = std::vector<double>;

struct PreferencePair {
  FeatureVector chosen;
  FeatureVector rejected;
};

enum class Architecture { kLinear, kMlp };

inline const char* to_string(Architecture a) {
  return a == Architecture::kLinear ? "linear" : "mlp";
}

inline Architecture parse_architecture(const std::string& s) {
  if (s == "linear") return Architecture::kLinear;
  if (s == "mlp") return Architecture::kMlp;
  throw ArgumentError("unknown architecture \"" + s + "\" (expected linear or mlp)");
}

// Linear: score = theta . v.
// Mlp:    score = w2 . tanh(W1 v + b1) + b2, W1 stored row-major (hidden x F).
struct RewardParams {
  Architecture arch = Architecture::kLinear;
  std::size_t features = 0;
  std::size_t hidden = 0;
  std::vector<double> theta;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;

  static RewardParams linear(std::size_t features) {
    RewardParams p;
    p.features = features;
    p.theta.assign(features, 0.0);
    return p;
  }

  static RewardParams mlp(std::size_t features, std::size_t hidden) {
    if (hidden == 0) throw ArgumentError("mlp reward model needs hidden width >= 1");
    RewardParams p;
    p.arch = Architecture::kMlp;
    p.features = features;
    p.hidden = hidden;
    p.w1.assign(hidden * features, 0.0);
    p.b1.assign(hidden, 0.0);
    p.w2.assign(hidden, 0.0);
    return p;
  }

  // Same shape, all zeros.
  RewardParams zeros_like() const {
    return arch == Architecture::kLinear ? linear(features) : mlp(features, hidden);
  }

  std::size_t parameter_count() const {
    return arch == Architecture::kLinear ? features
                                         : hidden * features + 2 * hidden + 1;
  }

  // Parameters in a fixed order: theta, or w1, b1, w2, b2.
  std::vector<double> flatten() const {
    if (arch == Architecture::kLinear) return theta;
    std::vector<double> out = w1;
    out.insert(out.end(), b1.begin(), b1.end());
    out.insert(out.end(), w2.begin(), w2.end());
    out.push_back(b2);
    return out;
  }

  void assign_flat(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
      throw ArgumentError("parameter vector has length " + std::to_string(flat.size()) +
                          ", expected " + std::to_string(parameter_count()));
    }
    if (arch == Architecture::kLinear) {
      theta.assign(flat.begin(), flat.end());
      return;
    }
    auto it = flat.begin();
    const auto hf = static_cast<long>(hidden * features);
    const auto h = static_cast<long>(hidden);
    w1.assign(it, it + hf);
    it += hf;
    b1.assign(it, it + h);
    it += h;
    w2.assign(it, it + h);
    it += h;
    b2 = *it;
  }

  bool finite() const {
    return all_finite(theta) && all_finite(w1) && all_finite(b1) && all_finite(w2) &&
           std::isfinite(b2);
  }
};

namespace reward_detail {

inline void check_dim(const RewardParams& params, std::span<const double> v) {
  if (v.size() != params.features) {
    throw ArgumentError("feature vector has dimension " + std::to_string(v.size()) +
                        ", model expects " + std::to_string(params.features));
  }
}

inline void check_dataset(const RewardParams& params,
                          const std::vector<PreferencePair>& data) {
  if (data.empty()) throw ArgumentError("empty preference dataset");
  for (const auto& pair : data) {
    check_dim(params, pair.chosen);
    check_dim(params, pair.rejected);
  }
}

// Adds `weight` * d score(v) / d params into `grad`.
inline void accumulate_score_gradient(const RewardParams& params,
                                      std::span<const double> v, double weight,
                                      RewardParams& grad) {
  if (params.arch == Architecture::kLinear) {
    for (std::size_t j = 0; j < params.features; ++j) grad.theta[j] += weight * v[j];
    return;
  }
  for (std::size_t k = 0; k < params.hidden; ++k) {
    const double pre =
        dot(std::span(params.w1).subspan(k * params.features, params.features), v) +
        params.b1[k];
    const double act = std::tanh(pre);
    grad.w2[k] += weight * act;
    const double back = weight * params.w2[k] * (1.0 - act * act);
    grad.b1[k] += back;
    for (std::size_t j = 0; j < params.features; ++j) {
      grad.w1[k * params.features + j] += back * v[j];
    }
  }
  grad.b2 += weight;
}

}  // namespace reward_detail

inline double reward_score(const RewardParams& params, std::span<const double> v) {
  reward_detail::check_dim(params, v);
  if (params.arch == Architecture::kLinear) return dot(params.theta, v);
  double out = params.b2;
  for (std::size_t k = 0; k < params.hidden; ++k) {
    const double pre =
        dot(std::span(params.w1).subspan(k * params.features, params.features), v) +
        params.b1[k];
    out += params.w2[k] * std::tanh(pre);
  }
  return out;
}

inline double pref_probability(const RewardParams& params, std::span<const double> v_a,
                               std::span<const double> v_b) {
  return sigmoid(reward_score(params, v_a) - reward_score(params, v_b));
}

// Mean of -log sigmoid(score(chosen) - score(rejected)).
inline double nll_loss(const RewardParams& params, const std::vector<PreferencePair>& data) {
  reward_detail::check_dataset(params, data);
  RunningMean loss;
  for (const auto& pair : data) {
    const double gap = reward_score(params, pair.chosen) - reward_score(params, pair.rejected);
    loss.add(softplus(-gap));
  }
  return loss.value();
}

inline RewardParams nll_gradient(const RewardParams& params,
                                 const std::vector<PreferencePair>& data) {
  reward_detail::check_dataset(params, data);
  RewardParams grad = params.zeros_like();
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (const auto& pair : data) {
    const double gap = reward_score(params, pair.chosen) - reward_score(params, pair.rejected);
    // d/dgap of softplus(-gap) is -sigmoid(-gap).
    const double w = -sigmoid(-gap) * inv_n;
    reward_detail::accumulate_score_gradient(params, pair.chosen, w, grad);
    reward_detail::accumulate_score_gradient(params, pair.rejected, -w, grad);
  }
  return grad;
}

struct TrainConfig {
  double learning_rate = 1e-2;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  Architecture arch = Architecture::kLinear;
  std::size_t hidden_width = 8;
  // Standard deviation of the seeded initial weights of the mlp.
  double init_scale = 0.1;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw ArgumentError("learning rate must be positive");
    }
  }
};

struct TrainResult {
  RewardParams params;
  std::vector<double> loss_trace;  // initial loss, then after each epoch
};

// Initial parameters: zeros for the linear model, seeded small normals for
// the mlp.
inline RewardParams initial_params(std::size_t features, const TrainConfig& config) {
  if (config.arch == Architecture::kLinear) return RewardParams::linear(features);
  RewardParams p = RewardParams::mlp(features, config.hidden_width);
  Rng rng(derive_seed(config.seed, "reward-init"));
  std::vector<double> flat = p.flatten();
  for (double& x : flat) x = config.init_scale * rng.normal();
  flat.back() = 0.0;
  p.assign_flat(flat);
  return p;
}

inline TrainResult train(const std::vector<PreferencePair>& data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw ArgumentError("train: empty preference dataset");
  TrainResult result{initial_params(data.front().chosen.size(), config), {}};
  reward_detail::check_dataset(result.params, data);
  result.loss_trace.push_back(nll_loss(result.params, data));
  std::vector<double> flat = result.params.flatten();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<double> grad = nll_gradient(result.params, data).flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] -= config.learning_rate * grad[i];
    result.params.assign_flat(flat);
    const double loss = nll_loss(result.params, data);
    if (!std::isfinite(loss) || !result.params.finite()) {
      throw DivergenceError("reward model training diverged at epoch " +
                            std::to_string(epoch));
    }
    result.loss_trace.push_back(loss);
  }
  return result;
}

struct Evaluation {
  double accuracy = 0.0;
  double mean_nll = 0.0;
};

// Pairwise accuracy (exact score ties count one half) and mean NLL.
inline Evaluation evaluate(const RewardParams& params, const std::vector<PreferencePair>& data) {
  reward_detail::check_dataset(params, data);
  double correct = 0.0;
  for (const auto& pair : data) {
    const double gap = reward_score(params, pair.chosen) - reward_score(params, pair.rejected);
    if (gap > 0.0) {
      correct += 1.0;
    } else if (gap == 0.0) {
      correct += 0.5;
    }
  }
  return {correct / static_cast<double>(data.size()), nll_loss(params, data)};
}

// ---------------------------------------------------------------------------
// Files. Training data: {"chosen_features": [...], "rejected_features": [...]}.
// Model: {"arch": "linear"|"mlp", "dims": {"features", "hidden"},
//         "weights": {"theta"} | {"w1", "b1", "w2", "b2"}}.

inline std::vector<PreferencePair> parse_preference_pairs(const std::vector<Json>& rows,
                                                          const std::string& source) {
  std::vector<PreferencePair> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string where = source + " line " + std::to_string(i + 1);
    PreferencePair pair{require_field<FeatureVector>(rows[i], "chosen_features", where),
                        require_field<FeatureVector>(rows[i], "rejected_features", where)};
    if (pair.chosen.size() != pair.rejected.size() ||
        (!out.empty() && pair.chosen.size() != out.front().chosen.size())) {
      throw ConsistencyError(where + ": feature dimension differs");
    }
    if (!all_finite(pair.chosen) || !all_finite(pair.rejected)) {
      throw DomainError(where + ": non-finite feature");
    }
    out.push_back(std::move(pair));
  }
  return out;
}

inline std::vector<PreferencePair> read_preference_pairs(const std::filesystem::path& path) {
  return parse_preference_pairs(read_jsonl(path), path.string());
}

inline Json preference_pair_row(const PreferencePair& pair) {
  return Json{{"chosen_features", pair.chosen}, {"rejected_features", pair.rejected}};
}

inline Json reward_model_to_json(const RewardParams& p) {
  Json weights;
  if (p.arch == Architecture::kLinear) {
    weights = Json{{"theta", p.theta}};
  } else {
    weights = Json{{"w1", p.w1}, {"b1", p.b1}, {"w2", p.w2}, {"b2", p.b2}};
  }
  return Json{{"arch", to_string(p.arch)},
              {"dims", Json{{"features", p.features}, {"hidden", p.hidden}}},
              {"weights", weights}};
}

inline RewardParams reward_model_from_json(const Json& doc, const std::string& where) {
  try {
    const Architecture arch = parse_architecture(doc.at("arch").get<std::string>());
    const auto features = doc.at("dims").at("features").get<std::size_t>();
    const Json& w = doc.at("weights");
    RewardParams p;
    if (arch == Architecture::kLinear) {
      p = RewardParams::linear(features);
      p.theta = w.at("theta").get<std::vector<double>>();
    } else {
      p = RewardParams::mlp(features, doc.at("dims").at("hidden").get<std::size_t>());
      p.w1 = w.at("w1").get<std::vector<double>>();
      p.b1 = w.at("b1").get<std::vector<double>>();
      p.w2 = w.at("w2").get<std::vector<double>>();
      p.b2 = w.at("b2").get<double>();
    }
    const bool shape_ok =
        arch == Architecture::kLinear
            ? p.theta.size() == features
            : p.w1.size() == p.hidden * features && p.b1.size() == p.hidden &&
                  p.w2.size() == p.hidden;
    if (!shape_ok || !p.finite()) {
      throw ConsistencyError(where + ": weights do not match dims");
    }
    return p;
  } catch (const Json::exception& e) {
    throw ConsistencyError(where + ": malformed reward model: " + e.what());
  }
}

}  // namespace ruleselect
