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

// Monte Carlo simulation of the vote model: hidden preference H ~ Bern(1/2),
// rule votes conditionally independent given H with
// P(T_i = +1 | H = +1) = sigmoid(d_i) and P(T_i = +1 | H = -1) = sigmoid(-d_i).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ruleselect/common.hpp"
#include "ruleselect/error.hpp"
#include "ruleselect/infotheory.hpp"

namespace ruleselect {

struct SimConfig {
  std::size_t R = 100;
  std::size_t r = 5;
  std::size_t n_trios = 500;
  std::size_t n_samples = 1000;
  // d_i ~ U[d_lo, d_hi]
  double d_lo = -2.0;
  double d_hi = 2.0;
  std::size_t random_trials = 20;
  std::uint64_t seed = 0;

  static constexpr std::size_t kMinSamples = 1000;

  void validate() const {
    if (R < 1) throw ArgumentError("simulation: R must be >= 1");
    if (r < 1 || r > R) {
      throw ArgumentError("simulation: r=" + std::to_string(r) + " must be in [1, " +
                          std::to_string(R) + "]");
    }
    if (n_samples < kMinSamples) {
      throw ArgumentError("simulation: n_samples must be >= " +
                          std::to_string(kMinSamples));
    }
    if (!(d_hi >= d_lo) || !std::isfinite(d_lo) || !std::isfinite(d_hi)) {
      throw ArgumentError("simulation: invalid discrepancy interval");
    }
    if (random_trials < 1) throw ArgumentError("simulation: random_trials must be >= 1");
  }
};

struct VoteSample {
  int h = 1;                 // +1 or -1
  std::vector<std::int8_t> votes;  // +1 or -1 per rule
};

inline std::vector<VoteSample> sample_votes(std::span<const double> d, std::size_t n,
                                            std::uint64_t seed) {
  for (double x : d) {
    if (!std::isfinite(x)) throw DomainError("sample_votes: non-finite discrepancy");
  }
  std::vector<double> p_agree(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) p_agree[i] = sigmoid(d[i]);
  Rng rng(seed);
  std::vector<VoteSample> out(n);
  for (auto& s : out) {
    s.h = rng.bernoulli(0.5) ? 1 : -1;
    s.votes.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      // P(T = +1 | H = +1) = sigmoid(d), P(T = +1 | H = -1) = sigmoid(-d);
      // equivalently T = H with probability sigmoid(d).
      s.votes[i] = static_cast<std::int8_t>(rng.bernoulli(p_agree[i]) ? s.h : -s.h);
    }
  }
  return out;
}

inline constexpr std::size_t kMaxContingencyVotes = 16;

namespace sim_detail {

inline std::vector<std::size_t> selected(std::span<const std::uint8_t> bits) {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) ids.push_back(i);
  }
  return ids;
}

// Plug-in MI over the samples picked by `index` (size n).
template <typename Index>
double plug_in_mi(const std::vector<VoteSample>& samples,
                  std::span<const std::size_t> ids, std::size_t n, Index&& index) {
  const std::size_t cells = std::size_t{1} << ids.size();
  std::vector<double> joint(2 * cells, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const VoteSample& s = samples[index(k)];
    std::size_t pattern = 0;
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (s.votes[ids[j]] > 0) pattern |= std::size_t{1} << j;
    }
    joint[2 * pattern + (s.h > 0 ? 1 : 0)] += 1.0;
  }
  const double total = static_cast<double>(n);
  double h_count[2] = {0.0, 0.0};
  for (std::size_t c = 0; c < cells; ++c) {
    h_count[0] += joint[2 * c];
    h_count[1] += joint[2 * c + 1];
  }
  double mi = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    const double t_count = joint[2 * c] + joint[2 * c + 1];
    for (int h = 0; h < 2; ++h) {
      const double nth = joint[2 * c + h];
      if (nth > 0.0) mi += (nth / total) * std::log(nth * total / (t_count * h_count[h]));
    }
  }
  return std::max(mi, 0.0);
}

}  // namespace sim_detail

// Plug-in estimate of I(T_s; H) from the 2^r x 2 contingency table, in nats.
// Its bias is about (2^r - 1) / (2n).
inline double empirical_mi(const std::vector<VoteSample>& samples,
                           std::span<const std::uint8_t> bits) {
  const auto ids = sim_detail::selected(bits);
  if (ids.size() > kMaxContingencyVotes) {
    throw SizeError("empirical_mi: " + std::to_string(ids.size()) +
                    " selected votes exceed the limit of " +
                    std::to_string(kMaxContingencyVotes));
  }
  if (samples.empty()) throw ArgumentError("empirical_mi: no samples");
  for (const auto& s : samples) {
    if (s.votes.size() != bits.size()) {
      throw ArgumentError("empirical_mi: sample width differs from selection length");
    }
  }
  return sim_detail::plug_in_mi(samples, ids, samples.size(),
                                [](std::size_t k) { return k; });
}

// Standard error of empirical_mi from bootstrap resamples.
inline double bootstrap_mi_se(const std::vector<VoteSample>& samples,
                              std::span<const std::uint8_t> bits,
                              std::size_t resamples, std::uint64_t seed) {
  const auto ids = sim_detail::selected(bits);
  if (ids.size() > kMaxContingencyVotes) throw SizeError("bootstrap_mi_se: too many votes");
  if (samples.empty() || resamples < 2) {
    throw ArgumentError("bootstrap_mi_se: need samples and at least 2 resamples");
  }
  Rng rng(seed);
  const std::size_t n = samples.size();
  std::vector<std::size_t> picks(n);
  std::vector<double> values;
  values.reserve(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& p : picks) p = static_cast<std::size_t>(rng.uniform_index(n));
    values.push_back(sim_detail::plug_in_mi(samples, ids, n,
                                            [&](std::size_t k) { return picks[k]; }));
  }
  RunningMean mean;
  for (double v : values) mean.add(v);
  double ss = 0.0;
  for (double v : values) ss += (v - mean.value()) * (v - mean.value());
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

// Fraction of samples where the majority of the selected votes (ties to B,
// i.e. -1) matches H.
inline double label_agreement(const std::vector<VoteSample>& samples,
                              std::span<const std::size_t> ids) {
  if (samples.empty()) return 0.0;
  std::size_t agree = 0;
  for (const auto& s : samples) {
    int total = 0;
    for (std::size_t id : ids) total += s.votes[id];
    const int label = total > 0 ? 1 : -1;
    if (label == s.h) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Strategy comparison.

inline constexpr const char* kStrategyMaxDiscrepancy = "max-discrepancy";
inline constexpr const char* kStrategyRandom = "random";
inline constexpr const char* kStrategyFixed = "fixed";
inline constexpr const char* kStrategyAll = "all";

struct StrategyRow {
  std::size_t instance = 0;
  std::string strategy;
  double exact_mi = 0.0;
  // NaN when the selection is too wide for a contingency table.
  double empirical_mi = std::numeric_limits<double>::quiet_NaN();
  double label_agreement = 0.0;
};

struct StrategySummary {
  double mean_exact_mi = 0.0;
  double mean_empirical_mi = std::numeric_limits<double>::quiet_NaN();
  double mean_label_agreement = 0.0;
};

struct StrategyReport {
  std::vector<StrategyRow> rows;
  std::map<std::string, StrategySummary> summary;
  // Max-discrepancy exact MI was >= every other budget-r strategy on every
  // instance.
  bool dominance_holds = true;
  std::vector<std::size_t> fixed_subset;
};

// Discrepancy vector of one simulated instance.
inline std::vector<double> draw_discrepancies(const SimConfig& config,
                                              std::size_t instance) {
  Rng rng(derive_seed(derive_seed(config.seed, "discrepancy"), instance));
  std::vector<double> d(config.R);
  for (double& x : d) x = rng.uniform(config.d_lo, config.d_hi);
  return d;
}

inline StrategyReport compare_strategies(const SimConfig& config) {
  config.validate();
  StrategyReport report;
  {
    Rng rng(derive_seed(config.seed, "fixed"));
    report.fixed_subset = rng.sample_subset(config.R, config.r);
  }
  std::map<std::string, RunningMean> exact, empirical, agreement;
  std::map<std::string, bool> missing_empirical;

  auto to_bits = [&](std::span<const std::size_t> ids) {
    std::vector<std::uint8_t> bits(config.R, 0);
    for (std::size_t id : ids) bits[id] = 1;
    return bits;
  };
  std::vector<std::size_t> all_ids(config.R);
  std::iota(all_ids.begin(), all_ids.end(), std::size_t{0});

  for (std::size_t inst = 0; inst < config.n_trios; ++inst) {
    const auto d = draw_discrepancies(config, inst);
    const auto profile = RuleInfoProfile::from_discrepancies(d);
    const auto samples =
        sample_votes(d, config.n_samples, derive_seed(derive_seed(config.seed, "votes"), inst));

    auto evaluate = [&](std::span<const std::size_t> ids) {
      StrategyRow row;
      row.instance = inst;
      row.exact_mi = mi_of_selection(profile, ids);
      if (ids.size() <= kMaxContingencyVotes) {
        row.empirical_mi = empirical_mi(samples, to_bits(ids));
      }
      row.label_agreement = label_agreement(samples, ids);
      return row;
    };

    std::vector<double> abs_d(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) abs_d[i] = std::abs(d[i]);
    StrategyRow best = evaluate(top_k_indices(abs_d, config.r));
    best.strategy = kStrategyMaxDiscrepancy;

    StrategyRow random;
    random.instance = inst;
    random.strategy = kStrategyRandom;
    {
      Rng rng(derive_seed(derive_seed(config.seed, "random"), inst));
      RunningMean e, m, a;
      bool width_ok = true;
      for (std::size_t t = 0; t < config.random_trials; ++t) {
        const StrategyRow trial = evaluate(rng.sample_subset(config.R, config.r));
        e.add(trial.exact_mi);
        if (std::isnan(trial.empirical_mi)) width_ok = false; else m.add(trial.empirical_mi);
        a.add(trial.label_agreement);
        if (trial.exact_mi > best.exact_mi) report.dominance_holds = false;
      }
      random.exact_mi = e.value();
      if (width_ok) random.empirical_mi = m.value();
      random.label_agreement = a.value();
    }

    StrategyRow fixed = evaluate(report.fixed_subset);
    fixed.strategy = kStrategyFixed;
    if (fixed.exact_mi > best.exact_mi) report.dominance_holds = false;

    StrategyRow all = evaluate(all_ids);
    all.strategy = kStrategyAll;

    for (StrategyRow* row : {&best, &random, &fixed, &all}) {
      exact[row->strategy].add(row->exact_mi);
      if (std::isnan(row->empirical_mi)) {
        missing_empirical[row->strategy] = true;
      } else {
        empirical[row->strategy].add(row->empirical_mi);
      }
      agreement[row->strategy].add(row->label_agreement);
      report.rows.push_back(*row);
    }
  }

  for (const char* name : {kStrategyMaxDiscrepancy, kStrategyRandom, kStrategyFixed,
                           kStrategyAll}) {
    StrategySummary s;
    s.mean_exact_mi = exact[name].value();
    if (!missing_empirical[name]) s.mean_empirical_mi = empirical[name].value();
    s.mean_label_agreement = agreement[name].value();
    report.summary[name] = s;
  }
  return report;
}

// Fixed 12-significant-digit formatting for diff-stable reports; NaN prints
// as an empty field.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string strategy_report_csv(const StrategyReport& report) {
  std::string out = "instance,strategy,exact_mi,empirical_mi,label_agreement\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.instance) + "," + row.strategy + "," +
           format_number(row.exact_mi) + "," + format_number(row.empirical_mi) + "," +
           format_number(row.label_agreement) + "\n";
  }
  return out;
}

}  // namespace ruleselect
