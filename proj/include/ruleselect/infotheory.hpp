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

// Entropy, KL and Jensen-Shannon divergences over signed Bernoulli
// distributions, and the mutual information between rule votes and the
// hidden preference under the conditional-independence vote model.
//
// All quantities are in nats.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ruleselect/common.hpp"
#include "ruleselect/error.hpp"

namespace ruleselect {

// Distribution on {+1, -1} with P(+1) = p_plus.
class SignedBernoulli {
 public:
  explicit SignedBernoulli(double p_plus) : p_plus_(p_plus) {
    if (!(p_plus >= 0.0 && p_plus <= 1.0)) {
      throw DomainError("SignedBernoulli: p_plus=" + std::to_string(p_plus) +
                        " outside [0,1]");
    }
  }
  double p_plus() const { return p_plus_; }
  double p_minus() const { return 1.0 - p_plus_; }
  double mass(int outcome) const { return outcome > 0 ? p_plus_ : 1.0 - p_plus_; }

 private:
  double p_plus_;
};

namespace info_detail {
// x * log(x / y) with 0 log 0 = 0; y > 0 required when x > 0.
inline double xlogxy(double x, double y) { return x > 0.0 ? x * std::log(x / y) : 0.0; }
}  // namespace info_detail

// H(p) = -p log p - (1-p) log(1-p).
inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("binary_entropy: p=" + std::to_string(p) + " outside [0,1]");
  }
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

// H(sigmoid(d)), evaluated from d directly:
//   sigmoid(d) * softplus(-d) + sigmoid(-d) * softplus(d).
// Replacing d by -d swaps the two terms, so the result is exactly even.
inline double logistic_entropy(double d) {
  return sigmoid(d) * softplus(-d) + sigmoid(-d) * softplus(d);
}

struct KlResult {
  double value = 0.0;
  // False when u puts mass where v has none; value is then +infinity.
  bool finite = true;
};

inline KlResult kl_divergence(const SignedBernoulli& u, const SignedBernoulli& v) {
  KlResult out;
  for (int outcome : {+1, -1}) {
    const double pu = u.mass(outcome);
    const double pv = v.mass(outcome);
    if (pu > 0.0 && pv == 0.0) {
      return {std::numeric_limits<double>::infinity(), false};
    }
    out.value += info_detail::xlogxy(pu, pv);
  }
  out.value = std::max(out.value, 0.0);
  return out;
}

// Half the KL of each argument against their even mixture.
inline double js_divergence(const SignedBernoulli& u, const SignedBernoulli& w) {
  const SignedBernoulli mix(0.5 * (u.p_plus() + w.p_plus()));
  const double js = 0.5 * kl_divergence(u, mix).value + 0.5 * kl_divergence(w, mix).value;
  return std::clamp(js, 0.0, kLn2);
}

// D_JS(Bern(sigmoid(d)) || Bern(sigmoid(-d))) = ln 2 - H(sigmoid(d)).
inline double js_closed_form(double d) {
  if (!std::isfinite(d)) throw DomainError("js_closed_form: non-finite d");
  return std::clamp(kLn2 - logistic_entropy(d), 0.0, kLn2);
}

// Per-rule discrepancies d_i = psi_i(A) - psi_i(B) with their JS values.
struct RuleInfoProfile {
  std::vector<double> d;
  std::vector<double> js;

  static RuleInfoProfile from_discrepancies(std::vector<double> d) {
    RuleInfoProfile p;
    p.js.reserve(d.size());
    for (double x : d) p.js.push_back(js_closed_form(x));
    p.d = std::move(d);
    return p;
  }

  static RuleInfoProfile from_scores(std::span<const double> a,
                                     std::span<const double> b) {
    if (a.size() != b.size()) throw ArgumentError("score vectors differ in length");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return from_discrepancies(std::move(d));
  }

  std::size_t size() const { return d.size(); }
};

namespace info_detail {
inline double sum_js(const RuleInfoProfile& p, std::span<const std::size_t> ids) {
  double acc = 0.0;
  for (std::size_t id : ids) acc += p.js[id];
  return acc;
}
}  // namespace info_detail

// Vote/truth mutual information of a selection as the sum of per-rule JS
// values (the additive form used by the selection theory).
inline double mi_of_selection(const RuleInfoProfile& profile,
                              std::span<const std::uint8_t> bits) {
  if (bits.size() != profile.size()) {
    throw ArgumentError("mi_of_selection: bits length " + std::to_string(bits.size()) +
                        " != profile size " + std::to_string(profile.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) acc += profile.js[i];
  }
  return acc;
}

inline double mi_of_selection(const RuleInfoProfile& profile,
                              std::span<const std::size_t> ids) {
  for (std::size_t id : ids) {
    if (id >= profile.size()) throw ArgumentError("mi_of_selection: id out of range");
  }
  return info_detail::sum_js(profile, ids);
}

// Exact I(T_s; H) of the joint vote vector, H ~ Bern(1/2) and votes
// conditionally independent with P(T_i = +1 | H = +1) = sigmoid(d_i),
// P(T_i = +1 | H = -1) = sigmoid(-d_i). Enumerates all 2^r vote patterns.
inline double joint_vote_mi(std::span<const double> d) {
  if (d.size() > 24) throw SizeError("joint_vote_mi: more than 24 votes");
  const std::uint64_t patterns = std::uint64_t{1} << d.size();
  double mi = 0.0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    // log P(t | H=+1) and log P(t | H=-1).
    double log_plus = 0.0;
    double log_minus = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const bool up = (mask >> i) & 1U;
      // log sigmoid(x) = -softplus(-x)
      log_plus -= softplus(up ? -d[i] : d[i]);
      log_minus -= softplus(up ? d[i] : -d[i]);
    }
    const double p_plus = std::exp(log_plus);
    const double p_minus = std::exp(log_minus);
    const double q = 0.5 * (p_plus + p_minus);
    if (p_plus > 0.0) mi += 0.5 * p_plus * std::log(p_plus / q);
    if (p_minus > 0.0) mi += 0.5 * p_minus * std::log(p_minus / q);
  }
  return std::clamp(mi, 0.0, kLn2);
}

struct TheoremReport {
  std::vector<std::size_t> brute_force_argmax;
  std::vector<std::size_t> top_abs_d;
  bool equal = false;
  // |d| has equal values straddling the r-th rank, so several subsets share
  // the optimum and agreement rests on lowest-id tie-breaking.
  bool tie_at_boundary = false;
  double mi_argmax = 0.0;
  double mi_top_abs_d = 0.0;
  std::size_t subsets_enumerated = 0;
  // Every subset with its MI, lexicographic order; only when requested.
  std::vector<std::pair<std::vector<std::size_t>, double>> mi_values;
};

// Enumerates every r-subset, takes the MI argmax (ties to the
// lexicographically smallest subset) and compares it with the top-r rules by
// |d| (ties to the lowest id).
inline TheoremReport verify_theorem(const RuleInfoProfile& profile, std::size_t r,
                                    bool keep_all_values = false) {
  const std::size_t n = profile.size();
  if (r < 1 || r > n) {
    throw ArgumentError("verify_theorem: r=" + std::to_string(r) + " must be in [1, " +
                        std::to_string(n) + "]");
  }
  if (binomial(n, r) > 2'000'000) {
    throw SizeError("verify_theorem: C(" + std::to_string(n) + "," + std::to_string(r) +
                    ") subsets exceed the limit");
  }
  TheoremReport report;
  double best = -std::numeric_limits<double>::infinity();
  for_each_combination(n, r, [&](const std::vector<std::size_t>& subset) {
    const double mi = info_detail::sum_js(profile, subset);
    ++report.subsets_enumerated;
    if (keep_all_values) report.mi_values.emplace_back(subset, mi);
    if (mi > best) {
      best = mi;
      report.brute_force_argmax = subset;
    }
  });
  report.mi_argmax = best;

  std::vector<double> abs_d(n);
  for (std::size_t i = 0; i < n; ++i) abs_d[i] = std::abs(profile.d[i]);
  report.top_abs_d = top_k_indices(abs_d, r);
  report.mi_top_abs_d = info_detail::sum_js(profile, report.top_abs_d);
  report.equal = report.brute_force_argmax == report.top_abs_d;
  if (r < n) {
    std::vector<double> sorted = abs_d;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    report.tie_at_boundary = sorted[r - 1] == sorted[r];
  }
  return report;
}

}  // namespace ruleselect
