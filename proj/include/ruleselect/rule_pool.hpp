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

// Rule pool storage, cosine-similarity kernels, and DPP-style subset
// selection used to prune a raw pool to a diverse subset.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ruleselect/common.hpp"
#include "ruleselect/error.hpp"
#include "ruleselect/io.hpp"

namespace ruleselect {

struct Rule {
  std::size_t id = 0;
  std::string text;
  std::vector<double> embedding;
};

class RulePool {
 public:
  RulePool() = default;

  // Validates ids (contiguous from 0, in order), a shared embedding
  // dimension, finite entries and nonzero norms.
  explicit RulePool(std::vector<Rule> rules) : rules_(std::move(rules)) {
    if (rules_.empty()) throw ArgumentError("rule pool is empty");
    const std::size_t dim = rules_.front().embedding.size();
    if (dim == 0) throw ArgumentError("rule 0 has an empty embedding");
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      const Rule& rule = rules_[i];
      if (rule.id != i) {
        throw ConsistencyError("rule at position " + std::to_string(i) +
                               " has id " + std::to_string(rule.id));
      }
      if (rule.embedding.size() != dim) {
        throw ConsistencyError("rule " + std::to_string(i) +
                               " has embedding dimension " +
                               std::to_string(rule.embedding.size()) +
                               ", expected " + std::to_string(dim));
      }
      if (!all_finite(rule.embedding)) {
        throw DomainError("rule " + std::to_string(i) +
                          " has a non-finite embedding entry");
      }
      if (dot(rule.embedding, rule.embedding) <= 0.0) {
        throw DomainError("rule " + std::to_string(i) +
                          " has a zero-norm embedding");
      }
    }
  }

  std::size_t size() const { return rules_.size(); }
  std::size_t dimension() const {
    return rules_.empty() ? 0 : rules_.front().embedding.size();
  }
  const Rule& operator[](std::size_t i) const { return rules_.at(i); }
  const std::vector<Rule>& rules() const { return rules_; }

  // New pool holding `ids` (in the given order) re-indexed from 0.
  RulePool subpool(std::span<const std::size_t> ids) const {
    std::vector<Rule> out;
    out.reserve(ids.size());
    for (std::size_t pos = 0; pos < ids.size(); ++pos) {
      Rule rule = rules_.at(ids[pos]);
      rule.id = pos;
      out.push_back(std::move(rule));
    }
    return RulePool(std::move(out));
  }

 private:
  std::vector<Rule> rules_;
};

// Cosine similarity clamped to [-1, 1].
inline double cosine_similarity(std::span<const double> a,
                                std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ArgumentError("cosine_similarity: dimension mismatch (" +
                        std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  }
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (!(na > 0.0)) throw DomainError("cosine_similarity: first vector has zero norm");
  if (!(nb > 0.0)) throw DomainError("cosine_similarity: second vector has zero norm");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

// Symmetric similarity matrix with unit diagonal.
class KernelMatrix {
 public:
  KernelMatrix() = default;

  explicit KernelMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    const auto n = entries_.rows();
    if (n == 0 || entries_.cols() != n) {
      throw ArgumentError("kernel must be a nonempty square matrix");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(entries_(i, i) - 1.0) > 1e-12) {
        throw InvariantError("kernel diagonal entry " + std::to_string(i) +
                             " is not 1");
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        const double v = entries_(i, j);
        if (!(v >= -1.0 - 1e-12 && v <= 1.0 + 1e-12)) {
          throw InvariantError("kernel entry out of [-1,1]");
        }
        if (std::abs(v - entries_(j, i)) > 1e-12) {
          throw InvariantError("kernel is not symmetric");
        }
      }
    }
  }

  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& matrix() const { return entries_; }

  Eigen::MatrixXd principal(std::span<const std::size_t> ids) const {
    const auto k = static_cast<Eigen::Index>(ids.size());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        sub(a, b) = entries_(static_cast<Eigen::Index>(ids[a]),
                             static_cast<Eigen::Index>(ids[b]));
      }
    }
    return sub;
  }

  // Determinant of the principal submatrix on `ids` (1 for the empty set).
  double subset_determinant(std::span<const std::size_t> ids) const {
    if (ids.empty()) return 1.0;
    return principal(ids).partialPivLu().determinant();
  }

 private:
  Eigen::MatrixXd entries_;
};

inline KernelMatrix build_kernel(const RulePool& pool) {
  const std::size_t n = pool.size();
  if (n == 0) throw ArgumentError("build_kernel: empty pool");
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    norms[i] = std::sqrt(dot(pool[i].embedding, pool[i].embedding));
    if (!(norms[i] > 0.0)) {
      throw DomainError("rule " + std::to_string(i) + " has a zero-norm embedding");
    }
  }
  Eigen::MatrixXd entries(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    entries(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = std::clamp(
          dot(pool[i].embedding, pool[j].embedding) / (norms[i] * norms[j]),
          -1.0, 1.0);
      entries(i, j) = c;
      entries(j, i) = c;
    }
  }
  return KernelMatrix(std::move(entries));
}

// ---------------------------------------------------------------------------
// Greedy MAP selection.

enum class DppMethod { kIncremental, kNaive };

struct DppSelection {
  std::vector<std::size_t> ids;  // in selection order
  double log_det = 0.0;          // sum of floored per-step log gains
  bool degenerate = false;       // some step had no positive marginal gain
};

namespace dpp_detail {

// log of the smallest positive double; marginal gains below this are treated
// as equal so the ordering stays stable.
inline constexpr double kLogFloor = -745.0;
// Marginal determinant ratios at or below this count as singular.
inline constexpr double kSingularTol = 1e-10;

inline double log_gain(double ratio) {
  return ratio > kSingularTol ? std::max(std::log(ratio), kLogFloor)
                              : kLogFloor;
}

// (sign, log|det|) from an LU factorization; sign 0 for an exact zero pivot.
inline std::pair<int, double> signed_log_det(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return {1, 0.0};
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu = m.partialPivLu();
  const Eigen::MatrixXd& packed = lu.matrixLU();
  int sign = static_cast<int>(lu.permutationP().determinant());
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    const double pivot = packed(i, i);
    if (pivot == 0.0) return {0, -std::numeric_limits<double>::infinity()};
    if (pivot < 0.0) sign = -sign;
    logdet += std::log(std::abs(pivot));
  }
  return {sign, logdet};
}

}  // namespace dpp_detail

// Greedily grows the selected set, at each step adding the item whose
// inclusion maximizes the determinant of the selected principal submatrix.
// Ties go to the lowest id. When every remaining gain is non-positive the
// step still picks the least-bad item and marks the result degenerate.
inline DppSelection dpp_greedy_select(const KernelMatrix& kernel, std::size_t k,
                                      DppMethod method = DppMethod::kIncremental) {
  using dpp_detail::kLogFloor;
  using dpp_detail::kSingularTol;
  const std::size_t n = kernel.size();
  if (k == 0 || k > n) {
    throw ArgumentError("dpp_greedy_select: k=" + std::to_string(k) +
                        " must be in [1, " + std::to_string(n) + "]");
  }
  DppSelection result;
  std::vector<bool> taken(n, false);

  if (method == DppMethod::kIncremental) {
    // Incremental Cholesky: cis[i] holds row i of the Cholesky factor against
    // the selected set, d2[i] the Schur complement (marginal det ratio).
    std::vector<std::vector<double>> cis(n);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = kernel(i, i);
    for (std::size_t step = 0; step < k; ++step) {
      std::size_t best = n;
      double best_gain = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        const double g = dpp_detail::log_gain(d2[i]);
        if (g > best_gain) {
          best_gain = g;
          best = i;
        }
      }
      const bool singular = !(d2[best] > kSingularTol);
      result.degenerate = result.degenerate || singular;
      result.log_det += best_gain;
      result.ids.push_back(best);
      taken[best] = true;
      const double dj = singular ? 0.0 : std::sqrt(d2[best]);
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        double e = 0.0;
        if (!singular) {
          e = (kernel(best, i) - dot(cis[best], cis[i])) / dj;
        }
        cis[i].push_back(e);
        d2[i] -= e * e;
      }
    }
    return result;
  }

  // Naive route: recompute the determinant ratio det(B+i)/det(B) for every
  // candidate, where B is the selected set minus singular picks (which the
  // incremental route also leaves out of its factor).
  std::vector<std::size_t> basis;
  double basis_logdet = 0.0;
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = n;
    double best_gain = -std::numeric_limits<double>::infinity();
    double best_logdet = 0.0;
    std::vector<std::size_t> trial = basis;
    trial.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      trial.back() = i;
      const auto [sign, logdet] = dpp_detail::signed_log_det(kernel.principal(trial));
      const double ratio = sign > 0 ? std::exp(logdet - basis_logdet) : 0.0;
      const double g = dpp_detail::log_gain(ratio);
      if (g > best_gain) {
        best_gain = g;
        best = i;
        best_logdet = logdet;
      }
    }
    const bool singular = best_gain <= kLogFloor;
    result.degenerate = result.degenerate || singular;
    result.log_det += best_gain;
    result.ids.push_back(best);
    taken[best] = true;
    if (!singular) {
      basis.push_back(best);
      basis_logdet = best_logdet;
    }
  }
  return result;
}

// Exhaustive argmax of the subset determinant. Ties go to the
// lexicographically smallest subset.
inline std::vector<std::size_t> dpp_brute_force(const KernelMatrix& kernel,
                                                std::size_t k) {
  const std::size_t n = kernel.size();
  if (n > 16) {
    throw SizeError("dpp_brute_force: pool of " + std::to_string(n) +
                    " rules exceeds the limit of 16");
  }
  if (k == 0 || k > n) {
    throw ArgumentError("dpp_brute_force: k=" + std::to_string(k) +
                        " must be in [1, " + std::to_string(n) + "]");
  }
  std::vector<std::size_t> best;
  double best_det = -std::numeric_limits<double>::infinity();
  for_each_combination(n, k, [&](const std::vector<std::size_t>& subset) {
    const double det = kernel.subset_determinant(subset);
    if (best.empty() || det > best_det + 1e-12 * std::max(1.0, std::abs(best_det))) {
      best_det = det;
      best = subset;
    }
  });
  return best;
}

// ---------------------------------------------------------------------------
// Rule pool files: one JSON object per line, {"id", "text", "embedding"}.

inline RulePool parse_rule_pool(const std::vector<Json>& rows,
                                const std::string& source) {
  std::vector<Rule> rules;
  rules.reserve(rows.size());
  for (std::size_t line = 0; line < rows.size(); ++line) {
    const std::string where = source + " line " + std::to_string(line + 1);
    Rule rule;
    rule.id = require_field<std::size_t>(rows[line], "id", where);
    rule.text = rows[line].value("text", std::string{});
    rule.embedding = require_field<std::vector<double>>(rows[line], "embedding", where);
    rules.push_back(std::move(rule));
  }
  return RulePool(std::move(rules));
}

inline RulePool read_rule_pool(const std::filesystem::path& path) {
  return parse_rule_pool(read_jsonl(path), path.string());
}

inline std::vector<Json> rule_pool_rows(const RulePool& pool) {
  std::vector<Json> rows;
  rows.reserve(pool.size());
  for (const Rule& rule : pool.rules()) {
    rows.push_back(Json{{"id", rule.id}, {"text", rule.text},
                        {"embedding", rule.embedding}});
  }
  return rows;
}

inline void write_rule_pool(const std::filesystem::path& path,
                            const RulePool& pool) {
  write_jsonl(path, rule_pool_rows(pool));
}

}  // namespace ruleselect
