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

// Per-rule rating of trios through a pluggable backend.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ruleselect/common.hpp"
#include "ruleselect/error.hpp"
#include "ruleselect/io.hpp"
#include "ruleselect/rule_pool.hpp"
#include "ruleselect/selection_vector.hpp"

namespace ruleselect {

// A prompt with two candidate responses.
struct Trio {
  std::string trio_id;
  std::string prompt_id;
  std::string response_a_id;
  std::string response_b_id;
  std::optional<std::string> prompt;
  std::optional<std::string> response_a;
  std::optional<std::string> response_b;
  std::optional<std::vector<double>> prompt_embedding;
};

inline void validate_trio(const Trio& trio) {
  if (trio.response_a_id == trio.response_b_id) {
    throw InvariantError("trio " + trio.trio_id +
                         ": both responses have id " + trio.response_a_id);
  }
}

// Declared interval of rating scores.
struct ScoreRange {
  double lo = -1.0;
  double hi = 1.0;

  static ScoreRange signed_unit() { return {-1.0, 1.0}; }
  static ScoreRange unit() { return {0.0, 1.0}; }

  bool contains(double x) const { return x >= lo && x <= hi; }
  bool operator==(const ScoreRange&) const = default;

  std::string label() const {
    if (*this == signed_unit()) return "[-1,1]";
    if (*this == unit()) return "[0,1]";
    return "[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
  }

  static ScoreRange parse(const std::string& text) {
    if (text == "[-1,1]") return signed_unit();
    if (text == "[0,1]") return unit();
    throw ArgumentError("unknown score range \"" + text +
                        "\" (expected \"[-1,1]\" or \"[0,1]\")");
  }
};

struct TrioScores {
  std::string trio_id;
  std::vector<double> scores_a;
  std::vector<double> scores_b;
  std::vector<double> relevance;
  ScoreRange score_range = ScoreRange::signed_unit();

  std::size_t size() const { return scores_a.size(); }
};

inline void validate_scores(const TrioScores& s) {
  const std::size_t n = s.scores_a.size();
  if (s.scores_b.size() != n || s.relevance.size() != n) {
    throw InvariantError("trio " + s.trio_id + ": score vectors have lengths " +
                         std::to_string(s.scores_a.size()) + "/" +
                         std::to_string(s.scores_b.size()) + "/" +
                         std::to_string(s.relevance.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.score_range.contains(s.scores_a[i]) ||
        !s.score_range.contains(s.scores_b[i])) {
      throw InvariantError("trio " + s.trio_id + ", rule " + std::to_string(i) +
                           ": score outside " + s.score_range.label());
    }
    if (!(s.relevance[i] >= -1.0 && s.relevance[i] <= 1.0)) {
      throw InvariantError("trio " + s.trio_id + ", rule " + std::to_string(i) +
                           ": relevance outside [-1,1]");
    }
  }
}

// Scores of both responses of a trio under one rule.
struct RuleScore {
  double a = 0.0;
  double b = 0.0;
};

// A rater assigns each (trio, rule) pair a score per response. Implementations
// must be deterministic in (trio, rule, seed) and safe to call concurrently
// for distinct trios.
class RaterBackend {
 public:
  virtual ~RaterBackend() = default;
  virtual std::string name() const = 0;
  virtual ScoreRange score_range() const = 0;
  // Throws BackendError on failure.
  virtual RuleScore rate(const Trio& trio, const Rule& rule,
                         std::uint64_t seed) const = 0;
  // Relevance of the rule to the prompt when the backend carries it;
  // otherwise it is computed from embeddings by rate_trio.
  virtual std::optional<double> relevance(const Trio& /*trio*/,
                                          const Rule& /*rule*/) const {
    return std::nullopt;
  }
};

inline TrioScores rate_trio(const RaterBackend& backend, const Trio& trio,
                            const RulePool& pool, std::uint64_t seed) {
  validate_trio(trio);
  if (pool.size() == 0) throw ArgumentError("rate_trio: empty rule pool");
  TrioScores out;
  out.trio_id = trio.trio_id;
  out.score_range = backend.score_range();
  const std::size_t n = pool.size();
  out.scores_a.resize(n);
  out.scores_b.resize(n);
  out.relevance.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Rule& rule = pool[i];
    const RuleScore score = backend.rate(trio, rule, seed);
    if (!out.score_range.contains(score.a) || !out.score_range.contains(score.b)) {
      throw BackendError(trio.trio_id, i,
                         "score outside " + out.score_range.label());
    }
    out.scores_a[i] = score.a;
    out.scores_b[i] = score.b;
    if (auto rel = backend.relevance(trio, rule)) {
      out.relevance[i] = *rel;
    } else if (trio.prompt_embedding) {
      out.relevance[i] = cosine_similarity(*trio.prompt_embedding, rule.embedding);
    } else {
      throw BackendError(trio.trio_id, i,
                         "no relevance available (backend supplies none and "
                         "the trio has no prompt embedding)");
    }
  }
  return out;
}

// Affine map of both score vectors from their declared range onto `target`.
inline TrioScores normalize_scores(const TrioScores& scores, ScoreRange target) {
  if (!(target.hi > target.lo) || !std::isfinite(target.lo) ||
      !std::isfinite(target.hi)) {
    throw ArgumentError("normalize_scores: degenerate target interval");
  }
  const ScoreRange src = scores.score_range;
  if (!(src.hi > src.lo)) {
    throw ArgumentError("normalize_scores: degenerate source interval");
  }
  TrioScores out = scores;
  if (src == target) return out;
  const double scale = (target.hi - target.lo) / (src.hi - src.lo);
  auto map = [&](double x) {
    return std::clamp(target.lo + (x - src.lo) * scale, target.lo, target.hi);
  };
  for (double& x : out.scores_a) x = map(x);
  for (double& x : out.scores_b) x = map(x);
  out.score_range = target;
  return out;
}

struct AggregatedScores {
  double phi_a = 0.0;
  double phi_b = 0.0;
};

// Mean score of the selected rules for each response. `expected_r` is the
// budget the selection must have; pass 0 to accept any nonempty selection.
inline AggregatedScores aggregate_phi(const TrioScores& scores,
                                      const SelectionVector& selection,
                                      std::size_t expected_r = 0) {
  if (selection.pool_size() != scores.size()) {
    throw InvariantError("trio " + scores.trio_id + ": selection over " +
                         std::to_string(selection.pool_size()) +
                         " rules, scores over " + std::to_string(scores.size()));
  }
  const std::size_t r = selection.r();
  if (r == 0 || (expected_r != 0 && r != expected_r)) {
    throw InvariantError("trio " + scores.trio_id + ": selection has " +
                         std::to_string(r) + " rules, expected " +
                         std::to_string(expected_r == 0 ? 1 : expected_r) +
                         (expected_r == 0 ? " or more" : ""));
  }
  auto mean = [&](const std::vector<double>& v) {
    double sum = 0.0;
    double lo = v[selection.selected_ids().front()];
    double hi = lo;
    for (std::size_t id : selection.selected_ids()) {
      sum += v[id];
      lo = std::min(lo, v[id]);
      hi = std::max(hi, v[id]);
    }
    // The exact mean lies in [lo, hi]; clamping removes rounding overshoot.
    return std::clamp(sum / static_cast<double>(r), lo, hi);
  };
  return {mean(scores.scores_a), mean(scores.scores_b)};
}

// ---------------------------------------------------------------------------
// Backends.

// Serves precomputed scores, e.g. from an external LLM judge.
class FileBackend : public RaterBackend {
 public:
  FileBackend(std::vector<TrioScores> rows, ScoreRange range)
      : range_(range) {
    for (auto& row : rows) {
      std::string id = row.trio_id;
      if (!rows_.emplace(id, std::move(row)).second) {
        throw ConsistencyError("duplicate trio_id " + id + " in scores");
      }
    }
  }

  std::string name() const override { return "file"; }
  ScoreRange score_range() const override { return range_; }

  RuleScore rate(const Trio& trio, const Rule& rule,
                 std::uint64_t /*seed*/) const override {
    const TrioScores& row = lookup(trio, rule);
    if (rule.id >= row.scores_a.size() || rule.id >= row.scores_b.size() ||
        std::isnan(row.scores_a[rule.id]) || std::isnan(row.scores_b[rule.id])) {
      throw BackendError(trio.trio_id, rule.id, "no score in the scores file");
    }
    return {row.scores_a[rule.id], row.scores_b[rule.id]};
  }

  std::optional<double> relevance(const Trio& trio,
                                  const Rule& rule) const override {
    const TrioScores& row = lookup(trio, rule);
    if (rule.id < row.relevance.size() && !std::isnan(row.relevance[rule.id])) {
      return row.relevance[rule.id];
    }
    return std::nullopt;
  }

 private:
  const TrioScores& lookup(const Trio& trio, const Rule& rule) const {
    auto it = rows_.find(trio.trio_id);
    if (it == rows_.end()) {
      throw BackendError(trio.trio_id, rule.id, "trio missing from scores file");
    }
    return it->second;
  }

  std::map<std::string, TrioScores> rows_;
  ScoreRange range_;
};

// Generative rater following the conditional-independence vote model.
// Per trio a hidden preference h = +-1 is drawn; per (trio, rule) a
// discrepancy magnitude m ~ U[0, max_discrepancy) and a vote that agrees with
// h with probability sigmoid(sharpness * m). Scores are
//   a = base + vote * m / 2,  b = base - vote * m / 2
// with base drawn so both stay inside [-1, 1]. At the default sharpness of 1
// the observed |a - b| is exactly the channel strength of the rule's vote.
class SyntheticBackend : public RaterBackend {
 public:
  struct Options {
    double max_discrepancy = 2.0;
    double sharpness = 1.0;
  };

  SyntheticBackend() = default;
  explicit SyntheticBackend(Options options) : options_(options) {
    if (!(options_.max_discrepancy > 0.0 && options_.max_discrepancy <= 2.0)) {
      throw ArgumentError("synthetic backend: max_discrepancy must be in (0, 2]");
    }
  }

  std::string name() const override { return "synthetic"; }
  ScoreRange score_range() const override { return ScoreRange::signed_unit(); }

  // Hidden preference of a trio: +1 when A is the truly better response.
  static int hidden_preference(const Trio& trio, std::uint64_t seed) {
    Rng rng(derive_seed(derive_seed(seed, "hidden"), trio.trio_id));
    return rng.bernoulli(0.5) ? 1 : -1;
  }

  RuleScore rate(const Trio& trio, const Rule& rule,
                 std::uint64_t seed) const override {
    const int h = hidden_preference(trio, seed);
    Rng rng(derive_seed(derive_seed(seed, trio.trio_id), rule.id));
    const double m = rng.uniform() * options_.max_discrepancy;
    const int vote = rng.bernoulli(sigmoid(options_.sharpness * m)) ? h : -h;
    const double half = m / 2.0;
    const double base = rng.uniform(-1.0 + half, 1.0 - half);
    return {base + vote * half, base - vote * half};
  }

 private:
  Options options_;
};

// ---------------------------------------------------------------------------
// File formats.

inline TrioScores parse_trio_scores(const Json& row, const std::string& where) {
  TrioScores s;
  s.trio_id = require_field<std::string>(row, "trio_id", where);
  auto read_vec = [&](const char* key) {
    std::vector<double> v;
    auto it = row.find(key);
    if (it == row.end() || !it->is_array()) {
      throw ConsistencyError(where + ": missing array \"" + key + "\"");
    }
    for (const Json& x : *it) {
      v.push_back(x.is_null() ? std::nan("") : x.get<double>());
    }
    return v;
  };
  s.scores_a = read_vec("scores_a");
  s.scores_b = read_vec("scores_b");
  if (row.contains("relevance")) s.relevance = read_vec("relevance");
  s.score_range = ScoreRange::parse(row.value("score_range", std::string("[-1,1]")));
  return s;
}

inline Json trio_scores_row(const TrioScores& s) {
  return Json{{"trio_id", s.trio_id},
              {"scores_a", s.scores_a},
              {"scores_b", s.scores_b},
              {"relevance", s.relevance},
              {"score_range", s.score_range.label()}};
}

// Reads a scores file and validates each row.
inline std::vector<TrioScores> read_scores(const std::filesystem::path& path) {
  std::vector<TrioScores> out;
  const auto rows = read_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back(parse_trio_scores(
        rows[i], path.string() + " line " + std::to_string(i + 1)));
    validate_scores(out.back());
  }
  return out;
}

// Reads a scores file without validation, for the file backend, which
// reports gaps per (trio, rule).
inline std::vector<TrioScores> read_scores_raw(const std::filesystem::path& path) {
  std::vector<TrioScores> out;
  const auto rows = read_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back(parse_trio_scores(
        rows[i], path.string() + " line " + std::to_string(i + 1)));
  }
  return out;
}

inline void write_scores(const std::filesystem::path& path,
                         const std::vector<TrioScores>& scores) {
  std::vector<Json> rows;
  rows.reserve(scores.size());
  for (const auto& s : scores) rows.push_back(trio_scores_row(s));
  write_jsonl(path, rows);
}

// Trio file: {"trio_id", "prompt_id", "response_a_id", "response_b_id",
// optional "prompt", "response_a", "response_b", "prompt_embedding"}.
inline Trio parse_trio(const Json& row, const std::string& where) {
  Trio t;
  t.trio_id = require_field<std::string>(row, "trio_id", where);
  t.prompt_id = row.value("prompt_id", t.trio_id);
  t.response_a_id = row.value("response_a_id", t.trio_id + "/a");
  t.response_b_id = row.value("response_b_id", t.trio_id + "/b");
  if (row.contains("prompt")) t.prompt = row.at("prompt").get<std::string>();
  if (row.contains("response_a")) t.response_a = row.at("response_a").get<std::string>();
  if (row.contains("response_b")) t.response_b = row.at("response_b").get<std::string>();
  if (row.contains("prompt_embedding")) {
    t.prompt_embedding = row.at("prompt_embedding").get<std::vector<double>>();
  }
  return t;
}

inline Json trio_row(const Trio& t) {
  Json row{{"trio_id", t.trio_id},
           {"prompt_id", t.prompt_id},
           {"response_a_id", t.response_a_id},
           {"response_b_id", t.response_b_id}};
  if (t.prompt) row["prompt"] = *t.prompt;
  if (t.response_a) row["response_a"] = *t.response_a;
  if (t.response_b) row["response_b"] = *t.response_b;
  if (t.prompt_embedding) row["prompt_embedding"] = *t.prompt_embedding;
  return row;
}

inline std::vector<Trio> read_trios(const std::filesystem::path& path) {
  std::vector<Trio> out;
  const auto rows = read_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back(parse_trio(rows[i], path.string() + " line " + std::to_string(i + 1)));
  }
  return out;
}

}  // namespace ruleselect
