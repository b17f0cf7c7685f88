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

// End-to-end orchestration: dedup -> rate -> select -> label -> train ->
// verify, hyperparameter sweeps over (r, gamma), and run manifests with
// content digests.

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ruleselect/common.hpp"
#include "ruleselect/error.hpp"
#include "ruleselect/infotheory.hpp"
#include "ruleselect/io.hpp"
#include "ruleselect/labeling.hpp"
#include "ruleselect/rating.hpp"
#include "ruleselect/reward_model.hpp"
#include "ruleselect/rule_pool.hpp"
#include "ruleselect/selection.hpp"
#include "ruleselect/simulation.hpp"

#ifndef RULESELECT_VERSION
#define RULESELECT_VERSION "0.0.0"
#endif

namespace ruleselect {

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

inline std::string file_digest(const std::filesystem::path& path) {
  return sha256_hex(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Configuration.

struct PipelineConfig {
  std::filesystem::path rules;
  std::filesystem::path trios;
  std::filesystem::path scores;  // only for the file backend
  std::filesystem::path output = "out";
  std::string backend = "synthetic";
  std::size_t dedup_k = 0;  // 0 keeps the pool as is
  SelectionConfig selection;
  double tie_epsilon = 0.0;
  bool drop_ties = false;
  TrainConfig train;
  double holdout_fraction = 0.2;
  std::vector<std::size_t> sweep_r = {1, 3, 5, 10, 15, 20, 50, 100};
  std::vector<double> sweep_gamma = {0.1, 0.5, 1.0, 2.0, 10.0};
  // Pool prefix on which the verify stage checks the MI argmax exhaustively.
  std::size_t verify_pool = 12;
  std::uint64_t seed = 0;

  // Relative paths resolve against `base_dir` (the config file's directory).
  static PipelineConfig from_json(const Json& doc,
                                  const std::filesystem::path& base_dir = {}) {
    PipelineConfig c;
    try {
      auto path_of = [&](const char* key, std::filesystem::path& out) {
        if (doc.contains(key) && !doc.at(key).is_null()) {
          std::filesystem::path p = doc.at(key).get<std::string>();
          out = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
        }
      };
      path_of("rules", c.rules);
      path_of("trios", c.trios);
      path_of("scores", c.scores);
      path_of("output", c.output);
      c.backend = doc.value("backend", c.backend);
      c.dedup_k = doc.value("dedup_k", c.dedup_k);
      c.seed = doc.value("seed", c.seed);
      c.verify_pool = doc.value("verify_pool", c.verify_pool);
      if (doc.contains("selection")) {
        const Json& s = doc.at("selection");
        c.selection.r = s.value("r", c.selection.r);
        c.selection.gamma = s.value("gamma", c.selection.gamma);
        c.selection.normalize = s.value("normalize", c.selection.normalize);
      }
      if (doc.contains("labeling")) {
        const Json& l = doc.at("labeling");
        c.tie_epsilon = l.value("tie_epsilon", c.tie_epsilon);
        c.drop_ties = l.value("drop_ties", c.drop_ties);
      }
      if (doc.contains("train")) {
        const Json& t = doc.at("train");
        c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
        c.train.epochs = t.value("epochs", c.train.epochs);
        c.train.arch = parse_architecture(t.value("arch", std::string(to_string(c.train.arch))));
        c.train.hidden_width = t.value("hidden_width", c.train.hidden_width);
        c.holdout_fraction = t.value("holdout_fraction", c.holdout_fraction);
      }
      if (doc.contains("sweep")) {
        const Json& s = doc.at("sweep");
        c.sweep_r = s.value("r", c.sweep_r);
        c.sweep_gamma = s.value("gamma", c.sweep_gamma);
      }
    } catch (const Json::exception& e) {
      throw ArgumentError(std::string("invalid pipeline config: ") + e.what());
    }
    return c;
  }

  static PipelineConfig load(const std::filesystem::path& path) {
    Json doc;
    try {
      doc = Json::parse(read_text_file(path));
    } catch (const Json::parse_error& e) {
      throw ArgumentError(path.string() + ": invalid JSON: " + e.what());
    }
    return from_json(doc, path.parent_path());
  }

  // Settings only; paths are covered by input digests in the manifest.
  Json settings_json() const {
    return Json{{"backend", backend},
                {"dedup_k", dedup_k},
                {"seed", seed},
                {"verify_pool", verify_pool},
                {"selection", {{"r", selection.r},
                               {"gamma", selection.gamma},
                               {"normalize", selection.normalize}}},
                {"labeling", {{"tie_epsilon", tie_epsilon}, {"drop_ties", drop_ties}}},
                {"train", {{"learning_rate", train.learning_rate},
                           {"epochs", train.epochs},
                           {"arch", to_string(train.arch)},
                           {"hidden_width", train.hidden_width},
                           {"holdout_fraction", holdout_fraction}}},
                {"sweep", {{"r", sweep_r}, {"gamma", sweep_gamma}}}};
  }

  Json to_json() const {
    Json doc = settings_json();
    doc["rules"] = rules.string();
    doc["trios"] = trios.string();
    if (!scores.empty()) doc["scores"] = scores.string();
    doc["output"] = output.string();
    return doc;
  }

  std::string hash() const { return sha256_hex(settings_json().dump()); }

  void validate() const {
    if (backend != "synthetic" && backend != "file") {
      throw ArgumentError("backend must be \"synthetic\" or \"file\", got \"" + backend + "\"");
    }
    if (backend == "file" && scores.empty()) {
      throw ArgumentError("the file backend needs a scores path");
    }
    if (!(selection.gamma >= 0.0)) throw ArgumentError("gamma must be >= 0");
    if (selection.r < 1) throw ArgumentError("r must be >= 1");
    if (!(tie_epsilon >= 0.0)) throw ArgumentError("tie_epsilon must be >= 0");
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
      throw ArgumentError("holdout_fraction must be in [0, 1)");
    }
    train.validate();
    for (double g : sweep_gamma) {
      if (!(g >= 0.0)) throw ArgumentError("sweep gamma values must be >= 0");
    }
    for (std::size_t r : sweep_r) {
      if (r < 1) throw ArgumentError("sweep r values must be >= 1");
    }
  }

  // Checks that need the pool size.
  void validate_against_pool(std::size_t pool_size) const {
    selection.validate(pool_size);
    for (std::size_t r : sweep_r) {
      if (r > pool_size) {
        throw ArgumentError("sweep r=" + std::to_string(r) + " exceeds pool size " +
                            std::to_string(pool_size));
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Stages. Each stage is a plain function so the CLI can run it alone.

template <typename Fn>
auto run_stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.what(), e.is_validation());
  } catch (const Json::exception& e) {
    throw StageError(name, e.what(), true);
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

struct DedupResult {
  RulePool pool;
  DppSelection selection;
};

inline DedupResult dedup_pool(const RulePool& raw, std::size_t k) {
  DppSelection sel = dpp_greedy_select(build_kernel(raw), k);
  return {raw.subpool(sel.ids), std::move(sel)};
}

inline Json dedup_report(const DedupResult& result) {
  return Json{{"k", result.selection.ids.size()},
              {"selected_original_ids", result.selection.ids},
              {"log_det", result.selection.log_det},
              {"degenerate", result.selection.degenerate}};
}

inline std::unique_ptr<RaterBackend> make_backend(const std::string& name,
                                                  const std::filesystem::path& scores) {
  if (name == "synthetic") return std::make_unique<SyntheticBackend>();
  if (name == "file") {
    if (scores.empty()) throw ArgumentError("the file backend needs --scores");
    if (!std::filesystem::exists(scores)) {
      throw IoError("scores file not found: " + scores.string());
    }
    auto rows = read_scores_raw(scores);
    const ScoreRange range = rows.empty() ? ScoreRange::signed_unit() : rows.front().score_range;
    for (const auto& row : rows) {
      if (!(row.score_range == range)) {
        throw ConsistencyError("trio " + row.trio_id + " declares a different score range");
      }
    }
    return std::make_unique<FileBackend>(std::move(rows), range);
  }
  throw ArgumentError("unknown backend \"" + name + "\"");
}

inline std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) {
  return derive_seed(seed, stage);
}

inline std::vector<TrioScores> rate_all(const RaterBackend& backend,
                                        const std::vector<Trio>& trios,
                                        const RulePool& pool, std::uint64_t seed) {
  std::vector<TrioScores> out;
  out.reserve(trios.size());
  const std::uint64_t rate_seed = stage_seed(seed, "rate");
  for (const auto& trio : trios) out.push_back(rate_trio(backend, trio, pool, rate_seed));
  return out;
}

inline std::vector<SelectionRecord> select_all(const std::vector<TrioScores>& scores,
                                               const SelectionConfig& config,
                                               bool verbose = false) {
  std::vector<SelectionRecord> out;
  out.reserve(scores.size());
  for (const auto& s : scores) {
    SelectionRecord rec{s.trio_id, select_max_discrepancy(s, config), {}};
    if (verbose) rec.per_rule_values = per_rule_values(s, config);
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<Json> selection_rows(const std::vector<SelectionRecord>& records) {
  std::vector<Json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(selection_row(r));
  return rows;
}

// Selections matched to their scores by trio_id for the pool size.
inline std::vector<SelectionRecord> read_selections(const std::filesystem::path& path,
                                                    const std::vector<TrioScores>& scores) {
  std::map<std::string, std::size_t> pool_size;
  for (const auto& s : scores) pool_size[s.trio_id] = s.size();
  const std::size_t fallback = scores.empty() ? 0 : scores.front().size();
  std::vector<SelectionRecord> out;
  const auto rows = read_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string where = path.string() + " line " + std::to_string(i + 1);
    const std::string id = require_field<std::string>(rows[i], "trio_id", where);
    auto it = pool_size.find(id);
    out.push_back(parse_selection(rows[i], it == pool_size.end() ? fallback : it->second, where));
  }
  return out;
}

// Reward-model pairs: each response is represented by its score vector mapped
// onto [0,1]; the chosen response comes first.
inline std::vector<PreferencePair> reward_pairs(const std::vector<TrioScores>& scores,
                                                const std::vector<PreferenceRecord>& records) {
  std::map<std::string, const TrioScores*> by_id;
  for (const auto& s : scores) by_id[s.trio_id] = &s;
  std::vector<PreferencePair> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    auto it = by_id.find(rec.trio_id);
    if (it == by_id.end()) throw ConsistencyError("no scores for trio " + rec.trio_id);
    const TrioScores unit = normalize_scores(*it->second, ScoreRange::unit());
    if (rec.chosen == Choice::kA) {
      out.push_back({unit.scores_a, unit.scores_b});
    } else {
      out.push_back({unit.scores_b, unit.scores_a});
    }
  }
  return out;
}

// Deterministic train/holdout split keyed on trio_id.
inline bool in_holdout(const std::string& trio_id, double fraction, std::uint64_t seed) {
  if (fraction <= 0.0) return false;
  Rng rng(derive_seed(stage_seed(seed, "split"), trio_id));
  return rng.uniform() < fraction;
}

struct RewardSplit {
  std::vector<PreferencePair> train;
  std::vector<PreferencePair> holdout;
};

inline RewardSplit split_pairs(const std::vector<PreferenceRecord>& records,
                               const std::vector<PreferencePair>& pairs, double fraction,
                               std::uint64_t seed) {
  RewardSplit split;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (in_holdout(records[i].trio_id, fraction, seed) ? split.holdout : split.train)
        .push_back(pairs[i]);
  }
  return split;
}

inline std::vector<Json> pair_rows(const std::vector<PreferencePair>& pairs) {
  std::vector<Json> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) rows.push_back(preference_pair_row(p));
  return rows;
}

// Checks the MI theory on the rated data: per trio, the exact argmax over
// r-subsets of the first `verify_pool` rules must equal the top-r rules by
// |score difference|; also reports the additive model MI of the chosen
// selections against the pure max-discrepancy sets.
inline Json verify_scores(const std::vector<TrioScores>& scores,
                          const std::vector<SelectionRecord>& selections, std::size_t r,
                          std::size_t verify_pool) {
  std::size_t checked = 0;
  std::size_t equal = 0;
  std::size_t boundary_ties = 0;
  RunningMean mi_selected, mi_max_disc;
  for (std::size_t t = 0; t < scores.size(); ++t) {
    const auto profile = RuleInfoProfile::from_scores(scores[t].scores_a, scores[t].scores_b);
    mi_selected.add(mi_of_selection(profile, selections[t].selection.bits()));
    std::vector<double> abs_d(profile.size());
    for (std::size_t i = 0; i < abs_d.size(); ++i) abs_d[i] = std::abs(profile.d[i]);
    mi_max_disc.add(mi_of_selection(profile, top_k_indices(abs_d, r)));

    const std::size_t n = std::min(verify_pool, profile.size());
    if (n >= 1 && r <= n) {
      const auto sub = RuleInfoProfile::from_discrepancies(
          std::vector<double>(profile.d.begin(), profile.d.begin() + static_cast<long>(n)));
      const TheoremReport rep = verify_theorem(sub, r);
      ++checked;
      if (rep.equal) ++equal;
      if (rep.tie_at_boundary) ++boundary_ties;
    }
  }
  return Json{{"trios", scores.size()},
              {"theorem_checked", checked},
              {"theorem_equal", equal},
              {"theorem_boundary_ties", boundary_ties},
              {"mean_mi_selected", mi_selected.value()},
              {"mean_mi_max_discrepancy", mi_max_disc.value()},
              {"units", "nats"}};
}

// ---------------------------------------------------------------------------
// Full pipeline.

struct StageRecord {
  std::string name;
  std::map<std::string, std::string> outputs;  // file name -> sha256
  double seconds = 0.0;
};

struct RunManifest {
  std::string config_hash;
  std::map<std::string, std::string> inputs;  // role -> sha256
  std::vector<StageRecord> stages;

  // Everything except wall-clock times, which live in timings_json().
  Json to_json() const {
    Json stages_json = Json::array();
    for (const auto& s : stages) stages_json.push_back({{"name", s.name}, {"outputs", s.outputs}});
    return Json{{"config_hash", config_hash},
                {"inputs", inputs},
                {"stages", stages_json},
                {"versions", {{"ruleselect", RULESELECT_VERSION},
                              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                            std::to_string(EIGEN_MINOR_VERSION)}}}};
  }

  Json timings_json() const {
    Json out = Json::object();
    for (const auto& s : stages) out[s.name] = s.seconds;
    return out;
  }
};

namespace pipeline_detail {

class StageWriter {
 public:
  StageWriter(std::filesystem::path dir, RunManifest& manifest)
      : dir_(std::move(dir)), manifest_(manifest) {}

  template <typename Fn>
  void stage(const std::string& name, Fn&& body) {
    StageRecord rec;
    rec.name = name;
    current_ = &rec;
    const auto start = std::chrono::steady_clock::now();
    run_stage(name, [&] {
      body();
      return 0;
    });
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    current_ = nullptr;
    manifest_.stages.push_back(std::move(rec));
  }

  void write(const std::string& file, const std::string& text) {
    write_text_file(dir_ / file, text);
    current_->outputs[file] = sha256_hex(text);
  }

 private:
  std::filesystem::path dir_;
  RunManifest& manifest_;
  StageRecord* current_ = nullptr;
};

}  // namespace pipeline_detail

// Runs every stage in order, writing artifacts into config.output. A failing
// stage throws StageError and leaves earlier artifacts in place.
inline RunManifest run_pipeline(const PipelineConfig& config) {
  config.validate();
  RunManifest manifest;
  manifest.config_hash = config.hash();
  const std::filesystem::path out = config.output;

  RulePool pool;
  std::vector<Trio> trios;
  run_stage("load", [&] {
    manifest.inputs["rules"] = file_digest(config.rules);
    manifest.inputs["trios"] = file_digest(config.trios);
    pool = read_rule_pool(config.rules);
    trios = read_trios(config.trios);
    return 0;
  });

  pipeline_detail::StageWriter writer(out, manifest);
  if (config.dedup_k > 0) {
    writer.stage("dedup", [&] {
      DedupResult result = dedup_pool(pool, config.dedup_k);
      writer.write("rules.jsonl", to_jsonl(rule_pool_rows(result.pool)));
      writer.write("dedup_report.json", dedup_report(result).dump(2) + "\n");
      pool = std::move(result.pool);
    });
  }
  run_stage("config", [&] {
    config.validate_against_pool(pool.size());
    return 0;
  });

  std::vector<TrioScores> scores;
  writer.stage("rate", [&] {
    auto backend = make_backend(config.backend, config.scores);
    if (config.backend == "file") manifest.inputs["scores"] = file_digest(config.scores);
    scores = rate_all(*backend, trios, pool, config.seed);
    std::vector<Json> rows;
    for (const auto& s : scores) rows.push_back(trio_scores_row(s));
    writer.write("scores.jsonl", to_jsonl(rows));
  });

  std::vector<SelectionRecord> selections;
  writer.stage("select", [&] {
    selections = select_all(scores, config.selection);
    writer.write("selections.jsonl", to_jsonl(selection_rows(selections)));
  });

  LabeledDataset labeled;
  writer.stage("label", [&] {
    labeled = build_dataset(scores, selections, config.tie_epsilon, config.drop_ties);
    writer.write("preferences.jsonl", preferences_to_jsonl(labeled.records));
    writer.write("label_summary.json", summary_json(labeled.summary).dump(2) + "\n");
  });

  writer.stage("train", [&] {
    const auto pairs = reward_pairs(scores, labeled.records);
    const RewardSplit split = split_pairs(labeled.records, pairs, config.holdout_fraction, config.seed);
    writer.write("reward_train.jsonl", to_jsonl(pair_rows(split.train)));
    writer.write("reward_holdout.jsonl", to_jsonl(pair_rows(split.holdout)));
    if (split.train.empty()) throw ArgumentError("no training pairs after the holdout split");
    TrainConfig tc = config.train;
    tc.seed = stage_seed(config.seed, "train");
    const TrainResult fit = train(split.train, tc);
    writer.write("reward_model.json", reward_model_to_json(fit.params).dump(2) + "\n");
    Json eval{{"train", {{"pairs", split.train.size()},
                         {"accuracy", evaluate(fit.params, split.train).accuracy},
                         {"mean_nll", fit.loss_trace.back()}}}};
    if (!split.holdout.empty()) {
      const Evaluation ev = evaluate(fit.params, split.holdout);
      eval["holdout"] = {{"pairs", split.holdout.size()},
                         {"accuracy", ev.accuracy},
                         {"mean_nll", ev.mean_nll}};
    }
    writer.write("reward_eval.json", eval.dump(2) + "\n");
  });

  writer.stage("verify", [&] {
    writer.write("verify.json",
                 verify_scores(scores, selections, config.selection.r, config.verify_pool).dump(2) +
                     "\n");
  });

  write_text_file(out / "manifest.json", manifest.to_json().dump(2) + "\n");
  write_text_file(out / "timings.json", manifest.timings_json().dump(2) + "\n");
  return manifest;
}

// ---------------------------------------------------------------------------
// Sweeps over (r, gamma).

struct SweepCell {
  std::size_t r = 0;
  double gamma = 0.0;
  double label_flip_rate = 0.0;
  double mean_objective = 0.0;
  double mean_exact_mi = std::numeric_limits<double>::quiet_NaN();
  double heldout_accuracy = std::numeric_limits<double>::quiet_NaN();
  std::vector<SelectionVector> selections;
  std::vector<Choice> labels;
};

struct SweepResult {
  std::size_t reference_r = 5;
  double reference_gamma = 2.0;
  std::vector<SweepCell> cells;  // r-major
};

inline constexpr std::size_t kDefaultR = 5;
inline constexpr double kDefaultGamma = 2.0;

inline SweepCell evaluate_cell(const std::vector<TrioScores>& scores, std::size_t r,
                               double gamma, const PipelineConfig& config, bool model_mi,
                               bool train_reward) {
  SweepCell cell;
  cell.r = r;
  cell.gamma = gamma;
  SelectionConfig sc = config.selection;
  sc.r = r;
  sc.gamma = gamma;
  RunningMean objective, mi;
  std::vector<PreferenceRecord> records;
  for (const auto& s : scores) {
    SelectionVector sel = select_max_discrepancy(s, sc);
    objective.add(sel.objective_value());
    if (model_mi) {
      mi.add(mi_of_selection(RuleInfoProfile::from_scores(s.scores_a, s.scores_b), sel.bits()));
    }
    PreferenceRecord rec = label_preference(s, sel, config.tie_epsilon);
    cell.labels.push_back(rec.chosen);
    if (!(rec.tie && config.drop_ties)) records.push_back(std::move(rec));
    cell.selections.push_back(std::move(sel));
  }
  cell.mean_objective = objective.value();
  if (model_mi) cell.mean_exact_mi = mi.value();
  if (train_reward && !records.empty()) {
    const auto pairs = reward_pairs(scores, records);
    const RewardSplit split = split_pairs(records, pairs, config.holdout_fraction, config.seed);
    if (!split.train.empty() && !split.holdout.empty()) {
      TrainConfig tc = config.train;
      tc.seed = stage_seed(config.seed, "train");
      cell.heldout_accuracy = evaluate(train(split.train, tc).params, split.holdout).accuracy;
    }
  }
  return cell;
}

// Label-flip rates are measured against the (r=5, gamma=2) labels, with r
// capped at the pool size.
inline SweepResult run_sweep(const PipelineConfig& config, const std::vector<TrioScores>& scores,
                             bool train_reward = true) {
  config.validate();
  if (config.sweep_r.empty() || config.sweep_gamma.empty()) {
    throw ArgumentError("sweep needs at least one r value and one gamma value");
  }
  if (scores.empty()) throw ArgumentError("sweep needs at least one rated trio");
  const std::size_t pool_size = scores.front().size();
  config.validate_against_pool(pool_size);
  const bool model_mi = config.backend == "synthetic";
  SweepResult result;
  result.reference_r = std::min(kDefaultR, pool_size);
  result.reference_gamma = kDefaultGamma;
  const SweepCell reference =
      evaluate_cell(scores, result.reference_r, result.reference_gamma, config, false, false);
  for (std::size_t r : config.sweep_r) {
    for (double gamma : config.sweep_gamma) {
      SweepCell cell = evaluate_cell(scores, r, gamma, config, model_mi, train_reward);
      std::size_t flips = 0;
      for (std::size_t t = 0; t < scores.size(); ++t) {
        if (cell.labels[t] != reference.labels[t]) ++flips;
      }
      cell.label_flip_rate = static_cast<double>(flips) / static_cast<double>(scores.size());
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

inline std::string sweep_csv(const SweepResult& result) {
  std::string out = "r,gamma,label_flip_rate,mean_objective,mean_exact_mi,heldout_accuracy\n";
  for (const auto& c : result.cells) {
    out += std::to_string(c.r) + "," + format_number(c.gamma) + "," +
           format_number(c.label_flip_rate) + "," + format_number(c.mean_objective) + "," +
           format_number(c.mean_exact_mi) + "," + format_number(c.heldout_accuracy) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Demo data.

struct DemoSpec {
  std::size_t raw_rules = 400;
  std::size_t clusters = 160;  // distinct rule directions in the raw pool
  std::size_t dim = 128;
  std::size_t trios = 1000;
  std::size_t dedup_k = 100;
  std::uint64_t seed = 2024;
};

// Writes rules_raw.jsonl, trios.jsonl and config.json into `dir`. The raw
// pool mixes distinct rule directions with exact and near duplicates of
// them, so deduplication has something to remove.
inline void make_demo(const std::filesystem::path& dir, const DemoSpec& spec) {
  if (spec.clusters == 0 || spec.clusters > spec.raw_rules || spec.dedup_k > spec.clusters ||
      spec.dim < spec.dedup_k) {
    throw ArgumentError("demo spec needs k <= clusters <= raw_rules and dim >= k");
  }
  Rng rng(derive_seed(spec.seed, "demo"));
  std::vector<std::vector<double>> centers(spec.clusters, std::vector<double>(spec.dim));
  for (auto& c : centers) {
    for (double& x : c) x = rng.normal();
  }
  std::vector<Json> rule_rows;
  for (std::size_t i = 0; i < spec.raw_rules; ++i) {
    const std::size_t cluster = i < spec.clusters ? i : rng.uniform_index(spec.clusters);
    std::vector<double> emb = centers[cluster];
    // Half the extra rules are exact copies, half are perturbed copies.
    if (i >= spec.clusters && rng.bernoulli(0.5)) {
      for (double& x : emb) x += 0.05 * rng.normal();
    }
    rule_rows.push_back(Json{{"id", i},
                             {"text", "synthetic rule " + std::to_string(i) + " (family " +
                                          std::to_string(cluster) + ")"},
                             {"embedding", emb}});
  }
  std::vector<Json> trio_rows;
  const int width = static_cast<int>(std::to_string(spec.trios).size());
  for (std::size_t t = 0; t < spec.trios; ++t) {
    std::string id = std::to_string(t);
    id = "trio-" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;
    // Prompts lean toward a few rule families.
    std::vector<double> emb(spec.dim);
    for (double& x : emb) x = 0.5 * rng.normal();
    for (int k = 0; k < 3; ++k) {
      const auto& c = centers[rng.uniform_index(spec.clusters)];
      const double w = rng.uniform(0.5, 1.5);
      for (std::size_t j = 0; j < spec.dim; ++j) emb[j] += w * c[j];
    }
    trio_rows.push_back(Json{{"trio_id", id},
                             {"prompt_id", "prompt-" + id.substr(5)},
                             {"response_a_id", id + "/a"},
                             {"response_b_id", id + "/b"},
                             {"prompt_embedding", emb}});
  }
  write_jsonl(dir / "rules_raw.jsonl", rule_rows);
  write_jsonl(dir / "trios.jsonl", trio_rows);
  PipelineConfig config;
  config.rules = "rules_raw.jsonl";
  config.trios = "trios.jsonl";
  config.output = "out";
  config.dedup_k = spec.dedup_k;
  config.seed = spec.seed;
  config.train.learning_rate = 0.1;
  config.train.epochs = 200;
  const std::size_t pool_size = spec.dedup_k > 0 ? spec.dedup_k : spec.raw_rules;
  std::erase_if(config.sweep_r, [&](std::size_t r) { return r > pool_size; });
  if (config.selection.r > pool_size) config.selection.r = pool_size;
  write_text_file(dir / "config.json", config.to_json().dump(2) + "\n");
}

}  // namespace ruleselect
