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

// Command-line front end: one subcommand per pipeline stage plus the
// simulation, verification, sweep, and full-run drivers.
//
// Exit codes: 0 success, 2 validation error, 3 stage failure.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ruleselect/adapter.hpp"
#include "ruleselect/infotheory.hpp"
#include "ruleselect/labeling.hpp"
#include "ruleselect/pipeline.hpp"
#include "ruleselect/rating.hpp"
#include "ruleselect/reward_model.hpp"
#include "ruleselect/rule_pool.hpp"
#include "ruleselect/selection.hpp"
#include "ruleselect/simulation.hpp"

namespace fs = std::filesystem;
using namespace ruleselect;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitStage = 3;

// Values from a --config JSON document fill any option not given on the
// command line.
class ConfigOverlay {
 public:
  explicit ConfigOverlay(CLI::App* app) : app_(app) {
    app_->add_option("--config", path_, "JSON config file; flags override its values");
  }

  template <typename T>
  void bind(const std::string& option, T& target, const std::string& pointer) {
    bindings_.push_back([this, option, &target, pointer](const Json& doc, const fs::path&) {
      const Json::json_pointer ptr(pointer);
      if (app_->count(option) == 0 && doc.contains(ptr) && !doc.at(ptr).is_null()) {
        target = doc.at(ptr).template get<T>();
      }
    });
  }

  void bind_path(const std::string& option, std::string& target, const std::string& pointer) {
    bindings_.push_back([this, option, &target, pointer](const Json& doc, const fs::path& base) {
      const Json::json_pointer ptr(pointer);
      if (app_->count(option) == 0 && doc.contains(ptr) && !doc.at(ptr).is_null()) {
        fs::path p = doc.at(ptr).get<std::string>();
        target = (p.is_absolute() || base.empty() ? p : base / p).string();
      }
    });
  }

  // The parsed config document (empty object without --config).
  Json apply() const {
    if (path_.empty()) return Json::object();
    Json doc;
    try {
      doc = Json::parse(read_text_file(path_));
    } catch (const Json::parse_error& e) {
      throw ArgumentError(path_ + ": invalid JSON: " + e.what());
    }
    try {
      for (const auto& b : bindings_) b(doc, fs::path(path_).parent_path());
    } catch (const Json::exception& e) {
      throw ArgumentError(path_ + ": " + e.what());
    }
    return doc;
  }

  const std::string& path() const { return path_; }

 private:
  CLI::App* app_;
  std::string path_;
  std::vector<std::function<void(const Json&, const fs::path&)>> bindings_;
};

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ArgumentError(std::string("missing required option ") + flag);
}

std::pair<double, double> parse_interval(const std::string& lo_hi) {
  const auto colon = lo_hi.find(':');
  if (colon == std::string::npos) throw ArgumentError("expected LO:HI, got " + lo_hi);
  return {std::stod(lo_hi.substr(0, colon)), std::stod(lo_hi.substr(colon + 1))};
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ruleselect: data-adaptive rule selection for preference labeling"};
  app.require_subcommand(1);
  std::function<int()> action;

  // dedup ------------------------------------------------------------------
  struct {
    std::string rules, out, report;
    std::size_t k = 0;
  } dedup;
  auto* dedup_cmd = app.add_subcommand("dedup", "Prune a rule pool to k diverse rules");
  ConfigOverlay dedup_cfg(dedup_cmd);
  dedup_cmd->add_option("--rules", dedup.rules, "Rule pool (JSON Lines)");
  dedup_cmd->add_option("--k", dedup.k, "Number of rules to keep");
  dedup_cmd->add_option("--out", dedup.out, "Output rule pool");
  dedup_cmd->add_option("--report", dedup.report, "Sidecar report (default <out>.report.json)");
  dedup_cfg.bind_path("--rules", dedup.rules, "/rules");
  dedup_cfg.bind("--k", dedup.k, "/dedup_k");
  dedup_cmd->callback([&] {
    action = [&] {
      dedup_cfg.apply();
      require(dedup.rules, "--rules");
      require(dedup.out, "--out");
      const RulePool raw = read_rule_pool(dedup.rules);
      const DedupResult result = run_stage("dedup", [&] { return dedup_pool(raw, dedup.k); });
      write_rule_pool(dedup.out, result.pool);
      write_text_file(dedup.report.empty() ? dedup.out + ".report.json" : dedup.report,
                      dedup_report(result).dump(2) + "\n");
      return 0;
    };
  });

  // rate -------------------------------------------------------------------
  struct {
    std::string trios, rules, backend = "synthetic", scores, out;
    std::uint64_t seed = 0;
  } rate;
  auto* rate_cmd = app.add_subcommand("rate", "Score every trio under every rule");
  ConfigOverlay rate_cfg(rate_cmd);
  rate_cmd->add_option("--trios", rate.trios, "Trio file (JSON Lines)");
  rate_cmd->add_option("--rules", rate.rules, "Rule pool (JSON Lines)");
  rate_cmd->add_option("--backend", rate.backend, "synthetic | file")
      ->check(CLI::IsMember({"synthetic", "file"}));
  rate_cmd->add_option("--scores", rate.scores, "Precomputed scores for the file backend");
  rate_cmd->add_option("--seed", rate.seed, "Global seed");
  rate_cmd->add_option("--out", rate.out, "Output scores file");
  rate_cfg.bind_path("--trios", rate.trios, "/trios");
  rate_cfg.bind_path("--rules", rate.rules, "/rules");
  rate_cfg.bind("--backend", rate.backend, "/backend");
  rate_cfg.bind_path("--scores", rate.scores, "/scores");
  rate_cfg.bind("--seed", rate.seed, "/seed");
  rate_cmd->callback([&] {
    action = [&] {
      rate_cfg.apply();
      require(rate.trios, "--trios");
      require(rate.rules, "--rules");
      require(rate.out, "--out");
      const RulePool pool = read_rule_pool(rate.rules);
      const auto trios = read_trios(rate.trios);
      const auto scores = run_stage("rate", [&] {
        auto backend = make_backend(rate.backend, rate.scores);
        return rate_all(*backend, trios, pool, rate.seed);
      });
      write_scores(rate.out, scores);
      return 0;
    };
  });

  // select -----------------------------------------------------------------
  struct {
    std::string scores, out;
    std::size_t r = 5;
    double gamma = 2.0;
    bool no_normalize = false, verbose = false;
  } select;
  auto* select_cmd = app.add_subcommand("select", "Pick the r critical rules per trio");
  ConfigOverlay select_cfg(select_cmd);
  select_cmd->add_option("--scores", select.scores, "Scores file");
  select_cmd->add_option("--r", select.r, "Rule budget");
  select_cmd->add_option("--gamma", select.gamma, "Relevance weight");
  select_cmd->add_flag("--no-normalize", select.no_normalize, "Keep raw score range");
  select_cmd->add_flag("--verbose", select.verbose, "Also write per-rule values");
  select_cmd->add_option("--out", select.out, "Output selections file");
  select_cfg.bind_path("--scores", select.scores, "/scores");
  select_cfg.bind("--r", select.r, "/selection/r");
  select_cfg.bind("--gamma", select.gamma, "/selection/gamma");
  select_cmd->callback([&] {
    action = [&] {
      const Json doc = select_cfg.apply();
      require(select.scores, "--scores");
      require(select.out, "--out");
      SelectionConfig sc{select.r, select.gamma, !select.no_normalize};
      if (select_cmd->count("--no-normalize") == 0 && doc.contains("selection")) {
        sc.normalize = doc["selection"].value("normalize", true);
      }
      const auto scores = read_scores(select.scores);
      const auto records = run_stage("select", [&] { return select_all(scores, sc, select.verbose); });
      write_jsonl(select.out, selection_rows(records));
      return 0;
    };
  });

  // adapter-train ------------------------------------------------------------
  struct {
    std::string data, out;
    AdapterConfig config;
  } atrain;
  auto* atrain_cmd = app.add_subcommand("adapter-train", "Train the rule adapter");
  ConfigOverlay atrain_cfg(atrain_cmd);
  atrain_cmd->add_option("--data", atrain.data, "Training data: {features, target}");
  atrain_cmd->add_option("--r", atrain.config.r, "Rules per example");
  atrain_cmd->add_option("--num-rules", atrain.config.num_rules, "Pool size (default: inferred)");
  atrain_cmd->add_option("--epochs", atrain.config.epochs, "Full-batch epochs");
  atrain_cmd->add_option("--lr", atrain.config.learning_rate, "Learning rate");
  atrain_cmd->add_option("--seed", atrain.config.seed, "Seed recorded with the model");
  atrain_cmd->add_option("--out", atrain.out, "Model file");
  atrain_cfg.bind("--r", atrain.config.r, "/selection/r");
  atrain_cfg.bind("--seed", atrain.config.seed, "/seed");
  atrain_cmd->callback([&] {
    action = [&] {
      atrain_cfg.apply();
      require(atrain.data, "--data");
      require(atrain.out, "--out");
      const auto data = read_adapter_data(atrain.data);
      const AdapterFit fit = run_stage("adapter-train", [&] { return train_adapter(data, atrain.config); });
      Json doc = adapter_to_json(fit.model, atrain.config);
      doc["final_loss"] = fit.loss_trace.back();
      write_text_file(atrain.out, doc.dump(2) + "\n");
      return 0;
    };
  });

  // adapter-predict ----------------------------------------------------------
  struct {
    std::string model, features, out;
    std::size_t r = 0;
  } apredict;
  auto* apredict_cmd = app.add_subcommand("adapter-predict", "Predict critical rules");
  ConfigOverlay apredict_cfg(apredict_cmd);
  apredict_cmd->add_option("--model", apredict.model, "Model file");
  apredict_cmd->add_option("--features", apredict.features, "Feature rows: {features}");
  apredict_cmd->add_option("--r", apredict.r, "Rules to predict (default: model's r)");
  apredict_cmd->add_option("--out", apredict.out, "Output predictions");
  apredict_cfg.bind("--r", apredict.r, "/selection/r");
  apredict_cmd->callback([&] {
    action = [&] {
      apredict_cfg.apply();
      require(apredict.model, "--model");
      require(apredict.features, "--features");
      require(apredict.out, "--out");
      const Json doc = Json::parse(read_text_file(apredict.model));
      const AdapterModel model = adapter_from_json(doc, apredict.model);
      const std::size_t r = apredict.r != 0 ? apredict.r : doc.value("r", std::size_t{5});
      const auto rows = read_jsonl(apredict.features);
      std::vector<Json> out;
      run_stage("adapter-predict", [&] {
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const std::string where = apredict.features + " line " + std::to_string(i + 1);
          const auto x = require_field<std::vector<double>>(rows[i], "features", where);
          Json row{{"index", i}, {"selected_rules", predict_rules(model, x, r)}};
          if (rows[i].contains("trio_id")) row["trio_id"] = rows[i]["trio_id"];
          out.push_back(std::move(row));
        }
        return 0;
      });
      write_jsonl(apredict.out, out);
      return 0;
    };
  });

  // label ------------------------------------------------------------------
  struct {
    std::string scores, selections, out, summary;
    double tie_epsilon = 0.0;
    bool drop_ties = false;
  } label;
  auto* label_cmd = app.add_subcommand("label", "Turn selections into preference labels");
  ConfigOverlay label_cfg(label_cmd);
  label_cmd->add_option("--scores", label.scores, "Scores file");
  label_cmd->add_option("--selections", label.selections, "Selections file");
  label_cmd->add_option("--tie-epsilon", label.tie_epsilon, "Gap treated as a tie");
  label_cmd->add_flag("--drop-ties", label.drop_ties, "Omit tied trios");
  label_cmd->add_option("--out", label.out, "Output preference file");
  label_cmd->add_option("--summary", label.summary, "Summary JSON (default: stderr)");
  label_cfg.bind_path("--scores", label.scores, "/scores");
  label_cfg.bind("--tie-epsilon", label.tie_epsilon, "/labeling/tie_epsilon");
  label_cfg.bind("--drop-ties", label.drop_ties, "/labeling/drop_ties");
  label_cmd->callback([&] {
    action = [&] {
      label_cfg.apply();
      require(label.scores, "--scores");
      require(label.selections, "--selections");
      require(label.out, "--out");
      const auto scores = read_scores(label.scores);
      const auto selections = read_selections(label.selections, scores);
      const LabeledDataset ds = run_stage("label", [&] {
        return build_dataset(scores, selections, label.tie_epsilon, label.drop_ties);
      });
      write_text_file(label.out, preferences_to_jsonl(ds.records));
      const std::string summary = summary_json(ds.summary).dump(2) + "\n";
      if (label.summary.empty()) {
        std::cerr << summary;
      } else {
        write_text_file(label.summary, summary);
      }
      return 0;
    };
  });

  // train-rm ---------------------------------------------------------------
  struct {
    std::string data, out, arch = "linear";
    TrainConfig config;
    std::uint64_t seed = 0;
  } trm;
  auto* trm_cmd = app.add_subcommand("train-rm", "Train a Bradley-Terry reward model");
  ConfigOverlay trm_cfg(trm_cmd);
  trm_cmd->add_option("--data", trm.data, "Pairs: {chosen_features, rejected_features}");
  trm_cmd->add_option("--arch", trm.arch, "linear | mlp")->check(CLI::IsMember({"linear", "mlp"}));
  trm_cmd->add_option("--hidden", trm.config.hidden_width, "Hidden width for mlp");
  trm_cmd->add_option("--lr", trm.config.learning_rate, "Learning rate");
  trm_cmd->add_option("--epochs", trm.config.epochs, "Full-batch epochs");
  trm_cmd->add_option("--seed", trm.seed, "Global seed");
  trm_cmd->add_option("--out", trm.out, "Model file");
  trm_cfg.bind("--arch", trm.arch, "/train/arch");
  trm_cfg.bind("--hidden", trm.config.hidden_width, "/train/hidden_width");
  trm_cfg.bind("--lr", trm.config.learning_rate, "/train/learning_rate");
  trm_cfg.bind("--epochs", trm.config.epochs, "/train/epochs");
  trm_cfg.bind("--seed", trm.seed, "/seed");
  trm_cmd->callback([&] {
    action = [&] {
      trm_cfg.apply();
      require(trm.data, "--data");
      require(trm.out, "--out");
      trm.config.arch = parse_architecture(trm.arch);
      trm.config.seed = stage_seed(trm.seed, "train");
      const auto pairs = read_preference_pairs(trm.data);
      const TrainResult fit = run_stage("train-rm", [&] { return train(pairs, trm.config); });
      write_text_file(trm.out, reward_model_to_json(fit.params).dump(2) + "\n");
      std::cerr << "final loss " << format_number(fit.loss_trace.back()) << "\n";
      return 0;
    };
  });

  // eval-rm ----------------------------------------------------------------
  struct {
    std::string model, data;
  } erm;
  auto* erm_cmd = app.add_subcommand("eval-rm", "Pairwise accuracy and NLL of a reward model");
  ConfigOverlay erm_cfg(erm_cmd);
  erm_cmd->add_option("--model", erm.model, "Model file");
  erm_cmd->add_option("--data", erm.data, "Pairs file");
  erm_cmd->callback([&] {
    action = [&] {
      erm_cfg.apply();
      require(erm.model, "--model");
      require(erm.data, "--data");
      const RewardParams params =
          reward_model_from_json(Json::parse(read_text_file(erm.model)), erm.model);
      const auto pairs = read_preference_pairs(erm.data);
      const Evaluation ev = run_stage("eval-rm", [&] { return evaluate(params, pairs); });
      std::cout << Json{{"accuracy", ev.accuracy}, {"mean_nll", ev.mean_nll}, {"pairs", pairs.size()}}.dump()
                << "\n";
      return 0;
    };
  });

  // simulate ---------------------------------------------------------------
  SimConfig sim;
  std::string sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "Compare selection strategies under the vote model");
  ConfigOverlay sim_cfg(sim_cmd);
  sim_cmd->add_option("--R", sim.R, "Pool size");
  sim_cmd->add_option("--r", sim.r, "Budget");
  sim_cmd->add_option("--trios", sim.n_trios, "Instances");
  sim_cmd->add_option("--samples", sim.n_samples, "Monte Carlo samples per instance (>= 1000)");
  sim_cmd->add_option("--random-trials", sim.random_trials, "Random subsets per instance");
  sim_cmd->add_option("--seed", sim.seed, "Seed");
  sim_cmd->add_option("--out", sim_out, "CSV output (default stdout)");
  sim_cfg.bind("--r", sim.r, "/selection/r");
  sim_cfg.bind("--seed", sim.seed, "/seed");
  sim_cmd->callback([&] {
    action = [&] {
      sim_cfg.apply();
      const StrategyReport report = run_stage("simulate", [&] { return compare_strategies(sim); });
      emit(sim_out, strategy_report_csv(report));
      for (const auto& [name, s] : report.summary) {
        std::cerr << name << ": mean_exact_mi=" << format_number(s.mean_exact_mi)
                  << " mean_empirical_mi=" << format_number(s.mean_empirical_mi)
                  << " mean_label_agreement=" << format_number(s.mean_label_agreement) << "\n";
      }
      std::cerr << "dominance " << (report.dominance_holds ? "holds" : "VIOLATED") << "\n";
      return report.dominance_holds ? 0 : kExitStage;
    };
  });

  // verify -----------------------------------------------------------------
  auto* verify_cmd = app.add_subcommand("verify", "Exact checks of the information theory");
  verify_cmd->require_subcommand(1);
  struct {
    std::size_t R = 10, r = 3, instances = 100;
    std::uint64_t seed = 0;
    std::string out, interval = "-2:2";
  } vt;
  auto* vt_cmd = verify_cmd->add_subcommand("theorem", "Brute-force MI argmax vs top-r by |d|");
  ConfigOverlay vt_cfg(vt_cmd);
  vt_cmd->add_option("--R", vt.R, "Pool size");
  vt_cmd->add_option("--r", vt.r, "Budget");
  vt_cmd->add_option("--instances", vt.instances, "Random instances");
  vt_cmd->add_option("--seed", vt.seed, "Seed");
  vt_cmd->add_option("--d-range", vt.interval, "Discrepancy interval LO:HI");
  vt_cmd->add_option("--out", vt.out, "CSV output (default stdout)");
  vt_cfg.bind("--seed", vt.seed, "/seed");
  vt_cmd->callback([&] {
    action = [&] {
      vt_cfg.apply();
      const auto [lo, hi] = parse_interval(vt.interval);
      std::string csv = "instance,equal,mi_winner,mi_top_abs_d\n";
      std::size_t equal = 0;
      run_stage("verify", [&] {
        for (std::size_t inst = 0; inst < vt.instances; ++inst) {
          Rng rng(derive_seed(derive_seed(vt.seed, "verify"), inst));
          std::vector<double> d(vt.R);
          for (double& x : d) x = rng.uniform(lo, hi);
          const TheoremReport rep = verify_theorem(RuleInfoProfile::from_discrepancies(d), vt.r);
          if (rep.equal) ++equal;
          csv += std::to_string(inst) + "," + (rep.equal ? "true" : "false") + "," +
                 format_number(rep.mi_argmax) + "," + format_number(rep.mi_top_abs_d) + "\n";
        }
        return 0;
      });
      emit(vt.out, csv);
      std::cerr << equal << "/" << vt.instances << " instances agree\n";
      return equal == vt.instances ? 0 : kExitStage;
    };
  });
  struct {
    std::string grid = "-10:10:2001", out;
  } vl;
  auto* vl_cmd = verify_cmd->add_subcommand("lemmas", "Closed-form vs direct JS divergence");
  ConfigOverlay vl_cfg(vl_cmd);
  vl_cmd->add_option("--grid", vl.grid, "LO:HI:N evenly spaced points");
  vl_cmd->add_option("--out", vl.out, "CSV output (default stdout)");
  vl_cmd->callback([&] {
    action = [&] {
      vl_cfg.apply();
      const auto last = vl.grid.rfind(':');
      if (last == std::string::npos) throw ArgumentError("--grid expects LO:HI:N");
      const auto [lo, hi] = parse_interval(vl.grid.substr(0, last));
      const std::size_t n = std::stoul(vl.grid.substr(last + 1));
      if (n < 2 || !(hi > lo)) throw ArgumentError("--grid needs N >= 2 and HI > LO");
      std::string csv = "d,js_direct,js_closed_form,abs_diff,even_diff\n";
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double direct = js_divergence(SignedBernoulli(sigmoid(d)), SignedBernoulli(sigmoid(-d)));
        const double closed = js_closed_form(d);
        const double diff = std::abs(direct - closed);
        worst = std::max(worst, diff);
        csv += format_number(d) + "," + format_number(direct) + "," + format_number(closed) + "," +
               format_number(diff) + "," + format_number(std::abs(closed - js_closed_form(-d))) + "\n";
      }
      emit(vl.out, csv);
      std::cerr << "max |direct - closed form| = " << format_number(worst) << "\n";
      return 0;
    };
  });

  // sweep ------------------------------------------------------------------
  struct {
    std::string out, scores;
    bool no_train = false;
  } sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid over (r, gamma) with label-flip metrics");
  std::string sweep_config;
  sweep_cmd->add_option("--config", sweep_config, "Pipeline config")->required();
  sweep_cmd->add_option("--scores", sw.scores, "Use this scores file instead of rating");
  sweep_cmd->add_flag("--no-train", sw.no_train, "Skip reward-model training per cell");
  sweep_cmd->add_option("--out", sw.out, "CSV output (default stdout)");
  sweep_cmd->callback([&] {
    action = [&] {
      PipelineConfig cfg = PipelineConfig::load(sweep_config);
      cfg.validate();
      std::vector<TrioScores> scores;
      if (!sw.scores.empty()) {
        scores = read_scores(sw.scores);
      } else {
        RulePool pool = read_rule_pool(cfg.rules);
        if (cfg.dedup_k > 0) pool = run_stage("dedup", [&] { return dedup_pool(pool, cfg.dedup_k); }).pool;
        const auto trios = read_trios(cfg.trios);
        scores = run_stage("rate", [&] {
          auto backend = make_backend(cfg.backend, cfg.scores);
          return rate_all(*backend, trios, pool, cfg.seed);
        });
      }
      const SweepResult result = run_stage("sweep", [&] { return run_sweep(cfg, scores, !sw.no_train); });
      emit(sw.out, sweep_csv(result));
      return 0;
    };
  });

  // run --------------------------------------------------------------------
  std::string run_config, run_output;
  auto* run_cmd = app.add_subcommand("run", "Full pipeline: dedup, rate, select, label, train, verify");
  run_cmd->add_option("--config", run_config, "Pipeline config")->required();
  run_cmd->add_option("--output", run_output, "Override the output directory");
  run_cmd->callback([&] {
    action = [&] {
      PipelineConfig cfg = PipelineConfig::load(run_config);
      if (!run_output.empty()) cfg.output = run_output;
      const RunManifest manifest = run_pipeline(cfg);
      std::cerr << "config " << manifest.config_hash << ", wrote " << cfg.output.string() << "\n";
      return 0;
    };
  });

  // make-demo --------------------------------------------------------------
  DemoSpec demo;
  std::string demo_dir = "demo/data";
  auto* demo_cmd = app.add_subcommand("make-demo", "Write the synthetic demo dataset and config");
  demo_cmd->add_option("--out-dir", demo_dir, "Target directory");
  demo_cmd->add_option("--seed", demo.seed, "Seed");
  demo_cmd->add_option("--trios", demo.trios, "Number of trios");
  demo_cmd->add_option("--raw-rules", demo.raw_rules, "Raw pool size");
  demo_cmd->add_option("--k", demo.dedup_k, "Pool size after deduplication");
  demo_cmd->add_option("--clusters", demo.clusters, "Distinct rule directions in the raw pool");
  demo_cmd->add_option("--dim", demo.dim, "Embedding dimension");
  demo_cmd->callback([&] {
    action = [&] {
      make_demo(demo_dir, demo);
      std::cerr << "demo written to " << demo_dir << "\n";
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    return action ? action() : kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_validation() ? kExitValidation : kExitStage;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
}
