/* Copyright 2026 The twdkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Experiment orchestration: clean evaluation, the shared-corruption
// missing-waypoint protocol, the fixed-k sweep grid, RD% comparisons, and
// the config-driven end-to-end experiment runner. Outputs are
// content-addressed by (config hash, seed) and byte-identical on rerun.

#ifndef TWD_EVAL_HARNESS_HPP_
#define TWD_EVAL_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twd/config.hpp"
#include "twd/core_types.hpp"
#include "twd/data_io.hpp"
#include "twd/errors.hpp"
#include "twd/metrics.hpp"
#include "twd/predictors.hpp"
#include "twd/rng.hpp"
#include "twd/synthetic_gen.hpp"
#include "twd/twd_augment.hpp"

namespace twd {

// Exit-code category reported by the CLI.
enum class ErrorCategory : int { usage = 1, data = 2, training = 3 };

// Wraps any stage failure inside run_experiment with the stage name and
// its exit category, so callers can report "stage X failed: why".
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what, ErrorCategory category)
      : std::runtime_error("stage '" + stage + "': " + what),
        stage_(std::move(stage)),
        category_(category) {}
  const std::string& stage() const { return stage_; }
  ErrorCategory category() const { return category_; }

 private:
  std::string stage_;
  ErrorCategory category_;
};

inline std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Clean-test evaluation: per-scene best-of-K metrics averaged over scenes.
inline MetricsReport evaluate(const Predictor& predictor,
                              const Dataset& dataset, std::size_t K,
                              std::vector<double> horizons = {},
                              MinimizeOver level = MinimizeOver::scene,
                              std::size_t threads = 1) {
  return dataset_metrics(predictor.sampler(), dataset, K, std::move(horizons),
                         level, threads);
}

struct NamedPredictor {
  std::string name;
  Predictor predictor;
};

enum class MissingKMode {
  shared,     // one k per run, identical corruption for every predictor
  per_scene,  // sensitivity variant: fresh k per scene
};

struct MissingWaypointResult {
  std::size_t dropped_k = 0;          // 0 in per-scene mode
  std::uint64_t corrupted_hash = 0;   // container hash of the corrupted set
  std::vector<std::pair<std::string, MetricsReport>> reports;
};

// Simulates missing data: corrupts the test set once (drop + front pad)
// and evaluates every predictor on the identical corrupted scenes.
inline MissingWaypointResult missing_waypoint_eval(
    std::span<const NamedPredictor> predictors, const Dataset& dataset,
    std::size_t K, std::uint64_t seed, std::vector<double> horizons = {},
    MissingKMode mode = MissingKMode::shared,
    MinimizeOver level = MinimizeOver::scene, std::size_t threads = 1) {
  if (dataset.scenes.empty())
    throw EmptyDatasetError("missing_waypoint_eval: no scenes");
  const std::size_t n = dataset.scenes.front().observed.len;
  RandomSource src(seed);

  MissingWaypointResult result;
  Dataset corrupted;
  corrupted.split_tag = dataset.split_tag;
  corrupted.scenes.reserve(dataset.scenes.size());
  if (mode == MissingKMode::shared) {
    result.dropped_k = src.uniform_index(n);
    for (const Scene& scene : dataset.scenes)
      corrupted.scenes.push_back(apply_fixed_drop(scene, result.dropped_k));
  } else {
    for (const Scene& scene : dataset.scenes)
      corrupted.scenes.push_back(apply_fixed_drop(scene, src.uniform_index(n)));
  }
  result.corrupted_hash = fnv1a64(dataset_bytes(corrupted));

  for (const NamedPredictor& entry : predictors)
    result.reports.emplace_back(
        entry.name,
        evaluate(entry.predictor, corrupted, K, horizons, level, threads));
  return result;
}

struct FixedKSweepResult {
  std::vector<SweepRow> validation_table;  // one row per k in 1..n
  std::size_t chosen_k = 0;
  MetricsReport test_at_chosen_k;  // fixed drop at chosen_k
  MetricsReport test_stochastic;   // per-scene stochastic drop at test time
  MetricsReport test_clean;        // no drop at test time
};

// Sweeps every fixed drop index on the validation set, picks the best one,
// and reports the test-time grid: fixed drop at the chosen k, per-scene
// stochastic drop, and no drop.
inline FixedKSweepResult fixed_k_sweep(
    const Predictor& predictor, const Dataset& validation, const Dataset& test,
    std::size_t K, Metric metric = Metric::ade,
    FixedKObjective objective = FixedKObjective::min_error,
    std::uint64_t seed = 0, std::vector<double> horizons = {},
    MinimizeOver level = MinimizeOver::scene, std::size_t threads = 1) {
  if (test.scenes.empty()) throw EmptyDatasetError("fixed_k_sweep: empty test set");
  FixedKSweepResult result;
  const FixedKSelection selection = select_fixed_k(
      predictor.sampler(), validation, metric, K, objective, threads);
  result.validation_table = selection.table;
  result.chosen_k = selection.k;

  Dataset fixed;
  fixed.split_tag = test.split_tag;
  for (const Scene& scene : test.scenes)
    fixed.scenes.push_back(apply_fixed_drop(scene, result.chosen_k));
  result.test_at_chosen_k =
      evaluate(predictor, fixed, K, horizons, level, threads);

  Dataset stochastic;
  stochastic.split_tag = test.split_tag;
  RandomSource src = RandomSource(seed).fork("test-sd");
  const std::size_t n = test.scenes.front().observed.len;
  for (const Scene& scene : test.scenes)
    stochastic.scenes.push_back(apply_fixed_drop(scene, src.uniform_index(n)));
  result.test_stochastic =
      evaluate(predictor, stochastic, K, horizons, level, threads);

  result.test_clean = evaluate(predictor, test, K, horizons, level, threads);
  return result;
}

struct RdRow {
  std::string label;
  double baseline = 0.0;
  double ours = 0.0;
  double rd = 0.0;  // symmetric relative percent difference
};

// RD% per metric per horizon between two reports over the same horizons.
// Two exact zeros compare as zero difference.
inline std::vector<RdRow> compare(const MetricsReport& baseline,
                                  const MetricsReport& ours) {
  if (baseline.per_horizon.size() != ours.per_horizon.size())
    throw std::invalid_argument("compare: horizon mismatch");
  for (std::size_t i = 0; i < baseline.per_horizon.size(); ++i)
    if (baseline.per_horizon[i].seconds != ours.per_horizon[i].seconds)
      throw std::invalid_argument("compare: horizon mismatch");

  const auto rd = [](double a, double b) {
    return a == 0.0 && b == 0.0 ? 0.0 : rd_percent(a, b);
  };
  std::vector<RdRow> rows;
  rows.push_back({"min_ade", baseline.min_ade, ours.min_ade,
                  rd(baseline.min_ade, ours.min_ade)});
  rows.push_back({"min_fde", baseline.min_fde, ours.min_fde,
                  rd(baseline.min_fde, ours.min_fde)});
  for (std::size_t i = 0; i < baseline.per_horizon.size(); ++i) {
    const auto& b = baseline.per_horizon[i];
    const auto& o = ours.per_horizon[i];
    const std::string suffix = format_double(b.seconds) + "s";
    rows.push_back({"ade@" + suffix, b.min_ade, o.min_ade,
                    rd(b.min_ade, o.min_ade)});
    rows.push_back({"fde@" + suffix, b.min_fde, o.min_fde,
                    rd(b.min_fde, o.min_fde)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Config-driven experiment runner.

struct ExperimentParams {
  std::uint64_t seed = 0;
  std::string data_source = "synthetic";  // or a .twds / records path
  GenConfig gen;
  WindowSpec window;
  SplitFractions fractions;
  std::size_t iterations = 2000;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
  std::size_t hidden = 64;
  std::size_t heads = 20;
  std::vector<TwdMode> modes = {TwdMode::stochastic};
  std::vector<std::size_t> drops_grid = {1};
  std::size_t eval_K = 20;
  std::vector<double> horizons;
  MinimizeOver min_level = MinimizeOver::scene;
  FixedKObjective fixed_k_objective = FixedKObjective::min_error;
  bool run_sweep = true;
  std::size_t threads = 1;
};

inline ExperimentParams parse_experiment_params(const Config& cfg) {
  ExperimentParams p;
  p.seed = cfg.get_u64("seed", 0);
  p.data_source = cfg.get_string("data.source", "synthetic");

  p.gen.scene_count = cfg.get_u64("gen.scene_count", 100);
  p.gen.agents_min = cfg.get_u64("gen.agents_min", 1);
  p.gen.agents_max = cfg.get_u64("gen.agents_max", 4);
  p.gen.n_obs = cfg.get_u64("gen.n_obs", 5);
  p.gen.m_pred = cfg.get_u64("gen.m_pred", 10);
  p.gen.frame_interval = cfg.get_double("gen.frame_interval", 0.4);
  p.gen.mix_linear = cfg.get_double("gen.mix_linear", 0.4);
  p.gen.mix_turning = cfg.get_double("gen.mix_turning", 0.4);
  p.gen.mix_stop_go = cfg.get_double("gen.mix_stop_go", 0.2);
  p.gen.noise_sigma = cfg.get_double("gen.noise_sigma", 0.0);
  p.gen.speed_min = cfg.get_double("gen.speed_min", 0.5);
  p.gen.speed_max = cfg.get_double("gen.speed_max", 1.5);
  p.gen.corrupt_step = cfg.get_u64("gen.corrupt_step", 0);
  p.gen.corrupt_sigma = cfg.get_double("gen.corrupt_sigma", 0.0);
  p.gen.seed = p.seed;

  p.window.n_obs = cfg.get_u64("window.n_obs", 8);
  p.window.m_pred = cfg.get_u64("window.m_pred", 12);
  p.window.stride = cfg.get_u64("window.stride", 1);
  p.window.frame_interval = cfg.get_double("window.frame_interval", 0.4);

  p.fractions.train = cfg.get_double("split.train", 0.8);
  p.fractions.validation = cfg.get_double("split.validation", 0.1);
  p.fractions.test = cfg.get_double("split.test", 0.1);

  p.iterations = cfg.get_u64("train.iterations", 2000);
  p.batch_size = cfg.get_u64("train.batch_size", 32);
  p.learning_rate = cfg.get_double("train.learning_rate", 1e-3);
  p.hidden = cfg.get_u64("train.hidden", 64);
  p.heads = cfg.get_u64("train.heads", 20);
  const std::string opt = cfg.get_string("train.optimizer", "adam");
  if (opt == "adam")
    p.optimizer = OptimizerKind::adam;
  else if (opt == "sgd")
    p.optimizer = OptimizerKind::sgd;
  else
    throw std::invalid_argument("config: train.optimizer must be adam or sgd");
  p.beta1 = cfg.get_double("train.beta1", 0.9);
  p.beta2 = cfg.get_double("train.beta2", 0.999);
  p.epsilon = cfg.get_double("train.epsilon", 1e-8);

  p.modes.clear();
  auto mode_list = cfg.get_list("twd.mode");
  if (mode_list.empty()) mode_list = {"stochastic"};
  for (const std::string& mode : mode_list) {
    if (mode == "off")
      p.modes.push_back(TwdMode::off);
    else if (mode == "stochastic")
      p.modes.push_back(TwdMode::stochastic);
    else
      throw std::invalid_argument("config: twd.mode must be off or stochastic");
  }
  p.drops_grid.clear();
  for (double d : cfg.get_double_list("twd.drops"))
    p.drops_grid.push_back(static_cast<std::size_t>(d));
  if (p.drops_grid.empty()) p.drops_grid = {1};

  p.eval_K = cfg.get_u64("eval.K", 20);
  p.horizons = cfg.get_double_list("eval.horizons");
  const std::string min_per = cfg.get_string("eval.min_per", "scene");
  if (min_per == "scene")
    p.min_level = MinimizeOver::scene;
  else if (min_per == "agent")
    p.min_level = MinimizeOver::agent;
  else
    throw std::invalid_argument("config: eval.min_per must be scene or agent");
  const std::string objective =
      cfg.get_string("eval.fixed_k_objective", "min-error");
  if (objective == "min-error")
    p.fixed_k_objective = FixedKObjective::min_error;
  else if (objective == "max-error")
    p.fixed_k_objective = FixedKObjective::max_error;
  else
    throw std::invalid_argument(
        "config: eval.fixed_k_objective must be min-error or max-error");
  const std::string sweep = cfg.get_string("eval.sweep", "on");
  if (sweep == "on")
    p.run_sweep = true;
  else if (sweep == "off")
    p.run_sweep = false;
  else
    throw std::invalid_argument("config: eval.sweep must be on or off");
  p.threads = cfg.get_u64("eval.threads", 1);
  if (p.threads < 1) p.threads = 1;
  return p;
}

// Loads the configured data source: built-in generator, a dataset
// container, or a raw records file windowed by window.*.
inline Dataset load_experiment_data(const ExperimentParams& p) {
  if (p.data_source == "synthetic") return generate(p.gen);
  if (p.data_source.size() > 5 &&
      p.data_source.substr(p.data_source.size() - 5) == ".twds")
    return read_dataset(p.data_source);
  std::ifstream in(p.data_source);
  if (!in) throw FormatError("data: cannot open " + p.data_source);
  return extract_scenes(parse_records(in), p.window);
}

namespace detail {

inline ErrorCategory classify_error(const std::exception& e) {
  if (dynamic_cast<const TrainingDivergedError*>(&e))
    return ErrorCategory::training;
  return ErrorCategory::data;
}

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), classify_error(e));
  }
}

struct GridCell {
  std::string label;
  std::string slug;
  TwdMode mode = TwdMode::off;
  std::size_t drops = 0;
};

inline std::vector<GridCell> experiment_grid(const ExperimentParams& p) {
  std::vector<GridCell> cells;
  const bool multi_d = p.drops_grid.size() > 1;
  for (TwdMode mode : p.modes) {
    if (mode == TwdMode::off) {
      cells.push_back({"w/o TWD", "wo_twd", mode, 0});
      continue;
    }
    for (std::size_t d : p.drops_grid) {
      const std::string label =
          multi_d ? "w/ TWD (D=" + std::to_string(d) + ")" : "w/ TWD";
      const std::string slug =
          multi_d ? "w_twd_d" + std::to_string(d) : "w_twd";
      cells.push_back({label, slug, mode, d});
    }
  }
  return cells;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string());
  out << text;
}

inline std::string trace_csv(const TrainTrace& trace) {
  std::string out = "iteration,loss\n";
  for (std::size_t i = 0; i < trace.losses.size(); ++i)
    out += std::to_string(i + 1) + "," + format_double(trace.losses[i]) + "\n";
  return out;
}

inline std::string sweep_csv(const std::vector<SweepRow>& table) {
  std::string out = "k,ade,fde\n";
  for (const SweepRow& row : table)
    out += std::to_string(row.k) + "," + format_double(row.ade) + "," +
           format_double(row.fde) + "\n";
  return out;
}

inline nlohmann::json rd_rows_json(const std::vector<RdRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const RdRow& row : rows)
    out.push_back({{"label", row.label},
                   {"baseline", row.baseline},
                   {"ours", row.ours},
                   {"rd", row.rd}});
  return out;
}

}  // namespace detail

struct ExperimentResult {
  std::filesystem::path artifact_dir;
  nlohmann::json summary;
};

// Full pipeline: data -> split -> train grid -> evaluate (clean, missing
// waypoint, optional fixed-k sweep) -> summary.json plus per-cell
// checkpoint/trace/sweep files. Deterministic per (config, seed); artifacts
// land in <out_dir>/<config_hash>-s<seed>/.
inline ExperimentResult run_experiment(const Config& config,
                                       const std::filesystem::path& out_dir,
                                       bool quiet = false,
                                       std::ostream& log = std::cout) {
  const ExperimentParams p = detail::run_stage(
      "config", [&] { return parse_experiment_params(config); });
  const std::uint64_t config_hash = fnv1a64(config.dump());
  const std::filesystem::path artifact_dir =
      out_dir / (to_hex(config_hash) + "-s" + std::to_string(p.seed));
  std::filesystem::create_directories(artifact_dir);
  detail::write_text_file(artifact_dir / "effective.cfg", config.dump());

  const auto progress = [&](const std::string& msg) {
    if (!quiet) log << "[run] " << msg << "\n";
  };

  progress("loading data (" + p.data_source + ")");
  const Dataset all =
      detail::run_stage("data", [&] { return load_experiment_data(p); });
  const std::uint64_t split_seed = RandomSource(p.seed).fork("split").seed();
  const Splits splits = detail::run_stage(
      "split", [&] { return split(all, p.fractions, split_seed); });
  const SceneDims dims = scene_dimensions(splits.train.scenes.front());

  LearnedHyper hyper{dims.observed_len, dims.future_len, p.hidden, p.heads};
  const auto cells = detail::experiment_grid(p);

  struct CellResult {
    detail::GridCell cell;
    Predictor predictor = Predictor::constant_velocity();
    MetricsReport clean;
    std::optional<double> final_val_loss;
    std::optional<FixedKSweepResult> sweep;
  };
  std::vector<CellResult> results;

  for (const auto& cell : cells) {
    progress("training " + cell.label);
    CellResult r;
    r.cell = cell;
    // Every cell starts from the same initial parameters and sees the same
    // batch schedule; only the augmentation differs.
    RandomSource init = RandomSource(p.seed).fork("init");
    r.predictor = Predictor::learned(hyper, init);
    TrainConfig tc;
    tc.iterations = p.iterations;
    tc.batch_size = p.batch_size;
    tc.learning_rate = p.learning_rate;
    tc.optimizer = p.optimizer;
    tc.beta1 = p.beta1;
    tc.beta2 = p.beta2;
    tc.epsilon = p.epsilon;
    tc.seed = p.seed;
    tc.twd_mode = cell.mode;
    tc.twd.drops = cell.drops;
    const TrainTrace trace = detail::run_stage("train", [&] {
      return train(r.predictor, splits.train, &splits.validation, tc);
    });
    r.final_val_loss = trace.final_val_loss;

    const std::filesystem::path cell_dir = artifact_dir / cell.slug;
    std::filesystem::create_directories(cell_dir);
    r.predictor.save((cell_dir / "checkpoint.json").string());
    detail::write_text_file(cell_dir / "trace.csv", detail::trace_csv(trace));

    progress("evaluating " + cell.label + " (clean)");
    r.clean = detail::run_stage("evaluate", [&] {
      return evaluate(r.predictor, splits.test, p.eval_K, p.horizons,
                      p.min_level, p.threads);
    });

    if (p.run_sweep && cell.mode == TwdMode::stochastic) {
      progress("sweeping fixed k for " + cell.label);
      r.sweep = detail::run_stage("sweep", [&] {
        return fixed_k_sweep(r.predictor, splits.validation, splits.test,
                             p.eval_K, Metric::ade, p.fixed_k_objective,
                             p.seed, p.horizons, p.min_level, p.threads);
      });
      detail::write_text_file(cell_dir / "sweep.csv",
                              detail::sweep_csv(r.sweep->validation_table));
    }
    results.push_back(std::move(r));
  }

  progress("evaluating missing-waypoint robustness");
  std::vector<NamedPredictor> named;
  for (const CellResult& r : results)
    named.push_back({r.cell.label, r.predictor});
  const MissingWaypointResult missing = detail::run_stage("robustness", [&] {
    return missing_waypoint_eval(
        named, splits.test, p.eval_K,
        RandomSource(p.seed).fork("missing").seed(), p.horizons,
        MissingKMode::shared, p.min_level, p.threads);
  });

  // Summary document.
  nlohmann::json summary;
  summary["config_hash"] = to_hex(config_hash);
  summary["seed"] = p.seed;
  summary["dataset"] = {{"n", dims.observed_len},
                        {"m", dims.future_len},
                        {"frame_interval",
                         splits.train.scenes.front().frame_interval},
                        {"train_scenes", splits.train.scenes.size()},
                        {"validation_scenes", splits.validation.scenes.size()},
                        {"test_scenes", splits.test.scenes.size()}};
  summary["eval"] = {{"K", p.eval_K},
                     {"horizons", p.horizons},
                     {"min_per",
                      p.min_level == MinimizeOver::scene ? "scene" : "agent"}};
  summary["missing_waypoint"] = {{"dropped_k", missing.dropped_k},
                                 {"corrupted_hash",
                                  to_hex(missing.corrupted_hash)}};

  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const CellResult& r = results[i];
    nlohmann::json row;
    row["label"] = r.cell.label;
    row["slug"] = r.cell.slug;
    row["twd_mode"] = r.cell.mode == TwdMode::off ? "off" : "stochastic";
    row["drops"] = r.cell.drops;
    row["clean"] = r.clean.to_json();
    row["missing_waypoint"] = missing.reports[i].second.to_json();
    if (r.final_val_loss) row["final_val_loss"] = *r.final_val_loss;
    if (r.sweep) {
      nlohmann::json sweep;
      sweep["chosen_k"] = r.sweep->chosen_k;
      sweep["test_at_chosen_k"] = r.sweep->test_at_chosen_k.to_json();
      sweep["test_stochastic"] = r.sweep->test_stochastic.to_json();
      sweep["test_clean"] = r.sweep->test_clean.to_json();
      row["sweep"] = sweep;
    }
    rows.push_back(row);
  }
  summary["rows"] = rows;

  // RD comparisons against the untreated cell (or the first cell).
  std::size_t baseline_idx = 0;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (results[i].cell.mode == TwdMode::off) {
      baseline_idx = i;
      break;
    }
  nlohmann::json comparisons = nlohmann::json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (i == baseline_idx) continue;
    nlohmann::json c;
    c["baseline"] = results[baseline_idx].cell.label;
    c["ours"] = results[i].cell.label;
    c["clean"] = detail::rd_rows_json(
        compare(results[baseline_idx].clean, results[i].clean));
    c["missing_waypoint"] = detail::rd_rows_json(
        compare(missing.reports[baseline_idx].second, missing.reports[i].second));
    comparisons.push_back(c);
  }
  summary["comparisons"] = comparisons;

  detail::write_text_file(artifact_dir / "summary.json",
                          summary.dump(2) + "\n");
  progress("artifacts in " + artifact_dir.string());
  return {artifact_dir, summary};
}

}  // namespace twd

#endif  // TWD_EVAL_HARNESS_HPP_
