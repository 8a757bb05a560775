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

// twdkit: trajectory forecasting pipeline in one binary.
//
//   generate    write a synthetic dataset container
//   ingest      window raw `frame agent x y` records into a container
//   train       train the learned predictor (optionally with waypoint drops)
//   eval        evaluate a checkpoint on a dataset split
//   robustness  missing-waypoint evaluation across several checkpoints
//   sweep       fixed-drop-index sweep and test-time drop grid
//   report      render a summary.json as an aligned text table
//   run         full config-driven experiment
//
// Machine-readable outputs go to files; stdout carries progress and
// human-readable tables. Exit codes: 0 success, 1 usage error, 2 data or
// config error, 3 training divergence.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twd/twd.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool quiet = false;
  std::optional<std::size_t> threads;
  std::string min_per;  // overrides eval.min_per when set
};

void add_global_flags(CLI::App* cmd, GlobalOpts& opts, bool needs_out) {
  cmd->add_option("--config", opts.config_path, "flat key = value config file");
  cmd->add_option("--seed", opts.seed, "seed overriding the config `seed` key");
  auto* out = cmd->add_option("--out", opts.out_dir, "output directory");
  if (needs_out) out->required();
  cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
  cmd->add_option("--threads", opts.threads, "evaluation parallelism (default 1)");
}

// Config file plus command-line overrides; flags always win.
twd::Config effective_config(const GlobalOpts& opts) {
  twd::Config cfg = opts.config_path.empty()
                        ? twd::Config{}
                        : twd::Config::parse_file(opts.config_path);
  if (opts.seed) cfg.set("seed", std::to_string(*opts.seed));
  if (opts.threads) cfg.set("eval.threads", std::to_string(*opts.threads));
  if (!opts.min_per.empty()) cfg.set("eval.min_per", opts.min_per);
  return cfg;
}

void echo_config(const twd::Config& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream out(dir / "effective.cfg", std::ios::binary);
  out << cfg.dump();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw twd::FormatError("cannot open " + path.string());
  out << text;
}

std::string one_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string three_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string report_cell(const json& report) {
  return three_decimals(report.at("min_ade").get<double>()) + "/" +
         three_decimals(report.at("min_fde").get<double>());
}

// Aligned table for an experiment summary; RD rows use one decimal.
std::string render_summary(const json& summary) {
  std::string out;
  const json& ds = summary.at("dataset");
  out += "dataset: n=" + std::to_string(ds.at("n").get<std::size_t>()) +
         " m=" + std::to_string(ds.at("m").get<std::size_t>()) +
         " train=" + std::to_string(ds.at("train_scenes").get<std::size_t>()) +
         " val=" + std::to_string(ds.at("validation_scenes").get<std::size_t>()) +
         " test=" + std::to_string(ds.at("test_scenes").get<std::size_t>()) +
         "  K=" + std::to_string(summary.at("eval").at("K").get<std::size_t>()) +
         "\n";
  out += "missing-waypoint drop: k=" +
         std::to_string(
             summary.at("missing_waypoint").at("dropped_k").get<std::size_t>()) +
         "\n\n";

  constexpr std::size_t label_w = 24, col_w = 16;
  out += pad_right("", label_w) + pad_right("clean ADE/FDE", col_w) +
         pad_right("missing ADE/FDE", col_w) + "\n";
  for (const json& row : summary.at("rows")) {
    std::string line = pad_right(row.at("label").get<std::string>(), label_w);
    line += pad_right(report_cell(row.at("clean")), col_w);
    line += pad_right(report_cell(row.at("missing_waypoint")), col_w);
    if (row.contains("sweep"))
      line += "fixed-k=" +
              std::to_string(row.at("sweep").at("chosen_k").get<std::size_t>());
    out += line + "\n";
  }
  for (const json& cmp : summary.at("comparisons")) {
    const auto rd_pair = [&](const json& rows) {
      double ade = 0.0, fde = 0.0;
      for (const json& r : rows) {
        if (r.at("label") == "min_ade") ade = r.at("rd").get<double>();
        if (r.at("label") == "min_fde") fde = r.at("rd").get<double>();
      }
      return one_decimal(ade) + "/" + one_decimal(fde);
    };
    out += pad_right("RD% (" + cmp.at("ours").get<std::string>() + ")", label_w) +
           pad_right(rd_pair(cmp.at("clean")), col_w) +
           pad_right(rd_pair(cmp.at("missing_waypoint")), col_w) + "\n";
  }
  return out;
}

std::string render_metrics_report(const json& j) {
  const twd::MetricsReport r = twd::MetricsReport::from_json(j);
  std::string out = "scenes=" + std::to_string(r.scene_count) +
                    " K=" + std::to_string(r.K) +
                    "  minADE/minFDE " + three_decimals(r.min_ade) + "/" +
                    three_decimals(r.min_fde) + "\n";
  for (const auto& h : r.per_horizon)
    out += "  @" + twd::format_double(h.seconds) + "s  " +
           three_decimals(h.min_ade) + "/" + three_decimals(h.min_fde) + "\n";
  return out;
}

twd::Dataset load_dataset(const std::string& path) {
  return twd::read_dataset(path);
}

struct SplitChoice {
  std::string name = "test";

  const twd::Dataset& pick(const twd::Splits& splits,
                           const twd::Dataset& all) const {
    if (name == "train") return splits.train;
    if (name == "validation") return splits.validation;
    if (name == "test") return splits.test;
    if (name == "all") return all;
    throw std::invalid_argument("unknown split: " + name);
  }
};

int run_generate(const GlobalOpts& opts) {
  const twd::Config cfg = effective_config(opts);
  const twd::ExperimentParams p = twd::parse_experiment_params(cfg);
  const twd::Dataset dataset = twd::generate(p.gen);
  echo_config(cfg, opts.out_dir);
  const fs::path out = fs::path(opts.out_dir) / "dataset.twds";
  twd::write_dataset(dataset, out.string());
  if (!opts.quiet)
    std::cout << "wrote " << dataset.scenes.size() << " scenes to " << out.string()
              << "\n";
  return 0;
}

int run_ingest(const GlobalOpts& opts, const std::string& input) {
  const twd::Config cfg = effective_config(opts);
  const twd::ExperimentParams p = twd::parse_experiment_params(cfg);
  std::ifstream in(input);
  if (!in) throw twd::FormatError("cannot open " + input);
  const twd::Dataset dataset =
      twd::extract_scenes(twd::parse_records(in), p.window);
  echo_config(cfg, opts.out_dir);
  const fs::path out = fs::path(opts.out_dir) / "dataset.twds";
  twd::write_dataset(dataset, out.string());
  if (!opts.quiet)
    std::cout << "wrote " << dataset.scenes.size() << " scenes to " << out.string()
              << "\n";
  return 0;
}

int run_train(const GlobalOpts& opts, const std::string& data_path,
              const std::string& twd_mode, std::optional<std::size_t> drops) {
  twd::Config cfg = effective_config(opts);
  if (!twd_mode.empty()) cfg.set("twd.mode", twd_mode);
  if (drops) cfg.set("twd.drops", std::to_string(*drops));
  const twd::ExperimentParams p = twd::parse_experiment_params(cfg);

  const twd::Dataset all = load_dataset(data_path);
  const std::uint64_t split_seed =
      twd::RandomSource(p.seed).fork("split").seed();
  const twd::Splits splits = twd::split(all, p.fractions, split_seed);
  const twd::SceneDims dims = twd::scene_dimensions(splits.train.scenes.front());

  twd::LearnedHyper hyper{dims.observed_len, dims.future_len, p.hidden, p.heads};
  twd::RandomSource init = twd::RandomSource(p.seed).fork("init");
  twd::Predictor predictor = twd::Predictor::learned(hyper, init);

  twd::TrainConfig tc;
  tc.iterations = p.iterations;
  tc.batch_size = p.batch_size;
  tc.learning_rate = p.learning_rate;
  tc.optimizer = p.optimizer;
  tc.beta1 = p.beta1;
  tc.beta2 = p.beta2;
  tc.epsilon = p.epsilon;
  tc.seed = p.seed;
  tc.twd_mode = p.modes.front();
  tc.twd.drops = p.drops_grid.front();
  if (tc.twd_mode == twd::TwdMode::off) tc.twd.drops = 0;

  if (!opts.quiet)
    std::cout << "training on " << splits.train.scenes.size() << " scenes ("
              << (tc.twd_mode == twd::TwdMode::off
                      ? std::string("no drops")
                      : "stochastic drops, D=" + std::to_string(tc.twd.drops))
              << ")\n";
  const twd::TrainTrace trace =
      twd::train(predictor, splits.train, &splits.validation, tc);

  echo_config(cfg, opts.out_dir);
  predictor.save((fs::path(opts.out_dir) / "model.json").string());
  std::string trace_csv = "iteration,loss\n";
  for (std::size_t i = 0; i < trace.losses.size(); ++i)
    trace_csv += std::to_string(i + 1) + "," +
                 twd::format_double(trace.losses[i]) + "\n";
  write_file(fs::path(opts.out_dir) / "trace.csv", trace_csv);
  if (!opts.quiet) {
    std::cout << "final loss " << twd::format_double(trace.losses.back());
    if (trace.final_val_loss)
      std::cout << ", validation loss "
                << twd::format_double(*trace.final_val_loss);
    std::cout << "\nwrote " << (fs::path(opts.out_dir) / "model.json").string()
              << "\n";
  }
  return 0;
}

int run_eval(const GlobalOpts& opts, const std::string& data_path,
             const std::string& model_path, const SplitChoice& split_choice,
             const std::string& twd_mode, std::optional<std::size_t> fixed_k,
             std::size_t drops) {
  const twd::Config cfg = effective_config(opts);
  const twd::ExperimentParams p = twd::parse_experiment_params(cfg);
  const twd::Dataset all = load_dataset(data_path);
  const std::uint64_t split_seed =
      twd::RandomSource(p.seed).fork("split").seed();
  const twd::Splits splits = twd::split(all, p.fractions, split_seed);
  twd::Dataset target = split_choice.pick(splits, all);

  // Optional test-time dropping: a fixed index for every scene, or a fresh
  // stochastic drop per scene.
  if (twd_mode == "fixed") {
    if (!fixed_k)
      throw std::invalid_argument("eval: --twd fixed requires --fixed-k");
    for (twd::Scene& scene : target.scenes)
      scene = twd::apply_fixed_drop(scene, *fixed_k);
  } else if (twd_mode == "stochastic") {
    twd::RandomSource src = twd::RandomSource(p.seed).fork("eval-sd");
    twd::DropConfig drop_cfg;
    drop_cfg.drops = drops;
    for (twd::Scene& scene : target.scenes)
      scene = twd::apply_twd(scene, src, drop_cfg).first;
  }

  const twd::Predictor predictor = twd::Predictor::load(model_path);
  const twd::MetricsReport report = twd::evaluate(
      predictor, target, p.eval_K, p.horizons, p.min_level, p.threads);

  if (!opts.out_dir.empty()) {
    echo_config(cfg, opts.out_dir);
    write_file(fs::path(opts.out_dir) / "summary.json",
               report.to_json().dump(2) + "\n");
    write_file(fs::path(opts.out_dir) / "summary.csv", report.to_csv());
  }
  std::cout << render_metrics_report(report.to_json());
  return 0;
}

int run_robustness(const GlobalOpts& opts, const std::string& data_path,
                   const std::vector<std::string>& model_paths, bool per_scene) {
  const twd::Config cfg = effective_config(opts);
  const twd::ExperimentParams p = twd::parse_experiment_params(cfg);
  const twd::Dataset all = load_dataset(data_path);
  const std::uint64_t split_seed =
      twd::RandomSource(p.seed).fork("split").seed();
  const twd::Splits splits = twd::split(all, p.fractions, split_seed);

  std::vector<twd::NamedPredictor> predictors;
  for (const std::string& path : model_paths)
    predictors.push_back(
        {fs::path(path).stem().string(), twd::Predictor::load(path)});

  const twd::MissingWaypointResult result = twd::missing_waypoint_eval(
      predictors, splits.test, p.eval_K,
      twd::RandomSource(p.seed).fork("missing").seed(), p.horizons,
      per_scene ? twd::MissingKMode::per_scene : twd::MissingKMode::shared,
      p.min_level, p.threads);

  json out;
  out["dropped_k"] = result.dropped_k;
  out["corrupted_hash"] = twd::to_hex(result.corrupted_hash);
  out["per_scene"] = per_scene;
  json reports = json::array();
  for (const auto& [name, report] : result.reports)
    reports.push_back({{"model", name}, {"report", report.to_json()}});
  out["reports"] = reports;

  if (!opts.out_dir.empty()) {
    echo_config(cfg, opts.out_dir);
    write_file(fs::path(opts.out_dir) / "robustness.json", out.dump(2) + "\n");
  }
  if (result.dropped_k > 0)
    std::cout << "dropped k=" << result.dropped_k << " from every test scene\n";
  for (const auto& [name, report] : result.reports)
    std::cout << pad_right(name, 24) << three_decimals(report.min_ade) << "/"
              << three_decimals(report.min_fde) << "\n";
  return 0;
}

int run_sweep(const GlobalOpts& opts, const std::string& data_path,
              const std::string& model_path, const std::string& objective,
              const std::string& metric_name) {
  twd::Config cfg = effective_config(opts);
  if (!objective.empty()) cfg.set("eval.fixed_k_objective", objective);
  const twd::ExperimentParams p = twd::parse_experiment_params(cfg);
  const twd::Dataset all = load_dataset(data_path);
  const std::uint64_t split_seed =
      twd::RandomSource(p.seed).fork("split").seed();
  const twd::Splits splits = twd::split(all, p.fractions, split_seed);
  const twd::Predictor predictor = twd::Predictor::load(model_path);

  twd::Metric metric = twd::Metric::ade;
  if (metric_name == "fde")
    metric = twd::Metric::fde;
  else if (metric_name != "ade")
    throw std::invalid_argument("sweep: metric must be ade or fde");

  const twd::FixedKSweepResult result = twd::fixed_k_sweep(
      predictor, splits.validation, splits.test, p.eval_K, metric,
      p.fixed_k_objective, p.seed, p.horizons, p.min_level, p.threads);

  std::string csv = "k,ade,fde\n";
  for (const twd::SweepRow& row : result.validation_table)
    csv += std::to_string(row.k) + "," + twd::format_double(row.ade) + "," +
           twd::format_double(row.fde) + "\n";

  if (!opts.out_dir.empty()) {
    echo_config(cfg, opts.out_dir);
    write_file(fs::path(opts.out_dir) / "sweep.csv", csv);
    json out;
    out["chosen_k"] = result.chosen_k;
    out["test_at_chosen_k"] = result.test_at_chosen_k.to_json();
    out["test_stochastic"] = result.test_stochastic.to_json();
    out["test_clean"] = result.test_clean.to_json();
    write_file(fs::path(opts.out_dir) / "sweep.json", out.dump(2) + "\n");
  }

  std::cout << pad_right("k", 6) << pad_right("val ADE", 12) << "val FDE\n";
  for (const twd::SweepRow& row : result.validation_table)
    std::cout << pad_right(std::to_string(row.k), 6)
              << pad_right(three_decimals(row.ade), 12)
              << three_decimals(row.fde) << "\n";
  std::cout << "chosen k=" << result.chosen_k << "\n"
            << pad_right("test fixed-k", 24)
            << report_cell(result.test_at_chosen_k.to_json()) << "\n"
            << pad_right("test stochastic", 24)
            << report_cell(result.test_stochastic.to_json()) << "\n"
            << pad_right("test clean", 24)
            << report_cell(result.test_clean.to_json()) << "\n";
  return 0;
}

int run_report(const std::string& summary_path) {
  std::ifstream in(summary_path);
  if (!in) throw twd::FormatError("cannot open " + summary_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw twd::FormatError(std::string("report: ") + e.what());
  }
  if (j.contains("rows"))
    std::cout << render_summary(j);
  else
    std::cout << render_metrics_report(j);
  return 0;
}

int run_full(const GlobalOpts& opts) {
  const twd::Config cfg = effective_config(opts);
  const twd::ExperimentResult result =
      twd::run_experiment(cfg, opts.out_dir, opts.quiet);
  std::cout << result.artifact_dir.string() << "\n";
  if (!opts.quiet) std::cout << render_summary(result.summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trajectory forecasting with temporal waypoint dropping"};
  app.require_subcommand(1);

  GlobalOpts g_generate, g_ingest, g_train, g_eval, g_robust, g_sweep, g_run;
  std::string ingest_input;
  std::string train_data, train_twd_mode;
  std::optional<std::size_t> train_drops;
  std::string eval_data, eval_model, eval_twd = "off";
  std::optional<std::size_t> eval_fixed_k;
  std::size_t eval_drops = 1;
  SplitChoice eval_split;
  std::string robust_data;
  std::vector<std::string> robust_models;
  bool robust_per_scene = false;
  std::string sweep_data, sweep_model, sweep_objective, sweep_metric = "ade";
  std::string report_summary;

  auto* cmd_generate = app.add_subcommand("generate", "write a synthetic dataset");
  add_global_flags(cmd_generate, g_generate, true);

  auto* cmd_ingest = app.add_subcommand("ingest", "window raw records into a dataset");
  add_global_flags(cmd_ingest, g_ingest, true);
  cmd_ingest->add_option("--input", ingest_input, "records file: frame agent x y")
      ->required();

  auto* cmd_train = app.add_subcommand("train", "train the learned predictor");
  add_global_flags(cmd_train, g_train, true);
  cmd_train->add_option("--data", train_data, "dataset container")->required();
  cmd_train->add_option("--twd", train_twd_mode, "off|stochastic")
      ->check(CLI::IsMember({"off", "stochastic"}));
  cmd_train->add_option("--drops", train_drops, "waypoint drops per scene (D)");

  auto* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_global_flags(cmd_eval, g_eval, false);
  cmd_eval->add_option("--data", eval_data, "dataset container")->required();
  cmd_eval->add_option("--model", eval_model, "checkpoint file")->required();
  cmd_eval->add_option("--split", eval_split.name, "train|validation|test|all");
  cmd_eval->add_option("--twd", eval_twd, "test-time drop: off|stochastic|fixed")
      ->check(CLI::IsMember({"off", "stochastic", "fixed"}));
  cmd_eval->add_option("--fixed-k", eval_fixed_k,
                       "timestamp to drop when --twd fixed");
  cmd_eval->add_option("--drops", eval_drops,
                       "drops per scene when --twd stochastic");
  cmd_eval->add_option("--min-per", g_eval.min_per,
                       "best-of-K level: scene|agent")
      ->check(CLI::IsMember({"scene", "agent"}));

  auto* cmd_robust =
      app.add_subcommand("robustness", "missing-waypoint evaluation");
  add_global_flags(cmd_robust, g_robust, false);
  cmd_robust->add_option("--data", robust_data, "dataset container")->required();
  cmd_robust->add_option("--model", robust_models, "checkpoint file (repeatable)")
      ->required();
  cmd_robust->add_flag("--per-scene", robust_per_scene,
                       "draw a fresh drop index per scene");

  auto* cmd_sweep = app.add_subcommand("sweep", "fixed drop-index sweep");
  add_global_flags(cmd_sweep, g_sweep, false);
  cmd_sweep->add_option("--data", sweep_data, "dataset container")->required();
  cmd_sweep->add_option("--model", sweep_model, "checkpoint file")->required();
  cmd_sweep->add_option("--fixed-k-objective", sweep_objective,
                        "min-error|max-error")
      ->check(CLI::IsMember({"min-error", "max-error"}));
  cmd_sweep->add_option("--metric", sweep_metric, "selection metric: ade|fde")
      ->check(CLI::IsMember({"ade", "fde"}));

  auto* cmd_report = app.add_subcommand("report", "render summary.json");
  cmd_report->add_option("--summary", report_summary, "summary.json path")
      ->required();

  auto* cmd_run = app.add_subcommand("run", "full experiment from a config");
  add_global_flags(cmd_run, g_run, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (cmd_generate->parsed()) return run_generate(g_generate);
    if (cmd_ingest->parsed()) return run_ingest(g_ingest, ingest_input);
    if (cmd_train->parsed())
      return run_train(g_train, train_data, train_twd_mode, train_drops);
    if (cmd_eval->parsed())
      return run_eval(g_eval, eval_data, eval_model, eval_split, eval_twd,
                      eval_fixed_k, eval_drops);
    if (cmd_robust->parsed())
      return run_robustness(g_robust, robust_data, robust_models,
                            robust_per_scene);
    if (cmd_sweep->parsed())
      return run_sweep(g_sweep, sweep_data, sweep_model, sweep_objective,
                       sweep_metric);
    if (cmd_report->parsed()) return run_report(report_summary);
    if (cmd_run->parsed()) return run_full(g_run);
  } catch (const twd::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const twd::TrainingDivergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
