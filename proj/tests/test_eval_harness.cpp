#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "test_helpers.hpp"
#include "twd/eval_harness.hpp"

using namespace twd;
namespace fs = std::filesystem;

namespace {

GenConfig linear_gen(std::size_t scenes, std::uint64_t seed) {
  GenConfig cfg;
  cfg.scene_count = scenes;
  cfg.agents_min = 1;
  cfg.agents_max = 2;
  cfg.n_obs = 5;
  cfg.m_pred = 10;
  cfg.mix_linear = 1.0;
  cfg.mix_turning = 0.0;
  cfg.mix_stop_go = 0.0;
  cfg.noise_sigma = 0.0;
  cfg.seed = seed;
  return cfg;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("evaluate scores a perfect baseline at zero on clean lines") {
  const Dataset ds = generate(linear_gen(20, 1));
  const MetricsReport report = evaluate(Predictor::constant_velocity(), ds, 1,
                                        {2.0, 4.0});
  REQUIRE(report.min_ade == 0.0);
  REQUIRE(report.min_fde == 0.0);
  for (const auto& h : report.per_horizon) {
    REQUIRE(h.min_ade == 0.0);
    REQUIRE(h.min_fde == 0.0);
  }
  REQUIRE(report.scene_count == 20);
}

TEST_CASE("missing_waypoint_eval feeds every predictor the same corruption") {
  const Dataset ds = generate(linear_gen(30, 2));
  const std::vector<NamedPredictor> predictors{
      {"cv", Predictor::constant_velocity()},
      {"line", Predictor::linear_fit()}};

  // Seed 4 draws k=2 out of n=5 (frozen); a drop before the last two
  // observed steps leaves the constant-velocity input untouched.
  const std::uint64_t seed = 4;
  const MissingWaypointResult result =
      missing_waypoint_eval(predictors, ds, 1, seed);
  REQUIRE(result.dropped_k == 2);
  REQUIRE(result.reports.size() == 2);

  SECTION("the corruption hash matches a manual reconstruction") {
    Dataset manual;
    manual.split_tag = ds.split_tag;
    for (const Scene& scene : ds.scenes)
      manual.scenes.push_back(apply_fixed_drop(scene, result.dropped_k));
    REQUIRE(fnv1a64(dataset_bytes(manual)) == result.corrupted_hash);
  }

  SECTION("constant velocity is invariant to drops before its window tail") {
    const MetricsReport clean = evaluate(predictors[0].predictor, ds, 1);
    REQUIRE(result.reports[0].second.min_ade == clean.min_ade);
    REQUIRE(result.reports[0].second.min_fde == clean.min_fde);
  }

  SECTION("per-scene mode produces a different corruption") {
    const MissingWaypointResult per_scene = missing_waypoint_eval(
        predictors, ds, 1, seed, {}, MissingKMode::per_scene);
    REQUIRE(per_scene.dropped_k == 0);
    REQUIRE(per_scene.corrupted_hash != result.corrupted_hash);
  }
}

TEST_CASE("fixed_k_sweep covers every k and picks the interior optimum") {
  GenConfig gen = linear_gen(60, 3);
  gen.noise_sigma = 0.01;
  gen.corrupt_step = 3;
  gen.corrupt_sigma = 3.0;
  const Dataset all = generate(gen);
  const Splits splits = split(all, {0.5, 0.25, 0.25}, 11);

  const Predictor predictor = Predictor::linear_fit();
  const FixedKSweepResult result =
      fixed_k_sweep(predictor, splits.validation, splits.test, 1);

  REQUIRE(result.validation_table.size() == 5);
  for (std::size_t k = 1; k <= 5; ++k)
    REQUIRE(result.validation_table[k - 1].k == k);

  double best = result.validation_table.front().ade;
  for (const SweepRow& row : result.validation_table)
    best = std::min(best, row.ade);
  REQUIRE(result.validation_table[result.chosen_k - 1].ade == best);
  REQUIRE(result.chosen_k == 3);  // drops the corrupted interior step
  REQUIRE(result.chosen_k > 1);
  REQUIRE(result.chosen_k < 5);

  // The fixed drop at the chosen k beats leaving the corruption in place.
  REQUIRE(result.test_at_chosen_k.min_ade < result.test_clean.min_ade);
}

TEST_CASE("compare emits RD rows that match published pairs") {
  MetricsReport base, ours;
  base.min_ade = 0.13;
  base.min_fde = 0.24;
  ours.min_ade = 0.11;
  ours.min_fde = 0.19;

  const std::vector<RdRow> rows = compare(base, ours);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].label == "min_ade");
  REQUIRE(std::abs(rows[0].rd - 16.7) < 0.05);
  REQUIRE(rows[1].label == "min_fde");
  REQUIRE(std::abs(rows[1].rd - 23.3) < 0.05);

  SECTION("another published pair") {
    base.min_ade = 0.173;
    ours.min_ade = 0.114;
    REQUIRE(std::abs(compare(base, ours)[0].rd - 41.1) < 0.05);
  }

  SECTION("identical reports give all-zero RD") {
    for (const RdRow& row : compare(base, base)) REQUIRE(row.rd == 0.0);
  }

  SECTION("two exact zeros compare as zero") {
    MetricsReport zero;
    const std::vector<RdRow> z = compare(zero, zero);
    REQUIRE(z[0].rd == 0.0);
  }

  SECTION("horizon mismatch is rejected") {
    MetricsReport with_h = base;
    with_h.per_horizon = {{1.0, 0.1, 0.2}};
    REQUIRE_THROWS_AS(compare(base, with_h), std::invalid_argument);
    MetricsReport other_h = base;
    other_h.per_horizon = {{2.0, 0.1, 0.2}};
    REQUIRE_THROWS_AS(compare(with_h, other_h), std::invalid_argument);
  }

  SECTION("emitted RD values equal a direct recomputation") {
    for (const RdRow& row : compare(base, ours))
      REQUIRE(row.rd == rd_percent(row.baseline, row.ours));
  }
}

namespace {

Config tiny_experiment_config() {
  return Config::parse(std::string(R"(
seed = 5
data.source = synthetic
gen.scene_count = 60
gen.agents_min = 1
gen.agents_max = 2
gen.n_obs = 4
gen.m_pred = 4
gen.noise_sigma = 0.05
gen.mix_linear = 0.5
gen.mix_turning = 0.3
gen.mix_stop_go = 0.2
split.train = 0.6
split.validation = 0.2
split.test = 0.2
train.iterations = 25
train.batch_size = 8
train.hidden = 8
train.heads = 2
twd.mode = off,stochastic
twd.drops = 1
eval.K = 2
eval.horizons = 0.8,1.6
)"));
}

}  // namespace

TEST_CASE("run_experiment writes a deterministic artifact tree") {
  const Config cfg = tiny_experiment_config();
  const fs::path out_a = fresh_dir("twdkit_exp_a");
  const fs::path out_b = fresh_dir("twdkit_exp_b");

  std::ostringstream sink;
  const ExperimentResult a = run_experiment(cfg, out_a, true, sink);
  const ExperimentResult b = run_experiment(cfg, out_b, true, sink);

  SECTION("content-addressed artifact directory") {
    REQUIRE(a.artifact_dir.filename() == b.artifact_dir.filename());
    const std::string name = a.artifact_dir.filename().string();
    REQUIRE(name.size() == 16 + 3);  // <hash16>-s5
    REQUIRE(name.substr(16) == "-s5");
  }

  SECTION("rerun is byte-identical") {
    REQUIRE(slurp(a.artifact_dir / "summary.json") ==
            slurp(b.artifact_dir / "summary.json"));
    REQUIRE(slurp(a.artifact_dir / "effective.cfg") ==
            slurp(b.artifact_dir / "effective.cfg"));
  }

  SECTION("summary rows carry the grid labels") {
    const auto& rows = a.summary.at("rows");
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].at("label") == "w/o TWD");
    REQUIRE(rows[1].at("label") == "w/ TWD");
  }

  SECTION("per-cell artifacts exist") {
    for (const char* slug : {"wo_twd", "w_twd"}) {
      REQUIRE(fs::exists(a.artifact_dir / slug / "checkpoint.json"));
      REQUIRE(fs::exists(a.artifact_dir / slug / "trace.csv"));
    }
    // Sweep runs only for the stochastic cell.
    REQUIRE(fs::exists(a.artifact_dir / "w_twd" / "sweep.csv"));
    REQUIRE(!fs::exists(a.artifact_dir / "wo_twd" / "sweep.csv"));
    const std::string sweep = slurp(a.artifact_dir / "w_twd" / "sweep.csv");
    REQUIRE(sweep.substr(0, 10) == "k,ade,fde\n");
    REQUIRE(std::count(sweep.begin(), sweep.end(), '\n') == 1 + 4);  // n rows
  }

  SECTION("emitted RD values equal recomputation from the row reports") {
    const auto& comparisons = a.summary.at("comparisons");
    REQUIRE(comparisons.size() == 1);
    for (const char* section : {"clean", "missing_waypoint"})
      for (const auto& row : comparisons[0].at(section)) {
        const double baseline = row.at("baseline").get<double>();
        const double ours = row.at("ours").get<double>();
        const double rd = row.at("rd").get<double>();
        if (baseline == 0.0 && ours == 0.0)
          REQUIRE(rd == 0.0);
        else
          REQUIRE(rd == rd_percent(baseline, ours));
      }
  }

  fs::remove_all(out_a);
  fs::remove_all(out_b);
}

TEST_CASE("run_experiment emits one row per drop count") {
  Config cfg = tiny_experiment_config();
  cfg.set("twd.mode", "stochastic");
  cfg.set("twd.drops", "1,2");
  const fs::path out = fresh_dir("twdkit_exp_grid");

  std::ostringstream sink;
  const ExperimentResult result = run_experiment(cfg, out, true, sink);
  const auto& rows = result.summary.at("rows");
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].at("label") == "w/ TWD (D=1)");
  REQUIRE(rows[1].at("label") == "w/ TWD (D=2)");
  REQUIRE(rows[0].at("drops") == 1);
  REQUIRE(rows[1].at("drops") == 2);
  fs::remove_all(out);
}

TEST_CASE("run_experiment names the failing stage") {
  Config cfg = tiny_experiment_config();
  cfg.set("train.optimizer", "bogus");
  const fs::path out = fresh_dir("twdkit_exp_bad");
  std::ostringstream sink;
  try {
    run_experiment(cfg, out, true, sink);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    REQUIRE(e.stage() == "config");
    REQUIRE(e.category() == ErrorCategory::data);
  }
  fs::remove_all(out);
}
