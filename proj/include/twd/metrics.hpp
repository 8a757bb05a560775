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

// Displacement-error metrics: ADE (mean L2 distance over all future
// timesteps and agents), FDE (mean L2 distance at the final timestep),
// their best-of-K variants, per-horizon truncation, and the symmetric
// relative-percent-difference statistic used in comparison reports.

#ifndef TWD_METRICS_HPP_
#define TWD_METRICS_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twd/core_types.hpp"
#include "twd/errors.hpp"

namespace twd {

enum class Metric { ade, fde };

// Best-of-K can take the minimum per scene over whole trajectories (the
// standard convention, default) or per agent independently.
enum class MinimizeOver { scene, agent };

// Shortest decimal form that round-trips the exact double. Used everywhere
// numbers are written to text so reruns produce identical bytes.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace detail {

inline void check_same_shape(const FutureWindow& pred, const FutureWindow& gt) {
  if (pred.agents != gt.agents || pred.len != gt.len)
    throw std::invalid_argument("metric: prediction/ground-truth shape mismatch");
}

// ADE of one sample of a PredictionSet over the first `prefix` timesteps.
inline double ade_sample(const PredictionSet& ps, std::size_t sample,
                         const FutureWindow& gt, std::size_t prefix) {
  double sum = 0.0;
  for (std::size_t a = 0; a < gt.agents; ++a)
    for (std::size_t t = 0; t < prefix; ++t)
      sum += std::hypot(ps.at(sample, a, t).x - gt.at(a, t).x,
                        ps.at(sample, a, t).y - gt.at(a, t).y);
  return sum / static_cast<double>(gt.agents * prefix);
}

// FDE of one sample: mean over agents of the distance at timestep `prefix`.
inline double fde_sample(const PredictionSet& ps, std::size_t sample,
                         const FutureWindow& gt, std::size_t prefix) {
  const std::size_t t = prefix - 1;
  double sum = 0.0;
  for (std::size_t a = 0; a < gt.agents; ++a)
    sum += std::hypot(ps.at(sample, a, t).x - gt.at(a, t).x,
                      ps.at(sample, a, t).y - gt.at(a, t).y);
  return sum / static_cast<double>(gt.agents);
}

// Per-agent error of one sample, truncated to `prefix` steps.
inline double agent_error(const PredictionSet& ps, std::size_t sample,
                          std::size_t agent, const FutureWindow& gt,
                          std::size_t prefix, Metric metric) {
  if (metric == Metric::fde) {
    const std::size_t t = prefix - 1;
    return std::hypot(ps.at(sample, agent, t).x - gt.at(agent, t).x,
                      ps.at(sample, agent, t).y - gt.at(agent, t).y);
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < prefix; ++t)
    sum += std::hypot(ps.at(sample, agent, t).x - gt.at(agent, t).x,
                      ps.at(sample, agent, t).y - gt.at(agent, t).y);
  return sum / static_cast<double>(prefix);
}

}  // namespace detail

// Mean Euclidean distance over all N*m waypoints.
inline double ade(const FutureWindow& pred, const FutureWindow& gt) {
  detail::check_same_shape(pred, gt);
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.positions.size(); ++i)
    sum += std::hypot(pred.positions[i].x - gt.positions[i].x,
                      pred.positions[i].y - gt.positions[i].y);
  return sum / static_cast<double>(gt.positions.size());
}

// Mean over agents of the Euclidean distance at the last timestep.
inline double fde(const FutureWindow& pred, const FutureWindow& gt) {
  detail::check_same_shape(pred, gt);
  const std::size_t last = gt.len - 1;
  double sum = 0.0;
  for (std::size_t a = 0; a < gt.agents; ++a)
    sum += std::hypot(pred.at(a, last).x - gt.at(a, last).x,
                      pred.at(a, last).y - gt.at(a, last).y);
  return sum / static_cast<double>(gt.agents);
}

// Metric over the first `prefix` future timesteps only, minimized over the
// K samples (FDE uses the waypoint at 1-based index `prefix`).
inline double truncated_horizon(const PredictionSet& ps, const FutureWindow& gt,
                                std::size_t prefix, Metric metric,
                                MinimizeOver level = MinimizeOver::scene) {
  if (ps.samples < 1) throw std::invalid_argument("truncated_horizon: K >= 1 required");
  if (ps.agents != gt.agents || ps.len != gt.len)
    throw std::invalid_argument("truncated_horizon: shape mismatch");
  if (prefix < 1 || prefix > gt.len)
    throw std::invalid_argument("truncated_horizon: prefix out of range");
  if (level == MinimizeOver::agent) {
    double total = 0.0;
    for (std::size_t a = 0; a < gt.agents; ++a) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < ps.samples; ++k)
        best = std::min(best, detail::agent_error(ps, k, a, gt, prefix, metric));
      total += best;
    }
    return total / static_cast<double>(gt.agents);
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ps.samples; ++k) {
    const double v = metric == Metric::ade
                         ? detail::ade_sample(ps, k, gt, prefix)
                         : detail::fde_sample(ps, k, gt, prefix);
    best = std::min(best, v);
  }
  return best;
}

// Minimum of the metric over the K samples at full horizon.
inline double min_over_samples(const PredictionSet& ps, const FutureWindow& gt,
                               Metric metric,
                               MinimizeOver level = MinimizeOver::scene) {
  return truncated_horizon(ps, gt, gt.len, metric, level);
}

// Symmetric relative percent difference |a-b| / ((a+b)/2) * 100.
inline double rd_percent(double baseline, double ours) {
  if (!(baseline >= 0.0) || !(ours >= 0.0))
    throw std::invalid_argument("rd_percent: inputs must be non-negative");
  if (baseline + ours <= 0.0)
    throw std::invalid_argument("rd_percent: undefined for two zero inputs");
  return std::abs(baseline - ours) / ((baseline + ours) / 2.0) * 100.0;
}

struct HorizonMetrics {
  double seconds = 0.0;
  double min_ade = 0.0;
  double min_fde = 0.0;
};

struct MetricsReport {
  double min_ade = 0.0;
  double min_fde = 0.0;
  std::vector<HorizonMetrics> per_horizon;  // seconds strictly increasing
  std::size_t K = 0;
  std::size_t scene_count = 0;

  nlohmann::json to_json() const {
    nlohmann::json h = nlohmann::json::array();
    for (const auto& row : per_horizon)
      h.push_back({{"seconds", row.seconds},
                   {"min_ade", row.min_ade},
                   {"min_fde", row.min_fde}});
    return {{"min_ade", min_ade},
            {"min_fde", min_fde},
            {"per_horizon", h},
            {"K", K},
            {"scene_count", scene_count}};
  }

  static MetricsReport from_json(const nlohmann::json& j) {
    MetricsReport r;
    r.min_ade = j.at("min_ade").get<double>();
    r.min_fde = j.at("min_fde").get<double>();
    r.K = j.at("K").get<std::size_t>();
    r.scene_count = j.at("scene_count").get<std::size_t>();
    for (const auto& row : j.at("per_horizon"))
      r.per_horizon.push_back({row.at("seconds").get<double>(),
                               row.at("min_ade").get<double>(),
                               row.at("min_fde").get<double>()});
    return r;
  }

  std::string to_csv() const {
    std::string header = "K,scene_count,min_ade,min_fde";
    std::string row = std::to_string(K) + "," + std::to_string(scene_count) +
                      "," + format_double(min_ade) + "," + format_double(min_fde);
    for (const auto& h : per_horizon) {
      header += ",ade@" + format_double(h.seconds) + "s,fde@" +
                format_double(h.seconds) + "s";
      row += "," + format_double(h.min_ade) + "," + format_double(h.min_fde);
    }
    return header + "\n" + row + "\n";
  }
};

// Produces the K-sample prediction set for one scene.
using SceneSampler =
    std::function<PredictionSet(const Scene&, std::size_t /*K*/)>;

namespace detail {

// Runs fn(i) for i in [0, count) across `threads` workers; results must be
// written into pre-sized per-index slots so the reduction order stays fixed.
inline void parallel_for(std::size_t count, std::size_t threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

// Per-scene best-of-K metrics averaged over scenes, at full horizon and at
// each requested horizon (seconds, converted via the scene frame interval).
inline MetricsReport dataset_metrics(const SceneSampler& predictor,
                                     const Dataset& dataset, std::size_t K,
                                     std::vector<double> horizons,
                                     MinimizeOver level = MinimizeOver::scene,
                                     std::size_t threads = 1) {
  if (dataset.scenes.empty())
    throw EmptyDatasetError("dataset_metrics: no scenes");
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());

  // All scenes in a dataset share (m, frame_interval), so the horizon ->
  // prefix mapping is validated once up front.
  std::vector<std::size_t> prefixes;
  for (double h : horizons) {
    const auto prefix = static_cast<std::size_t>(
        std::llround(h / dataset.scenes.front().frame_interval));
    if (prefix < 1 || prefix > dataset.scenes.front().future.len)
      throw std::invalid_argument("dataset_metrics: horizon " +
                                  format_double(h) +
                                  "s outside the prediction window");
    prefixes.push_back(prefix);
  }

  struct SceneRow {
    double ade = 0.0, fde = 0.0;
    std::vector<std::pair<double, double>> per_h;
    std::size_t K = 0;
  };
  std::vector<SceneRow> rows(dataset.scenes.size());

  detail::parallel_for(
      dataset.scenes.size(), threads, [&](std::size_t i) {
        const Scene& scene = dataset.scenes[i];
        const PredictionSet ps = predictor(scene, K);
        SceneRow& row = rows[i];
        row.K = ps.samples;
        row.ade = min_over_samples(ps, scene.future, Metric::ade, level);
        row.fde = min_over_samples(ps, scene.future, Metric::fde, level);
        for (std::size_t prefix : prefixes)
          row.per_h.emplace_back(
              truncated_horizon(ps, scene.future, prefix, Metric::ade, level),
              truncated_horizon(ps, scene.future, prefix, Metric::fde, level));
      });

  MetricsReport report;
  report.scene_count = rows.size();
  report.K = rows.front().K;
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t h = 0; h < horizons.size(); ++h)
    report.per_horizon.push_back({horizons[h], 0.0, 0.0});
  for (const SceneRow& row : rows) {
    report.min_ade += row.ade * inv;
    report.min_fde += row.fde * inv;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      report.per_horizon[h].min_ade += row.per_h[h].first * inv;
      report.per_horizon[h].min_fde += row.per_h[h].second * inv;
    }
  }
  return report;
}

}  // namespace twd

#endif  // TWD_METRICS_HPP_
