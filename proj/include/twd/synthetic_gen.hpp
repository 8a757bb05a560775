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

// Deterministic generator of multi-agent scenes with known dynamics:
// straight lines, constant-turn-rate arcs, and stop-and-go segments, plus
// optional Gaussian observation noise. Noise perturbs observed positions
// only, so ground-truth futures stay smooth. Linear and stop-and-go agents
// move on a fine binary grid, which keeps their zero-noise trajectories
// exactly representable and the constant-velocity continuation bit-exact.

#ifndef TWD_SYNTHETIC_GEN_HPP_
#define TWD_SYNTHETIC_GEN_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "twd/core_types.hpp"
#include "twd/rng.hpp"

namespace twd {

struct GenConfig {
  std::size_t scene_count = 100;
  std::size_t agents_min = 1;
  std::size_t agents_max = 4;
  std::size_t n_obs = 5;
  std::size_t m_pred = 10;
  double frame_interval = 0.4;  // seconds per timestamp
  double mix_linear = 0.4;      // motion-model weights, must sum to 1
  double mix_turning = 0.4;
  double mix_stop_go = 0.2;
  double noise_sigma = 0.0;     // observation noise, meters
  double speed_min = 0.5;       // meters per step
  double speed_max = 1.5;
  std::size_t corrupt_step = 0;  // 1-based observed timestamp; 0 disables
  double corrupt_sigma = 0.0;    // extra noise at corrupt_step only
  std::uint64_t seed = 0;
};

namespace detail {

// Snap to multiples of 2^-20 so sums and small integer multiples of the
// value stay exactly representable.
inline double grid_snap(double v) {
  constexpr double grid = 1048576.0;  // 2^20
  return std::round(v * grid) / grid;
}

inline void validate(const GenConfig& cfg) {
  if (cfg.scene_count < 1) throw std::invalid_argument("gen: scene_count >= 1");
  if (cfg.agents_min < 1 || cfg.agents_max < cfg.agents_min)
    throw std::invalid_argument("gen: bad agent range");
  if (cfg.n_obs < 2 || cfg.m_pred < 1)
    throw std::invalid_argument("gen: need n_obs >= 2 and m_pred >= 1");
  if (!(cfg.frame_interval > 0.0))
    throw std::invalid_argument("gen: frame_interval must be positive");
  if (cfg.mix_linear < 0.0 || cfg.mix_turning < 0.0 || cfg.mix_stop_go < 0.0)
    throw std::invalid_argument("gen: motion weights must be non-negative");
  const double sum = cfg.mix_linear + cfg.mix_turning + cfg.mix_stop_go;
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("gen: motion weights must sum to 1");
  if (cfg.noise_sigma < 0.0 || cfg.corrupt_sigma < 0.0)
    throw std::invalid_argument("gen: noise sigma must be non-negative");
  if (!(cfg.speed_min > 0.0) || cfg.speed_max < cfg.speed_min)
    throw std::invalid_argument("gen: bad speed range");
  if (cfg.corrupt_step > cfg.n_obs)
    throw std::invalid_argument("gen: corrupt_step beyond observed window");
}

enum class MotionModel { linear, turning, stop_go };

inline MotionModel pick_model(const GenConfig& cfg, RandomSource& src) {
  const double u = src.uniform_real(0.0, 1.0);
  if (u < cfg.mix_linear) return MotionModel::linear;
  if (u < cfg.mix_linear + cfg.mix_turning) return MotionModel::turning;
  return MotionModel::stop_go;
}

inline double sample_speed(const GenConfig& cfg, RandomSource& src) {
  return cfg.speed_min == cfg.speed_max
             ? cfg.speed_min
             : src.uniform_real(cfg.speed_min, cfg.speed_max);
}

// Noiseless positions for one agent over total steps.
inline std::vector<Waypoint> agent_track(const GenConfig& cfg,
                                         RandomSource& src,
                                         std::size_t total) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  const MotionModel model = pick_model(cfg, src);
  const double heading = src.uniform_real(0.0, two_pi);
  const double speed = sample_speed(cfg, src);
  Waypoint start{src.uniform_real(-10.0, 10.0), src.uniform_real(-10.0, 10.0)};

  std::vector<Waypoint> track(total);
  switch (model) {
    case MotionModel::linear: {
      start = {grid_snap(start.x), grid_snap(start.y)};
      const double dx = grid_snap(speed * std::cos(heading));
      const double dy = grid_snap(speed * std::sin(heading));
      for (std::size_t t = 0; t < total; ++t)
        track[t] = {start.x + dx * static_cast<double>(t),
                    start.y + dy * static_cast<double>(t)};
      break;
    }
    case MotionModel::turning: {
      const double turn_rate = src.uniform_real(-0.2, 0.2);  // rad per step
      double angle = heading;
      track[0] = start;
      for (std::size_t t = 1; t < total; ++t) {
        track[t] = {track[t - 1].x + speed * std::cos(angle),
                    track[t - 1].y + speed * std::sin(angle)};
        angle += turn_rate;
      }
      break;
    }
    case MotionModel::stop_go: {
      // Speed halves over one random contiguous run of steps.
      start = {grid_snap(start.x), grid_snap(start.y)};
      const double dx = grid_snap(speed * std::cos(heading));
      const double dy = grid_snap(speed * std::sin(heading));
      const std::size_t slow_start = src.uniform_index(total);
      const std::size_t slow_len = src.uniform_index(total - slow_start + 1);
      track[0] = start;
      for (std::size_t t = 1; t < total; ++t) {
        const bool slow = t >= slow_start && t < slow_start + slow_len;
        const double f = slow ? 0.5 : 1.0;
        track[t] = {track[t - 1].x + f * dx, track[t - 1].y + f * dy};
      }
      break;
    }
  }
  return track;
}

}  // namespace detail

// Deterministic given the seed; scene i depends only on (seed, i), so
// generation may run scene-parallel without changing the output.
inline Dataset generate(const GenConfig& cfg) {
  detail::validate(cfg);
  const RandomSource root(cfg.seed);
  const std::size_t total = cfg.n_obs + cfg.m_pred;

  Dataset dataset;
  dataset.scenes.reserve(cfg.scene_count);
  for (std::size_t s = 0; s < cfg.scene_count; ++s) {
    RandomSource src = root.fork("scene/" + std::to_string(s));
    const std::size_t agents =
        cfg.agents_min +
        src.uniform_index(cfg.agents_max - cfg.agents_min + 1) - 1;

    Scene scene;
    scene.frame_interval = cfg.frame_interval;
    scene.observed.len = cfg.n_obs;
    scene.future.agents = agents;
    scene.future.len = cfg.m_pred;
    scene.observed.positions.reserve(agents * cfg.n_obs);
    scene.future.positions.reserve(agents * cfg.m_pred);
    for (std::size_t a = 0; a < agents; ++a) {
      scene.observed.agent_ids.push_back(static_cast<std::int64_t>(a + 1));
      const auto track = detail::agent_track(cfg, src, total);
      for (std::size_t t = 0; t < cfg.n_obs; ++t) {
        Waypoint w = track[t];
        if (cfg.noise_sigma > 0.0) {
          w.x += src.normal(0.0, cfg.noise_sigma);
          w.y += src.normal(0.0, cfg.noise_sigma);
        }
        if (cfg.corrupt_step == t + 1 && cfg.corrupt_sigma > 0.0) {
          w.x += src.normal(0.0, cfg.corrupt_sigma);
          w.y += src.normal(0.0, cfg.corrupt_sigma);
        }
        scene.observed.positions.push_back(w);
      }
      for (std::size_t t = cfg.n_obs; t < total; ++t)
        scene.future.positions.push_back(track[t]);
    }
    dataset.scenes.push_back(std::move(scene));
  }
  return dataset;
}

// Seed-deterministic shuffle-then-cut into disjoint, exhaustive splits.
struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct Splits {
  Dataset train;
  Dataset validation;
  Dataset test;
};

inline Splits split(const Dataset& dataset, const SplitFractions& fractions,
                    std::uint64_t seed) {
  if (!(fractions.train > 0.0) || !(fractions.validation > 0.0) ||
      !(fractions.test > 0.0))
    throw std::invalid_argument("split: fractions must be positive");
  if (std::abs(fractions.train + fractions.validation + fractions.test - 1.0) >
      1e-9)
    throw std::invalid_argument("split: fractions must sum to 1");

  const std::size_t count = dataset.scenes.size();
  const auto n_train =
      static_cast<std::size_t>(std::llround(fractions.train * count));
  const auto n_val =
      static_cast<std::size_t>(std::llround(fractions.validation * count));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= count)
    throw std::invalid_argument("split: a split would be empty");
  const std::size_t n_test = count - n_train - n_val;

  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  RandomSource src(seed);
  for (std::size_t i = count - 1; i > 0; --i) {
    const std::size_t j = src.uniform_index(i + 1) - 1;
    std::swap(order[i], order[j]);
  }

  Splits out;
  out.train.split_tag = SplitTag::train;
  out.validation.split_tag = SplitTag::validation;
  out.test.split_tag = SplitTag::test;
  for (std::size_t i = 0; i < n_train; ++i)
    out.train.scenes.push_back(dataset.scenes[order[i]]);
  for (std::size_t i = 0; i < n_val; ++i)
    out.validation.scenes.push_back(dataset.scenes[order[n_train + i]]);
  for (std::size_t i = 0; i < n_test; ++i)
    out.test.scenes.push_back(dataset.scenes[order[n_train + n_val + i]]);
  return out;
}

}  // namespace twd

#endif  // TWD_SYNTHETIC_GEN_HPP_
