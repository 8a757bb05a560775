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

// Trajectory containers shared by every other module: observation windows,
// ground-truth futures, scenes, sampled prediction sets, and datasets.
//
// Conventions used throughout the library:
//   - coordinates are world-frame meters,
//   - timestamps are implicit 1-based indices (1..n observed, n+1..n+m
//     future) with a scene-level frame_interval in seconds,
//   - all containers are plain values, immutable by convention after
//     construction, and safe to share across threads.

#ifndef TWD_CORE_TYPES_HPP_
#define TWD_CORE_TYPES_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace twd {

// One 2D world-coordinate position of one agent at one timestamp.
struct Waypoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

inline bool is_finite(const Waypoint& w) {
  return std::isfinite(w.x) && std::isfinite(w.y);
}

// Past trajectories of N agents over `len` timestamps, row-major
// [agent][timestamp]. Agent identity is an opaque token preserved through
// augmentation so modified windows stay joinable to their ground truth.
struct ObservedWindow {
  std::vector<Waypoint> positions;  // agents() * len entries
  std::vector<std::int64_t> agent_ids;
  std::size_t len = 0;

  std::size_t agents() const { return agent_ids.size(); }

  Waypoint& at(std::size_t agent, std::size_t t) {
    return positions[agent * len + t];
  }
  const Waypoint& at(std::size_t agent, std::size_t t) const {
    return positions[agent * len + t];
  }

  friend bool operator==(const ObservedWindow&, const ObservedWindow&) =
      default;
};

// Ground-truth futures, same agent order as the paired ObservedWindow.
struct FutureWindow {
  std::vector<Waypoint> positions;  // agents * len entries
  std::size_t agents = 0;
  std::size_t len = 0;

  Waypoint& at(std::size_t agent, std::size_t t) {
    return positions[agent * len + t];
  }
  const Waypoint& at(std::size_t agent, std::size_t t) const {
    return positions[agent * len + t];
  }

  friend bool operator==(const FutureWindow&, const FutureWindow&) = default;
};

// One sample: paired observation and future for the same agents.
struct Scene {
  ObservedWindow observed;
  FutureWindow future;
  double frame_interval = 0.0;  // seconds per timestamp

  friend bool operator==(const Scene&, const Scene&) = default;
};

// K sampled futures for one scene, [sample][agent][timestamp].
struct PredictionSet {
  std::vector<Waypoint> positions;  // samples * agents * len entries
  std::size_t samples = 0;
  std::size_t agents = 0;
  std::size_t len = 0;

  Waypoint& at(std::size_t sample, std::size_t agent, std::size_t t) {
    return positions[(sample * agents + agent) * len + t];
  }
  const Waypoint& at(std::size_t sample, std::size_t agent,
                     std::size_t t) const {
    return positions[(sample * agents + agent) * len + t];
  }
};

enum class SplitTag : std::uint8_t { train = 0, validation = 1, test = 2 };

inline const char* to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::train:
      return "train";
    case SplitTag::validation:
      return "validation";
    case SplitTag::test:
      return "test";
  }
  return "train";
}

struct Dataset {
  std::vector<Scene> scenes;
  SplitTag split_tag = SplitTag::train;
};

struct SceneDims {
  std::size_t agents = 0;        // N
  std::size_t observed_len = 0;  // n
  std::size_t future_len = 0;    // m
};

inline SceneDims scene_dimensions(const Scene& scene) {
  return {scene.observed.agents(), scene.observed.len, scene.future.len};
}

// Returns the first violated invariant, or nullopt when the scene is
// well formed. Validation is the output; nothing throws here.
inline std::optional<std::string> validate_scene(const Scene& scene) {
  const auto& obs = scene.observed;
  const auto& fut = scene.future;
  if (obs.agents() < 1) return "no agents";
  if (obs.len < 2) return "observed window shorter than 2";
  if (obs.positions.size() != obs.agents() * obs.len)
    return "observed position count inconsistent with shape";
  if (fut.len < 1) return "future window empty";
  if (fut.positions.size() != fut.agents * fut.len)
    return "future position count inconsistent with shape";
  if (obs.agents() != fut.agents) return "agent count mismatch";
  if (!(scene.frame_interval > 0.0) || !std::isfinite(scene.frame_interval))
    return "frame interval not positive";
  for (const Waypoint& w : obs.positions)
    if (!is_finite(w)) return "non-finite coordinate";
  for (const Waypoint& w : fut.positions)
    if (!is_finite(w)) return "non-finite coordinate";
  return std::nullopt;
}

}  // namespace twd

#endif  // TWD_CORE_TYPES_HPP_
