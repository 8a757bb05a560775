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

// Temporal waypoint dropping: removes the waypoint at one stochastically
// chosen timestamp from every agent's observed window, optionally iterated
// D times (resampling over the shrunken window each round), then restores
// the original length by front-padding with the earliest surviving
// waypoint. Ground-truth futures are never touched.

#ifndef TWD_TWD_AUGMENT_HPP_
#define TWD_TWD_AUGMENT_HPP_

#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "twd/core_types.hpp"
#include "twd/metrics.hpp"
#include "twd/rng.hpp"

namespace twd {

struct DropConfig {
  std::size_t drops = 1;        // D; 0 means identity
  bool pad_to_original = true;  // restore the input length after dropping
};

// Which original 1-based timestamps were removed, in drop order.
struct DropRecord {
  std::vector<std::size_t> dropped_indices;
};

// Removes the k-th (1-based) waypoint from every agent. The same k applies
// to all agents; agent order is preserved.
inline ObservedWindow drop_index(const ObservedWindow& window, std::size_t k) {
  if (window.len < 2)
    throw std::invalid_argument("drop_index: window must have length >= 2");
  if (k < 1 || k > window.len)
    throw std::invalid_argument("drop_index: k out of range");
  ObservedWindow out;
  out.agent_ids = window.agent_ids;
  out.len = window.len - 1;
  out.positions.reserve(window.agents() * out.len);
  for (std::size_t a = 0; a < window.agents(); ++a)
    for (std::size_t t = 0; t < window.len; ++t)
      if (t != k - 1) out.positions.push_back(window.at(a, t));
  return out;
}

// Prepends copies of each agent's earliest remaining waypoint until the
// window reaches target_len. The suffix stays identical to the input, so
// later step-to-step displacements are unchanged and no position is ever
// fabricated.
inline ObservedWindow pad_front(const ObservedWindow& window,
                                std::size_t target_len) {
  if (window.len > target_len)
    throw std::invalid_argument("pad_front: window longer than target length");
  if (window.len == target_len) return window;
  const std::size_t pad = target_len - window.len;
  ObservedWindow out;
  out.agent_ids = window.agent_ids;
  out.len = target_len;
  out.positions.reserve(window.agents() * target_len);
  for (std::size_t a = 0; a < window.agents(); ++a) {
    for (std::size_t i = 0; i < pad; ++i)
      out.positions.push_back(window.at(a, 0));
    for (std::size_t t = 0; t < window.len; ++t)
      out.positions.push_back(window.at(a, t));
  }
  return out;
}

// Applies a sequence of drops where each entry indexes into the CURRENT
// (already shrunken) window, and maps every drop back to its original
// 1-based timestamp. No padding. Shared by the stochastic paths and by
// exhaustive enumeration in tests.
inline std::pair<ObservedWindow, DropRecord> apply_drop_sequence(
    ObservedWindow window, std::span<const std::size_t> current_indices) {
  DropRecord record;
  std::vector<std::size_t> alive(window.len);
  std::iota(alive.begin(), alive.end(), std::size_t{1});
  for (std::size_t k : current_indices) {
    if (k < 1 || k > window.len)
      throw std::invalid_argument("apply_drop_sequence: k out of range");
    record.dropped_indices.push_back(alive[k - 1]);
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(k - 1));
    window = drop_index(window, k);
  }
  return {std::move(window), std::move(record)};
}

namespace detail {

inline Scene finish_drop(const Scene& scene, ObservedWindow dropped,
                         const DropConfig& cfg) {
  Scene out = scene;  // future window carried over untouched
  out.observed = cfg.pad_to_original
                     ? pad_front(dropped, scene.observed.len)
                     : std::move(dropped);
  return out;
}

}  // namespace detail

// One stochastic drop: k is drawn uniformly over {1..n}, so each timestamp
// is equally likely to be removed.
inline std::pair<Scene, DropRecord> twd_single(const Scene& scene,
                                               RandomSource& src,
                                               const DropConfig& cfg = {}) {
  const std::size_t n = scene.observed.len;
  if (n < 2) throw std::invalid_argument("twd_single: window length must be >= 2");
  const std::size_t k = src.uniform_index(n);
  auto [dropped, record] =
      apply_drop_sequence(scene.observed, std::vector<std::size_t>{k});
  return {detail::finish_drop(scene, std::move(dropped), cfg), record};
}

// Iterated drops: D rounds, each sampling uniformly over the currently
// remaining timestamps. Padding is applied once, after all drops.
inline std::pair<Scene, DropRecord> twd_multi(const Scene& scene,
                                              RandomSource& src,
                                              const DropConfig& cfg) {
  const std::size_t n = scene.observed.len;
  if (cfg.drops >= n)
    throw std::invalid_argument("twd_multi: drops must satisfy D < n");
  if (cfg.drops == 0) return {scene, DropRecord{}};
  std::vector<std::size_t> ks(cfg.drops);
  for (std::size_t i = 0; i < cfg.drops; ++i) ks[i] = src.uniform_index(n - i);
  auto [dropped, record] = apply_drop_sequence(scene.observed, ks);
  return {detail::finish_drop(scene, std::move(dropped), cfg), record};
}

// Deterministic drop of timestamp k plus front padding; consumes no
// randomness. Used for fixed-drop evaluation at test time.
inline Scene apply_fixed_drop(const Scene& scene, std::size_t k) {
  Scene out = scene;
  out.observed = pad_front(drop_index(scene.observed, k), scene.observed.len);
  return out;
}

enum class FixedKObjective {
  min_error,  // best validation quality (default reading)
  max_error,  // literal arg-max of the error metric, kept testable
};

struct SweepRow {
  std::size_t k = 0;
  double ade = 0.0;
  double fde = 0.0;
};

struct FixedKSelection {
  std::size_t k = 0;
  std::vector<SweepRow> table;  // one row per k in 1..n
};

// Evaluates the predictor on apply_fixed_drop(scene, k) for every k in 1..n
// and returns the k with the best validation score plus the full per-k
// table. Ties break toward the smallest k.
inline FixedKSelection select_fixed_k(const SceneSampler& predictor,
                                      const Dataset& validation, Metric metric,
                                      std::size_t K,
                                      FixedKObjective objective =
                                          FixedKObjective::min_error,
                                      std::size_t threads = 1) {
  if (validation.scenes.empty())
    throw EmptyDatasetError("select_fixed_k: empty validation set");
  const std::size_t n = validation.scenes.front().observed.len;
  FixedKSelection result;
  double best = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    Dataset corrupted;
    corrupted.split_tag = validation.split_tag;
    corrupted.scenes.reserve(validation.scenes.size());
    for (const Scene& scene : validation.scenes)
      corrupted.scenes.push_back(apply_fixed_drop(scene, k));
    const MetricsReport report =
        dataset_metrics(predictor, corrupted, K, {}, MinimizeOver::scene, threads);
    result.table.push_back({k, report.min_ade, report.min_fde});
    const double score = metric == Metric::ade ? report.min_ade : report.min_fde;
    const bool better = objective == FixedKObjective::min_error ? score < best
                                                                : score > best;
    if (k == 1 || better) {
      best = score;
      result.k = k;
    }
  }
  return result;
}

// Dispatch used by training loops: D=0 is the identity, D=1 a single drop,
// D>1 iterated drops.
inline std::pair<Scene, DropRecord> apply_twd(const Scene& scene,
                                              RandomSource& src,
                                              const DropConfig& cfg) {
  if (cfg.drops == 0) return {scene, DropRecord{}};
  if (cfg.drops == 1) return twd_single(scene, src, cfg);
  return twd_multi(scene, src, cfg);
}

}  // namespace twd

#endif  // TWD_TWD_AUGMENT_HPP_
