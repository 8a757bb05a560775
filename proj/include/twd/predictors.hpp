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

// The predictor family: two closed-form baselines (constant velocity,
// per-agent least-squares line) and a small trainable network with exact
// analytic gradients.
//
// The learned architecture works on relative coordinates and is therefore
// translation equivariant: per agent, the n-1 earlier positions expressed
// relative to the last observed point feed one tanh hidden layer, and each
// of the K output heads emits m future displacements that are cumulatively
// summed onto the last observed position. (Raw step displacements would be
// a degenerate input here: front-padding pins the first displacement of
// every dropped-and-padded window to exactly zero, so the weights reading
// it would never train.) Training minimizes the variety loss
// (min-over-heads mean squared error); the gradient flows only through the
// best head.

#ifndef TWD_PREDICTORS_HPP_
#define TWD_PREDICTORS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "twd/core_types.hpp"
#include "twd/errors.hpp"
#include "twd/metrics.hpp"
#include "twd/rng.hpp"
#include "twd/twd_augment.hpp"

namespace twd {

enum class PredictorKind { constant_velocity, linear_fit, learned };

inline const char* to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::constant_velocity:
      return "constant_velocity";
    case PredictorKind::linear_fit:
      return "linear_fit";
    case PredictorKind::learned:
      return "learned";
  }
  return "learned";
}

struct LearnedHyper {
  std::size_t n = 0;       // observed length the network accepts
  std::size_t m = 0;       // future steps emitted
  std::size_t hidden = 64;
  std::size_t heads = 20;  // K output heads

  std::size_t input_dim() const { return 2 * (n - 1); }
  std::size_t output_dim() const { return heads * 2 * m; }
  std::size_t param_count() const {
    return hidden * input_dim() + hidden + output_dim() * hidden + output_dim();
  }
};

// Each agent continues with its last observed per-step velocity.
inline PredictionSet predict_constant_velocity(const ObservedWindow& obs,
                                               std::size_t m) {
  if (obs.len < 2)
    throw std::invalid_argument("constant_velocity: need at least 2 waypoints");
  PredictionSet ps;
  ps.samples = 1;
  ps.agents = obs.agents();
  ps.len = m;
  ps.positions.resize(ps.agents * m);
  for (std::size_t a = 0; a < ps.agents; ++a) {
    const Waypoint last = obs.at(a, obs.len - 1);
    const Waypoint prev = obs.at(a, obs.len - 2);
    const double vx = last.x - prev.x;
    const double vy = last.y - prev.y;
    for (std::size_t t = 0; t < m; ++t)
      ps.at(0, a, t) = {last.x + vx * static_cast<double>(t + 1),
                        last.y + vy * static_cast<double>(t + 1)};
  }
  return ps;
}

// Least-squares line per agent per coordinate over timestamps 1..n,
// extrapolated to n+1..n+m.
inline PredictionSet predict_linear_fit(const ObservedWindow& obs,
                                        std::size_t m) {
  if (obs.len < 2)
    throw std::invalid_argument("linear_fit: need at least 2 waypoints");
  const auto n = static_cast<double>(obs.len);
  const double t_mean = (n + 1.0) / 2.0;
  const double sxx = n * (n * n - 1.0) / 12.0;  // sum of (t - t_mean)^2
  PredictionSet ps;
  ps.samples = 1;
  ps.agents = obs.agents();
  ps.len = m;
  ps.positions.resize(ps.agents * m);
  for (std::size_t a = 0; a < ps.agents; ++a) {
    double x_mean = 0.0, y_mean = 0.0;
    for (std::size_t t = 0; t < obs.len; ++t) {
      x_mean += obs.at(a, t).x;
      y_mean += obs.at(a, t).y;
    }
    x_mean /= n;
    y_mean /= n;
    double sx = 0.0, sy = 0.0;
    for (std::size_t t = 0; t < obs.len; ++t) {
      const double dt = static_cast<double>(t + 1) - t_mean;
      sx += dt * obs.at(a, t).x;
      sy += dt * obs.at(a, t).y;
    }
    const double bx = sx / sxx, by = sy / sxx;
    const double ax = x_mean - bx * t_mean, ay = y_mean - by * t_mean;
    for (std::size_t t = 0; t < m; ++t) {
      const double at = n + static_cast<double>(t + 1);
      ps.at(0, a, t) = {ax + bx * at, ay + by * at};
    }
  }
  return ps;
}

class Predictor {
 public:
  static Predictor constant_velocity() {
    return Predictor(PredictorKind::constant_velocity);
  }

  static Predictor linear_fit() { return Predictor(PredictorKind::linear_fit); }

  // Fresh network: input weights and all biases start at zero, output
  // weights uniform in +-1/sqrt(hidden). Zero input weights matter under
  // always-on dropping: a padded window repeats its head, which ties input
  // slots together, and any weight component separating tied slots never
  // receives gradient. Starting that component at zero keeps it zero, so
  // un-padded windows at test time read a trained average instead of
  // leftover initialization noise. Hidden-unit symmetry is broken by the
  // random output weights.
  static Predictor learned(const LearnedHyper& hyper, RandomSource& init) {
    if (hyper.n < 2 || hyper.m < 1 || hyper.hidden < 1 || hyper.heads < 1)
      throw std::invalid_argument("learned predictor: bad hyperparameters");
    Predictor p(PredictorKind::learned);
    p.hyper_ = hyper;
    p.seed_ = init.seed();
    p.theta_.assign(hyper.param_count(), 0.0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hyper.hidden));
    std::size_t i = hyper.hidden * hyper.input_dim() + hyper.hidden;
    for (std::size_t w = 0; w < hyper.output_dim() * hyper.hidden; ++w)
      p.theta_[i++] = init.uniform_real(-bound, bound);
    return p;
  }

  static Predictor learned_from(const LearnedHyper& hyper,
                                std::vector<double> theta,
                                std::uint64_t seed) {
    if (theta.size() != hyper.param_count())
      throw std::invalid_argument("learned predictor: theta size mismatch");
    Predictor p(PredictorKind::learned);
    p.hyper_ = hyper;
    p.theta_ = std::move(theta);
    p.seed_ = seed;
    return p;
  }

  PredictorKind kind() const { return kind_; }
  const LearnedHyper& hyper() const { return hyper_; }
  const std::vector<double>& theta() const { return theta_; }
  std::vector<double>& mutable_theta() { return theta_; }
  std::uint64_t seed() const { return seed_; }

  // K sampled futures for one observation window. Deterministic baselines
  // produce a single sample; the learned kind emits min(K, heads) heads.
  PredictionSet predict(const ObservedWindow& obs, std::size_t m,
                        std::size_t K) const;

  SceneSampler sampler() const {
    Predictor copy = *this;
    return [copy](const Scene& scene, std::size_t K) {
      return copy.predict(scene.observed, scene.future.len, K);
    };
  }

  nlohmann::json to_checkpoint_json() const {
    return {{"format_version", 1},
            {"kind", to_string(kind_)},
            {"n", hyper_.n},
            {"m", hyper_.m},
            {"hidden", hyper_.hidden},
            {"heads", hyper_.heads},
            {"theta", theta_},
            {"seed", seed_}};
  }

  static Predictor from_checkpoint_json(const nlohmann::json& j) {
    if (j.at("format_version").get<int>() != 1)
      throw FormatError("checkpoint: unsupported format_version");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant_velocity") return constant_velocity();
    if (kind == "linear_fit") return linear_fit();
    if (kind != "learned") throw FormatError("checkpoint: unknown kind " + kind);
    LearnedHyper hyper{j.at("n").get<std::size_t>(), j.at("m").get<std::size_t>(),
                       j.at("hidden").get<std::size_t>(),
                       j.at("heads").get<std::size_t>()};
    return learned_from(hyper, j.at("theta").get<std::vector<double>>(),
                        j.at("seed").get<std::uint64_t>());
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("checkpoint: cannot open " + path);
    out << to_checkpoint_json().dump(2) << "\n";
  }

  static Predictor load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("checkpoint: cannot open " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("checkpoint: ") + e.what());
    }
    return from_checkpoint_json(j);
  }

 private:
  explicit Predictor(PredictorKind kind) : kind_(kind) {}

  PredictorKind kind_;
  LearnedHyper hyper_{};
  std::vector<double> theta_;
  std::uint64_t seed_ = 0;
};

namespace detail {

// Views into the flat parameter vector. Layout: [W1 | b1 | W2 | b2] with
// W1 hidden x input row-major and W2 output x hidden row-major.
struct ParamView {
  std::span<const double> w1, b1, w2, b2;

  ParamView(const LearnedHyper& h, std::span<const double> theta) {
    const std::size_t n1 = h.hidden * h.input_dim();
    w1 = theta.subspan(0, n1);
    b1 = theta.subspan(n1, h.hidden);
    w2 = theta.subspan(n1 + h.hidden, h.output_dim() * h.hidden);
    b2 = theta.subspan(n1 + h.hidden + w2.size(), h.output_dim());
  }
};

struct GradView {
  std::span<double> w1, b1, w2, b2;

  GradView(const LearnedHyper& h, std::span<double> grad) {
    const std::size_t n1 = h.hidden * h.input_dim();
    w1 = grad.subspan(0, n1);
    b1 = grad.subspan(n1, h.hidden);
    w2 = grad.subspan(n1 + h.hidden, h.output_dim() * h.hidden);
    b2 = grad.subspan(n1 + h.hidden + w2.size(), h.output_dim());
  }
};

// Activations for one agent, kept for the backward pass.
struct AgentActivations {
  std::vector<double> input;   // 2(n-1) positions relative to the last one
  std::vector<double> hidden;  // tanh outputs
  std::vector<double> output;  // heads * 2m displacement pre-activations
  Waypoint last{};             // last observed position
};

inline AgentActivations forward_agent(const LearnedHyper& h,
                                      const ParamView& p,
                                      const ObservedWindow& obs,
                                      std::size_t agent) {
  AgentActivations act;
  act.input.resize(h.input_dim());
  const Waypoint anchor = obs.at(agent, obs.len - 1);
  for (std::size_t t = 0; t + 1 < obs.len; ++t) {
    act.input[2 * t] = obs.at(agent, t).x - anchor.x;
    act.input[2 * t + 1] = obs.at(agent, t).y - anchor.y;
  }
  act.hidden.resize(h.hidden);
  for (std::size_t j = 0; j < h.hidden; ++j) {
    double z = p.b1[j];
    const double* row = &p.w1[j * h.input_dim()];
    for (std::size_t i = 0; i < h.input_dim(); ++i) z += row[i] * act.input[i];
    act.hidden[j] = std::tanh(z);
  }
  act.output.resize(h.output_dim());
  for (std::size_t q = 0; q < h.output_dim(); ++q) {
    double z = p.b2[q];
    const double* row = &p.w2[q * h.hidden];
    for (std::size_t j = 0; j < h.hidden; ++j) z += row[j] * act.hidden[j];
    act.output[q] = z;
  }
  act.last = obs.at(agent, obs.len - 1);
  return act;
}

inline void emit_predictions(const LearnedHyper& h, const AgentActivations& act,
                             std::size_t agent, std::size_t n_samples,
                             PredictionSet& ps) {
  for (std::size_t q = 0; q < n_samples; ++q) {
    double x = act.last.x, y = act.last.y;
    for (std::size_t t = 0; t < h.m; ++t) {
      x += act.output[q * 2 * h.m + 2 * t];
      y += act.output[q * 2 * h.m + 2 * t + 1];
      ps.at(q, agent, t) = {x, y};
    }
  }
}

}  // namespace detail

// Full K-head forward pass of the learned network.
inline PredictionSet forward(const Predictor& predictor,
                             const ObservedWindow& obs) {
  if (predictor.kind() != PredictorKind::learned)
    throw std::invalid_argument("forward: predictor is not learned");
  const LearnedHyper& h = predictor.hyper();
  if (obs.len != h.n)
    throw std::invalid_argument("forward: observed length does not match n");
  const detail::ParamView params(h, predictor.theta());
  PredictionSet ps;
  ps.samples = h.heads;
  ps.agents = obs.agents();
  ps.len = h.m;
  ps.positions.resize(ps.samples * ps.agents * ps.len);
  for (std::size_t a = 0; a < obs.agents(); ++a) {
    const auto act = detail::forward_agent(h, params, obs, a);
    detail::emit_predictions(h, act, a, h.heads, ps);
  }
  return ps;
}

inline PredictionSet Predictor::predict(const ObservedWindow& obs,
                                        std::size_t m, std::size_t K) const {
  if (K < 1) throw std::invalid_argument("predict: K must be >= 1");
  switch (kind_) {
    case PredictorKind::constant_velocity:
      return predict_constant_velocity(obs, m);
    case PredictorKind::linear_fit:
      return predict_linear_fit(obs, m);
    case PredictorKind::learned: {
      if (m != hyper_.m)
        throw std::invalid_argument("predict: m does not match the network");
      PredictionSet full = forward(*this, obs);
      if (K >= full.samples) return full;
      PredictionSet trimmed;
      trimmed.samples = K;
      trimmed.agents = full.agents;
      trimmed.len = full.len;
      trimmed.positions.assign(
          full.positions.begin(),
          full.positions.begin() +
              static_cast<std::ptrdiff_t>(K * full.agents * full.len));
      return trimmed;
    }
  }
  throw std::logic_error("predict: unknown kind");
}

struct VarietyLoss {
  double loss = 0.0;
  std::size_t best_head = 0;  // 1-based
};

// Min over heads of the mean squared Euclidean error over N*m waypoints.
// The first head anchors the minimum, so a non-finite loss (a diverging
// network) still reports a valid head index.
inline VarietyLoss variety_loss(const PredictionSet& ps,
                                const FutureWindow& gt) {
  if (ps.samples < 1) throw std::invalid_argument("variety_loss: K >= 1 required");
  if (ps.agents != gt.agents || ps.len != gt.len)
    throw std::invalid_argument("variety_loss: shape mismatch");
  VarietyLoss result;
  const double inv = 1.0 / static_cast<double>(gt.agents * gt.len);
  for (std::size_t q = 0; q < ps.samples; ++q) {
    double mse = 0.0;
    for (std::size_t a = 0; a < gt.agents; ++a)
      for (std::size_t t = 0; t < gt.len; ++t) {
        const double dx = ps.at(q, a, t).x - gt.at(a, t).x;
        const double dy = ps.at(q, a, t).y - gt.at(a, t).y;
        mse += dx * dx + dy * dy;
      }
    mse *= inv;
    if (q == 0 || mse < result.loss) {
      result.loss = mse;
      result.best_head = q + 1;
    }
  }
  return result;
}

namespace detail {

// Batch-mean variety loss and, when grad != nullptr, its exact analytic
// gradient with respect to theta. Gradient flows only through each scene's
// best head.
inline double batch_loss_and_gradient(const Predictor& predictor,
                                      std::span<const Scene> batch,
                                      std::vector<double>* grad) {
  if (predictor.kind() != PredictorKind::learned)
    throw std::invalid_argument("backward: predictor is not learned");
  if (batch.empty()) throw std::invalid_argument("backward: empty batch");
  const LearnedHyper& h = predictor.hyper();
  const ParamView params(h, predictor.theta());
  if (grad) grad->assign(predictor.theta().size(), 0.0);
  std::optional<GradView> gv;
  if (grad) gv.emplace(h, std::span<double>(*grad));

  const double batch_inv = 1.0 / static_cast<double>(batch.size());
  double total_loss = 0.0;
  std::vector<AgentActivations> acts;
  std::vector<double> d_output(h.output_dim());
  std::vector<double> d_hidden(h.hidden);

  for (const Scene& scene : batch) {
    const ObservedWindow& obs = scene.observed;
    const FutureWindow& gt = scene.future;
    if (obs.len != h.n || gt.len != h.m)
      throw std::invalid_argument("backward: scene shape does not match network");
    acts.clear();
    acts.reserve(obs.agents());
    PredictionSet ps;
    ps.samples = h.heads;
    ps.agents = obs.agents();
    ps.len = h.m;
    ps.positions.resize(ps.samples * ps.agents * ps.len);
    for (std::size_t a = 0; a < obs.agents(); ++a) {
      acts.push_back(forward_agent(h, params, obs, a));
      emit_predictions(h, acts.back(), a, h.heads, ps);
    }
    const VarietyLoss vl = variety_loss(ps, gt);
    total_loss += vl.loss * batch_inv;
    if (!grad) continue;

    const std::size_t best = vl.best_head - 1;
    const double scale =
        2.0 * batch_inv / static_cast<double>(gt.agents * gt.len);
    for (std::size_t a = 0; a < obs.agents(); ++a) {
      const AgentActivations& act = acts[a];
      std::fill(d_output.begin(), d_output.end(), 0.0);
      // d(loss)/d(displacement_s) is the suffix sum of prediction
      // residuals, because position t accumulates displacements 1..t.
      double sx = 0.0, sy = 0.0;
      for (std::size_t t = gt.len; t-- > 0;) {
        sx += scale * (ps.at(best, a, t).x - gt.at(a, t).x);
        sy += scale * (ps.at(best, a, t).y - gt.at(a, t).y);
        d_output[best * 2 * h.m + 2 * t] = sx;
        d_output[best * 2 * h.m + 2 * t + 1] = sy;
      }
      std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
      for (std::size_t t = 0; t < 2 * h.m; ++t) {
        const std::size_t q = best * 2 * h.m + t;
        const double dq = d_output[q];
        if (dq == 0.0) continue;
        gv->b2[q] += dq;
        double* w2_grad_row = &gv->w2[q * h.hidden];
        const double* w2_row = &params.w2[q * h.hidden];
        for (std::size_t j = 0; j < h.hidden; ++j) {
          w2_grad_row[j] += dq * act.hidden[j];
          d_hidden[j] += dq * w2_row[j];
        }
      }
      for (std::size_t j = 0; j < h.hidden; ++j) {
        const double dz = d_hidden[j] * (1.0 - act.hidden[j] * act.hidden[j]);
        if (dz == 0.0) continue;
        gv->b1[j] += dz;
        double* w1_grad_row = &gv->w1[j * h.input_dim()];
        for (std::size_t i = 0; i < h.input_dim(); ++i)
          w1_grad_row[i] += dz * act.input[i];
      }
    }
  }
  return total_loss;
}

}  // namespace detail

// Exact gradient of the batch-mean variety loss with respect to theta.
inline std::vector<double> backward(const Predictor& predictor,
                                    std::span<const Scene> batch) {
  std::vector<double> grad;
  detail::batch_loss_and_gradient(predictor, batch, &grad);
  return grad;
}

enum class TwdMode { off, stochastic };

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  std::size_t iterations = 1;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  TwdMode twd_mode = TwdMode::off;
  DropConfig twd;  // drop count used when twd_mode == stochastic
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainTrace {
  std::vector<double> losses;  // one entry per iteration, all finite
  std::vector<double> final_theta;
  std::optional<double> final_val_loss;
};

// Minibatch training. With stochastic TWD, every scene in every batch
// passes through a fresh drop before the forward pass, so different
// timestamps are dropped in each iteration. Deterministic given the seed.
inline TrainTrace train(Predictor& predictor, const Dataset& train_set,
                        const Dataset* val_set, const TrainConfig& cfg) {
  if (predictor.kind() != PredictorKind::learned)
    throw std::invalid_argument("train: predictor is not learned");
  if (cfg.iterations < 1) throw std::invalid_argument("train: iterations >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size >= 1");
  if (!(cfg.learning_rate > 0.0))
    throw std::invalid_argument("train: learning_rate must be positive");
  if (train_set.scenes.empty()) throw EmptyDatasetError("train: no scenes");
  if (cfg.twd_mode == TwdMode::stochastic &&
      cfg.twd.drops >= predictor.hyper().n)
    throw std::invalid_argument("train: twd drops must satisfy D < n");

  RandomSource root(cfg.seed);
  RandomSource batch_src = root.fork("batch");
  RandomSource twd_src = root.fork("twd");

  std::vector<double>& theta = predictor.mutable_theta();
  std::vector<double> grad;
  std::vector<double> adam_m, adam_v;
  if (cfg.optimizer == OptimizerKind::adam) {
    adam_m.assign(theta.size(), 0.0);
    adam_v.assign(theta.size(), 0.0);
  }

  TrainTrace trace;
  trace.losses.reserve(cfg.iterations);
  std::vector<Scene> batch(cfg.batch_size);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const std::size_t idx = batch_src.uniform_index(train_set.scenes.size());
      const Scene& scene = train_set.scenes[idx - 1];
      batch[b] = cfg.twd_mode == TwdMode::stochastic
                     ? apply_twd(scene, twd_src, cfg.twd).first
                     : scene;
    }
    const double loss =
        detail::batch_loss_and_gradient(predictor, batch, &grad);
    if (!std::isfinite(loss)) throw TrainingDivergedError(it + 1);
    trace.losses.push_back(loss);

    if (cfg.optimizer == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < theta.size(); ++i)
        theta[i] -= cfg.learning_rate * grad[i];
    } else {
      const auto t = static_cast<double>(it + 1);
      const double bc1 = 1.0 - std::pow(cfg.beta1, t);
      const double bc2 = 1.0 - std::pow(cfg.beta2, t);
      for (std::size_t i = 0; i < theta.size(); ++i) {
        adam_m[i] = cfg.beta1 * adam_m[i] + (1.0 - cfg.beta1) * grad[i];
        adam_v[i] = cfg.beta2 * adam_v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        theta[i] -= cfg.learning_rate * (adam_m[i] / bc1) /
                    (std::sqrt(adam_v[i] / bc2) + cfg.epsilon);
      }
    }
  }

  trace.final_theta = theta;
  if (val_set && !val_set->scenes.empty())
    trace.final_val_loss = detail::batch_loss_and_gradient(
        predictor, val_set->scenes, nullptr);
  return trace;
}

}  // namespace twd

#endif  // TWD_PREDICTORS_HPP_
