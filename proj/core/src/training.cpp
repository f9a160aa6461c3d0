// Copyright 2026 The helioprop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "helioprop/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "helioprop/errors.hpp"
#include "helioprop/metrics.hpp"
#include "helioprop/rollout.hpp"

namespace helioprop {

void NormBounds::validate() const {
  if (!std::isfinite(v_min) || !std::isfinite(v_max) || !(v_min < v_max)) {
    throw ArgumentError("norm bounds: need finite v_min < v_max");
  }
}

NormBounds compute_bounds(std::span<const VelocityCube> cubes) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& cube : cubes) {
    for (const auto& s : cube.slices) {
      for (double v : s.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  NormBounds b{lo, hi};
  b.validate();
  return b;
}

VelocityMap normalize(const VelocityMap& map, const NormBounds& bounds) {
  bounds.validate();
  VelocityMap out = map;
  for (double& v : out.values) v = bounds.normalize(v);
  return out;
}

VelocityMap denormalize(const VelocityMap& map, const NormBounds& bounds) {
  bounds.validate();
  VelocityMap out = map;
  for (double& v : out.values) v = bounds.denormalize(v);
  return out;
}

VelocityCube normalize(const VelocityCube& cube, const NormBounds& bounds) {
  VelocityCube out = cube;
  for (auto& s : out.slices) s = normalize(s, bounds);
  return out;
}

VelocityCube denormalize(const VelocityCube& cube, const NormBounds& bounds) {
  VelocityCube out = cube;
  for (auto& s : out.slices) s = denormalize(s, bounds);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_loss_shapes(std::span<const ChannelStack> pred, std::span<const ChannelStack> truth,
                       const SliceMask& mask) {
  if (pred.size() != truth.size() || pred.size() != mask.size()) throw ShapeError("loss: batch sizes differ");
  for (std::size_t b = 0; b < pred.size(); ++b) {
    if (pred[b].channels != truth[b].channels || pred[b].points != truth[b].points ||
        mask[b].size() != pred[b].channels) {
      throw ShapeError("loss: slice shapes differ at batch item " + std::to_string(b));
    }
  }
}

}  // namespace

LossWithGrad loss_l2_2d_with_grad(std::span<const ChannelStack> pred, std::span<const ChannelStack> truth,
                                  const SliceMask& mask) {
  check_loss_shapes(pred, truth, mask);
  LossWithGrad out;
  std::size_t active = 0;
  for (const auto& m : mask) active += static_cast<std::size_t>(std::count(m.begin(), m.end(), true));
  if (active == 0) throw ArgumentError("loss: every slice is masked");

  out.grad.reserve(pred.size());
  double total = 0.0;
  for (std::size_t b = 0; b < pred.size(); ++b) {
    const std::size_t np = pred[b].points;
    ChannelStack g(pred[b].channels, np);
    for (std::size_t c = 0; c < pred[b].channels; ++c) {
      if (!mask[b][c]) {
        out.slice_norms.push_back(0.0);
        continue;
      }
      const double* y = truth[b].data.data() + c * np;
      const double* p = pred[b].data.data() + c * np;
      double ss = 0.0;
      for (std::size_t i = 0; i < np; ++i) ss += (y[i] - p[i]) * (y[i] - p[i]);
      const double norm = std::sqrt(ss);
      out.slice_norms.push_back(norm);
      total += norm;
      if (norm > 0.0) {
        const double scale = 1.0 / (static_cast<double>(active) * norm);
        double* d = g.data.data() + c * np;
        for (std::size_t i = 0; i < np; ++i) d[i] = scale * (p[i] - y[i]);
      }
    }
    out.grad.push_back(std::move(g));
  }
  out.loss = total / static_cast<double>(active);
  return out;
}

double loss_l2_2d(std::span<const ChannelStack> pred, std::span<const ChannelStack> truth, const SliceMask& mask) {
  check_loss_shapes(pred, truth, mask);
  std::size_t active = 0;
  double total = 0.0;
  for (std::size_t b = 0; b < pred.size(); ++b) {
    const std::size_t np = pred[b].points;
    for (std::size_t c = 0; c < pred[b].channels; ++c) {
      if (!mask[b][c]) continue;
      ++active;
      double ss = 0.0;
      for (std::size_t i = 0; i < np; ++i) {
        const double d = truth[b].data[c * np + i] - pred[b].data[c * np + i];
        ss += d * d;
      }
      total += std::sqrt(ss);
    }
  }
  if (active == 0) throw ArgumentError("loss: every slice is masked");
  return total / static_cast<double>(active);
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> window_starts(std::size_t nr, std::size_t horizon, WindowMode mode) {
  if (horizon == 0) throw ArgumentError("windows: horizon must be >= 1");
  if (nr < 2) throw ArgumentError("windows: need at least two radii");
  std::vector<std::size_t> starts;
  const std::size_t stride = mode == WindowMode::rollout_aligned ? horizon : 1;
  for (std::size_t k = 0; k + 1 < nr; k += stride) starts.push_back(k);
  return starts;
}

std::vector<bool> window_mask(std::size_t nr, std::size_t horizon, std::size_t start) {
  std::vector<bool> mask(horizon);
  for (std::size_t h = 0; h < horizon; ++h) mask[h] = start + h + 1 <= nr - 1;
  return mask;
}

std::vector<TrainSample> make_teacher_forced_samples(const VelocityCube& cube, std::size_t horizon, WindowMode mode,
                                                     std::size_t expected_nr) {
  cube.validate();
  if (cube.nr() != expected_nr) {
    throw ShapeError("teacher forcing: cube has " + std::to_string(cube.nr()) + " slices, expected " +
                     std::to_string(expected_nr));
  }
  std::vector<TrainSample> out;
  const std::size_t nr = cube.nr();
  for (std::size_t k : window_starts(nr, horizon, mode)) {
    TrainSample s;
    s.start = k;
    s.input = cube.slices[k];
    s.valid_mask = window_mask(nr, horizon, k);
    for (std::size_t h = 0; h < horizon; ++h) s.target.push_back(cube.slices[std::min(k + h + 1, nr - 1)]);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw ShapeError("adam: parameter and gradient sizes differ");
  for (double g : grads) {
    if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw ShapeError("adam: state size does not match parameters");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

void adam_step(OperatorParams& params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg) {
  adam_step(params.mutable_values(), grads, state, cfg);
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ArgumentError("train: learning rate must be >= 0");
  if (batch_size == 0 || horizon == 0) throw ArgumentError("train: batch size and horizon must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0 && adam_eps > 0.0)) {
    throw ArgumentError("train: invalid Adam hyperparameters");
  }
  if (folds < 2) throw ArgumentError("train: need at least two folds");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ArgumentError("train: validation fraction must lie in [0, 1)");
  }
}

namespace {

struct Window {
  std::size_t cube = 0;
  std::size_t start = 0;
};

std::vector<Window> enumerate_windows(std::span<const VelocityCube> cubes, std::size_t horizon, WindowMode mode) {
  std::vector<Window> out;
  for (std::size_t c = 0; c < cubes.size(); ++c) {
    for (std::size_t k : window_starts(cubes[c].nr(), horizon, mode)) out.push_back({c, k});
  }
  return out;
}

ChannelStack window_input(const VelocityCube& cube, std::size_t start) { return to_channel_stack(cube.slices[start]); }

ChannelStack window_target(const VelocityCube& cube, std::size_t start, std::size_t horizon) {
  const std::size_t np = cube.grid->size();
  const std::size_t nr = cube.nr();
  ChannelStack t(horizon, np);
  for (std::size_t h = 0; h < horizon; ++h) {
    const auto& src = cube.slices[std::min(start + h + 1, nr - 1)].values;
    std::copy(src.begin(), src.end(), t.data.begin() + static_cast<std::ptrdiff_t>(h * np));
  }
  return t;
}

struct BatchEval {
  std::vector<double> norms;  // per window, sum over valid slices
  std::vector<std::size_t> counts;
};

// Teacher-forced loss over windows, batched to bound memory.
BatchEval eval_windows(const OperatorParams& params, std::span<const VelocityCube> cubes,
                       std::span<const Window> windows, std::size_t horizon) {
  BatchEval out;
  constexpr std::size_t kChunk = 32;
  for (std::size_t b0 = 0; b0 < windows.size(); b0 += kChunk) {
    const std::size_t b1 = std::min(windows.size(), b0 + kChunk);
    std::vector<ChannelStack> inputs;
    std::vector<ChannelStack> targets;
    SliceMask mask;
    for (std::size_t i = b0; i < b1; ++i) {
      const auto& w = windows[i];
      inputs.push_back(window_input(cubes[w.cube], w.start));
      targets.push_back(window_target(cubes[w.cube], w.start, horizon));
      mask.push_back(window_mask(cubes[w.cube].nr(), horizon, w.start));
    }
    const auto fwd = forward(params, inputs);
    const auto lg = loss_l2_2d_with_grad(fwd.outputs, targets, mask);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      double s = 0.0;
      std::size_t n = 0;
      for (std::size_t h = 0; h < horizon; ++h) {
        if (mask[i][h]) {
          s += lg.slice_norms[i * horizon + h];
          ++n;
        }
      }
      out.norms.push_back(s);
      out.counts.push_back(n);
    }
  }
  return out;
}

double mean_loss(const BatchEval& e) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < e.norms.size(); ++i) {
    s += e.norms[i];
    n += e.counts[i];
  }
  return n == 0 ? 0.0 : s / static_cast<double>(n);
}

}  // namespace

double evaluate_teacher_forced(const OperatorParams& params, std::span<const VelocityCube> normalized_cubes,
                               std::size_t horizon, WindowMode mode) {
  const auto windows = enumerate_windows(normalized_cubes, horizon, mode);
  return mean_loss(eval_windows(params, normalized_cubes, windows, horizon));
}

TrainResult train(std::span<const VelocityCube> dataset, const TrainConfig& cfg, OperatorConfig model_cfg) {
  cfg.validate();
  if (dataset.empty()) throw ArgumentError("train: empty dataset");
  for (const auto& c : dataset) c.validate();
  const auto& grid = *dataset.front().grid;
  if (grid.nlat() != model_cfg.nlat || grid.nlon() != model_cfg.nlon) {
    throw ShapeError("train: operator grid does not match dataset grid");
  }
  model_cfg.out_channels = cfg.horizon;
  model_cfg.validate();

  TrainResult result;
  result.train_config = cfg;
  result.bounds = compute_bounds(dataset);

  std::vector<VelocityCube> normalized;
  normalized.reserve(dataset.size());
  for (const auto& c : dataset) normalized.push_back(normalize(c, result.bounds));

  std::size_t n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(dataset.size())));
  if (cfg.validation_fraction > 0.0 && dataset.size() >= 2) n_val = std::max<std::size_t>(n_val, 1);
  const std::size_t n_train = dataset.size() - n_val;
  result.train_cubes = n_train;
  result.val_cubes = n_val;
  std::span<const VelocityCube> train_set(normalized.data(), n_train);
  std::span<const VelocityCube> val_set(normalized.data() + n_train, n_val);

  const auto windows = enumerate_windows(train_set, cfg.horizon, cfg.windows);
  const auto val_windows = enumerate_windows(val_set, cfg.horizon, WindowMode::rollout_aligned);

  OperatorParams params = init_params(model_cfg);
  AdamState adam;
  const AdamConfig adam_cfg = cfg.adam();
  std::mt19937_64 rng(cfg.seed);

  std::vector<std::size_t> order(windows.size());
  std::vector<double> window_norm(windows.size());
  std::vector<std::size_t> window_count(windows.size());
  double best = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    try {
      for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
        const std::size_t b1 = std::min(order.size(), b0 + cfg.batch_size);
        std::vector<ChannelStack> inputs;
        std::vector<ChannelStack> targets;
        SliceMask mask;
        for (std::size_t i = b0; i < b1; ++i) {
          const auto& w = windows[order[i]];
          inputs.push_back(window_input(train_set[w.cube], w.start));
          targets.push_back(window_target(train_set[w.cube], w.start, cfg.horizon));
          mask.push_back(window_mask(train_set[w.cube].nr(), cfg.horizon, w.start));
        }
        auto fwd = forward(params, inputs, true);
        auto lg = loss_l2_2d_with_grad(fwd.outputs, targets, mask);
        if (!std::isfinite(lg.loss)) {
          throw DivergenceError("train: non-finite loss in epoch " + std::to_string(epoch), static_cast<int>(epoch));
        }
        for (std::size_t i = b0; i < b1; ++i) {
          double s = 0.0;
          std::size_t n = 0;
          for (std::size_t h = 0; h < cfg.horizon; ++h) {
            if (mask[i - b0][h]) {
              s += lg.slice_norms[(i - b0) * cfg.horizon + h];
              ++n;
            }
          }
          window_norm[order[i]] = s;
          window_count[order[i]] = n;
        }
        const auto grads = backward(params, *fwd.tape, lg.grad);
        adam_step(params, grads.params, adam, adam_cfg);
      }
    } catch (const NumericError& e) {
      throw DivergenceError(std::string("train: diverged in epoch ") + std::to_string(epoch) + ": " + e.what(),
                            static_cast<int>(epoch));
    }

    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      s += window_norm[i];
      n += window_count[i];
    }
    EpochLoss rec;
    rec.epoch = epoch;
    rec.train_loss = n == 0 ? 0.0 : s / static_cast<double>(n);
    if (!val_windows.empty()) {
      try {
        rec.val_loss = mean_loss(eval_windows(params, val_set, val_windows, cfg.horizon));
      } catch (const NumericError& e) {
        throw DivergenceError(std::string("train: validation diverged in epoch ") + std::to_string(epoch),
                              static_cast<int>(epoch));
      }
    } else {
      rec.val_loss = rec.train_loss;
    }
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss)) {
      throw DivergenceError("train: non-finite loss in epoch " + std::to_string(epoch), static_cast<int>(epoch));
    }
    result.history.push_back(rec);
    if (rec.val_loss < best) {
      best = rec.val_loss;
      result.best_epoch = epoch;
      result.best_val_loss = rec.val_loss;
      result.params = params;
    }
  }
  if (cfg.epochs == 0) result.params = params;
  return result;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t folds, bool shuffle, std::uint64_t seed) {
  if (folds < 2) throw ArgumentError("cross validation: need at least two folds");
  if (n < folds) {
    throw ArgumentError("cross validation: " + std::to_string(n) + " samples cannot fill " + std::to_string(folds) +
                        " folds");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (shuffle) {
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
  }
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t lo = f * n / folds;
    const std::size_t hi = (f + 1) * n / folds;
    out[f].assign(idx.begin() + static_cast<std::ptrdiff_t>(lo), idx.begin() + static_cast<std::ptrdiff_t>(hi));
  }
  return out;
}

CrossValidationResult cross_validate(std::span<const VelocityCube> dataset,
                                     std::span<const OperatorConfig> candidates, const TrainConfig& cfg) {
  cfg.validate();
  if (candidates.empty()) throw ArgumentError("cross validation: no candidate configurations");
  CrossValidationResult out;
  out.folds = make_folds(dataset.size(), cfg.folds, cfg.shuffle_folds, cfg.seed);

  for (const auto& candidate : candidates) {
    std::vector<double> per_fold;
    for (const auto& held_out : out.folds) {
      std::vector<VelocityCube> train_cubes;
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (std::find(held_out.begin(), held_out.end(), i) == held_out.end()) train_cubes.push_back(dataset[i]);
      }
      const TrainResult tr = train(train_cubes, cfg, candidate);
      double total = 0.0;
      for (std::size_t i : held_out) {
        const auto& truth = dataset[i];
        const auto pred = rollout(tr.params, truth.slices.front(), cfg.horizon, tr.bounds, truth.rgrid);
        total += mse(pred, truth).mean;
      }
      per_fold.push_back(total / static_cast<double>(held_out.size()));
    }
    out.mean_mse.push_back(std::accumulate(per_fold.begin(), per_fold.end(), 0.0) /
                           static_cast<double>(per_fold.size()));
    out.fold_mse.push_back(std::move(per_fold));
  }
  out.selected = static_cast<std::size_t>(
      std::distance(out.mean_mse.begin(), std::min_element(out.mean_mse.begin(), out.mean_mse.end())));
  return out;
}

}  // namespace helioprop
