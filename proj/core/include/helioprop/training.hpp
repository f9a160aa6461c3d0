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

#ifndef HELIOPROP_TRAINING_HPP
#define HELIOPROP_TRAINING_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "helioprop/sfno.hpp"
#include "helioprop/sphere_grid.hpp"

namespace helioprop {

// ---------------------------------------------------------------------------
// Normalisation

/// Min-max bounds of the training split, km/s.
struct NormBounds {
  double v_min = 0.0;
  double v_max = 1.0;

  /// Throws ArgumentError unless v_min < v_max and both are finite.
  void validate() const;
  double normalize(double v) const { return (v - v_min) / (v_max - v_min); }
  double denormalize(double x) const { return v_min + x * (v_max - v_min); }
  bool operator==(const NormBounds&) const = default;
};

/// Global min/max over every value of every cube.
NormBounds compute_bounds(std::span<const VelocityCube> cubes);

/// Values outside [v_min, v_max] map outside [0, 1]; nothing is clipped.
VelocityMap normalize(const VelocityMap& map, const NormBounds& bounds);
VelocityMap denormalize(const VelocityMap& map, const NormBounds& bounds);
VelocityCube normalize(const VelocityCube& cube, const NormBounds& bounds);
VelocityCube denormalize(const VelocityCube& cube, const NormBounds& bounds);

// ---------------------------------------------------------------------------
// Loss

/// Per-(batch, channel) flags; false excludes that slice from the loss.
using SliceMask = std::vector<std::vector<bool>>;

/// Layer-wise 2-D L2 loss: the mean over unmasked (b, c) of the Euclidean
/// norm of the slice residual (not divided by the pixel count).
/// Throws ShapeError on mismatched shapes, ArgumentError when every slice is
/// masked.
double loss_l2_2d(std::span<const ChannelStack> pred, std::span<const ChannelStack> truth, const SliceMask& mask);

struct LossWithGrad {
  double loss = 0.0;
  std::vector<double> slice_norms;      // flattened [b][c], 0 for masked
  std::vector<ChannelStack> grad;       // dL/dpred
};

/// Loss and its gradient w.r.t. pred. A slice whose residual is exactly zero
/// contributes a zero gradient.
LossWithGrad loss_l2_2d_with_grad(std::span<const ChannelStack> pred, std::span<const ChannelStack> truth,
                                  const SliceMask& mask);

// ---------------------------------------------------------------------------
// Teacher forcing windows

enum class WindowMode {
  rollout_aligned,  // k = 0, H, 2H, ...
  every_index,      // k = 0, 1, ..., nr-2
};

/// One teacher-forced window: ground truth at radius index `start` is the
/// input, indices start+1 .. start+H the targets.
struct TrainSample {
  std::size_t start = 0;
  VelocityMap input;
  std::vector<VelocityMap> target;  // H maps; masked ones are copies of the last radius
  std::vector<bool> valid_mask;
};

/// Window starts for an nr-slice cube at horizon H.
std::vector<std::size_t> window_starts(std::size_t nr, std::size_t horizon,
                                       WindowMode mode = WindowMode::rollout_aligned);

/// Validity flags of the H targets of a window starting at `start`.
std::vector<bool> window_mask(std::size_t nr, std::size_t horizon, std::size_t start);

/// Builds every window of cube. Throws ShapeError when the cube does not have
/// expected_nr slices (140 for the production grid).
std::vector<TrainSample> make_teacher_forced_samples(const VelocityCube& cube, std::size_t horizon,
                                                     WindowMode mode = WindowMode::rollout_aligned,
                                                     std::size_t expected_nr = 140);

// ---------------------------------------------------------------------------
// Optimiser

struct AdamConfig {
  double learning_rate = 8e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update. Throws NumericError (leaving params and
/// state untouched) if any gradient is non-finite.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg);
void adam_step(OperatorParams& params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  double learning_rate = 8e-4;
  std::size_t batch_size = 32;
  std::size_t epochs = 200;
  std::size_t horizon = 5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  bool shuffle_folds = false;
  WindowMode windows = WindowMode::rollout_aligned;
  /// Trailing (chronologically last) fraction of the training cubes held out
  /// for checkpoint selection.
  double validation_fraction = 0.1;

  AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochLoss {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  OperatorParams params;  // lowest-validation-loss checkpoint
  NormBounds bounds;
  TrainConfig train_config;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  std::size_t train_cubes = 0;
  std::size_t val_cubes = 0;
  std::vector<EpochLoss> history;
};

/// Trains from scratch on dataset (chronological order). model_cfg's grid
/// must match the cubes; its out_channels is set to cfg.horizon. The epoch
/// loss is the per-slice 2-D L2 loss averaged over every window seen in the
/// epoch. Throws DivergenceError carrying the epoch on a non-finite loss.
TrainResult train(std::span<const VelocityCube> dataset, const TrainConfig& cfg, OperatorConfig model_cfg);

/// Mean teacher-forced loss of params over every window of cubes (normalised).
double evaluate_teacher_forced(const OperatorParams& params, std::span<const VelocityCube> normalized_cubes,
                               std::size_t horizon, WindowMode mode = WindowMode::rollout_aligned);

struct CrossValidationResult {
  std::vector<std::vector<double>> fold_mse;  // [config][fold], (km/s)^2
  std::vector<double> mean_mse;
  std::size_t selected = 0;
  std::vector<std::vector<std::size_t>> folds;  // held-out cube indices per fold
};

/// Fold assignment: contiguous chronological blocks, or a seeded shuffle.
/// Throws ArgumentError when there are fewer cubes than folds.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t folds, bool shuffle, std::uint64_t seed);

/// k-fold cross validation. Each candidate is trained on the other folds and
/// scored by the closed-loop rollout MSE (km/s)^2 of the held-out cubes;
/// the lowest mean wins.
CrossValidationResult cross_validate(std::span<const VelocityCube> dataset,
                                     std::span<const OperatorConfig> candidates, const TrainConfig& cfg);

}  // namespace helioprop

#endif  // HELIOPROP_TRAINING_HPP
