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

#ifndef HELIOPROP_ROLLOUT_HPP
#define HELIOPROP_ROLLOUT_HPP

#include <cstddef>
#include <vector>

#include "helioprop/sfno.hpp"
#include "helioprop/sphere_grid.hpp"
#include "helioprop/training.hpp"

namespace helioprop {

/// Window arithmetic for covering nr-1 target radii with horizon H.
struct RolloutPlan {
  std::size_t steps = 0;      // forward calls, ceil((nr-1)/H)
  std::size_t predicted = 0;  // steps * H
  std::size_t discarded = 0;  // predicted - (nr-1)
};

RolloutPlan plan_rollout(std::size_t nr, std::size_t horizon);

struct RolloutResult {
  VelocityCube cube;                         // physical units
  RolloutPlan plan;
  std::vector<ChannelStack> step_inputs;     // normalised input of each step
  std::vector<ChannelStack> step_outputs;    // normalised H-channel prediction of each step
};

/// Autoregressive prediction: each step predicts H radii from the previous
/// step's last predicted slice (the boundary for step 0). Feedback stays in
/// normalised space; surplus radii past the grid are dropped. Throws
/// NumericError naming the step if a prediction is non-finite.
RolloutResult rollout_detailed(const OperatorParams& params, const VelocityMap& boundary, std::size_t horizon,
                               const NormBounds& bounds, const RadialGrid& rgrid);

VelocityCube rollout(const OperatorParams& params, const VelocityMap& boundary, std::size_t horizon,
                     const NormBounds& bounds, const RadialGrid& rgrid);

struct TeacherEvalReport {
  std::vector<double> teacher_loss;      // per window, ground-truth input
  std::vector<double> closed_loop_loss;  // per window, fed-back input
};

/// Per-window 2-D L2 loss (normalised space) with ground-truth inputs versus
/// closed-loop inputs, separating one-step error from compounding error.
TeacherEvalReport rollout_teacher_eval(const OperatorParams& params, const VelocityCube& cube, std::size_t horizon,
                                       const NormBounds& bounds);

}  // namespace helioprop

#endif  // HELIOPROP_ROLLOUT_HPP
