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

#include "helioprop/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "helioprop/errors.hpp"

namespace helioprop {

RolloutPlan plan_rollout(std::size_t nr, std::size_t horizon) {
  if (horizon == 0) throw ArgumentError("rollout: horizon must be >= 1");
  if (nr < 2) throw ArgumentError("rollout: need at least two radii");
  RolloutPlan p;
  const std::size_t targets = nr - 1;
  p.steps = (targets + horizon - 1) / horizon;
  p.predicted = p.steps * horizon;
  p.discarded = p.predicted - targets;
  return p;
}

namespace {

void check_model(const OperatorParams& params, const VelocityMap& boundary, std::size_t horizon) {
  const auto& cfg = params.config();
  if (cfg.out_channels != horizon) {
    throw ArgumentError("rollout: horizon " + std::to_string(horizon) + " does not match operator output channels " +
                        std::to_string(cfg.out_channels));
  }
  if (cfg.in_channels != 1) throw ArgumentError("rollout: operator must take one input channel");
  if (!boundary.grid || boundary.grid->nlat() != cfg.nlat || boundary.grid->nlon() != cfg.nlon) {
    throw ShapeError("rollout: boundary grid does not match operator grid");
  }
}

}  // namespace

RolloutResult rollout_detailed(const OperatorParams& params, const VelocityMap& boundary, std::size_t horizon,
                               const NormBounds& bounds, const RadialGrid& rgrid) {
  validate_radial_grid(rgrid);
  bounds.validate();
  check_model(params, boundary, horizon);

  RolloutResult res;
  res.plan = plan_rollout(rgrid.nr(), horizon);
  const std::size_t np = boundary.values.size();
  const std::size_t nr = rgrid.nr();

  res.cube.rgrid = rgrid;
  res.cube.grid = boundary.grid;
  res.cube.meta = CubeMeta{};
  res.cube.slices.assign(nr, VelocityMap(boundary.grid));
  res.cube.slices[0] = boundary;

  ChannelStack input = to_channel_stack(normalize(boundary, bounds));
  std::size_t filled = 1;
  for (std::size_t step = 0; step < res.plan.steps; ++step) {
    ChannelStack out;
    try {
      out = forward_one(params, input);
    } catch (const NumericError& e) {
      throw NumericError("rollout: diverged at step " + std::to_string(step) + ": " + e.what());
    }
    for (double v : out.data) {
      if (!std::isfinite(v)) throw NumericError("rollout: non-finite prediction at step " + std::to_string(step));
    }
    for (std::size_t h = 0; h < horizon && filled < nr; ++h, ++filled) {
      auto& dst = res.cube.slices[filled].values;
      const auto src = out.channel(h);
      for (std::size_t p = 0; p < np; ++p) dst[p] = bounds.denormalize(src[p]);
    }
    res.step_inputs.push_back(std::move(input));
    input = ChannelStack(1, np);
    const auto last = out.channel(horizon - 1);
    std::copy(last.begin(), last.end(), input.data.begin());
    res.step_outputs.push_back(std::move(out));
  }
  return res;
}

VelocityCube rollout(const OperatorParams& params, const VelocityMap& boundary, std::size_t horizon,
                     const NormBounds& bounds, const RadialGrid& rgrid) {
  return std::move(rollout_detailed(params, boundary, horizon, bounds, rgrid).cube);
}

TeacherEvalReport rollout_teacher_eval(const OperatorParams& params, const VelocityCube& cube, std::size_t horizon,
                                       const NormBounds& bounds) {
  cube.validate();
  check_model(params, cube.slices.front(), horizon);
  const std::size_t nr = cube.nr();
  const std::size_t np = cube.grid->size();
  const VelocityCube norm = normalize(cube, bounds);
  const RolloutResult closed = rollout_detailed(params, cube.slices.front(), horizon, bounds, cube.rgrid);

  TeacherEvalReport rep;
  for (std::size_t step = 0; step < closed.plan.steps; ++step) {
    const std::size_t start = step * horizon;
    ChannelStack target(horizon, np);
    for (std::size_t h = 0; h < horizon; ++h) {
      const auto& src = norm.slices[std::min(start + h + 1, nr - 1)].values;
      std::copy(src.begin(), src.end(), target.data.begin() + static_cast<std::ptrdiff_t>(h * np));
    }
    const SliceMask mask{window_mask(nr, horizon, start)};
    const ChannelStack teacher = forward_one(params, to_channel_stack(norm.slices[start]));
    rep.teacher_loss.push_back(loss_l2_2d(std::span(&teacher, 1), std::span(&target, 1), mask));
    rep.closed_loop_loss.push_back(
        loss_l2_2d(std::span(&closed.step_outputs[step], 1), std::span(&target, 1), mask));
  }
  return rep;
}

}  // namespace helioprop
