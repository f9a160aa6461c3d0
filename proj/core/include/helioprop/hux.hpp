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

// Heliospheric upwind extrapolation, forward direction (HUX-f).
//
// Each latitude ring is marched outward independently with the upwind step
//
//   v[i+1][j] = v[i][j] + (dr_i * omega / v[i][j]) * (v[i][j+1] - v[i][j]) / dphi
//
// where dr_i is in km and the longitude index wraps. The empirical residual
// acceleration is applied once, to the boundary slice.

#ifndef HELIOPROP_HUX_HPP
#define HELIOPROP_HUX_HPP

#include <numbers>

#include "helioprop/sphere_grid.hpp"

namespace helioprop {

struct HuxConfig {
  /// Solar sidereal rotation rate, rad/s (2 pi / 25.38 days).
  double omega_rot = 2.0 * std::numbers::pi / (25.38 * 86400.0);
  /// Acceleration amplitude.
  double alpha = 0.15;
  /// Acceleration scale length, R_sun.
  double r_h = 50.0;
  bool apply_acceleration = true;

  /// Throws ArgumentError unless omega_rot >= 0, alpha >= 0 and r_h > 0.
  /// omega_rot == 0 is accepted and disables advection.
  void validate() const;
  bool operator==(const HuxConfig&) const = default;
};

/// v' = v * (1 + alpha * (1 - exp(-r0 / r_h))). Identity when acceleration is
/// disabled or alpha == 0. Throws DomainError for v <= 0.
VelocityMap hux_accelerate_boundary(const VelocityMap& map, const HuxConfig& cfg, double r0);

/// CFL number dr*omega/(v_min*dphi) of one radial step (dr in R_sun).
double hux_cfl_number(double dr_rs, double omega_rot, double v_min, std::size_t nlon);

/// Marches boundary (at rgrid.r[0]) through every radius of rgrid.
///
/// Throws StabilityError naming the radial step when the CFL bound would be
/// exceeded, NumericError on non-finite output.
VelocityCube hux_forward(const VelocityMap& boundary, const RadialGrid& rgrid, const HuxConfig& cfg);

}  // namespace helioprop

#endif  // HELIOPROP_HUX_HPP
