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

#include "helioprop/hux.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "helioprop/errors.hpp"
#include "helioprop/parallel.hpp"

namespace helioprop {

void HuxConfig::validate() const {
  if (!(omega_rot >= 0.0) || !std::isfinite(omega_rot)) throw ArgumentError("hux: omega_rot must be >= 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ArgumentError("hux: alpha must be >= 0");
  if (!(r_h > 0.0) || !std::isfinite(r_h)) throw ArgumentError("hux: r_h must be > 0");
}

VelocityMap hux_accelerate_boundary(const VelocityMap& map, const HuxConfig& cfg, double r0) {
  cfg.validate();
  for (double v : map.values) {
    if (!(v > 0.0)) throw DomainError("hux: boundary velocity must be positive");
  }
  VelocityMap out = map;
  if (!cfg.apply_acceleration || cfg.alpha == 0.0) return out;
  const double factor = 1.0 + cfg.alpha * (1.0 - std::exp(-r0 / cfg.r_h));
  for (double& v : out.values) v *= factor;
  return out;
}

double hux_cfl_number(double dr_rs, double omega_rot, double v_min, std::size_t nlon) {
  const double dphi = 2.0 * std::numbers::pi / static_cast<double>(nlon);
  return dr_rs * kSolarRadiusKm * omega_rot / (v_min * dphi);
}

VelocityCube hux_forward(const VelocityMap& boundary, const RadialGrid& rgrid, const HuxConfig& cfg) {
  validate_radial_grid(rgrid);
  if (!boundary.grid) throw ArgumentError("hux: boundary has no grid");
  const std::size_t nlat = boundary.grid->nlat();
  const std::size_t nlon = boundary.grid->nlon();
  const std::size_t nr = rgrid.nr();

  VelocityCube cube;
  cube.rgrid = rgrid;
  cube.grid = boundary.grid;
  cube.meta.source = CubeSource::synthetic;
  cube.slices.assign(nr, VelocityMap(boundary.grid));
  cube.slices[0] = hux_accelerate_boundary(boundary, cfg, rgrid.r[0]);

  const double dphi = 2.0 * std::numbers::pi / static_cast<double>(nlon);
  std::vector<double> dr_km(nr - 1);
  for (std::size_t i = 0; i + 1 < nr; ++i) dr_km[i] = rgrid.spacing(i) * kSolarRadiusKm;

  constexpr std::size_t kNoFailure = std::numeric_limits<std::size_t>::max();
  struct RingStatus {
    std::size_t failed_step = kNoFailure;
    double v_min = 0.0;
    double cfl = 0.0;
    bool non_finite = false;
  };
  std::vector<RingStatus> status(nlat);

  parallel_for(nlat, [&](std::size_t lat) {
    std::vector<double> cur(cube.slices[0].values.begin() + static_cast<std::ptrdiff_t>(lat * nlon),
                            cube.slices[0].values.begin() + static_cast<std::ptrdiff_t>((lat + 1) * nlon));
    std::vector<double> next(nlon);
    for (std::size_t i = 0; i + 1 < nr; ++i) {
      const double vmin = *std::min_element(cur.begin(), cur.end());
      const double cfl = dr_km[i] * cfg.omega_rot / (vmin * dphi);
      if (!(cfl <= 1.0)) {
        status[lat] = {i, vmin, cfl, false};
        return;
      }
      const double k = dr_km[i] * cfg.omega_rot / dphi;
      for (std::size_t j = 0; j < nlon; ++j) {
        const double v = cur[j];
        const double right = cur[j + 1 == nlon ? 0 : j + 1];
        next[j] = v + (k / v) * (right - v);
      }
      for (double v : next) {
        if (!std::isfinite(v)) {
          status[lat] = {i, vmin, cfl, true};
          return;
        }
      }
      std::copy(next.begin(), next.end(), cube.slices[i + 1].values.begin() + static_cast<std::ptrdiff_t>(lat * nlon));
      cur.swap(next);
    }
  });

  const RingStatus* worst = nullptr;
  for (const auto& s : status) {
    if (s.failed_step != kNoFailure && (!worst || s.failed_step < worst->failed_step)) worst = &s;
  }
  if (worst) {
    std::ostringstream msg;
    if (worst->non_finite) {
      msg << "hux: non-finite velocity produced at radial step " << worst->failed_step + 1;
      throw NumericError(msg.str());
    }
    msg << "hux: CFL violation at radial step " << worst->failed_step << " -> " << worst->failed_step + 1
        << " (slice " << worst->failed_step << ", v_min = " << worst->v_min << " km/s, CFL = " << worst->cfl << ")";
    throw StabilityError(msg.str());
  }
  return cube;
}

}  // namespace helioprop
