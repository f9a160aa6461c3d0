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

#include "helioprop/sphere_grid.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "helioprop/errors.hpp"

namespace helioprop {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(std::size_t n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (std::size_t k = 2; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
    p0 = p1;
    p1 = p2;
  }
  const double nn = static_cast<double>(n);
  const double dp = nn * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

LatLonGrid build_gauss_legendre_grid(std::size_t nlat, std::size_t nlon) {
  if (nlat < 2) throw ArgumentError("gauss-legendre grid: nlat must be >= 2");
  if (nlon < 2 || nlon % 2 != 0) throw ArgumentError("gauss-legendre grid: nlon must be even and >= 2");

  LatLonGrid g;
  g.nodes_.resize(nlat);
  g.weights_.resize(nlat);
  g.colatitudes_.resize(nlat);

  const double n = static_cast<double>(nlat);
  // Roots are symmetric; solve the upper half and mirror.
  const std::size_t half = (nlat + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      auto [p, d] = legendre_with_derivative(nlat, x);
      dp = d;
      const double dx = p / d;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    dp = legendre_with_derivative(nlat, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.nodes_[i] = x;
    g.nodes_[nlat - 1 - i] = -x;
    g.weights_[i] = w;
    g.weights_[nlat - 1 - i] = w;
  }
  if (nlat % 2 == 1) g.nodes_[nlat / 2] = 0.0;

  for (std::size_t i = 0; i < nlat; ++i) g.colatitudes_[i] = std::acos(g.nodes_[i]);

  g.longitudes_.resize(nlon);
  for (std::size_t j = 0; j < nlon; ++j) {
    g.longitudes_[j] = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(nlon);
  }
  return g;
}

GridPtr shared_gauss_legendre_grid(std::size_t nlat, std::size_t nlon) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, GridPtr> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{nlat, nlon}];
  if (!slot) slot = std::make_shared<const LatLonGrid>(build_gauss_legendre_grid(nlat, nlon));
  return slot;
}

RadialGrid build_radial_grid(std::size_t nr, double r_min, double r_max) {
  if (nr < 2) throw ArgumentError("radial grid: nr must be >= 2");
  if (!(r_min > 0.0) || !(r_max > r_min)) throw ArgumentError("radial grid: need 0 < r_min < r_max");
  RadialGrid g;
  g.r.resize(nr);
  const double step = (r_max - r_min) / static_cast<double>(nr - 1);
  for (std::size_t i = 0; i < nr; ++i) g.r[i] = r_min + step * static_cast<double>(i);
  g.r[nr - 1] = r_max;
  return g;
}

RadialGrid default_radial_grid() { return build_radial_grid(140, 30.0, kAstronomicalUnitRs); }

void validate_radial_grid(const RadialGrid& rgrid) {
  if (rgrid.nr() < 2) throw ArgumentError("radial grid: nr must be >= 2");
  if (!(rgrid.r[0] >= 1.0)) throw ArgumentError("radial grid: r[0] must be >= 1 R_sun");
  for (std::size_t i = 1; i < rgrid.nr(); ++i) {
    if (!(rgrid.r[i] > rgrid.r[i - 1])) throw ArgumentError("radial grid: radii must be strictly increasing");
  }
}

VelocityMap::VelocityMap(GridPtr g) : grid(std::move(g)), values(grid->size(), 0.0) {}

VelocityMap::VelocityMap(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid->size()) throw ShapeError("velocity map: value count does not match grid");
}

void VelocityMap::validate(std::optional<std::pair<double, double>> range) const {
  if (!grid || values.size() != grid->size()) throw ShapeError("velocity map: value count does not match grid");
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("velocity map: non-finite value");
    if (range && !(v > range->first && v < range->second)) {
      throw DomainError("velocity map: value " + std::to_string(v) + " km/s outside physical range");
    }
  }
}

void VelocityCube::validate() const {
  if (!grid) throw ShapeError("velocity cube: missing grid");
  if (slices.size() != rgrid.nr()) throw ShapeError("velocity cube: slice count does not match radial grid");
  for (const auto& s : slices) {
    if (!s.grid || !same_grid(*s.grid, *grid)) throw ShapeError("velocity cube: slices do not share one grid");
    if (s.values.size() != grid->size()) throw ShapeError("velocity cube: slice size mismatch");
  }
}

bool same_grid(const LatLonGrid& a, const LatLonGrid& b) { return &a == &b || a == b; }

}  // namespace helioprop
