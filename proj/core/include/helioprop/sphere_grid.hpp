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

#ifndef HELIOPROP_SPHERE_GRID_HPP
#define HELIOPROP_SPHERE_GRID_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace helioprop {

/// Solar radius in km.
inline constexpr double kSolarRadiusKm = 6.96e5;
/// 1 AU expressed in solar radii.
inline constexpr double kAstronomicalUnitRs = 215.032;

/// Gauss-Legendre (colatitude) x equiangular (longitude) grid.
///
/// Colatitudes are stored in (0, pi), strictly increasing, so row 0 is the
/// ring nearest the north pole. Longitudes are 2*pi*j/nlon.
class LatLonGrid {
 public:
  std::size_t nlat() const noexcept { return colatitudes_.size(); }
  std::size_t nlon() const noexcept { return longitudes_.size(); }
  std::size_t size() const noexcept { return nlat() * nlon(); }

  std::span<const double> colatitudes() const noexcept { return colatitudes_; }
  /// cos(colatitude), i.e. the Gauss-Legendre nodes in [-1, 1], descending.
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> quadrature_weights() const noexcept { return weights_; }
  std::span<const double> longitudes() const noexcept { return longitudes_; }

  bool operator==(const LatLonGrid& other) const = default;

 private:
  friend LatLonGrid build_gauss_legendre_grid(std::size_t nlat, std::size_t nlon);

  std::vector<double> colatitudes_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> longitudes_;
};

using GridPtr = std::shared_ptr<const LatLonGrid>;

/// Builds the nlat-point Gauss-Legendre grid with nlon equispaced longitudes.
/// Requires nlat >= 2 and an even nlon >= 2; throws ArgumentError otherwise.
LatLonGrid build_gauss_legendre_grid(std::size_t nlat, std::size_t nlon);

/// Shared, immutable grid instance for (nlat, nlon).
GridPtr shared_gauss_legendre_grid(std::size_t nlat, std::size_t nlon);

/// Radial nodes in solar radii, strictly increasing.
struct RadialGrid {
  std::vector<double> r;

  std::size_t nr() const noexcept { return r.size(); }
  /// Step i -> i+1 in solar radii.
  double spacing(std::size_t i) const { return r.at(i + 1) - r.at(i); }

  bool operator==(const RadialGrid&) const = default;
};

/// Uniform grid r_min..r_max over nr nodes. nr >= 2, 0 < r_min < r_max.
RadialGrid build_radial_grid(std::size_t nr, double r_min, double r_max);

/// 140 nodes from 30 R_sun to 1 AU.
RadialGrid default_radial_grid();

/// Validates a user-supplied radial grid (nr >= 2, strictly increasing, r[0] >= 1).
void validate_radial_grid(const RadialGrid& rgrid);

/// Radial velocity v_r (km/s) on one sphere. values is row-major
/// (latitude row, longitude column).
struct VelocityMap {
  GridPtr grid;
  std::vector<double> values;

  VelocityMap() = default;
  explicit VelocityMap(GridPtr g);
  VelocityMap(GridPtr g, std::vector<double> v);

  double& at(std::size_t lat, std::size_t lon) { return values[lat * grid->nlon() + lon]; }
  double at(std::size_t lat, std::size_t lon) const { return values[lat * grid->nlon() + lon]; }

  /// Throws NumericError on non-finite values; with a range check enabled,
  /// DomainError outside (v_lo, v_hi).
  void validate(std::optional<std::pair<double, double>> range = std::nullopt) const;
};

enum class CubeSource { synthetic, external };

struct CubeMeta {
  std::optional<int> carrington_rotation;
  std::optional<std::string> instrument;
  CubeSource source = CubeSource::synthetic;

  bool operator==(const CubeMeta&) const = default;
};

/// Full radial stack of velocity maps; slices[i] lives at rgrid.r[i].
struct VelocityCube {
  RadialGrid rgrid;
  GridPtr grid;
  std::vector<VelocityMap> slices;
  CubeMeta meta;

  std::size_t nr() const noexcept { return slices.size(); }

  /// Checks slices.size() == rgrid.nr() and that every slice shares grid.
  void validate() const;
};

/// True when both grids have identical node sets.
bool same_grid(const LatLonGrid& a, const LatLonGrid& b);

}  // namespace helioprop

#endif  // HELIOPROP_SPHERE_GRID_HPP
