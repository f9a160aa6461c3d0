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

// Spherical harmonic transform on a Gauss-Legendre x equiangular grid.
//
// Convention (used everywhere in helioprop):
//
//   Y_l^m(theta, phi) = Pbar_l^m(cos theta) * exp(i m phi),   m >= 0
//   Y_l^{-m}          = conj(Y_l^m)
//
// with Pbar normalised so that the integral of |Y_l^m|^2 over the unit sphere
// is 1, i.e. 2*pi * int_{-1}^{1} Pbar_l^m(x)^2 dx = 1, and no Condon-Shortley
// phase. Hence Y_0^0 = 1/sqrt(4 pi). A real field is
//
//   f = sum_l [ a_l0 Y_l0 + 2 Re sum_{m>0} a_lm Y_lm ].
//
// Only m >= 0 is stored. When mmax == nlon/2 the m = nlon/2 mode aliases
// with its own conjugate on the grid, so only its real part is representable;
// analysis returns a zero imaginary part there and synthesis ignores it.

#ifndef HELIOPROP_SHT_HPP
#define HELIOPROP_SHT_HPP

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "helioprop/sphere_grid.hpp"

namespace helioprop {

/// Number of stored (l, m) pairs with 0 <= m <= mmax, m <= l <= lmax.
constexpr std::size_t spectral_mode_count(std::size_t lmax, std::size_t mmax) {
  return (mmax + 1) * (lmax + 1) - mmax * (mmax + 1) / 2;
}

/// Flat index of (l, m): modes are grouped by m, then ascending l.
constexpr std::size_t spectral_mode_index(std::size_t lmax, std::size_t l, std::size_t m) {
  return m * (lmax + 1) - (m == 0 ? 0 : m * (m - 1) / 2) + (l - m);
}

/// Complex coefficient table, channel-major.
struct SpectralCoeffs {
  std::size_t lmax = 0;
  std::size_t mmax = 0;
  std::size_t nchannels = 1;
  std::vector<std::complex<double>> coeffs;

  SpectralCoeffs() = default;
  SpectralCoeffs(std::size_t lmax_, std::size_t mmax_, std::size_t nchannels_ = 1);

  std::size_t modes_per_channel() const noexcept { return spectral_mode_count(lmax, mmax); }
  std::complex<double>& at(std::size_t l, std::size_t m, std::size_t c = 0);
  const std::complex<double>& at(std::size_t l, std::size_t m, std::size_t c = 0) const;
};

/// Orthonormal associated Legendre values Pbar_l^m(cos theta_i) for every
/// stored mode and colatitude. Row k (flat mode index) holds nlat values.
struct LegendreTable {
  std::size_t lmax = 0;
  std::size_t mmax = 0;
  std::size_t nlat = 0;
  std::vector<double> values;

  double operator()(std::size_t l, std::size_t m, std::size_t i) const {
    return values[spectral_mode_index(lmax, l, m) * nlat + i];
  }
};

/// Builds the table with the standard stable (m,m) -> (m+1,m) -> (l,m)
/// recurrence. Requires lmax >= mmax.
LegendreTable compute_legendre_table(std::size_t lmax, std::size_t mmax, std::span<const double> colatitudes);

/// Cached variant; lookups from several threads are safe.
std::shared_ptr<const LegendreTable> legendre_table(std::size_t lmax, std::size_t mmax,
                                                    std::span<const double> colatitudes);

/// Precomputed transform pair for one grid and band limit.
///
/// Spectral data is passed as split real/imaginary arrays of length
/// mode_count() (flat index from spectral_mode_index). Besides analysis and
/// synthesis the class exposes their exact real-linear adjoints, which the
/// operator's reverse pass needs.
class SphericalTransform {
 public:
  /// Throws BandLimitError when nlat < lmax+1, nlon < 2*mmax or lmax < mmax.
  SphericalTransform(GridPtr grid, std::size_t lmax, std::size_t mmax);

  const LatLonGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t lmax() const noexcept { return lmax_; }
  std::size_t mmax() const noexcept { return mmax_; }
  std::size_t mode_count() const noexcept { return nmodes_; }
  const LegendreTable& legendre() const noexcept { return *table_; }

  void analysis(std::span<const double> field, std::span<double> re, std::span<double> im) const;
  void synthesis(std::span<const double> re, std::span<const double> im, std::span<double> field) const;

  /// Transpose of analysis: maps a gradient w.r.t. (re, im) to a gradient w.r.t. field.
  void analysis_adjoint(std::span<const double> re, std::span<const double> im, std::span<double> field) const;
  /// Transpose of synthesis: maps a gradient w.r.t. field to one w.r.t. (re, im).
  void synthesis_adjoint(std::span<const double> field, std::span<double> re, std::span<double> im) const;

 private:
  // F[i][m] = sum_j f[i][j] (cos - i sin)(m phi_j) * scale[m]
  void ring_dft(std::span<const double> field, std::span<const double> scale, std::span<double> fre,
                std::span<double> fim) const;
  // f[i][j] = ring_scale[i] * sum_m mode_scale[m] Re(G[i][m] exp(i m phi_j))
  void ring_idft(std::span<const double> gre, std::span<const double> gim, std::span<const double> mode_scale,
                 std::span<const double> ring_scale, std::span<double> field) const;
  // a[k] = sum_i table[k][i] F[i][m(k)]  (table optionally quadrature-weighted)
  void legendre_project(std::span<const double> table, std::span<const double> fre, std::span<const double> fim,
                        std::span<double> re, std::span<double> im) const;
  // G[i][m] = sum_l P[l,m][i] a[l,m]
  void legendre_expand(std::span<const double> re, std::span<const double> im, std::span<double> gre,
                       std::span<double> gim) const;

  GridPtr grid_;
  std::size_t lmax_;
  std::size_t mmax_;
  std::size_t nmodes_;
  std::shared_ptr<const LegendreTable> table_;
  std::vector<double> weighted_table_;  // w_i * Pbar
  std::vector<double> cos_;             // [m][j]
  std::vector<double> sin_;             // [m][j], exact zeros at m = 0 and m = nlon/2
  std::vector<double> analysis_scale_;  // 2 pi / nlon, halved at the Nyquist order
  std::vector<double> synthesis_scale_;  // 1 for m = 0, else 2
  std::vector<double> unit_rings_;
  std::vector<double> weight_rings_;
};

/// Shared transform for (grid, lmax, mmax); thread-safe lookup.
std::shared_ptr<const SphericalTransform> shared_transform(const GridPtr& grid, std::size_t lmax, std::size_t mmax);

/// Forward transform of one real field (nlat x nlon, row-major).
SpectralCoeffs sht_analysis(const GridPtr& grid, std::span<const double> field, std::size_t lmax,
                            std::size_t mmax);
SpectralCoeffs sht_analysis(const VelocityMap& map, std::size_t lmax, std::size_t mmax);

/// Inverse transform of channel 0 of coeffs onto grid.
std::vector<double> sht_synthesis(const SpectralCoeffs& coeffs, const GridPtr& grid);

}  // namespace helioprop

#endif  // HELIOPROP_SHT_HPP
