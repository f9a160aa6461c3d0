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

#include "helioprop/sht.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include "helioprop/errors.hpp"

namespace helioprop {

SpectralCoeffs::SpectralCoeffs(std::size_t lmax_, std::size_t mmax_, std::size_t nchannels_)
    : lmax(lmax_), mmax(mmax_), nchannels(nchannels_) {
  if (mmax > lmax) throw BandLimitError("spectral coeffs: mmax must not exceed lmax");
  coeffs.assign(spectral_mode_count(lmax, mmax) * nchannels, {0.0, 0.0});
}

std::complex<double>& SpectralCoeffs::at(std::size_t l, std::size_t m, std::size_t c) {
  if (l > lmax || m > mmax || m > l || c >= nchannels) throw ArgumentError("spectral coeffs: index out of range");
  return coeffs[c * modes_per_channel() + spectral_mode_index(lmax, l, m)];
}

const std::complex<double>& SpectralCoeffs::at(std::size_t l, std::size_t m, std::size_t c) const {
  if (l > lmax || m > mmax || m > l || c >= nchannels) throw ArgumentError("spectral coeffs: index out of range");
  return coeffs[c * modes_per_channel() + spectral_mode_index(lmax, l, m)];
}

LegendreTable compute_legendre_table(std::size_t lmax, std::size_t mmax, std::span<const double> colatitudes) {
  if (mmax > lmax) throw BandLimitError("legendre table: lmax must be >= mmax");
  LegendreTable t;
  t.lmax = lmax;
  t.mmax = mmax;
  t.nlat = colatitudes.size();
  t.values.assign(spectral_mode_count(lmax, mmax) * t.nlat, 0.0);

  for (std::size_t i = 0; i < t.nlat; ++i) {
    const double x = std::cos(colatitudes[i]);
    const double s = std::sin(colatitudes[i]);
    double pmm = 1.0 / std::sqrt(4.0 * std::numbers::pi);
    for (std::size_t m = 0; m <= mmax; ++m) {
      if (m > 0) {
        const double md = static_cast<double>(m);
        pmm *= std::sqrt((2.0 * md + 1.0) / (2.0 * md)) * s;
      }
      const std::size_t base = spectral_mode_index(lmax, m, m);
      t.values[base * t.nlat + i] = pmm;
      if (m == lmax) continue;
      const double md = static_cast<double>(m);
      double p_prev = pmm;
      double p_curr = std::sqrt(2.0 * md + 3.0) * x * pmm;
      t.values[(base + 1) * t.nlat + i] = p_curr;
      for (std::size_t l = m + 2; l <= lmax; ++l) {
        const double ld = static_cast<double>(l);
        const double a = std::sqrt((4.0 * ld * ld - 1.0) / (ld * ld - md * md));
        const double b = std::sqrt(((ld - 1.0) * (ld - 1.0) - md * md) / (4.0 * (ld - 1.0) * (ld - 1.0) - 1.0));
        const double p_next = a * (x * p_curr - b * p_prev);
        p_prev = p_curr;
        p_curr = p_next;
        t.values[(base + (l - m)) * t.nlat + i] = p_curr;
      }
    }
  }
  return t;
}

std::shared_ptr<const LegendreTable> legendre_table(std::size_t lmax, std::size_t mmax,
                                                    std::span<const double> colatitudes) {
  using Key = std::tuple<std::size_t, std::size_t, std::vector<double>>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const LegendreTable>> cache;
  Key key{lmax, mmax, std::vector<double>(colatitudes.begin(), colatitudes.end())};
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const LegendreTable>(compute_legendre_table(lmax, mmax, colatitudes));
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(std::move(key), std::move(table)).first->second;
}

SphericalTransform::SphericalTransform(GridPtr grid, std::size_t lmax, std::size_t mmax)
    : grid_(std::move(grid)), lmax_(lmax), mmax_(mmax), nmodes_(spectral_mode_count(lmax, mmax)) {
  if (!grid_) throw ArgumentError("spherical transform: null grid");
  const std::size_t nlat = grid_->nlat();
  const std::size_t nlon = grid_->nlon();
  if (lmax < mmax) throw BandLimitError("spherical transform: lmax must be >= mmax");
  if (nlat < lmax + 1) {
    throw BandLimitError("spherical transform: nlat=" + std::to_string(nlat) + " too small for lmax=" +
                         std::to_string(lmax));
  }
  if (nlon < 2 * mmax) {
    throw BandLimitError("spherical transform: nlon=" + std::to_string(nlon) + " too small for mmax=" +
                         std::to_string(mmax));
  }

  table_ = legendre_table(lmax, mmax, grid_->colatitudes());
  const auto w = grid_->quadrature_weights();
  weighted_table_.resize(table_->values.size());
  for (std::size_t k = 0; k < nmodes_; ++k) {
    for (std::size_t i = 0; i < nlat; ++i) weighted_table_[k * nlat + i] = w[i] * table_->values[k * nlat + i];
  }

  cos_.resize((mmax + 1) * nlon);
  sin_.resize((mmax + 1) * nlon);
  const bool has_nyquist = 2 * mmax == nlon;
  for (std::size_t m = 0; m <= mmax; ++m) {
    for (std::size_t j = 0; j < nlon; ++j) {
      const std::size_t phase = (m * j) % nlon;
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(nlon);
      double c = std::cos(angle);
      double s = std::sin(angle);
      if (phase == 0) {
        c = 1.0;
        s = 0.0;
      } else if (2 * phase == nlon) {
        c = -1.0;
        s = 0.0;
      }
      if (m == 0 || (has_nyquist && m == mmax)) s = 0.0;
      cos_[m * nlon + j] = c;
      sin_[m * nlon + j] = s;
    }
  }

  analysis_scale_.assign(mmax + 1, 2.0 * std::numbers::pi / static_cast<double>(nlon));
  if (has_nyquist) analysis_scale_[mmax] *= 0.5;
  synthesis_scale_.assign(mmax + 1, 2.0);
  synthesis_scale_[0] = 1.0;
  unit_rings_.assign(nlat, 1.0);
  weight_rings_.assign(w.begin(), w.end());
}

void SphericalTransform::ring_dft(std::span<const double> field, std::span<const double> scale, std::span<double> fre,
                                  std::span<double> fim) const {
  const std::size_t nlat = grid_->nlat();
  const std::size_t nlon = grid_->nlon();
  const std::size_t nm = mmax_ + 1;
  for (std::size_t i = 0; i < nlat; ++i) {
    const double* row = field.data() + i * nlon;
    for (std::size_t m = 0; m < nm; ++m) {
      const double* c = cos_.data() + m * nlon;
      const double* s = sin_.data() + m * nlon;
      double sr = 0.0;
      double si = 0.0;
      for (std::size_t j = 0; j < nlon; ++j) {
        sr += row[j] * c[j];
        si -= row[j] * s[j];
      }
      fre[i * nm + m] = scale[m] * sr;
      fim[i * nm + m] = scale[m] * si;
    }
  }
}

void SphericalTransform::ring_idft(std::span<const double> gre, std::span<const double> gim,
                                   std::span<const double> mode_scale, std::span<const double> ring_scale,
                                   std::span<double> field) const {
  const std::size_t nlat = grid_->nlat();
  const std::size_t nlon = grid_->nlon();
  const std::size_t nm = mmax_ + 1;
  for (std::size_t i = 0; i < nlat; ++i) {
    double* row = field.data() + i * nlon;
    for (std::size_t j = 0; j < nlon; ++j) row[j] = 0.0;
    for (std::size_t m = 0; m < nm; ++m) {
      const double a = ring_scale[i] * mode_scale[m] * gre[i * nm + m];
      const double b = ring_scale[i] * mode_scale[m] * gim[i * nm + m];
      const double* c = cos_.data() + m * nlon;
      const double* s = sin_.data() + m * nlon;
      for (std::size_t j = 0; j < nlon; ++j) row[j] += a * c[j] - b * s[j];
    }
  }
}

void SphericalTransform::legendre_project(std::span<const double> table, std::span<const double> fre,
                                          std::span<const double> fim, std::span<double> re,
                                          std::span<double> im) const {
  const std::size_t nlat = grid_->nlat();
  const std::size_t nm = mmax_ + 1;
  std::size_t k = 0;
  for (std::size_t m = 0; m <= mmax_; ++m) {
    for (std::size_t l = m; l <= lmax_; ++l, ++k) {
      const double* p = table.data() + k * nlat;
      double sr = 0.0;
      double si = 0.0;
      for (std::size_t i = 0; i < nlat; ++i) {
        sr += p[i] * fre[i * nm + m];
        si += p[i] * fim[i * nm + m];
      }
      re[k] = sr;
      im[k] = si;
    }
  }
}

void SphericalTransform::legendre_expand(std::span<const double> re, std::span<const double> im,
                                         std::span<double> gre, std::span<double> gim) const {
  const std::size_t nlat = grid_->nlat();
  const std::size_t nm = mmax_ + 1;
  std::fill(gre.begin(), gre.begin() + nlat * nm, 0.0);
  std::fill(gim.begin(), gim.begin() + nlat * nm, 0.0);
  const double* table = table_->values.data();
  std::size_t k = 0;
  for (std::size_t m = 0; m <= mmax_; ++m) {
    for (std::size_t l = m; l <= lmax_; ++l, ++k) {
      const double* p = table + k * nlat;
      const double ar = re[k];
      const double ai = im[k];
      for (std::size_t i = 0; i < nlat; ++i) {
        gre[i * nm + m] += p[i] * ar;
        gim[i * nm + m] += p[i] * ai;
      }
    }
  }
}

namespace {

void check_sizes(std::size_t field_size, std::size_t expected_field, std::size_t re, std::size_t im,
                 std::size_t modes) {
  if (field_size != expected_field) throw ShapeError("spherical transform: field size does not match grid");
  if (re != modes || im != modes) throw ShapeError("spherical transform: spectral size does not match band limit");
}

}  // namespace

void SphericalTransform::analysis(std::span<const double> field, std::span<double> re, std::span<double> im) const {
  check_sizes(field.size(), grid_->size(), re.size(), im.size(), nmodes_);
  std::vector<double> fre(grid_->nlat() * (mmax_ + 1));
  std::vector<double> fim(fre.size());
  ring_dft(field, analysis_scale_, fre, fim);
  legendre_project(weighted_table_, fre, fim, re, im);
}

void SphericalTransform::synthesis(std::span<const double> re, std::span<const double> im,
                                   std::span<double> field) const {
  check_sizes(field.size(), grid_->size(), re.size(), im.size(), nmodes_);
  std::vector<double> gre(grid_->nlat() * (mmax_ + 1));
  std::vector<double> gim(gre.size());
  legendre_expand(re, im, gre, gim);
  ring_idft(gre, gim, synthesis_scale_, unit_rings_, field);
}

void SphericalTransform::analysis_adjoint(std::span<const double> re, std::span<const double> im,
                                          std::span<double> field) const {
  check_sizes(field.size(), grid_->size(), re.size(), im.size(), nmodes_);
  std::vector<double> gre(grid_->nlat() * (mmax_ + 1));
  std::vector<double> gim(gre.size());
  legendre_expand(re, im, gre, gim);
  ring_idft(gre, gim, analysis_scale_, weight_rings_, field);
}

void SphericalTransform::synthesis_adjoint(std::span<const double> field, std::span<double> re,
                                           std::span<double> im) const {
  check_sizes(field.size(), grid_->size(), re.size(), im.size(), nmodes_);
  std::vector<double> fre(grid_->nlat() * (mmax_ + 1));
  std::vector<double> fim(fre.size());
  ring_dft(field, synthesis_scale_, fre, fim);
  legendre_project(table_->values, fre, fim, re, im);
}

std::shared_ptr<const SphericalTransform> shared_transform(const GridPtr& grid, std::size_t lmax, std::size_t mmax) {
  if (!grid) throw ArgumentError("spherical transform: null grid");
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const SphericalTransform>> cache;
  const Key key{grid->nlat(), grid->nlon(), lmax, mmax};
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto t = std::make_shared<const SphericalTransform>(grid, lmax, mmax);
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(key, std::move(t)).first->second;
}

SpectralCoeffs sht_analysis(const GridPtr& grid, std::span<const double> field, std::size_t lmax, std::size_t mmax) {
  const auto t = shared_transform(grid, lmax, mmax);
  SpectralCoeffs out(lmax, mmax, 1);
  std::vector<double> re(t->mode_count());
  std::vector<double> im(t->mode_count());
  t->analysis(field, re, im);
  for (std::size_t k = 0; k < re.size(); ++k) out.coeffs[k] = {re[k], im[k]};
  return out;
}

SpectralCoeffs sht_analysis(const VelocityMap& map, std::size_t lmax, std::size_t mmax) {
  return sht_analysis(map.grid, map.values, lmax, mmax);
}

std::vector<double> sht_synthesis(const SpectralCoeffs& coeffs, const GridPtr& grid) {
  const auto t = shared_transform(grid, coeffs.lmax, coeffs.mmax);
  const std::size_t n = t->mode_count();
  if (coeffs.coeffs.size() < n) throw ShapeError("sht_synthesis: coefficient table too short");
  std::vector<double> re(n);
  std::vector<double> im(n);
  for (std::size_t k = 0; k < n; ++k) {
    re[k] = coeffs.coeffs[k].real();
    im[k] = coeffs.coeffs[k].imag();
  }
  std::vector<double> field(grid->size());
  t->synthesis(re, im, field);
  return field;
}

}  // namespace helioprop
