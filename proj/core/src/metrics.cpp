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

#include "helioprop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "helioprop/errors.hpp"
#include "helioprop/parallel.hpp"

namespace helioprop {

void EdgeMaskConfig::validate() const {
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0)) {
    throw ArgumentError("edge mask: threshold_fraction must lie in (0, 1)");
  }
}

std::vector<double> sobel_gradient_magnitude(std::span<const double> values, std::size_t nlat, std::size_t nlon) {
  if (nlat < 3 || nlon < 3) throw ShapeError("sobel: slice must be at least 3x3");
  if (values.size() != nlat * nlon) throw ShapeError("sobel: value count does not match shape");
  std::vector<double> g(values.size());
  auto v = [&](std::size_t i, std::size_t j) { return values[i * nlon + j]; };
  for (std::size_t i = 0; i < nlat; ++i) {
    const std::size_t up = i == 0 ? 0 : i - 1;
    const std::size_t dn = i + 1 == nlat ? nlat - 1 : i + 1;
    for (std::size_t j = 0; j < nlon; ++j) {
      const std::size_t lf = j == 0 ? nlon - 1 : j - 1;
      const std::size_t rt = j + 1 == nlon ? 0 : j + 1;
      const double gx = (v(up, rt) - v(up, lf)) + 2.0 * (v(i, rt) - v(i, lf)) + (v(dn, rt) - v(dn, lf));
      const double gy = (v(dn, lf) - v(up, lf)) + 2.0 * (v(dn, j) - v(up, j)) + (v(dn, rt) - v(up, rt));
      g[i * nlon + j] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return g;
}

EdgeMask sobel_edge_mask(const VelocityMap& truth, const EdgeMaskConfig& cfg) {
  cfg.validate();
  const auto g = sobel_gradient_magnitude(truth.values, truth.grid->nlat(), truth.grid->nlon());
  const double gmax = *std::max_element(g.begin(), g.end());
  EdgeMask out;
  out.mask.assign(g.size(), false);
  if (!(gmax > 0.0)) {
    out.degenerate = true;
    return out;
  }
  const double thr = cfg.threshold_fraction * gmax;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g[p] > thr) {
      out.mask[p] = true;
      ++out.count;
    }
  }
  return out;
}

namespace {

void check_cubes(const VelocityCube& pred, const VelocityCube& truth) {
  pred.validate();
  truth.validate();
  if (!same_grid(*pred.grid, *truth.grid)) throw ShapeError("metrics: cubes are on different grids");
  if (pred.nr() != truth.nr()) throw ShapeError("metrics: cubes have different radial counts");
  if (pred.nr() < 2) throw ShapeError("metrics: cubes need at least two radii");
}

}  // namespace

double mse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty()) throw ShapeError("mse: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return s / static_cast<double>(pred.size());
}

SliceSeries mse(const VelocityCube& pred, const VelocityCube& truth) {
  check_cubes(pred, truth);
  SliceSeries out;
  for (std::size_t r = 1; r < pred.nr(); ++r) out.per_slice.push_back(mse(pred.slices[r].values, truth.slices[r].values));
  double s = 0.0;
  for (double v : out.per_slice) s += v;
  out.mean = s / static_cast<double>(out.per_slice.size());
  return out;
}

std::optional<double> edge_mse(std::span<const double> pred, std::span<const double> truth, const EdgeMask& mask) {
  if (pred.size() != truth.size() || mask.mask.size() != pred.size()) throw ShapeError("edge mse: size mismatch");
  if (mask.count == 0) return std::nullopt;
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mask.mask[i]) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  }
  return s / static_cast<double>(mask.count);
}

EdgeMseResult edge_mse(const VelocityCube& pred, const VelocityCube& truth, const EdgeMaskConfig& cfg) {
  check_cubes(pred, truth);
  EdgeMseResult out;
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 1; r < pred.nr(); ++r) {
    const auto mask = sobel_edge_mask(truth.slices[r], cfg);
    auto v = edge_mse(pred.slices[r].values, truth.slices[r].values, mask);
    if (v) {
      s += *v;
      ++n;
    } else {
      ++out.empty_slices;
    }
    out.per_slice.push_back(v);
  }
  if (n > 0) out.mean = s / static_cast<double>(n);
  return out;
}

double emd(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty()) throw ShapeError("emd: pixel counts differ");
  std::vector<double> a(pred.begin(), pred.end());
  std::vector<double> b(truth.begin(), truth.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double uiqi_global(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw ShapeError("uiqi: shapes differ");
  if (pred.size() < 2) throw ShapeError("uiqi: need at least two pixels");
  const double n = static_cast<double>(pred.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mx += truth[i];
    my += pred[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dx = truth[i] - mx;
    const double dy = pred[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  sxx /= n - 1.0;
  syy /= n - 1.0;
  sxy /= n - 1.0;

  const bool x_const = sxx == 0.0;
  const bool y_const = syy == 0.0;
  if (x_const && y_const) return mx == my ? 1.0 : 0.0;
  if (x_const || y_const) return 0.0;
  const double lum = mx * mx + my * my;
  if (lum == 0.0) return 2.0 * sxy / (sxx + syy);
  return 4.0 * sxy * mx * my / ((sxx + syy) * lum);
}

double uiqi(std::span<const double> pred, std::span<const double> truth, std::size_t nlat, std::size_t nlon,
            const UiqiConfig& cfg) {
  if (pred.size() != nlat * nlon || truth.size() != nlat * nlon) throw ShapeError("uiqi: shapes differ");
  const std::size_t w = cfg.window;
  if (!cfg.sliding_window || w < 2 || nlat < w || nlon < w) return uiqi_global(pred, truth);

  std::vector<double> bp(w * w);
  std::vector<double> bt(w * w);
  double s = 0.0;
  std::size_t count = 0;
  for (std::size_t i0 = 0; i0 + w <= nlat; ++i0) {
    for (std::size_t j0 = 0; j0 < nlon; ++j0) {
      for (std::size_t di = 0; di < w; ++di) {
        for (std::size_t dj = 0; dj < w; ++dj) {
          const std::size_t p = (i0 + di) * nlon + (j0 + dj) % nlon;
          bp[di * w + dj] = pred[p];
          bt[di * w + dj] = truth[p];
        }
      }
      s += uiqi_global(bp, bt);
      ++count;
    }
  }
  return s / static_cast<double>(count);
}

MetricsReport evaluate_cube(const VelocityCube& pred, const VelocityCube& truth, const MetricsConfig& cfg,
                            std::map<std::string, std::string> meta) {
  check_cubes(pred, truth);
  cfg.edge.validate();
  const std::size_t nr = pred.nr();
  const std::size_t nlat = truth.grid->nlat();
  const std::size_t nlon = truth.grid->nlon();

  MetricsReport rep;
  rep.config = cfg;
  rep.meta = std::move(meta);
  rep.per_slice.resize(nr - 1);
  parallel_for(nr - 1, [&](std::size_t k) {
    const std::size_t r = k + 1;
    const auto& p = pred.slices[r].values;
    const auto& t = truth.slices[r].values;
    SliceMetrics m;
    m.radius_index = r;
    m.radius = truth.rgrid.r[r];
    m.mse = mse(p, t);
    m.edge_mse = edge_mse(p, t, sobel_edge_mask(truth.slices[r], cfg.edge));
    m.emd = emd(p, t);
    m.uiqi = uiqi(p, t, nlat, nlon, cfg.uiqi);
    rep.per_slice[k] = m;
  });

  double s_mse = 0.0;
  double s_edge = 0.0;
  double s_emd = 0.0;
  double s_uiqi = 0.0;
  std::size_t n_edge = 0;
  for (const auto& m : rep.per_slice) {
    s_mse += m.mse;
    s_emd += m.emd;
    s_uiqi += m.uiqi;
    if (m.edge_mse) {
      s_edge += *m.edge_mse;
      ++n_edge;
    } else {
      ++rep.edge_empty_slices;
    }
  }
  const double n = static_cast<double>(rep.per_slice.size());
  rep.mean_mse = s_mse / n;
  rep.mean_emd = s_emd / n;
  rep.mean_uiqi = s_uiqi / n;
  if (n_edge > 0) rep.mean_edge_mse = s_edge / static_cast<double>(n_edge);
  return rep;
}

}  // namespace helioprop
