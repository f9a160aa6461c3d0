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

#ifndef HELIOPROP_METRICS_HPP
#define HELIOPROP_METRICS_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "helioprop/sphere_grid.hpp"

namespace helioprop {

/// Sobel edge detection settings. Longitude wraps; latitude rows are
/// replicated past the first and last ring.
struct EdgeMaskConfig {
  double threshold_fraction = 0.2;

  void validate() const;
  bool operator==(const EdgeMaskConfig&) const = default;
};

struct EdgeMask {
  std::vector<bool> mask;  // row-major, true on high-gradient pixels
  std::size_t count = 0;
  bool degenerate = false;  // max gradient was 0 (constant slice)
};

/// |grad| = sqrt(Gx^2 + Gy^2) with the 3x3 Sobel kernels; Gx runs along
/// longitude, Gy along latitude.
std::vector<double> sobel_gradient_magnitude(std::span<const double> values, std::size_t nlat, std::size_t nlon);

/// mask = |grad| > threshold_fraction * max|grad|, computed from truth only.
EdgeMask sobel_edge_mask(const VelocityMap& truth, const EdgeMaskConfig& cfg = {});

struct SliceSeries {
  std::vector<double> per_slice;  // radius index 1 .. nr-1
  double mean = 0.0;
};

/// Per-slice mean squared error over radii 1..nr-1, (km/s)^2.
SliceSeries mse(const VelocityCube& pred, const VelocityCube& truth);
double mse(std::span<const double> pred, std::span<const double> truth);

struct EdgeMseResult {
  std::vector<std::optional<double>> per_slice;  // nullopt where the mask is empty
  std::optional<double> mean;                    // nullopt when every slice is empty
  std::size_t empty_slices = 0;
};

/// MSE restricted to each slice's Sobel mask. Empty-mask slices are skipped
/// in the mean and counted.
EdgeMseResult edge_mse(const VelocityCube& pred, const VelocityCube& truth, const EdgeMaskConfig& cfg = {});
std::optional<double> edge_mse(std::span<const double> pred, std::span<const double> truth, const EdgeMask& mask);

/// 1-D Wasserstein-1 between the two pixel-value multisets.
double emd(std::span<const double> pred, std::span<const double> truth);

struct UiqiConfig {
  bool sliding_window = false;
  std::size_t window = 8;

  bool operator==(const UiqiConfig&) const = default;
};

/// Universal image quality index, global over the slice by default or the
/// mean over all window x window blocks (longitude wraps) when
/// sliding_window is set. Constant inputs: equal -> 1, otherwise 0.
double uiqi(std::span<const double> pred, std::span<const double> truth, std::size_t nlat, std::size_t nlon,
            const UiqiConfig& cfg = {});
double uiqi_global(std::span<const double> pred, std::span<const double> truth);

struct MetricsConfig {
  EdgeMaskConfig edge;
  UiqiConfig uiqi;
};

struct SliceMetrics {
  std::size_t radius_index = 0;
  double radius = 0.0;
  double mse = 0.0;
  std::optional<double> edge_mse;
  double emd = 0.0;
  double uiqi = 0.0;
};

struct MetricsReport {
  std::vector<SliceMetrics> per_slice;  // nr - 1 entries, radius 0 excluded
  double mean_mse = 0.0;
  std::optional<double> mean_edge_mse;
  double mean_emd = 0.0;
  double mean_uiqi = 0.0;
  std::size_t edge_empty_slices = 0;
  MetricsConfig config;
  std::map<std::string, std::string> meta;
};

/// All four metrics per radius (slice 0 excluded) and their slice averages.
/// Throws ShapeError when the cubes do not share grids.
MetricsReport evaluate_cube(const VelocityCube& pred, const VelocityCube& truth, const MetricsConfig& cfg = {},
                            std::map<std::string, std::string> meta = {});

}  // namespace helioprop

#endif  // HELIOPROP_METRICS_HPP
