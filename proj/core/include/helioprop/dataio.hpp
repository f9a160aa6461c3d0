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

// Persistence (cubes, checkpoints, reports, manifests) and the synthetic
// dataset generator.
//
// Cube file (.hwc), little-endian:
//
//   offset  size        field
//   0       4           magic "HWC1"
//   4       4           u32 version (1)
//   8       12          u32 nr, nlat, nlon
//   20      8*nr        f64 radii (R_sun)
//   20+8nr  8*nr*nlat*nlon  f64 v_r (km/s), (r, lat, lon) order
//
// Latitude rows follow the Gauss-Legendre colatitude order (north first).
// CubeMeta and units live in a JSON sidecar at "<path>.json".
//
// Checkpoint file (.sfnp), little-endian:
//
//   0   4   magic "SFNP"
//   4   4   u32 version (1)
//   8   8   u64 length n of the JSON config block
//   16  n   UTF-8 JSON: operator config, norm bounds, train config, selection
//   ..  8   u64 parameter count p
//   ..  8p  f64 parameters in ParamLayout order

#ifndef HELIOPROP_DATAIO_HPP
#define HELIOPROP_DATAIO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "helioprop/hux.hpp"
#include "helioprop/metrics.hpp"
#include "helioprop/sfno.hpp"
#include "helioprop/sphere_grid.hpp"
#include "helioprop/training.hpp"

namespace helioprop {

// ---------------------------------------------------------------------------
// Cubes

std::vector<std::uint8_t> encode_cube(const VelocityCube& cube);
/// Throws FormatError (with the byte offset) on bad magic, unknown version,
/// truncated payload or trailing bytes.
VelocityCube decode_cube(std::span<const std::uint8_t> bytes);

/// Writes the binary cube and its JSON sidecar.
void save_cube(const std::filesystem::path& path, const VelocityCube& cube);
/// Reads a cube; the sidecar is optional (meta defaults to source=external).
VelocityCube load_cube(const std::filesystem::path& path);

nlohmann::json cube_meta_to_json(const CubeMeta& meta);
CubeMeta cube_meta_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
  OperatorParams params;
  NormBounds bounds;
  TrainConfig train;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
};

Checkpoint checkpoint_from(const TrainResult& result);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// JSON views of configuration types

nlohmann::json to_json(const OperatorConfig& cfg);
OperatorConfig operator_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NormBounds& b);
NormBounds norm_bounds_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HuxConfig& cfg);
HuxConfig hux_config_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Reports

/// Full report: per-slice arrays, cube means and configuration echoes.
nlohmann::json report_to_json(const MetricsReport& report);
/// Checks the documented report schema; returns the list of violations.
std::vector<std::string> validate_report_json(const nlohmann::json& j);
void write_report_json(const std::filesystem::path& path, const MetricsReport& report);

std::string report_csv_header();
std::string report_csv_row(const std::string& cube_name, const MetricsReport& report);

/// "epoch,train_loss,val_loss" followed by one row per epoch.
void write_loss_history_csv(const std::filesystem::path& path, std::span<const EpochLoss> history);

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthConfig {
  std::size_t n_cubes = 8;
  std::uint64_t seed = 0;
  double v_slow = 350.0;
  double v_fast = 750.0;
  std::size_t stream_lmax = 12;
  double interface_sharpness = 25.0;
  HuxConfig hux;
  std::size_t nr = 140;
  std::size_t nlat = 111;
  std::size_t nlon = 128;
  double r_min = 30.0;
  double r_max = kAstronomicalUnitRs;

  void validate() const;
  RadialGrid radial_grid() const { return build_radial_grid(nr, r_min, r_max); }
  bool operator==(const SynthConfig&) const = default;
};

nlohmann::json to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);

/// Two-level stream pattern: a random band-limited field (Gaussian
/// coefficients up to stream_lmax, rescaled to unit RMS) squashed by a
/// logistic of steepness interface_sharpness onto [v_slow, v_fast].
VelocityMap generate_boundary(const SynthConfig& cfg, std::mt19937_64& rng);

/// Cube i is hux_forward(generate_boundary(rng_i)) with rng_i seeded from
/// (seed, i), so the set is reproducible and order independent.
std::vector<VelocityCube> generate_dataset(const SynthConfig& cfg);

// ---------------------------------------------------------------------------
// Splits

struct ChronologicalFraction {
  double train_fraction = 0.8;
};

/// Carrington-rotation ranges, inclusive. Defaults: train/CV 1625-2169,
/// test 2170-2293.
struct CarringtonRanges {
  int train_first = 1625;
  int train_last = 2169;
  int test_first = 2170;
  int test_last = 2293;
};

using SplitProtocol = std::variant<ChronologicalFraction, CarringtonRanges>;

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Chronological mode keeps the first round(f*n) cubes for training.
/// Carrington mode assigns by CR membership (cubes outside both ranges are
/// left out). Throws SplitError on an empty side or overlapping ranges.
SplitIndices split_dataset(std::span<const VelocityCube> cubes, const SplitProtocol& protocol);

// ---------------------------------------------------------------------------
// Manifest

struct ManifestEntry {
  std::string file;   // relative to the manifest directory
  std::string split;  // "train" or "test"
};

struct Manifest {
  std::optional<SynthConfig> generator;
  std::vector<ManifestEntry> cubes;
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace helioprop

#endif  // HELIOPROP_DATAIO_HPP
