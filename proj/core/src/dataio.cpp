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

#include "helioprop/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "helioprop/errors.hpp"
#include "helioprop/parallel.hpp"
#include "helioprop/sht.hpp"

namespace helioprop {

using nlohmann::json;

namespace {

constexpr char kCubeMagic[4] = {'H', 'W', 'C', '1'};
constexpr char kCheckpointMagic[4] = {'S', 'F', 'N', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

class ByteWriter {
 public:
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, const char* what) : bytes_(bytes), what_(what) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* field) const {
    if (remaining() < n) {
      throw FormatError(std::string(what_) + ": truncated at byte offset " + std::to_string(pos_) + " reading " +
                        field + " (need " + std::to_string(n) + " bytes, have " + std::to_string(remaining()) + ")");
    }
  }
  std::span<const std::uint8_t> raw(std::size_t n, const char* field) {
    need(n, field);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32(const char* field) {
    auto s = raw(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* field) {
    auto s = raw(8, field);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  double f64(const char* field) { return std::bit_cast<double>(u64(field)); }

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw FormatError(std::string(what_) + ": " + msg + " at byte offset " + std::to_string(at));
  }

 private:
  std::span<const std::uint8_t> bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Cubes

std::vector<std::uint8_t> encode_cube(const VelocityCube& cube) {
  cube.validate();
  ByteWriter w;
  w.raw(kCubeMagic, 4);
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(cube.nr()));
  w.u32(static_cast<std::uint32_t>(cube.grid->nlat()));
  w.u32(static_cast<std::uint32_t>(cube.grid->nlon()));
  for (double r : cube.rgrid.r) w.f64(r);
  for (const auto& s : cube.slices) {
    for (double v : s.values) w.f64(v);
  }
  return w.take();
}

VelocityCube decode_cube(std::span<const std::uint8_t> bytes) {
  ByteReader rd(bytes, "cube file");
  auto magic = rd.raw(4, "magic");
  if (std::memcmp(magic.data(), kCubeMagic, 4) != 0) rd.fail("bad magic (expected \"HWC1\")", 0);
  const std::size_t version_at = rd.offset();
  if (rd.u32("version") != kFormatVersion) rd.fail("unsupported version", version_at);
  const std::size_t dims_at = rd.offset();
  const std::uint64_t nr = rd.u32("nr");
  const std::uint64_t nlat = rd.u32("nlat");
  const std::uint64_t nlon = rd.u32("nlon");
  if (nr < 2 || nlat < 2 || nlon < 2 || nlon % 2 != 0) rd.fail("invalid dimensions", dims_at);
  const std::uint64_t payload = 8 * (nr + nr * nlat * nlon);
  if (rd.remaining() != payload) {
    rd.fail("payload length " + std::to_string(rd.remaining()) + " does not match header dims (expected " +
                std::to_string(payload) + ")",
            rd.offset());
  }

  VelocityCube cube;
  cube.grid = shared_gauss_legendre_grid(nlat, nlon);
  cube.rgrid.r.resize(nr);
  for (auto& r : cube.rgrid.r) r = rd.f64("radius");
  cube.slices.reserve(nr);
  for (std::size_t i = 0; i < nr; ++i) {
    VelocityMap m(cube.grid);
    for (auto& v : m.values) v = rd.f64("velocity");
    cube.slices.push_back(std::move(m));
  }
  cube.meta.source = CubeSource::external;
  return cube;
}

json cube_meta_to_json(const CubeMeta& meta) {
  json j;
  j["carrington_rotation"] = meta.carrington_rotation ? json(*meta.carrington_rotation) : json(nullptr);
  j["instrument"] = meta.instrument ? json(*meta.instrument) : json(nullptr);
  j["source"] = meta.source == CubeSource::synthetic ? "synthetic" : "external";
  return j;
}

CubeMeta cube_meta_from_json(const json& j) {
  CubeMeta m;
  if (j.contains("carrington_rotation") && !j["carrington_rotation"].is_null()) {
    m.carrington_rotation = j["carrington_rotation"].get<int>();
  }
  if (j.contains("instrument") && !j["instrument"].is_null()) m.instrument = j["instrument"].get<std::string>();
  const std::string src = j.value("source", "external");
  if (src != "synthetic" && src != "external") throw FormatError("cube sidecar: unknown source '" + src + "'");
  m.source = src == "synthetic" ? CubeSource::synthetic : CubeSource::external;
  return m;
}

void save_cube(const std::filesystem::path& path, const VelocityCube& cube) {
  write_file(path, encode_cube(cube));
  json side;
  side["meta"] = cube_meta_to_json(cube.meta);
  side["units"] = {{"velocity", "km/s"}, {"radius", "R_sun"}, {"colatitude", "rad"}, {"longitude", "rad"}};
  side["layout"] = "r,lat,lon";
  side["latitude_grid"] = "gauss-legendre colatitude, north first";
  write_text(sidecar_path(path), side.dump(2) + "\n");
}

VelocityCube load_cube(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  VelocityCube cube = decode_cube(bytes);
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    std::ifstream in(side);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw FormatError("cube sidecar " + side.string() + ": " + e.what());
    }
    if (j.contains("meta")) cube.meta = cube_meta_from_json(j["meta"]);
  }
  return cube;
}

// ---------------------------------------------------------------------------
// JSON views

json to_json(const OperatorConfig& cfg) {
  return {{"n_layers", cfg.n_layers},
          {"hidden_channels", cfg.hidden_channels},
          {"lmax", cfg.lmax},
          {"mmax", cfg.mmax},
          {"nlat", cfg.nlat},
          {"nlon", cfg.nlon},
          {"in_channels", cfg.in_channels},
          {"out_channels", cfg.out_channels},
          {"mlp_hidden_factor", cfg.mlp_hidden_factor},
          {"activation", cfg.activation == Activation::gelu ? "gelu" : "relu"},
          {"seed", cfg.seed}};
}

OperatorConfig operator_config_from_json(const json& j) {
  OperatorConfig c;
  c.n_layers = j.at("n_layers").get<std::size_t>();
  c.hidden_channels = j.at("hidden_channels").get<std::size_t>();
  c.lmax = j.at("lmax").get<std::size_t>();
  c.mmax = j.at("mmax").get<std::size_t>();
  c.nlat = j.at("nlat").get<std::size_t>();
  c.nlon = j.at("nlon").get<std::size_t>();
  c.in_channels = j.at("in_channels").get<std::size_t>();
  c.out_channels = j.at("out_channels").get<std::size_t>();
  c.mlp_hidden_factor = j.at("mlp_hidden_factor").get<double>();
  const auto act = j.at("activation").get<std::string>();
  if (act != "gelu" && act != "relu") throw FormatError("operator config: unknown activation '" + act + "'");
  c.activation = act == "gelu" ? Activation::gelu : Activation::relu;
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"batch_size", cfg.batch_size},
          {"epochs", cfg.epochs},
          {"horizon", cfg.horizon},
          {"adam_beta1", cfg.adam_beta1},
          {"adam_beta2", cfg.adam_beta2},
          {"adam_eps", cfg.adam_eps},
          {"seed", cfg.seed},
          {"folds", cfg.folds},
          {"shuffle_folds", cfg.shuffle_folds},
          {"windows", cfg.windows == WindowMode::rollout_aligned ? "rollout_aligned" : "every_index"},
          {"validation_fraction", cfg.validation_fraction}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.horizon = j.at("horizon").get<std::size_t>();
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.adam_eps = j.at("adam_eps").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.folds = j.at("folds").get<std::size_t>();
  c.shuffle_folds = j.at("shuffle_folds").get<bool>();
  c.windows = j.at("windows").get<std::string>() == "every_index" ? WindowMode::every_index
                                                                   : WindowMode::rollout_aligned;
  c.validation_fraction = j.at("validation_fraction").get<double>();
  return c;
}

json to_json(const NormBounds& b) { return {{"v_min", b.v_min}, {"v_max", b.v_max}}; }

NormBounds norm_bounds_from_json(const json& j) {
  NormBounds b{j.at("v_min").get<double>(), j.at("v_max").get<double>()};
  b.validate();
  return b;
}

json to_json(const HuxConfig& cfg) {
  return {{"omega_rot", cfg.omega_rot},
          {"alpha", cfg.alpha},
          {"r_h", cfg.r_h},
          {"apply_acceleration", cfg.apply_acceleration}};
}

HuxConfig hux_config_from_json(const json& j) {
  HuxConfig c;
  c.omega_rot = j.at("omega_rot").get<double>();
  c.alpha = j.at("alpha").get<double>();
  c.r_h = j.at("r_h").get<double>();
  c.apply_acceleration = j.at("apply_acceleration").get<bool>();
  c.validate();
  return c;
}

json to_json(const SynthConfig& cfg) {
  return {{"n_cubes", cfg.n_cubes},
          {"seed", cfg.seed},
          {"v_slow", cfg.v_slow},
          {"v_fast", cfg.v_fast},
          {"stream_lmax", cfg.stream_lmax},
          {"interface_sharpness", cfg.interface_sharpness},
          {"hux", to_json(cfg.hux)},
          {"nr", cfg.nr},
          {"nlat", cfg.nlat},
          {"nlon", cfg.nlon},
          {"r_min", cfg.r_min},
          {"r_max", cfg.r_max}};
}

SynthConfig synth_config_from_json(const json& j) {
  SynthConfig c;
  c.n_cubes = j.at("n_cubes").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.v_slow = j.at("v_slow").get<double>();
  c.v_fast = j.at("v_fast").get<double>();
  c.stream_lmax = j.at("stream_lmax").get<std::size_t>();
  c.interface_sharpness = j.at("interface_sharpness").get<double>();
  c.hux = hux_config_from_json(j.at("hux"));
  c.nr = j.at("nr").get<std::size_t>();
  c.nlat = j.at("nlat").get<std::size_t>();
  c.nlon = j.at("nlon").get<std::size_t>();
  c.r_min = j.at("r_min").get<double>();
  c.r_max = j.at("r_max").get<double>();
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Checkpoints

Checkpoint checkpoint_from(const TrainResult& result) {
  return Checkpoint{result.params, result.bounds, result.train_config, result.best_epoch, result.best_val_loss};
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  json cfg;
  cfg["format"] = "helioprop-checkpoint";
  cfg["operator"] = to_json(ckpt.params.config());
  cfg["norm_bounds"] = to_json(ckpt.bounds);
  cfg["train"] = to_json(ckpt.train);
  cfg["best_epoch"] = ckpt.best_epoch;
  cfg["best_val_loss"] = ckpt.best_val_loss;
  const std::string text = cfg.dump(2);

  ByteWriter w;
  w.raw(kCheckpointMagic, 4);
  w.u32(kFormatVersion);
  w.u64(text.size());
  w.raw(text.data(), text.size());
  const auto values = ckpt.params.values();
  w.u64(values.size());
  for (double v : values) w.f64(v);
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader rd(bytes, "checkpoint");
  auto magic = rd.raw(4, "magic");
  if (std::memcmp(magic.data(), kCheckpointMagic, 4) != 0) rd.fail("bad magic (expected \"SFNP\")", 0);
  const std::size_t version_at = rd.offset();
  if (rd.u32("version") != kFormatVersion) rd.fail("unsupported version", version_at);
  const std::uint64_t n = rd.u64("config length");
  const std::size_t cfg_at = rd.offset();
  auto text = rd.raw(static_cast<std::size_t>(n), "config block");
  json cfg;
  try {
    cfg = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    rd.fail(std::string("unparsable config block (") + e.what() + ")", cfg_at);
  }

  Checkpoint ck;
  try {
    ck.params = OperatorParams(operator_config_from_json(cfg.at("operator")));
    ck.bounds = norm_bounds_from_json(cfg.at("norm_bounds"));
    ck.train = train_config_from_json(cfg.at("train"));
    ck.best_epoch = cfg.at("best_epoch").get<std::size_t>();
    ck.best_val_loss = cfg.at("best_val_loss").get<double>();
  } catch (const json::exception& e) {
    rd.fail(std::string("invalid config block (") + e.what() + ")", cfg_at);
  }
  const std::size_t count_at = rd.offset();
  const std::uint64_t count = rd.u64("parameter count");
  if (count != ck.params.values().size()) rd.fail("parameter count does not match operator config", count_at);
  if (rd.remaining() != 8 * count) rd.fail("parameter payload length mismatch", rd.offset());
  auto values = ck.params.mutable_values();
  for (auto& v : values) v = rd.f64("parameter");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

// ---------------------------------------------------------------------------
// Reports

json report_to_json(const MetricsReport& report) {
  json j;
  j["format"] = "helioprop-metrics-report";
  j["version"] = 1;
  j["meta"] = report.meta;
  j["config"] = {{"edge_threshold_fraction", report.config.edge.threshold_fraction},
                 {"longitude_boundary", "periodic"},
                 {"latitude_boundary", "replicate"},
                 {"uiqi_sliding_window", report.config.uiqi.sliding_window},
                 {"uiqi_window", report.config.uiqi.window},
                 {"excluded_radius_index", 0}};
  json idx = json::array(), rad = json::array(), m = json::array(), e = json::array(), w = json::array(),
       q = json::array();
  for (const auto& s : report.per_slice) {
    idx.push_back(s.radius_index);
    rad.push_back(s.radius);
    m.push_back(s.mse);
    e.push_back(s.edge_mse ? json(*s.edge_mse) : json(nullptr));
    w.push_back(s.emd);
    q.push_back(s.uiqi);
  }
  j["per_slice"] = {{"radius_index", idx}, {"radius", rad}, {"mse", m}, {"edge_mse", e}, {"emd", w}, {"uiqi", q}};
  j["cube_mean"] = {{"mse", report.mean_mse},
                    {"edge_mse", report.mean_edge_mse ? json(*report.mean_edge_mse) : json(nullptr)},
                    {"emd", report.mean_emd},
                    {"uiqi", report.mean_uiqi}};
  j["n_slices"] = report.per_slice.size();
  j["edge_empty_slices"] = report.edge_empty_slices;
  return j;
}

std::vector<std::string> validate_report_json(const json& j) {
  std::vector<std::string> errs;
  auto require = [&](const json& obj, const char* key, auto pred, const char* type) {
    if (!obj.is_object() || !obj.contains(key)) {
      errs.push_back(std::string("missing key '") + key + "'");
      return false;
    }
    if (!pred(obj.at(key))) {
      errs.push_back(std::string("key '") + key + "' is not " + type);
      return false;
    }
    return true;
  };
  const auto is_str = [](const json& v) { return v.is_string(); };
  const auto is_obj = [](const json& v) { return v.is_object(); };
  const auto is_num = [](const json& v) { return v.is_number(); };
  const auto is_uint = [](const json& v) { return v.is_number_integer() && v.get<std::int64_t>() >= 0; };
  const auto is_bool = [](const json& v) { return v.is_boolean(); };
  const auto is_num_or_null = [](const json& v) { return v.is_number() || v.is_null(); };

  if (require(j, "format", is_str, "a string") && j["format"] != "helioprop-metrics-report") {
    errs.push_back("format tag mismatch");
  }
  require(j, "version", is_uint, "an unsigned integer");
  if (require(j, "meta", is_obj, "an object")) {
    for (const auto& [k, v] : j["meta"].items()) {
      if (!v.is_string()) errs.push_back("meta." + k + " is not a string");
    }
  }
  if (require(j, "config", is_obj, "an object")) {
    const auto& c = j["config"];
    require(c, "edge_threshold_fraction", is_num, "a number");
    require(c, "longitude_boundary", is_str, "a string");
    require(c, "latitude_boundary", is_str, "a string");
    require(c, "uiqi_sliding_window", is_bool, "a boolean");
    require(c, "uiqi_window", is_uint, "an unsigned integer");
  }
  std::size_t n = 0;
  if (require(j, "n_slices", is_uint, "an unsigned integer")) n = j["n_slices"].get<std::size_t>();
  require(j, "edge_empty_slices", is_uint, "an unsigned integer");
  if (require(j, "per_slice", is_obj, "an object")) {
    const auto& p = j["per_slice"];
    for (const char* key : {"radius_index", "radius", "mse", "edge_mse", "emd", "uiqi"}) {
      if (!p.contains(key) || !p[key].is_array()) {
        errs.push_back(std::string("per_slice.") + key + " missing or not an array");
        continue;
      }
      if (p[key].size() != n) errs.push_back(std::string("per_slice.") + key + " length != n_slices");
      for (const auto& v : p[key]) {
        const bool ok = std::string(key) == "edge_mse" ? is_num_or_null(v) : v.is_number();
        if (!ok) {
          errs.push_back(std::string("per_slice.") + key + " holds a non-numeric entry");
          break;
        }
      }
    }
  }
  if (require(j, "cube_mean", is_obj, "an object")) {
    const auto& c = j["cube_mean"];
    require(c, "mse", is_num, "a number");
    require(c, "edge_mse", is_num_or_null, "a number or null");
    require(c, "emd", is_num, "a number");
    require(c, "uiqi", is_num, "a number");
  }
  return errs;
}

void write_report_json(const std::filesystem::path& path, const MetricsReport& report) {
  write_text(path, report_to_json(report).dump(2) + "\n");
}

std::string report_csv_header() {
  return "cube,mean_mse,mean_edge_mse,mean_emd,mean_uiqi,edge_empty_slices,edge_threshold_fraction";
}

std::string report_csv_row(const std::string& cube_name, const MetricsReport& report) {
  std::ostringstream os;
  os << cube_name << ',' << fmt_double(report.mean_mse) << ','
     << (report.mean_edge_mse ? fmt_double(*report.mean_edge_mse) : std::string("nan")) << ','
     << fmt_double(report.mean_emd) << ',' << fmt_double(report.mean_uiqi) << ',' << report.edge_empty_slices << ','
     << fmt_double(report.config.edge.threshold_fraction);
  return os.str();
}

void write_loss_history_csv(const std::filesystem::path& path, std::span<const EpochLoss> history) {
  std::ostringstream os;
  os << "epoch,train_loss,val_loss\n";
  for (const auto& e : history) os << e.epoch << ',' << fmt_double(e.train_loss) << ',' << fmt_double(e.val_loss) << '\n';
  write_text(path, os.str());
}

// ---------------------------------------------------------------------------
// Synthetic data

void SynthConfig::validate() const {
  if (!(v_slow > 0.0 && v_slow < v_fast)) throw ArgumentError("synth: need 0 < v_slow < v_fast");
  if (!(interface_sharpness > 0.0)) throw ArgumentError("synth: interface_sharpness must be positive");
  if (nlat < 2 || nlon < 2 || nlon % 2 != 0) throw ArgumentError("synth: invalid grid size");
  if (stream_lmax + 1 > nlat) throw BandLimitError("synth: stream_lmax exceeds the grid band limit");
  hux.validate();
  build_radial_grid(nr, r_min, r_max);
}

VelocityMap generate_boundary(const SynthConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const auto grid = shared_gauss_legendre_grid(cfg.nlat, cfg.nlon);
  const std::size_t lmax = cfg.stream_lmax;
  const std::size_t mmax = std::min(lmax, cfg.nlon / 2);
  const auto sht = shared_transform(grid, lmax, mmax);
  const bool nyquist = 2 * mmax == cfg.nlon;

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> re(sht->mode_count());
  std::vector<double> im(sht->mode_count());
  std::size_t k = 0;
  for (std::size_t m = 0; m <= mmax; ++m) {
    for (std::size_t l = m; l <= lmax; ++l, ++k) {
      re[k] = normal(rng);
      im[k] = normal(rng);
      if (m == 0 || (nyquist && m == mmax)) im[k] = 0.0;
    }
  }
  std::vector<double> field(grid->size());
  sht->synthesis(re, im, field);

  double ss = 0.0;
  for (double v : field) ss += v * v;
  const double rms = std::sqrt(ss / static_cast<double>(field.size()));
  VelocityMap out(grid);
  for (std::size_t p = 0; p < field.size(); ++p) {
    const double x = rms > 0.0 ? field[p] / rms : 0.0;
    const double sigma = 1.0 / (1.0 + std::exp(-cfg.interface_sharpness * x));
    out.values[p] = cfg.v_slow + (cfg.v_fast - cfg.v_slow) * sigma;
  }
  return out;
}

std::vector<VelocityCube> generate_dataset(const SynthConfig& cfg) {
  cfg.validate();
  const RadialGrid rgrid = cfg.radial_grid();
  std::vector<VelocityCube> cubes(cfg.n_cubes);
  parallel_for(cfg.n_cubes, [&](std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) >> 32)};
    std::mt19937_64 rng(seq);
    cubes[i] = hux_forward(generate_boundary(cfg, rng), rgrid, cfg.hux);
    cubes[i].meta.source = CubeSource::synthetic;
  });
  return cubes;
}

// ---------------------------------------------------------------------------
// Splits

SplitIndices split_dataset(std::span<const VelocityCube> cubes, const SplitProtocol& protocol) {
  if (cubes.empty()) throw SplitError("split: empty dataset");
  SplitIndices out;
  if (const auto* f = std::get_if<ChronologicalFraction>(&protocol)) {
    if (!(f->train_fraction > 0.0 && f->train_fraction < 1.0)) throw SplitError("split: fraction must lie in (0, 1)");
    const auto n_train =
        static_cast<std::size_t>(std::llround(f->train_fraction * static_cast<double>(cubes.size())));
    for (std::size_t i = 0; i < cubes.size(); ++i) (i < n_train ? out.train : out.test).push_back(i);
  } else {
    const auto& r = std::get<CarringtonRanges>(protocol);
    if (r.train_first > r.train_last || r.test_first > r.test_last) throw SplitError("split: inverted CR range");
    if (r.train_first <= r.test_last && r.test_first <= r.train_last) throw SplitError("split: CR ranges overlap");
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      const auto& cr = cubes[i].meta.carrington_rotation;
      if (!cr) throw SplitError("split: cube " + std::to_string(i) + " has no Carrington rotation");
      if (*cr >= r.train_first && *cr <= r.train_last) {
        out.train.push_back(i);
      } else if (*cr >= r.test_first && *cr <= r.test_last) {
        out.test.push_back(i);
      }
    }
  }
  if (out.train.empty() || out.test.empty()) throw SplitError("split: one side of the split is empty");
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  json j;
  j["format"] = "helioprop-manifest";
  j["version"] = 1;
  j["generator"] = manifest.generator ? to_json(*manifest.generator) : json(nullptr);
  j["cubes"] = json::array();
  for (const auto& e : manifest.cubes) j["cubes"].push_back({{"file", e.file}, {"split", e.split}});
  write_text(path, j.dump(2) + "\n");
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  Manifest m;
  try {
    const json j = json::parse(in);
    if (j.value("format", "") != "helioprop-manifest") throw FormatError("manifest: missing format tag");
    if (j.contains("generator") && !j["generator"].is_null()) m.generator = synth_config_from_json(j["generator"]);
    for (const auto& e : j.at("cubes")) m.cubes.push_back({e.at("file").get<std::string>(), e.at("split").get<std::string>()});
  } catch (const json::exception& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  return m;
}

}  // namespace helioprop
