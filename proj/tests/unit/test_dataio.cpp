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


#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "helioprop/dataio.hpp"
#include "helioprop/errors.hpp"

using namespace helioprop;

namespace {

SynthConfig small_synth(std::size_t n = 3, std::uint64_t seed = 7) {
  SynthConfig c;
  c.n_cubes = n;
  c.seed = seed;
  c.nr = 20;
  c.nlat = 16;
  c.nlon = 32;
  c.stream_lmax = 8;
  c.r_max = 215.0;
  return c;
}

bool bit_equal(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool cubes_bit_equal(const VelocityCube& a, const VelocityCube& b) {
  if (a.nr() != b.nr() || !bit_equal(a.rgrid.r, b.rgrid.r)) return false;
  if (a.grid->nlat() != b.grid->nlat() || a.grid->nlon() != b.grid->nlon()) return false;
  for (std::size_t i = 0; i < a.nr(); ++i)
    if (!bit_equal(a.slices[i].values, b.slices[i].values)) return false;
  return true;
}

std::string format_error(auto&& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Checkpoint sample_checkpoint(std::uint64_t seed) {
  auto cfg = fixture::small_config(4, seed);
  Checkpoint ck{init_params(cfg), NormBounds{312.5, 901.25}, TrainConfig{}, 17, 0.0123456789};
  ck.train.horizon = 4;
  ck.train.seed = seed;
  ck.train.windows = WindowMode::every_index;
  return ck;
}

}  // namespace

TEST_SUITE("dataio") {
  TEST_CASE("cube round trip is bit exact") {
    std::mt19937_64 rng(1);
    auto c = fixture::random_cube(5, 6, 8, rng);
    c.slices[2].values[3] = 1e-300;
    c.slices[4].values[0] = -0.0;
    const auto bytes = encode_cube(c);
    CHECK(bytes.size() == 20 + 8 * 5 + 8 * 5 * 6 * 8);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "HWC1");
    const auto d = decode_cube(bytes);
    CHECK(cubes_bit_equal(c, d));
    CHECK(d.meta.source == CubeSource::external);
    CHECK(encode_cube(d) == bytes);
  }

  TEST_CASE("cube payload size for the full grid") {
    VelocityCube c;
    c.grid = shared_gauss_legendre_grid(111, 128);
    c.rgrid = build_radial_grid(140, 30.0, kAstronomicalUnitRs);
    c.slices.assign(140, VelocityMap(c.grid, std::vector<double>(111 * 128, 400.0)));
    const auto bytes = encode_cube(c);
    CHECK(bytes.size() == 20 + 8 * 140 + 8ull * 140 * 111 * 128);
    CHECK(decode_cube(bytes).nr() == 140);
  }

  TEST_CASE("cube decoding rejects malformed input") {
    std::mt19937_64 rng(2);
    const auto bytes = encode_cube(fixture::random_cube(3, 4, 4, rng));

    auto bad = bytes;
    bad[0] = 'X';
    CHECK(format_error([&] { decode_cube(bad); }).find("byte offset 0") != std::string::npos);

    bad = bytes;
    bad[4] = 9;
    CHECK(format_error([&] { decode_cube(bad); }).find("byte offset 4") != std::string::npos);

    bad = bytes;
    bad[16] = 3;  // nlon = 3
    CHECK(format_error([&] { decode_cube(bad); }).find("invalid dimensions") != std::string::npos);

    for (std::size_t n : {0ul, 3ul, 10ul, 19ul}) {
      const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
      CHECK(format_error([&] { decode_cube(cut); }).find("truncated at byte offset") != std::string::npos);
    }
    for (std::size_t n : {20ul, 100ul, bytes.size() - 1}) {
      const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
      CHECK(format_error([&] { decode_cube(cut); }).find("does not match header dims") != std::string::npos);
    }
    bad = bytes;
    bad.push_back(0);
    CHECK(format_error([&] { decode_cube(bad); }).find("byte offset 20") != std::string::npos);
    bad = bytes;
    bad[8] = 4;  // nr 3 -> 4 without payload
    CHECK_THROWS_AS(decode_cube(bad), FormatError);
  }

  TEST_CASE("cube files carry a sidecar") {
    const auto dir = fixture::scratch_dir("dataio_cube");
    std::mt19937_64 rng(3);
    auto c = fixture::random_cube(4, 4, 8, rng);
    c.meta.carrington_rotation = 2170;
    c.meta.instrument = "GONG";
    c.meta.source = CubeSource::synthetic;
    save_cube(dir / "a.hwc", c);
    CHECK(std::filesystem::exists(dir / "a.hwc.json"));
    const auto side = nlohmann::json::parse(slurp(dir / "a.hwc.json"));
    CHECK(side.contains("units"));
    const auto back = load_cube(dir / "a.hwc");
    CHECK(cubes_bit_equal(c, back));
    CHECK(back.meta == c.meta);

    std::filesystem::remove(dir / "a.hwc.json");
    const auto bare = load_cube(dir / "a.hwc");
    CHECK(bare.meta.source == CubeSource::external);
    CHECK_FALSE(bare.meta.carrington_rotation.has_value());
    CHECK_THROWS_AS(load_cube(dir / "missing.hwc"), Error);
  }

  TEST_CASE("checkpoint round trip is bit exact") {
    const auto ck = sample_checkpoint(5);
    const auto bytes = encode_checkpoint(ck);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SFNP");
    const auto back = decode_checkpoint(bytes);
    CHECK(back.params.config() == ck.params.config());
    CHECK(bit_equal(back.params.values(), ck.params.values()));
    CHECK(back.bounds == ck.bounds);
    CHECK(back.train == ck.train);
    CHECK(back.best_epoch == 17);
    CHECK(back.best_val_loss == ck.best_val_loss);
    CHECK(encode_checkpoint(back) == bytes);

    const auto dir = fixture::scratch_dir("dataio_ckpt");
    save_checkpoint(dir / "m.sfnp", ck);
    CHECK(encode_checkpoint(load_checkpoint(dir / "m.sfnp")) == bytes);
  }

  TEST_CASE("checkpoint decoding rejects malformed input") {
    const auto bytes = encode_checkpoint(sample_checkpoint(6));
    auto bad = bytes;
    bad[1] = 'X';
    CHECK(format_error([&] { decode_checkpoint(bad); }).find("bad magic") != std::string::npos);
    for (std::size_t n : {2ul, 12ul, 40ul, bytes.size() - 9, bytes.size() - 1}) {
      const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
      CHECK(format_error([&] { decode_checkpoint(cut); }).find("byte offset") != std::string::npos);
    }
    bad = bytes;
    bad[20] = '#';  // inside the JSON block
    CHECK(format_error([&] { decode_checkpoint(bad); }).find("byte offset 16") != std::string::npos);
    bad = bytes;
    bad.insert(bad.end(), 8, 0);
    CHECK_THROWS_AS(decode_checkpoint(bad), FormatError);
  }

  TEST_CASE("json views round trip") {
    auto op = fixture::small_config(5, 99);
    op.activation = Activation::relu;
    op.mlp_hidden_factor = 1.5;
    CHECK(operator_config_from_json(to_json(op)) == op);
    CHECK(to_json(op)["activation"] == "relu");

    TrainConfig tc;
    tc.learning_rate = 3e-4;
    tc.windows = WindowMode::every_index;
    tc.validation_fraction = 0.25;
    CHECK(train_config_from_json(to_json(tc)) == tc);
    CHECK(to_json(tc)["windows"] == "every_index");

    NormBounds nb{201.5, 999.0};
    CHECK(norm_bounds_from_json(to_json(nb)) == nb);

    HuxConfig hc;
    hc.alpha = 0.0;
    hc.omega_rot = 0.0;
    hc.apply_acceleration = false;
    CHECK(hux_config_from_json(to_json(hc)) == hc);

    const auto sc = small_synth(11, 1234567890123ull);
    CHECK(synth_config_from_json(to_json(sc)) == sc);

    CubeMeta m;
    m.carrington_rotation = 1625;
    m.source = CubeSource::external;
    CHECK(cube_meta_from_json(cube_meta_to_json(m)) == m);
    CHECK(cube_meta_to_json(m)["instrument"].is_null());
  }

  TEST_CASE("report json schema and csv") {
    std::mt19937_64 rng(8);
    const auto t = fixture::random_cube(6, 5, 8, rng);
    const auto p = fixture::random_cube(6, 5, 8, rng);
    const auto rep = evaluate_cube(p, t, {}, {{"model", "x"}});
    auto j = report_to_json(rep);
    CHECK(validate_report_json(j).empty());
    CHECK(j["n_slices"] == 5);
    CHECK(j["per_slice"]["mse"].size() == 5);
    CHECK(j["meta"]["model"] == "x");
    CHECK(j["per_slice"]["mse"][0].get<double>() == rep.per_slice[0].mse);

    auto broken = j;
    broken.erase("config");
    CHECK_FALSE(validate_report_json(broken).empty());
    broken = j;
    broken["per_slice"]["emd"].erase(0);
    CHECK_FALSE(validate_report_json(broken).empty());
    broken = j;
    broken["format"] = "other";
    CHECK_FALSE(validate_report_json(broken).empty());
    broken = j;
    broken["n_slices"] = "five";
    CHECK_FALSE(validate_report_json(broken).empty());

    const auto dir = fixture::scratch_dir("dataio_report");
    write_report_json(dir / "r.json", rep);
    CHECK(validate_report_json(nlohmann::json::parse(slurp(dir / "r.json"))).empty());

    CHECK(report_csv_header() ==
          "cube,mean_mse,mean_edge_mse,mean_emd,mean_uiqi,edge_empty_slices,edge_threshold_fraction");
    const auto row = report_csv_row("c0", rep);
    CHECK(std::count(row.begin(), row.end(), ',') == 6);
    CHECK(row.rfind("c0,", 0) == 0);
    CHECK(std::stod(row.substr(3)) == rep.mean_mse);

    std::vector<EpochLoss> hist{{1, 2.5, 3.0}, {2, 1.25, 2.0}};
    write_loss_history_csv(dir / "loss.csv", hist);
    CHECK(slurp(dir / "loss.csv").rfind("epoch,train_loss,val_loss\n1,2.5,3\n2,1.25,2\n", 0) == 0);
  }

  TEST_CASE("synthetic boundary shape") {
    auto c = small_synth();
    std::mt19937_64 rng(1);
    const auto b = generate_boundary(c, rng);
    CHECK(b.values.size() == 16 * 32);
    std::size_t near_ends = 0;
    for (double v : b.values) {
      CHECK(v >= c.v_slow);
      CHECK(v <= c.v_fast);
      if (v < c.v_slow + 40 || v > c.v_fast - 40) ++near_ends;
    }
    // Two populations: most pixels sit close to one of the two levels.
    CHECK(double(near_ends) > 0.7 * double(b.values.size()));

    c.interface_sharpness = 1e9;
    std::mt19937_64 rng2(1);
    const auto s = generate_boundary(c, rng2);
    std::size_t exact = 0;
    for (double v : s.values)
      if (v == c.v_slow || v == c.v_fast) ++exact;
    CHECK(double(exact) > 0.99 * double(s.values.size()));
  }

  TEST_CASE("synthetic dataset") {
    auto c = small_synth(4, 42);
    c.hux.alpha = 0.0;
    const auto a = generate_dataset(c);
    REQUIRE(a.size() == 4);
    for (const auto& cube : a) {
      CHECK(cube.nr() == 20);
      CHECK(cube.meta.source == CubeSource::synthetic);
      for (const auto& s : cube.slices)
        for (double v : s.values) {
          CHECK(v >= c.v_slow);
          CHECK(v <= c.v_fast);
        }
    }
    CHECK_FALSE(cubes_bit_equal(a[0], a[1]));

    // Same seed, different worker counts and a longer set agree cube by cube.
    const char* prev = std::getenv("HELIOPROP_THREADS");
    ::setenv("HELIOPROP_THREADS", "1", 1);
    auto c6 = c;
    c6.n_cubes = 6;
    const auto b = generate_dataset(c6);
    if (prev) ::setenv("HELIOPROP_THREADS", prev, 1); else ::unsetenv("HELIOPROP_THREADS");
    for (std::size_t i = 0; i < 4; ++i) CHECK(cubes_bit_equal(a[i], b[i]));

    c.seed = 43;
    CHECK_FALSE(cubes_bit_equal(generate_dataset(c)[0], a[0]));
    c.n_cubes = 0;
    CHECK(generate_dataset(c).empty());
  }

  TEST_CASE("generated cubes are consistent with the propagator") {
    auto c = small_synth(2, 9);
    const auto cubes = generate_dataset(c);
    auto hux = c.hux;
    hux.apply_acceleration = false;  // slice 0 is already accelerated
    for (const auto& cube : cubes) {
      const auto again = hux_forward(cube.slices[0], cube.rgrid, hux);
      const auto rep = evaluate_cube(again, cube);
      CHECK(rep.mean_mse == 0.0);
      CHECK(rep.mean_emd == 0.0);
      CHECK(rep.mean_uiqi == doctest::Approx(1.0).epsilon(1e-14));
    }
  }

  TEST_CASE("synthetic config validation") {
    auto c = small_synth();
    c.v_fast = c.v_slow;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = small_synth();
    c.interface_sharpness = 0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = small_synth();
    c.stream_lmax = 16;
    CHECK_THROWS_AS(c.validate(), BandLimitError);
    c = small_synth();
    c.nlon = 31;
    CHECK_THROWS(c.validate());
  }

  TEST_CASE("splits") {
    std::mt19937_64 rng(4);
    std::vector<VelocityCube> cubes;
    for (int i = 0; i < 10; ++i) cubes.push_back(fixture::random_cube(3, 4, 4, rng));
    const auto s = split_dataset(cubes, ChronologicalFraction{0.8});
    CHECK(s.train == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(s.test == std::vector<std::size_t>{8, 9});
    CHECK_THROWS_AS(split_dataset(cubes, ChronologicalFraction{0.99}), SplitError);
    CHECK_THROWS_AS(split_dataset(cubes, ChronologicalFraction{1.0}), SplitError);

    CHECK_THROWS_AS(split_dataset(cubes, CarringtonRanges{}), SplitError);  // no CR metadata
    const int crs[] = {1600, 1625, 1900, 2169, 2170, 2200, 2293, 2294, 2000, 2250};
    for (int i = 0; i < 10; ++i) cubes[i].meta.carrington_rotation = crs[i];
    const auto r = split_dataset(cubes, CarringtonRanges{});
    CHECK(r.train == std::vector<std::size_t>{1, 2, 3, 8});
    CHECK(r.test == std::vector<std::size_t>{4, 5, 6, 9});
    CHECK_THROWS_AS(split_dataset(cubes, CarringtonRanges{1625, 2170, 2170, 2293}), SplitError);
    CHECK_THROWS_AS(split_dataset(cubes, CarringtonRanges{2169, 1625, 2170, 2293}), SplitError);
    CHECK_THROWS_AS(split_dataset(cubes, CarringtonRanges{1625, 2169, 3000, 3100}), SplitError);
    CHECK_THROWS_AS(split_dataset(std::span<const VelocityCube>{}, ChronologicalFraction{}), SplitError);
  }

  TEST_CASE("manifest round trip") {
    const auto dir = fixture::scratch_dir("dataio_manifest");
    Manifest m;
    m.generator = small_synth(2, 5);
    m.cubes = {{"cube_0000.hwc", "train"}, {"cube_0001.hwc", "test"}};
    write_manifest(dir / "manifest.json", m);
    const auto back = read_manifest(dir / "manifest.json");
    REQUIRE(back.generator.has_value());
    CHECK(*back.generator == *m.generator);
    REQUIRE(back.cubes.size() == 2);
    CHECK(back.cubes[1].file == "cube_0001.hwc");
    CHECK(back.cubes[1].split == "test");

    Manifest bare;
    bare.cubes = {{"x.hwc", "train"}};
    write_manifest(dir / "bare.json", bare);
    CHECK_FALSE(read_manifest(dir / "bare.json").generator.has_value());

    std::ofstream(dir / "junk.json") << "{\"cubes\": []}";
    CHECK_THROWS_AS(read_manifest(dir / "junk.json"), FormatError);
    CHECK_THROWS_AS(read_manifest(dir / "none.json"), Error);
  }
}
