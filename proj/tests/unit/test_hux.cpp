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
#include <numbers>
#include <random>
#include <string>

#include "fixtures.hpp"
#include "helioprop/errors.hpp"
#include "helioprop/hux.hpp"
#include "oracles.hpp"

using namespace helioprop;

namespace {

HuxConfig no_accel() {
  HuxConfig c;
  c.alpha = 0.0;
  return c;
}

VelocityMap rotate_lon(const VelocityMap& m, std::size_t k) {
  VelocityMap out(m.grid);
  const auto nlat = m.grid->nlat(), nlon = m.grid->nlon();
  for (std::size_t i = 0; i < nlat; ++i)
    for (std::size_t j = 0; j < nlon; ++j) out.at(i, (j + k) % nlon) = m.at(i, j);
  return out;
}

}  // namespace

TEST_SUITE("hux") {
  TEST_CASE("acceleration formula") {
    const auto g = shared_gauss_legendre_grid(3, 4);
    HuxConfig cfg;
    VelocityMap m(g, std::vector<double>(12, 400.0));
    const auto a = hux_accelerate_boundary(m, cfg, 30.0);
    // 400 * (1 + 0.15 * (1 - exp(-0.6))) = 427.0713018...
    const double expected = 400.0 * (1.0 + 0.15 * (1.0 - std::exp(-0.6)));
    CHECK(expected == doctest::Approx(427.0713018).epsilon(1e-9));
    for (double v : a.values) CHECK(v == expected);

    cfg.alpha = 0.0;
    CHECK(hux_accelerate_boundary(m, cfg, 30.0).values == m.values);
    cfg.alpha = 0.15;
    cfg.apply_acceleration = false;
    CHECK(hux_accelerate_boundary(m, cfg, 30.0).values == m.values);

    m.at(1, 1) = 0.0;
    CHECK_THROWS_AS(hux_accelerate_boundary(m, HuxConfig{}, 30.0), DomainError);
  }

  TEST_CASE("config validation") {
    HuxConfig c;
    c.alpha = -0.1;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = HuxConfig{};
    c.r_h = 0.0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = HuxConfig{};
    c.omega_rot = -1e-6;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c.omega_rot = 0.0;
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("uniform boundary stays uniform") {
    const auto g = shared_gauss_legendre_grid(7, 16);
    VelocityMap m(g, std::vector<double>(g->size(), 420.0));
    const auto cube = hux_forward(m, default_radial_grid(), no_accel());
    CHECK(cube.nr() == 140);
    for (const auto& s : cube.slices)
      for (double v : s.values) CHECK(v == 420.0);
  }

  TEST_CASE("zero rotation leaves every slice at the accelerated boundary") {
    const auto g = shared_gauss_legendre_grid(7, 16);
    std::mt19937_64 rng(1);
    const auto m = fixture::random_map(g, rng);
    HuxConfig cfg;
    cfg.omega_rot = 0.0;
    const auto cube = hux_forward(m, default_radial_grid(), cfg);
    const auto acc = hux_accelerate_boundary(m, cfg, 30.0);
    for (const auto& s : cube.slices) CHECK(s.values == acc.values);
  }

  TEST_CASE("matches a straight-loop upwind integrator ring by ring") {
    const auto g = shared_gauss_legendre_grid(5, 32);
    std::mt19937_64 rng(2);
    const auto m = fixture::random_map(g, rng, 300, 700);
    const auto rg = build_radial_grid(40, 30, 215.032);
    const auto cfg = no_accel();
    const auto cube = hux_forward(m, rg, cfg);
    std::vector<double> dr_km;
    for (std::size_t i = 0; i + 1 < rg.nr(); ++i) dr_km.push_back(rg.spacing(i) * kSolarRadiusKm);
    double worst = 0.0;
    for (std::size_t lat = 0; lat < 5; ++lat) {
      std::vector<double> ring(m.values.begin() + lat * 32, m.values.begin() + (lat + 1) * 32);
      const auto ref = oracle::upwind_ring(ring, dr_km, cfg.omega_rot);
      for (std::size_t i = 0; i < rg.nr(); ++i)
        for (std::size_t j = 0; j < 32; ++j) worst = std::max(worst, std::abs(cube.slices[i].at(lat, j) - ref[i][j]));
    }
    CHECK(worst < 1e-9);
  }

  TEST_CASE("step front advances at the characteristic speed") {
    // Small-amplitude step: the speed is nearly constant, so the front moves
    // sum_i dr_i * omega / (v * dphi) cells toward lower longitude index.
    const std::size_t nlon = 256;
    const auto g = shared_gauss_legendre_grid(2, nlon);
    const double vlo = 400.0, vhi = 400.4;
    VelocityMap m(g, std::vector<double>(g->size(), vlo));
    const std::size_t a = 200, b = 250;  // plateau [a, b)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = a; j < b; ++j) m.at(i, j) = vhi;
    const auto rg = default_radial_grid();
    const auto cfg = no_accel();
    const auto cube = hux_forward(m, rg, cfg);

    const double dphi = 2 * std::numbers::pi / double(nlon);
    const double vmid = 0.5 * (vlo + vhi);
    double shift = 0.0;
    for (std::size_t i = 0; i + 1 < rg.nr(); ++i) shift += rg.spacing(i) * kSolarRadiusKm * cfg.omega_rot / (vmid * dphi);
    REQUIRE(shift > 30.0);  // the front travels well past its smearing width
    REQUIRE(shift < 60.0);

    // Left front: window [lo, hi) sits inside the plateau at its right end.
    const auto& last = cube.slices.back();
    const double left_expected = double(a) - shift;
    const auto lo = static_cast<std::size_t>(left_expected) - 30;
    const std::size_t hi = static_cast<std::size_t>(left_expected) + 20;
    double mass = 0.0;
    for (std::size_t j = lo; j < hi; ++j) mass += (last.at(0, j) - vlo) / (vhi - vlo);
    const double front = double(hi) - mass;
    CHECK(std::abs(front - left_expected) < 0.005 * shift);
  }

  TEST_CASE("invariants over random boundaries") {
    const auto g = shared_gauss_legendre_grid(6, 32);
    const auto rg = build_radial_grid(60, 30, 215.032);
    const auto cfg = no_accel();
    std::mt19937_64 rng(3);
    for (int t = 0; t < 10; ++t) {
      const auto m = fixture::random_map(g, rng, 250, 900);
      const auto cube = hux_forward(m, rg, cfg);
      const auto [lo, hi] = std::minmax_element(m.values.begin(), m.values.end());
      for (const auto& s : cube.slices)
        for (double v : s.values) {
          CHECK(v >= *lo);
          CHECK(v <= *hi);
        }
      // Rotation equivariance is exact.
      const std::size_t k = 1 + t * 3 % 31;
      const auto rot = hux_forward(rotate_lon(m, k), rg, cfg);
      for (std::size_t i = 0; i < rg.nr(); ++i) CHECK(rot.slices[i].values == rotate_lon(cube.slices[i], k).values);
      // Permuting latitude rings permutes the output rings.
      VelocityMap perm(g);
      const std::vector<std::size_t> p{3, 0, 5, 1, 4, 2};
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 32; ++j) perm.at(i, j) = m.at(p[i], j);
      const auto pc = hux_forward(perm, rg, cfg);
      for (std::size_t r = 0; r < rg.nr(); ++r)
        for (std::size_t i = 0; i < 6; ++i)
          for (std::size_t j = 0; j < 32; ++j) CHECK(pc.slices[r].at(i, j) == cube.slices[r].at(p[i], j));
    }
  }

  TEST_CASE("CFL violation is reported with slice and minimum speed") {
    const auto g = shared_gauss_legendre_grid(3, 128);
    VelocityMap m(g, std::vector<double>(g->size(), 400.0));
    m.at(2, 7) = 20.0;
    const auto rg = default_radial_grid();
    CHECK(hux_cfl_number(rg.spacing(0), HuxConfig{}.omega_rot, 20.0, 128) > 1.0);
    CHECK(hux_cfl_number(rg.spacing(0), HuxConfig{}.omega_rot, 300.0, 128) < 0.25);
    try {
      hux_forward(m, rg, no_accel());
      FAIL("expected a StabilityError");
    } catch (const StabilityError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("slice 0") != std::string::npos);
      CHECK(msg.find("v_min = 20") != std::string::npos);
    }
  }

  TEST_CASE("outputs are positive, finite and deterministic") {
    const auto g = shared_gauss_legendre_grid(8, 32);
    std::mt19937_64 rng(4);
    const auto m = fixture::random_map(g, rng);
    const auto a = hux_forward(m, default_radial_grid(), HuxConfig{});
    const auto b = hux_forward(m, default_radial_grid(), HuxConfig{});
    for (std::size_t i = 0; i < a.nr(); ++i) {
      CHECK(a.slices[i].values == b.slices[i].values);
      for (double v : a.slices[i].values) CHECK((std::isfinite(v) && v > 0.0));
    }
  }
}
