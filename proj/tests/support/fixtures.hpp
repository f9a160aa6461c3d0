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


#ifndef HELIOPROP_TESTS_FIXTURES_HPP
#define HELIOPROP_TESTS_FIXTURES_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "helioprop/sfno.hpp"
#include "helioprop/sphere_grid.hpp"

namespace fixture {

inline helioprop::VelocityMap random_map(const helioprop::GridPtr& g, std::mt19937_64& rng, double lo = 300.0,
                                         double hi = 800.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  helioprop::VelocityMap m(g);
  for (auto& v : m.values) v = u(rng);
  return m;
}

inline helioprop::VelocityCube random_cube(std::size_t nr, std::size_t nlat, std::size_t nlon, std::mt19937_64& rng,
                                           double lo = 300.0, double hi = 800.0) {
  helioprop::VelocityCube c;
  c.grid = helioprop::shared_gauss_legendre_grid(nlat, nlon);
  c.rgrid = helioprop::build_radial_grid(nr, 30.0, 215.032);
  for (std::size_t i = 0; i < nr; ++i) c.slices.push_back(random_map(c.grid, rng, lo, hi));
  return c;
}

// 2 layers, 8 channels, lmax 6, mmax 4 on a 7 x 8 grid.
inline helioprop::OperatorConfig small_config(std::size_t out_channels = 3, std::uint64_t seed = 11) {
  helioprop::OperatorConfig c;
  c.n_layers = 2;
  c.hidden_channels = 8;
  c.lmax = 6;
  c.mmax = 4;
  c.nlat = 7;
  c.nlon = 8;
  c.in_channels = 1;
  c.out_channels = out_channels;
  c.seed = seed;
  return c;
}

inline helioprop::ChannelStack random_stack(std::size_t channels, std::size_t points, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  helioprop::ChannelStack s(channels, points);
  for (auto& v : s.data) v = u(rng);
  return s;
}

// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("helioprop_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace fixture

#endif  // HELIOPROP_TESTS_FIXTURES_HPP
