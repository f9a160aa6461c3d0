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
#include <random>

#include "fixtures.hpp"
#include "probes.hpp"
#include "helioprop/dataio.hpp"
#include "helioprop/errors.hpp"
#include "helioprop/training.hpp"

using namespace helioprop;

namespace {

using probe::loss_oracle;

SynthConfig tiny_synth(std::size_t n, std::size_t nr = 12) {
  SynthConfig s;
  s.n_cubes = n;
  s.seed = 3;
  s.nr = nr;
  s.nlat = 7;
  s.nlon = 8;
  s.stream_lmax = 4;
  return s;
}

OperatorConfig tiny_model(std::size_t hidden = 6) {
  OperatorConfig c;
  c.n_layers = 1;
  c.hidden_channels = hidden;
  c.lmax = 6;
  c.mmax = 4;
  c.nlat = 7;
  c.nlon = 8;
  return c;
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("loss examples") {
    std::vector<ChannelStack> p{ChannelStack(1, 2)}, t{ChannelStack(1, 2)};
    p[0].data = {3.0, 4.0};
    CHECK(loss_l2_2d(p, t, {{true}}) == 5.0);
    CHECK(loss_l2_2d(p, p, {{true}}) == 0.0);

    std::vector<ChannelStack> p2{ChannelStack(2, 3)}, t2{ChannelStack(2, 3)};
    p2[0].data = {1, 2, 2, 0, 3, 4};  // norms 3 and 5
    CHECK(loss_l2_2d(p2, t2, {{true, true}}) == 4.0);
    CHECK(loss_l2_2d(p2, t2, {{false, true}}) == 5.0);
    CHECK_THROWS_AS(loss_l2_2d(p2, t2, {{false, false}}), ArgumentError);
    CHECK_THROWS_AS(loss_l2_2d(p2, t, {{true, true}}), ShapeError);
  }

  TEST_CASE("loss matches a straight-loop oracle") {
    std::mt19937_64 rng(1);
    for (int f = 0; f < 50; ++f) {
      const std::size_t B = 1 + rng() % 4, C = 1 + rng() % 5, P = 1 + rng() % 40;
      std::vector<ChannelStack> p, t;
      SliceMask mask(B, std::vector<bool>(C));
      for (std::size_t b = 0; b < B; ++b) {
        p.push_back(fixture::random_stack(C, P, rng));
        t.push_back(fixture::random_stack(C, P, rng));
        for (std::size_t c = 0; c < C; ++c) mask[b][c] = rng() % 3 != 0;
      }
      mask[0][0] = true;
      CHECK(std::abs(loss_l2_2d(p, t, mask) - loss_oracle(p, t, mask)) < 1e-12);
    }
  }

  TEST_CASE("loss is norm-like") {
    std::mt19937_64 rng(2);
    std::vector<ChannelStack> p{fixture::random_stack(3, 20, rng)}, t{fixture::random_stack(3, 20, rng)};
    const SliceMask mask{{true, false, true}};
    const double base = loss_l2_2d(p, t, mask);
    CHECK(base > 0.0);
    for (double c : {0.0, 0.5, 3.0}) {
      auto q = p;
      for (std::size_t i = 0; i < q[0].data.size(); ++i) q[0].data[i] = t[0].data[i] + c * (p[0].data[i] - t[0].data[i]);
      CHECK(loss_l2_2d(q, t, mask) == doctest::Approx(c * base).epsilon(1e-12));
    }
    // Differences on masked slices do not count.
    auto q = t;
    for (std::size_t i = 20; i < 40; ++i) q[0].data[i] += 1.0;
    CHECK(loss_l2_2d(q, t, mask) == 0.0);
  }

  TEST_CASE("loss gradient matches finite differences") {
    std::mt19937_64 rng(3);
    std::vector<ChannelStack> p{fixture::random_stack(2, 10, rng), fixture::random_stack(2, 10, rng)};
    std::vector<ChannelStack> t{fixture::random_stack(2, 10, rng), fixture::random_stack(2, 10, rng)};
    const SliceMask mask{{true, true}, {false, true}};
    const auto lg = loss_l2_2d_with_grad(p, t, mask);
    CHECK(lg.loss == loss_l2_2d(p, t, mask));
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t q = 0; q < 20; ++q) {
        auto pp = p, pm = p;
        pp[b].data[q] += 1e-6;
        pm[b].data[q] -= 1e-6;
        const double fd = (loss_l2_2d(pp, t, mask) - loss_l2_2d(pm, t, mask)) / 2e-6;
        CHECK(std::abs(lg.grad[b].data[q] - fd) < 1e-7);
      }
  }

  TEST_CASE("normalisation") {
    const NormBounds nb{300.0, 800.0};
    CHECK(nb.normalize(300.0) == 0.0);
    CHECK(nb.normalize(800.0) == 1.0);
    CHECK(nb.normalize(550.0) == 0.5);
    CHECK(nb.normalize(900.0) > 1.0);  // no clipping
    CHECK_THROWS_AS((NormBounds{5.0, 5.0}.validate()), ArgumentError);
    CHECK_THROWS_AS(normalize(VelocityMap(shared_gauss_legendre_grid(2, 2), {1, 2, 3, 4}), NormBounds{2, 1}),
                    ArgumentError);

    std::mt19937_64 rng(4);
    const auto cube = fixture::random_cube(5, 7, 8, rng);
    const auto round = denormalize(normalize(cube, nb), nb);
    double worst = 0.0;
    for (std::size_t i = 0; i < cube.nr(); ++i)
      for (std::size_t q = 0; q < cube.grid->size(); ++q)
        worst = std::max(worst, std::abs(round.slices[i].values[q] - cube.slices[i].values[q]));
    CHECK(worst < 1e-12);

    // Affine and order preserving.
    const auto n = normalize(cube.slices[2], nb);
    const auto& v = cube.slices[2].values;
    CHECK(std::distance(v.begin(), std::max_element(v.begin(), v.end())) ==
          std::distance(n.values.begin(), std::max_element(n.values.begin(), n.values.end())));
    CHECK(std::distance(v.begin(), std::min_element(v.begin(), v.end())) ==
          std::distance(n.values.begin(), std::min_element(n.values.begin(), n.values.end())));

    const std::vector<VelocityCube> cubes{cube};
    const auto b = compute_bounds(cubes);
    double lo = 1e300, hi = -1e300;
    for (const auto& s : cube.slices)
      for (double x : s.values) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    CHECK(b.v_min == lo);
    CHECK(b.v_max == hi);
  }

  TEST_CASE("teacher-forced windows") {
    const auto g = shared_gauss_legendre_grid(3, 4);
    VelocityCube cube;
    cube.grid = g;
    cube.rgrid = default_radial_grid();
    for (std::size_t i = 0; i < 140; ++i) cube.slices.emplace_back(g, std::vector<double>(12, double(i)));

    auto s20 = make_teacher_forced_samples(cube, 20);
    CHECK(s20.size() == 7);
    CHECK(s20.back().start == 120);
    CHECK(std::count(s20.back().valid_mask.begin(), s20.back().valid_mask.end(), true) == 19);
    CHECK(s20.back().target[18].values[0] == 139.0);
    for (std::size_t w = 0; w + 1 < s20.size(); ++w)
      CHECK(std::count(s20[w].valid_mask.begin(), s20[w].valid_mask.end(), false) == 0);

    auto s139 = make_teacher_forced_samples(cube, 139);
    CHECK(s139.size() == 1);
    CHECK(std::count(s139[0].valid_mask.begin(), s139[0].valid_mask.end(), true) == 139);

    auto s5 = make_teacher_forced_samples(cube, 5);
    CHECK(s5.size() == 28);
    CHECK(std::count(s5.back().valid_mask.begin(), s5.back().valid_mask.end(), true) == 4);
    for (std::size_t w = 0; w < s5.size(); ++w) {
      CHECK(s5[w].start == 5 * w);
      CHECK(s5[w].input.values[0] == double(5 * w));
      CHECK(s5[w].target[0].values[0] == double(5 * w + 1));
    }

    for (std::size_t h : {5u, 10u, 20u, 139u}) {
      std::size_t valid = 0;
      for (const auto& s : make_teacher_forced_samples(cube, h))
        valid += std::count(s.valid_mask.begin(), s.valid_mask.end(), true);
      CHECK(valid == 139);
    }

    const auto every = window_starts(140, 5, WindowMode::every_index);
    CHECK(every.size() == 139);
    CHECK(window_mask(140, 5, 137) == std::vector<bool>{true, true, false, false, false});

    cube.slices.pop_back();
    cube.rgrid.r.pop_back();
    CHECK_THROWS_AS(make_teacher_forced_samples(cube, 5), ShapeError);
  }

  TEST_CASE("adam") {
    AdamConfig cfg;
    std::vector<double> x{1.0, -2.0};
    std::vector<double> zero{0.0, 0.0};
    AdamState st;
    adam_step(x, zero, st, cfg);
    CHECK(x == std::vector<double>{1.0, -2.0});
    CHECK(st.step == 1);

    std::vector<double> y{0.5};
    AdamState s1;
    adam_step(y, std::vector<double>{1.0}, s1, cfg);
    CHECK(y[0] == doctest::Approx(0.5 - 8e-4).epsilon(1e-10));  // eps shaves ~1e-8 relative

    // f(x) = x^2 / 2 from x = 0.5.
    std::vector<double> q{0.5};
    AdamState s2;
    for (int k = 0; k < 2000; ++k) adam_step(q, std::vector<double>{q[0]}, s2, cfg);
    CHECK(std::abs(q[0]) < 1e-3);

    // Same run from x = 1 against a hand-written recurrence.
    double ref = 1.0, m = 0.0, v = 0.0;
    std::vector<double> w{1.0};
    AdamState s4;
    for (int t = 1; t <= 2000; ++t) {
      const double g = ref;
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      ref -= 8e-4 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
      adam_step(w, std::vector<double>{w[0]}, s4, cfg);
    }
    CHECK(w[0] == doctest::Approx(ref).epsilon(1e-9));
    CHECK(ref == doctest::Approx(0.0637523533).epsilon(1e-6));

    std::vector<double> z{1.0, 1.0};
    AdamState s3;
    CHECK_THROWS_AS(adam_step(z, std::vector<double>{0.1, std::nan("")}, s3, cfg), NumericError);
    CHECK(z == std::vector<double>{1.0, 1.0});
    CHECK(s3.step == 0);
  }

  TEST_CASE("train smoke, zero learning rate and determinism") {
    const auto data = generate_dataset(tiny_synth(1, 16));
    TrainConfig tc;
    tc.epochs = 50;
    tc.horizon = 5;
    tc.batch_size = 2;
    tc.learning_rate = 3e-3;
    const auto r = train(data, tc, tiny_model());
    CHECK(r.history.size() == 50);
    CHECK(r.history.back().train_loss < r.history.front().train_loss);
    CHECK(r.params.config().out_channels == 5);

    const auto r2 = train(data, tc, tiny_model());
    CHECK(std::equal(r.params.values().begin(), r.params.values().end(), r2.params.values().begin()));
    for (std::size_t e = 0; e < r.history.size(); ++e) {
      CHECK(r.history[e].train_loss == r2.history[e].train_loss);
      CHECK(r.history[e].val_loss == r2.history[e].val_loss);
    }

    tc.learning_rate = 0.0;
    tc.epochs = 5;
    const auto flat = train(data, tc, tiny_model());
    for (const auto& h : flat.history) CHECK(h.train_loss == flat.history.front().train_loss);
  }

  TEST_CASE("best checkpoint has the lowest validation loss") {
    const auto data = generate_dataset(tiny_synth(6));
    TrainConfig tc;
    tc.epochs = 15;
    tc.horizon = 4;
    tc.batch_size = 4;
    tc.learning_rate = 5e-3;
    tc.validation_fraction = 0.34;
    const auto r = train(data, tc, tiny_model());
    CHECK(r.val_cubes == 2);
    CHECK(r.train_cubes == 4);
    double best = 1e300;
    std::size_t arg = 0;
    for (const auto& h : r.history)
      if (h.val_loss < best) {
        best = h.val_loss;
        arg = h.epoch;
      }
    CHECK(r.best_epoch == arg);
    CHECK(r.best_val_loss == best);
    // The stored parameters reproduce the recorded validation loss.
    std::vector<VelocityCube> val;
    for (std::size_t i = 4; i < 6; ++i) val.push_back(normalize(data[i], r.bounds));
    CHECK(evaluate_teacher_forced(r.params, val, 4) == doctest::Approx(best).epsilon(1e-12));
  }

  TEST_CASE("divergence aborts with the epoch") {
    const auto data = generate_dataset(tiny_synth(1));
    TrainConfig tc;
    tc.epochs = 20;
    tc.horizon = 4;
    tc.learning_rate = 1e250;
    try {
      train(data, tc, tiny_model());
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.epoch() >= 1);
      CHECK(e.epoch() <= 20);
    }
  }

  TEST_CASE("folds") {
    const auto f = make_folds(5, 5, false, 0);
    for (std::size_t i = 0; i < 5; ++i) CHECK(f[i] == std::vector<std::size_t>{i});
    const auto c = make_folds(10, 5, false, 0);
    CHECK(c[1] == std::vector<std::size_t>{2, 3});
    CHECK(make_folds(10, 5, true, 9) == make_folds(10, 5, true, 9));
    CHECK_THROWS_AS(make_folds(4, 5, false, 0), ArgumentError);
  }

  TEST_CASE("cross validation selects the dominant candidate") {
    const auto data = generate_dataset(tiny_synth(5));
    TrainConfig tc;
    tc.epochs = 25;
    tc.horizon = 4;
    tc.batch_size = 4;
    tc.learning_rate = 5e-3;
    tc.validation_fraction = 0.0;
    OperatorConfig weak = tiny_model(1);
    weak.mlp_hidden_factor = 1.0;
    const std::vector<OperatorConfig> cands{weak, tiny_model(12)};
    const auto cv = cross_validate(data, cands, tc);
    CHECK(cv.folds.size() == 5);
    CHECK(cv.fold_mse.size() == 2);
    CHECK(cv.fold_mse[0].size() == 5);
    CHECK(cv.selected == 1);
    MESSAGE("cv mean mse: weak " << cv.mean_mse[0] << ", strong " << cv.mean_mse[1]);
  }
}
