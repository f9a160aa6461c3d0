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

#include "helioprop/sfno.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>

#include "helioprop/errors.hpp"
#include "helioprop/parallel.hpp"

namespace helioprop {

std::size_t OperatorConfig::mlp_hidden() const {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(mlp_hidden_factor * static_cast<double>(hidden_channels))));
}

void OperatorConfig::validate() const {
  if (n_layers == 0) throw ArgumentError("operator config: n_layers must be >= 1");
  if (hidden_channels == 0 || in_channels == 0 || out_channels == 0) {
    throw ArgumentError("operator config: channel counts must be positive");
  }
  if (!(mlp_hidden_factor > 0.0)) throw ArgumentError("operator config: mlp_hidden_factor must be positive");
  if (lmax < mmax) throw BandLimitError("operator config: lmax must be >= mmax");
  if (nlat < lmax + 1 || nlon < 2 * mmax) throw BandLimitError("operator config: grid too small for band limit");
  if (nlat < 2 || nlon < 2 || nlon % 2 != 0) throw ArgumentError("operator config: invalid grid size");
}

std::size_t param_count(const OperatorConfig& cfg) {
  const std::size_t c = cfg.hidden_channels;
  const std::size_t f = cfg.mlp_hidden();
  const std::size_t per_block = 2 * cfg.mode_count() * c * c + (f * c + f) + (c * f + c) + c;
  return (c * cfg.in_channels + c) + cfg.n_layers * per_block + (cfg.out_channels * c + cfg.out_channels);
}

ParamLayout::ParamLayout(const OperatorConfig& cfg) {
  const std::size_t c = cfg.hidden_channels;
  const std::size_t f = cfg.mlp_hidden();
  const std::size_t k = cfg.mode_count();
  auto take = [this](std::string name, std::size_t n) {
    TensorSlot s{std::move(name), total_, n};
    total_ += n;
    return s;
  };
  encoder_weight = take("encoder.weight", c * cfg.in_channels);
  encoder_bias = take("encoder.bias", c);
  for (std::size_t b = 0; b < cfg.n_layers; ++b) {
    const std::string p = "blocks." + std::to_string(b) + ".";
    Block blk;
    blk.spectral_re = take(p + "spectral.re", k * c * c);
    blk.spectral_im = take(p + "spectral.im", k * c * c);
    blk.w1 = take(p + "mlp.w1", f * c);
    blk.b1 = take(p + "mlp.b1", f);
    blk.w2 = take(p + "mlp.w2", c * f);
    blk.b2 = take(p + "mlp.b2", c);
    blk.skip = take(p + "skip", c);
    blocks.push_back(std::move(blk));
  }
  decoder_weight = take("decoder.weight", cfg.out_channels * c);
  decoder_bias = take("decoder.bias", cfg.out_channels);
}

std::vector<TensorSlot> ParamLayout::slots() const {
  std::vector<TensorSlot> out{encoder_weight, encoder_bias};
  for (const auto& b : blocks) {
    for (const auto* s : {&b.spectral_re, &b.spectral_im, &b.w1, &b.b1, &b.w2, &b.b2, &b.skip}) out.push_back(*s);
  }
  out.push_back(decoder_weight);
  out.push_back(decoder_bias);
  return out;
}

namespace {

std::uint64_t next_generation() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

}  // namespace

OperatorParams::OperatorParams(const OperatorConfig& cfg)
    : cfg_(cfg), layout_(std::make_shared<const ParamLayout>(cfg)), generation_(next_generation()) {
  cfg_.validate();
  data_.assign(layout_->total(), 0.0);
}

void OperatorParams::touch() { generation_ = next_generation(); }

std::span<double> OperatorParams::mutable_values() {
  touch();
  return data_;
}

std::span<const double> OperatorParams::tensor(const TensorSlot& slot) const {
  return {data_.data() + slot.offset, slot.size};
}

std::span<double> OperatorParams::mutable_tensor(const TensorSlot& slot) {
  touch();
  return {data_.data() + slot.offset, slot.size};
}

OperatorParams init_params(const OperatorConfig& cfg) {
  OperatorParams params(cfg);
  std::mt19937_64 rng(cfg.seed);
  const auto& lay = params.layout();
  auto uniform_fill = [&](const TensorSlot& slot, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : params.mutable_tensor(slot)) w = dist(rng);
  };
  const double spectral_std = 1.0 / static_cast<double>(cfg.hidden_channels);
  std::normal_distribution<double> normal(0.0, spectral_std / std::numbers::sqrt2);

  uniform_fill(lay.encoder_weight, cfg.in_channels);
  for (const auto& b : lay.blocks) {
    auto re = params.mutable_tensor(b.spectral_re);
    auto im = params.mutable_tensor(b.spectral_im);
    for (std::size_t i = 0; i < re.size(); ++i) {
      re[i] = normal(rng);
      im[i] = normal(rng);
    }
    uniform_fill(b.w1, cfg.hidden_channels);
    uniform_fill(b.w2, cfg.mlp_hidden());
    for (double& s : params.mutable_tensor(b.skip)) s = 1.0;
  }
  uniform_fill(lay.decoder_weight, cfg.hidden_channels);
  return params;
}

namespace {

// out[o][p] = b[o] + sum_i W[o][i] in[i][p]
void pointwise(std::span<const double> w, std::span<const double> b, const ChannelStack& in, ChannelStack& out) {
  const std::size_t np = in.points;
  for (std::size_t o = 0; o < out.channels; ++o) {
    double* dst = out.data.data() + o * np;
    std::fill(dst, dst + np, b[o]);
    for (std::size_t i = 0; i < in.channels; ++i) {
      const double wi = w[o * in.channels + i];
      if (wi == 0.0) continue;
      const double* src = in.data.data() + i * np;
      for (std::size_t p = 0; p < np; ++p) dst[p] += wi * src[p];
    }
  }
}

// Accumulates dW, db and (optionally) din for out = W in + b.
void pointwise_backward(std::span<const double> w, const ChannelStack& in, const ChannelStack& dout,
                        double* dw, double* db, ChannelStack* din) {
  const std::size_t np = in.points;
  for (std::size_t o = 0; o < dout.channels; ++o) {
    const double* g = dout.data.data() + o * np;
    double sb = 0.0;
    for (std::size_t p = 0; p < np; ++p) sb += g[p];
    db[o] += sb;
    for (std::size_t i = 0; i < in.channels; ++i) {
      const double* x = in.data.data() + i * np;
      double s = 0.0;
      for (std::size_t p = 0; p < np; ++p) s += g[p] * x[p];
      dw[o * in.channels + i] += s;
    }
  }
  if (din) {
    for (std::size_t i = 0; i < in.channels; ++i) {
      double* dst = din->data.data() + i * np;
      for (std::size_t o = 0; o < dout.channels; ++o) {
        const double wi = w[o * in.channels + i];
        const double* g = dout.data.data() + o * np;
        for (std::size_t p = 0; p < np; ++p) dst[p] += wi * g[p];
      }
    }
  }
}

double activate(Activation a, double x) {
  if (a == Activation::relu) return x > 0.0 ? x : 0.0;
  return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
}

double activate_grad(Activation a, double x) {
  if (a == Activation::relu) return x > 0.0 ? 1.0 : 0.0;
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

// out[co][k] = sum_ci W[k][ci][co] * a[ci][k]   (complex)
void spectral_mix(std::span<const double> wr, std::span<const double> wi, const ChannelStack& ar,
                  const ChannelStack& ai, ChannelStack& outr, ChannelStack& outi) {
  const std::size_t c = ar.channels;
  const std::size_t nk = ar.points;
  std::vector<double> accr(c);
  std::vector<double> acci(c);
  for (std::size_t k = 0; k < nk; ++k) {
    std::fill(accr.begin(), accr.end(), 0.0);
    std::fill(acci.begin(), acci.end(), 0.0);
    for (std::size_t ci = 0; ci < c; ++ci) {
      const double xr = ar.data[ci * nk + k];
      const double xi = ai.data[ci * nk + k];
      const double* rr = wr.data() + (k * c + ci) * c;
      const double* ii = wi.data() + (k * c + ci) * c;
      for (std::size_t co = 0; co < c; ++co) {
        accr[co] += rr[co] * xr - ii[co] * xi;
        acci[co] += rr[co] * xi + ii[co] * xr;
      }
    }
    for (std::size_t co = 0; co < c; ++co) {
      outr.data[co * nk + k] = accr[co];
      outi.data[co * nk + k] = acci[co];
    }
  }
}

void check_finite(const ChannelStack& s, const std::string& where) {
  for (double v : s.data) {
    if (!std::isfinite(v)) throw NumericError("sfno forward: non-finite value in " + where);
  }
}

struct SpectralPath {
  ChannelStack re, im, mixed_re, mixed_im, field;
};

SpectralPath run_spectral(const SphericalTransform& sht, const OperatorParams& params,
                          const ParamLayout::Block& blk, const ChannelStack& u) {
  const std::size_t c = u.channels;
  const std::size_t nk = sht.mode_count();
  SpectralPath s{ChannelStack(c, nk), ChannelStack(c, nk), ChannelStack(c, nk), ChannelStack(c, nk),
                 ChannelStack(c, u.points)};
  for (std::size_t ch = 0; ch < c; ++ch) sht.analysis(u.channel(ch), s.re.channel(ch), s.im.channel(ch));
  spectral_mix(params.tensor(blk.spectral_re), params.tensor(blk.spectral_im), s.re, s.im, s.mixed_re, s.mixed_im);
  for (std::size_t ch = 0; ch < c; ++ch) {
    sht.synthesis(s.mixed_re.channel(ch), s.mixed_im.channel(ch), s.field.channel(ch));
  }
  return s;
}

ForwardTape::Sample run_sample(const SphericalTransform& sht, const OperatorParams& params, const ChannelStack& x,
                               bool record) {
  const auto& cfg = params.config();
  const auto& lay = params.layout();
  const std::size_t np = x.points;
  const std::size_t c = cfg.hidden_channels;
  const std::size_t f = cfg.mlp_hidden();

  ForwardTape::Sample rec;
  ChannelStack u(c, np);
  pointwise(params.tensor(lay.encoder_weight), params.tensor(lay.encoder_bias), x, u);
  check_finite(u, "encoder");

  for (std::size_t b = 0; b < cfg.n_layers; ++b) {
    const auto& blk = lay.blocks[b];
    SpectralPath sp = run_spectral(sht, params, blk, u);
    ChannelStack h(f, np);
    pointwise(params.tensor(blk.w1), params.tensor(blk.b1), sp.field, h);
    ChannelStack g(f, np);
    for (std::size_t i = 0; i < h.data.size(); ++i) g.data[i] = activate(cfg.activation, h.data[i]);
    ChannelStack next(c, np);
    pointwise(params.tensor(blk.w2), params.tensor(blk.b2), g, next);
    const auto skip = params.tensor(blk.skip);
    for (std::size_t ch = 0; ch < c; ++ch) {
      double* dst = next.data.data() + ch * np;
      const double* src = u.data.data() + ch * np;
      for (std::size_t p = 0; p < np; ++p) dst[p] += skip[ch] * src[p];
    }
    check_finite(next, "block " + std::to_string(b));
    if (record) {
      rec.hidden.push_back(std::move(u));
      rec.coeff_re.push_back(std::move(sp.re));
      rec.coeff_im.push_back(std::move(sp.im));
      rec.spectral.push_back(std::move(sp.field));
      rec.pre_act.push_back(std::move(h));
    }
    u = std::move(next);
  }

  ChannelStack y(cfg.out_channels, np);
  pointwise(params.tensor(lay.decoder_weight), params.tensor(lay.decoder_bias), u, y);
  check_finite(y, "decoder");
  if (record) {
    rec.hidden.push_back(std::move(u));
    rec.input = x;
  }
  rec.output = std::move(y);
  return rec;
}

void check_input(const OperatorConfig& cfg, const ChannelStack& x) {
  if (x.channels != cfg.in_channels || x.points != cfg.nlat * cfg.nlon || x.data.size() != x.channels * x.points) {
    throw ShapeError("sfno forward: input shape does not match operator grid/channels");
  }
}

}  // namespace

ForwardResult forward(const OperatorParams& params, std::span<const ChannelStack> inputs, bool record) {
  const auto& cfg = params.config();
  for (const auto& x : inputs) check_input(cfg, x);
  const auto sht = shared_transform(shared_gauss_legendre_grid(cfg.nlat, cfg.nlon), cfg.lmax, cfg.mmax);

  std::vector<ForwardTape::Sample> samples(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) { samples[i] = run_sample(*sht, params, inputs[i], record); });

  ForwardResult result;
  result.outputs.reserve(samples.size());
  if (record) {
    ForwardTape tape;
    tape.config = cfg;
    tape.generation = params.generation();
    for (auto& s : samples) result.outputs.push_back(s.output);
    tape.samples = std::move(samples);
    result.tape = std::move(tape);
  } else {
    for (auto& s : samples) result.outputs.push_back(std::move(s.output));
  }
  return result;
}

ChannelStack forward_one(const OperatorParams& params, const ChannelStack& input) {
  return std::move(forward(params, std::span<const ChannelStack>(&input, 1)).outputs.front());
}

namespace {

void backward_sample(const SphericalTransform& sht, const OperatorParams& params, const ForwardTape::Sample& rec,
                     const ChannelStack& dy, std::span<double> grad, ChannelStack& dx) {
  const auto& cfg = params.config();
  const auto& lay = params.layout();
  const std::size_t np = rec.input.points;
  const std::size_t c = cfg.hidden_channels;
  const std::size_t f = cfg.mlp_hidden();
  const std::size_t nk = sht.mode_count();
  double* g0 = grad.data();

  ChannelStack du(c, np);
  pointwise_backward(params.tensor(lay.decoder_weight), rec.hidden.back(), dy, g0 + lay.decoder_weight.offset,
                     g0 + lay.decoder_bias.offset, &du);

  for (std::size_t bi = cfg.n_layers; bi-- > 0;) {
    const auto& blk = lay.blocks[bi];
    const ChannelStack& u = rec.hidden[bi];
    const ChannelStack& s = rec.spectral[bi];
    const ChannelStack& h = rec.pre_act[bi];

    // skip path
    ChannelStack du_prev(c, np);
    const auto skip = params.tensor(blk.skip);
    double* dskip = g0 + blk.skip.offset;
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* g = du.data.data() + ch * np;
      const double* x = u.data.data() + ch * np;
      double* d = du_prev.data.data() + ch * np;
      double acc = 0.0;
      for (std::size_t p = 0; p < np; ++p) {
        acc += g[p] * x[p];
        d[p] = skip[ch] * g[p];
      }
      dskip[ch] += acc;
    }

    // MLP
    ChannelStack act(f, np);
    for (std::size_t i = 0; i < h.data.size(); ++i) act.data[i] = activate(cfg.activation, h.data[i]);
    ChannelStack dact(f, np);
    pointwise_backward(params.tensor(blk.w2), act, du, g0 + blk.w2.offset, g0 + blk.b2.offset, &dact);
    for (std::size_t i = 0; i < h.data.size(); ++i) dact.data[i] *= activate_grad(cfg.activation, h.data[i]);
    ChannelStack ds(c, np);
    pointwise_backward(params.tensor(blk.w1), s, dact, g0 + blk.w1.offset, g0 + blk.b1.offset, &ds);

    // spectral path
    ChannelStack dmr(c, nk);
    ChannelStack dmi(c, nk);
    for (std::size_t ch = 0; ch < c; ++ch) sht.synthesis_adjoint(ds.channel(ch), dmr.channel(ch), dmi.channel(ch));

    const auto wr = params.tensor(blk.spectral_re);
    const auto wi = params.tensor(blk.spectral_im);
    double* dwr = g0 + blk.spectral_re.offset;
    double* dwi = g0 + blk.spectral_im.offset;
    const ChannelStack& ar = rec.coeff_re[bi];
    const ChannelStack& ai = rec.coeff_im[bi];
    ChannelStack dar(c, nk);
    ChannelStack dai(c, nk);
    for (std::size_t k = 0; k < nk; ++k) {
      for (std::size_t ci = 0; ci < c; ++ci) {
        const double xr = ar.data[ci * nk + k];
        const double xi = ai.data[ci * nk + k];
        const std::size_t row = (k * c + ci) * c;
        double accr = 0.0;
        double acci = 0.0;
        for (std::size_t co = 0; co < c; ++co) {
          const double gr = dmr.data[co * nk + k];
          const double gi = dmi.data[co * nk + k];
          // dW = g * conj(x), dx = g * conj(W)
          dwr[row + co] += gr * xr + gi * xi;
          dwi[row + co] += gi * xr - gr * xi;
          accr += gr * wr[row + co] + gi * wi[row + co];
          acci += gi * wr[row + co] - gr * wi[row + co];
        }
        dar.data[ci * nk + k] = accr;
        dai.data[ci * nk + k] = acci;
      }
    }
    std::vector<double> tmp(np);
    for (std::size_t ch = 0; ch < c; ++ch) {
      sht.analysis_adjoint(dar.channel(ch), dai.channel(ch), tmp);
      double* d = du_prev.data.data() + ch * np;
      for (std::size_t p = 0; p < np; ++p) d[p] += tmp[p];
    }
    du = std::move(du_prev);
  }

  dx = ChannelStack(cfg.in_channels, np);
  pointwise_backward(params.tensor(lay.encoder_weight), rec.input, du, g0 + lay.encoder_weight.offset,
                     g0 + lay.encoder_bias.offset, &dx);
}

}  // namespace

Gradients backward(const OperatorParams& params, const ForwardTape& tape, std::span<const ChannelStack> output_grads) {
  const auto& cfg = params.config();
  if (tape.generation != params.generation() || !(tape.config == cfg)) {
    throw TapeError("sfno backward: tape was recorded against different or since-modified parameters");
  }
  if (tape.samples.size() != output_grads.size()) throw ShapeError("sfno backward: batch size mismatch");
  for (std::size_t i = 0; i < output_grads.size(); ++i) {
    const auto& g = output_grads[i];
    if (g.channels != cfg.out_channels || g.points != cfg.nlat * cfg.nlon) {
      throw ShapeError("sfno backward: output gradient shape mismatch");
    }
    if (tape.samples[i].hidden.size() != cfg.n_layers + 1) throw TapeError("sfno backward: tape holds no record");
  }
  const auto sht = shared_transform(shared_gauss_legendre_grid(cfg.nlat, cfg.nlon), cfg.lmax, cfg.mmax);
  const std::size_t n = output_grads.size();
  const std::size_t total = params.layout().total();

  // Samples are accumulated in fixed-size groups so the summation order does
  // not depend on the worker count.
  constexpr std::size_t kGroup = 4;
  if (n == 0) return Gradients{std::vector<double>(total, 0.0), {}};
  const std::size_t ngroups = (n + kGroup - 1) / kGroup;
  std::vector<std::vector<double>> partial(ngroups, std::vector<double>(total, 0.0));
  Gradients out;
  out.inputs.resize(n);
  parallel_for(ngroups, [&](std::size_t grp) {
    for (std::size_t i = grp * kGroup; i < std::min(n, (grp + 1) * kGroup); ++i) {
      backward_sample(*sht, params, tape.samples[i], output_grads[i], partial[grp], out.inputs[i]);
    }
  });
  out.params = std::move(partial.front());
  for (std::size_t grp = 1; grp < ngroups; ++grp) {
    for (std::size_t j = 0; j < total; ++j) out.params[j] += partial[grp][j];
  }
  return out;
}

ChannelStack spectral_convolution(const OperatorParams& params, std::size_t block, const ChannelStack& u) {
  const auto& cfg = params.config();
  if (block >= cfg.n_layers) throw ArgumentError("spectral_convolution: block index out of range");
  if (u.channels != cfg.hidden_channels || u.points != cfg.nlat * cfg.nlon) {
    throw ShapeError("spectral_convolution: input shape mismatch");
  }
  const auto sht = shared_transform(shared_gauss_legendre_grid(cfg.nlat, cfg.nlon), cfg.lmax, cfg.mmax);
  return run_spectral(*sht, params, params.layout().blocks[block], u).field;
}

ChannelStack to_channel_stack(const VelocityMap& map) {
  ChannelStack s(1, map.values.size());
  s.data = map.values;
  return s;
}

}  // namespace helioprop
