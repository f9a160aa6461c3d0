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

// Spherical Fourier neural operator.
//
//   u_0     = E x + e                                   (pointwise encoder)
//   u_{b+1} = MLP_b( S^-1 ( W_b . S u_b ) ) + k_b * u_b   (block b)
//   y       = D u_L + d                                 (pointwise decoder)
//
// S is the spherical harmonic analysis, W_b a dense complex channel-mixing
// matrix per (l, m) mode, MLP_b a two-layer pointwise MLP and k_b a
// per-channel skip scale. The reverse pass is written by hand against this
// fixed graph.

#ifndef HELIOPROP_SFNO_HPP
#define HELIOPROP_SFNO_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "helioprop/sht.hpp"
#include "helioprop/sphere_grid.hpp"

namespace helioprop {

enum class Activation { gelu, relu };

struct OperatorConfig {
  std::size_t n_layers = 8;
  std::size_t hidden_channels = 256;
  std::size_t lmax = 110;
  std::size_t mmax = 64;
  std::size_t nlat = 111;
  std::size_t nlon = 128;
  std::size_t in_channels = 1;
  std::size_t out_channels = 139;
  double mlp_hidden_factor = 2.0;
  Activation activation = Activation::gelu;
  std::uint64_t seed = 0;

  std::size_t mlp_hidden() const;
  std::size_t mode_count() const { return spectral_mode_count(lmax, mmax); }
  void validate() const;
  bool operator==(const OperatorConfig&) const = default;
};

/// Total trainable scalars for cfg (complex weights count twice).
std::size_t param_count(const OperatorConfig& cfg);

/// Name, offset and extent of one tensor inside the flat parameter vector.
struct TensorSlot {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Offsets of every tensor. Order: encoder.weight, encoder.bias, then per
/// block spectral.re, spectral.im, mlp.w1, mlp.b1, mlp.w2, mlp.b2, skip,
/// then decoder.weight, decoder.bias.
///
/// spectral.{re,im} are indexed [mode][c_in][c_out]; pointwise weights are
/// [out][in].
class ParamLayout {
 public:
  explicit ParamLayout(const OperatorConfig& cfg);

  struct Block {
    TensorSlot spectral_re, spectral_im, w1, b1, w2, b2, skip;
  };

  TensorSlot encoder_weight, encoder_bias, decoder_weight, decoder_bias;
  std::vector<Block> blocks;

  std::size_t total() const noexcept { return total_; }
  /// Every slot in storage order.
  std::vector<TensorSlot> slots() const;

 private:
  std::size_t total_ = 0;
};

/// All trainable tensors, stored flat. Any mutable access bumps generation(),
/// which invalidates outstanding ForwardTapes.
class OperatorParams {
 public:
  OperatorParams() = default;
  explicit OperatorParams(const OperatorConfig& cfg);

  const OperatorConfig& config() const noexcept { return cfg_; }
  const ParamLayout& layout() const { return *layout_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> mutable_values();
  std::span<const double> tensor(const TensorSlot& slot) const;
  std::span<double> mutable_tensor(const TensorSlot& slot);
  std::uint64_t generation() const noexcept { return generation_; }

 private:
  void touch();

  OperatorConfig cfg_;
  std::shared_ptr<const ParamLayout> layout_;
  std::vector<double> data_;
  std::uint64_t generation_ = 0;
};

/// Seeded initialisation: pointwise weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
/// spectral weights complex Gaussian with std 1/hidden_channels, biases 0,
/// skip scales 1.
OperatorParams init_params(const OperatorConfig& cfg);

/// C channels on the operator grid, channel-major then row-major.
struct ChannelStack {
  std::size_t channels = 0;
  std::size_t points = 0;
  std::vector<double> data;

  ChannelStack() = default;
  ChannelStack(std::size_t c, std::size_t p) : channels(c), points(p), data(c * p, 0.0) {}
  std::span<double> channel(std::size_t c) { return {data.data() + c * points, points}; }
  std::span<const double> channel(std::size_t c) const { return {data.data() + c * points, points}; }
};

/// Recorded activations of one forward call, enough for an exact reverse pass.
struct ForwardTape {
  struct Sample {
    ChannelStack input;
    std::vector<ChannelStack> hidden;    // u_0 .. u_L
    std::vector<ChannelStack> coeff_re;  // S u_b, channels x modes
    std::vector<ChannelStack> coeff_im;
    std::vector<ChannelStack> spectral;  // S^-1 W S u_b
    std::vector<ChannelStack> pre_act;   // W1 s + b1
    ChannelStack output;
  };

  OperatorConfig config;
  std::uint64_t generation = 0;
  std::vector<Sample> samples;
};

struct ForwardResult {
  std::vector<ChannelStack> outputs;
  std::optional<ForwardTape> tape;
};

/// Evaluates the operator on a batch of in_channels-channel inputs.
/// Throws ShapeError on grid mismatch, NumericError naming the block that
/// produced a non-finite value.
ForwardResult forward(const OperatorParams& params, std::span<const ChannelStack> inputs, bool record = false);

/// Single-sample convenience wrapper.
ChannelStack forward_one(const OperatorParams& params, const ChannelStack& input);

struct Gradients {
  std::vector<double> params;              // same layout as OperatorParams
  std::vector<ChannelStack> inputs;        // one per sample
};

/// Reverse pass of a recorded forward call. output_grads holds dL/dy per
/// sample. Parameter gradients are summed over the batch in sample order.
/// Throws TapeError when tape was not recorded against params' current
/// generation.
Gradients backward(const OperatorParams& params, const ForwardTape& tape, std::span<const ChannelStack> output_grads);

/// Spectral convolution of one block in isolation: S^-1 (W_b . S u).
ChannelStack spectral_convolution(const OperatorParams& params, std::size_t block, const ChannelStack& u);

/// Wraps a velocity map (already normalised) as a one-channel stack.
ChannelStack to_channel_stack(const VelocityMap& map);

}  // namespace helioprop

#endif  // HELIOPROP_SFNO_HPP
