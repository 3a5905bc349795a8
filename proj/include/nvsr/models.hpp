// Copyright (c) 2026 The nvsr Authors. All Rights Reserved.
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

#pragma once

// Video representation networks: a NeRV-style decoder driven by a positional
// encoding of the frame time (or, for the hnerv variants, by a learned frame
// embedding), optionally followed by a 2x super-resolution block.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nvsr/media.hpp"
#include "nvsr/optim.hpp"
#include "nvsr/random.hpp"
#include "nvsr/tensor.hpp"

namespace nvsr {

enum class Variant { nerv, hnerv, sr_nerv, sr_hnerv };

std::string_view variant_name(Variant v);
/// Accepts "nerv", "hnerv", "sr-nerv", "sr-hnerv"; anything else is a ConfigError.
Variant parse_variant(std::string_view name);
inline bool is_sr(Variant v) { return v == Variant::sr_nerv || v == Variant::sr_hnerv; }
inline bool uses_encoder(Variant v) { return v == Variant::hnerv || v == Variant::sr_hnerv; }

struct PositionalEncodingConfig {
  double freq_base = 1.25;
  int num_freqs = 8;
  bool operator==(const PositionalEncodingConfig&) const = default;
};

/// hnerv variants: the frame embedding has `channels` planes on the decoder's
/// input grid. The encoder uses `encoder_width` channels in every stage.
struct EmbeddingConfig {
  int channels = 16;
  int encoder_width = 16;
  bool operator==(const EmbeddingConfig&) const = default;
};

struct SrbConfig {
  int channels = 8;
  int num_res_blocks = 2;
  int scale = 2;  // only 2 is supported
  bool operator==(const SrbConfig&) const = default;
};

struct ModelConfig {
  Variant variant = Variant::nerv;
  std::vector<int> strides{4, 2, 2, 2};
  /// Width of the stem output; stage i emits max(floor(base / decay^(i+1)), min_width).
  int base_width = 32;
  double width_decay = 2.0;
  int min_width = 8;
  /// Overrides the last stage's width when nonzero (fine budget knob).
  int final_width = 0;
  int stem_hidden = 32;
  PositionalEncodingConfig pe;
  EmbeddingConfig embedding;
  SrbConfig srb;
  int output_h = 64;
  int output_w = 128;

  /// Throws ConfigError.
  void validate() const;

  int decoder_upsampling() const;
  /// Decoder upsampling times the SR factor for SR variants.
  int total_upsampling() const;
  /// Decoder input grid (h0, w0).
  int grid_h() const { return output_h / total_upsampling(); }
  int grid_w() const { return output_w / total_upsampling(); }
  int decoder_out_h() const { return grid_h() * decoder_upsampling(); }
  int decoder_out_w() const { return grid_w() * decoder_upsampling(); }
  /// Output channels of each decoder stage.
  std::vector<int> stage_widths() const;
  /// Channels entering the first stage: base_width, or the embedding channels.
  int stage_input_width() const;
  /// Strides of the hnerv encoder, coarsest last; their product is total_upsampling().
  std::vector<int> encoder_strides() const;

  bool operator==(const ModelConfig&) const = default;
};

/// Small configurations for 64x128 clips on a CPU.
ModelConfig desk_config(Variant v);
/// 640x1280 configurations with the reference stride lists.
ModelConfig full_scale_config(Variant v);

/// Throws ConfigError unless `baseline` and `sr` are a baseline/SR pair with
/// equal output size and product(baseline strides) == 2 * product(sr strides).
void check_matched_pair(const ModelConfig& baseline, const ModelConfig& sr);

/// The other member of a matched pair. The SR variant halves the last
/// stride of 4; the baseline doubles the first stride of 2, so
/// nerv [5,4,2,2] <-> sr-nerv [5,2,2,2] and hnerv [5,4,4,2,2] <->
/// sr-hnerv [5,4,2,2,2]. Throws ConfigError when no such stride exists.
ModelConfig matched_counterpart(const ModelConfig& config);

/// [sin(b^0 pi t), cos(b^0 pi t), ..., sin(b^(l-1) pi t), cos(b^(l-1) pi t)].
std::vector<double> positional_encode(double t, const PositionalEncodingConfig& pe);

template <typename T>
using NamedTensors = std::vector<std::pair<std::string, Tensor<T>>>;

template <typename T>
struct Conv2d {
  Tensor<T> weight;  // [out, in, k, k]
  Tensor<T> bias;    // [out]
  std::size_t stride = 1;
  std::size_t padding = 0;

  /// Weights and bias uniform in +-1/sqrt(fan_in).
  static Conv2d make(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride,
                     std::size_t padding, Rng& rng);
  Tensor<T> operator()(const Tensor<T>& x) const { return conv2d(x, weight, bias, stride, padding); }
  void zero();
  std::size_t param_count() const { return weight.numel() + bias.numel(); }
  void collect(const std::string& prefix, NamedTensors<T>& out) const;
};

template <typename T>
class NervDecoder {
 public:
  NervDecoder(const ModelConfig& config, Rng& rng);

  /// `input` is [1, 2l, 1, 1] (nerv) or the embedding [1, E, h0, w0] (hnerv).
  /// Returns [1, 3, H_dec, W_dec] in (0, 1).
  Tensor<T> forward(const Tensor<T>& input) const;
  void collect(const std::string& prefix, NamedTensors<T>& out) const;

 private:
  bool has_stem_ = false;
  std::size_t base_ = 0, grid_h_ = 0, grid_w_ = 0, input_channels_ = 0;
  Conv2d<T> stem_hidden_, stem_out_;
  std::vector<Conv2d<T>> stages_;
  std::vector<std::size_t> strides_;
  Conv2d<T> head_;
};

template <typename T>
class HnervEncoder {
 public:
  HnervEncoder(const ModelConfig& config, Rng& rng);

  /// [1, 3, H, W] -> [1, E, h0, w0].
  Tensor<T> forward(const Tensor<T>& frame) const;
  void collect(const std::string& prefix, NamedTensors<T>& out) const;

 private:
  std::size_t height_ = 0, width_ = 0;
  std::vector<Conv2d<T>> stages_;
  Conv2d<T> project_;
};

/// 2x super-resolution block: head conv, residual blocks, body conv with a
/// long skip, conv + pixel shuffle upsampler and a tail conv whose output is
/// added to logit(nearest-neighbour 2x of the input) before a sigmoid.
/// The tail and each block's second conv start at zero, so a fresh block
/// reproduces the nearest-neighbour upsample.
template <typename T>
class SRModel {
 public:
  static constexpr T kLogitEps = T(1e-3);

  SRModel(const SrbConfig& config, Rng& rng);

  /// [1, 3, h, w] or [3, h, w] -> [1, 3, 2h, 2w] in (0, 1).
  Tensor<T> forward(const Tensor<T>& x) const;
  const SrbConfig& config() const { return config_; }
  void collect(const std::string& prefix, NamedTensors<T>& out) const;
  std::vector<Tensor<T>> parameters() const;
  /// Copies values from a model with the same configuration.
  void copy_from(const SRModel& other);

 private:
  struct ResBlock {
    Conv2d<T> first, second;
  };
  SrbConfig config_;
  Conv2d<T> head_;
  std::vector<ResBlock> blocks_;
  Conv2d<T> body_, upsample_, tail_;
};

struct ParamCount {
  std::size_t decoder = 0;
  std::size_t srb = 0;
  std::size_t encoder = 0;
  /// Stored frame embeddings (hnerv variants, clip length known).
  std::size_t embedding = 0;

  /// decoder + srb; encoder and embeddings are reported separately.
  std::size_t total() const { return decoder + srb; }
  bool operator==(const ParamCount&) const = default;
};

/// Decoder, optional encoder and optional SR block for one configuration.
template <typename T>
class VideoModel {
 public:
  VideoModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  /// Final output [1, 3, output_h, output_w]. hnerv variants need `source`
  /// (the frame to encode); the others use only `t`.
  Tensor<T> forward(double t, const Frame* source = nullptr) const;
  /// Decoder output before the SR block.
  Tensor<T> decode(double t, const Frame* source = nullptr) const;

  NervDecoder<T>& decoder() { return *decoder_; }
  SRModel<T>* srb() { return srb_ ? &*srb_ : nullptr; }
  const SRModel<T>* srb() const { return srb_ ? &*srb_ : nullptr; }
  HnervEncoder<T>* encoder() { return encoder_ ? &*encoder_ : nullptr; }

  /// "decoder" and, where present, "encoder" and "srb".
  std::vector<ParamGroup<T>> param_groups() const;
  NamedTensors<T> named_parameters() const;

 private:
  ModelConfig config_;
  std::optional<NervDecoder<T>> decoder_;
  std::optional<HnervEncoder<T>> encoder_;
  std::optional<SRModel<T>> srb_;
};

/// Model output for frame k of `clip` (the clip supplies t, or the frame to
/// encode for hnerv variants). Throws InvalidShape on a size mismatch.
template <typename T>
Frame reconstruct_frame(const VideoModel<T>& model, const VideoClip& clip, std::size_t k);
template <typename T>
Frame reconstruct_frame(const VideoModel<T>& model, double t);

/// Counts the tensors of a built model.
template <typename T>
ParamCount param_count(const VideoModel<T>& model, std::size_t num_frames = 0);
/// Closed-form count for a configuration; equals param_count of the built model.
ParamCount estimate_params(const ModelConfig& config, std::size_t num_frames = 0);
std::size_t srb_param_count(const SrbConfig& config);

/// Largest base_width with total params <= 1.02 * budget (SR block fixed).
/// Throws InfeasibleBudget if width 4 already exceeds it.
int solve_width_for_budget(const ModelConfig& config, std::size_t budget);

/// Solves base_width, then raises the last stage's width (up to the width of
/// the stage before it) as far as the same bound allows. This closes most of
/// the gap left by the coarse base_width steps.
ModelConfig fit_to_budget(ModelConfig config, std::size_t budget);

}  // namespace nvsr
