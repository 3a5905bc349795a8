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

#include "nvsr/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nvsr/error.hpp"

namespace nvsr {

namespace {

constexpr int kMinSolvedWidth = 4;
constexpr int kMaxSolvedWidth = 8192;
constexpr double kBudgetSlack = 1.02;

int product(const std::vector<int>& v) {
  long long p = 1;
  for (int s : v) p *= s;
  return int(p);
}

std::string strides_str(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "]";
}

std::size_t conv_params(std::size_t in, std::size_t out, std::size_t k) { return in * out * k * k + out; }

std::size_t encoder_kernel(int stride) { return std::size_t(stride % 2 ? stride : stride + 1); }

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::nerv: return "nerv";
    case Variant::hnerv: return "hnerv";
    case Variant::sr_nerv: return "sr-nerv";
    case Variant::sr_hnerv: return "sr-hnerv";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::nerv, Variant::hnerv, Variant::sr_nerv, Variant::sr_hnerv})
    if (variant_name(v) == name) return v;
  throw ConfigError("unknown model variant '" + std::string(name) + "' (expected nerv, hnerv, sr-nerv or sr-hnerv)");
}

void ModelConfig::validate() const {
  if (strides.empty()) throw ConfigError("model.strides must not be empty");
  for (int s : strides)
    if (s < 1 || s > 16) throw ConfigError("model.strides entries must lie in [1,16], got " + strides_str(strides));
  if (base_width < 1) throw ConfigError("model.base_width must be positive");
  if (!(width_decay >= 1.0)) throw ConfigError("model.width_decay must be >= 1");
  if (min_width < 1) throw ConfigError("model.min_width must be positive");
  if (final_width < 0) throw ConfigError("model.final_width must be >= 0");
  if (stem_hidden < 1) throw ConfigError("model.stem_hidden must be positive");
  if (pe.num_freqs < 1 || !(pe.freq_base > 0)) throw ConfigError("model.pe needs num_freqs >= 1 and freq_base > 0");
  if (embedding.channels < 1 || embedding.encoder_width < 1)
    throw ConfigError("model.embedding channels and encoder width must be positive");
  if (srb.scale != 2) throw ConfigError("model.srb.scale must be 2");
  if (srb.channels < 1 || srb.num_res_blocks < 0) throw ConfigError("model.srb needs channels >= 1, blocks >= 0");
  if (output_h < 1 || output_w < 1) throw ConfigError("model.output size must be positive");
  const int up = total_upsampling();
  if (output_h % up || output_w % up)
    throw ConfigError("output " + std::to_string(output_h) + "x" + std::to_string(output_w) +
                      " is not divisible by the total upsampling factor " + std::to_string(up) + " of strides " +
                      strides_str(strides));
}

int ModelConfig::decoder_upsampling() const { return product(strides); }

int ModelConfig::total_upsampling() const { return decoder_upsampling() * (is_sr(variant) ? srb.scale : 1); }

std::vector<int> ModelConfig::stage_widths() const {
  std::vector<int> w(strides.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double v = std::floor(double(base_width) / std::pow(width_decay, double(i + 1)) + 1e-9);
    w[i] = std::max(int(v), min_width);
  }
  if (final_width > 0) w.back() = final_width;
  return w;
}

int ModelConfig::stage_input_width() const { return uses_encoder(variant) ? embedding.channels : base_width; }

std::vector<int> ModelConfig::encoder_strides() const {
  std::vector<int> s(strides.rbegin(), strides.rend());
  if (is_sr(variant)) s.insert(s.begin(), srb.scale);
  return s;
}

ModelConfig desk_config(Variant v) {
  ModelConfig c;
  c.variant = v;
  c.output_h = 64;
  c.output_w = 128;
  switch (v) {
    case Variant::nerv: c.strides = {4, 2, 2, 2}; break;
    case Variant::sr_nerv: c.strides = {2, 2, 2, 2}; break;
    case Variant::hnerv: c.strides = {4, 4, 2, 2}; break;
    case Variant::sr_hnerv: c.strides = {4, 2, 2, 2}; break;
  }
  return c;
}

ModelConfig full_scale_config(Variant v) {
  ModelConfig c;
  c.variant = v;
  c.output_h = 640;
  c.output_w = 1280;
  c.pe = {1.25, 80};
  c.stem_hidden = 64;
  c.base_width = 64;
  c.srb = {32, 6, 2};
  switch (v) {
    case Variant::nerv: c.strides = {5, 4, 2, 2}; break;
    case Variant::hnerv: c.strides = {5, 4, 4, 2, 2}; break;
    case Variant::sr_nerv: c.strides = {5, 2, 2, 2}; break;
    case Variant::sr_hnerv: c.strides = {5, 4, 2, 2, 2}; break;
  }
  return c;
}

void check_matched_pair(const ModelConfig& baseline, const ModelConfig& sr) {
  if (is_sr(baseline.variant) || !is_sr(sr.variant) || uses_encoder(baseline.variant) != uses_encoder(sr.variant))
    throw ConfigError("matched pair needs (nerv, sr-nerv) or (hnerv, sr-hnerv), got (" +
                      std::string(variant_name(baseline.variant)) + ", " + std::string(variant_name(sr.variant)) +
                      ")");
  if (baseline.output_h != sr.output_h || baseline.output_w != sr.output_w)
    throw ConfigError("matched pair output sizes differ");
  if (baseline.decoder_upsampling() != sr.srb.scale * sr.decoder_upsampling())
    throw ConfigError("stride mismatch: product" + strides_str(baseline.strides) + " = " +
                      std::to_string(baseline.decoder_upsampling()) + " but 2 * product" + strides_str(sr.strides) +
                      " = " + std::to_string(sr.srb.scale * sr.decoder_upsampling()));
  baseline.validate();
  sr.validate();
}

ModelConfig matched_counterpart(const ModelConfig& config) {
  ModelConfig other = config;
  other.final_width = 0;
  auto& s = other.strides;
  if (is_sr(config.variant)) {
    other.variant = uses_encoder(config.variant) ? Variant::hnerv : Variant::nerv;
    const auto it = std::find(s.begin(), s.end(), 2);
    if (it == s.end()) throw ConfigError("no stride of 2 to double in " + strides_str(s));
    *it = 4;
  } else {
    other.variant = uses_encoder(config.variant) ? Variant::sr_hnerv : Variant::sr_nerv;
    const auto it = std::find(s.rbegin(), s.rend(), 4);
    if (it == s.rend()) throw ConfigError("no stride of 4 to halve in " + strides_str(s));
    *it = 2;
  }
  other.validate();
  return other;
}

std::vector<double> positional_encode(double t, const PositionalEncodingConfig& pe) {
  if (!(t >= 0.0 && t <= 1.0)) throw ContractError("positional_encode: t must lie in [0,1], got " + std::to_string(t));
  std::vector<double> out;
  out.reserve(2 * std::size_t(pe.num_freqs));
  for (int i = 0; i < pe.num_freqs; ++i) {
    const double angle = std::pow(pe.freq_base, double(i)) * std::numbers::pi * t;
    out.push_back(std::sin(angle));
    out.push_back(std::cos(angle));
  }
  return out;
}

// ---------------------------------------------------------------------------

template <typename T>
Conv2d<T> Conv2d<T>::make(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride,
                          std::size_t padding, Rng& rng) {
  Conv2d c;
  c.stride = stride;
  c.padding = padding;
  const double bound = 1.0 / std::sqrt(double(in * kernel * kernel));
  std::vector<T> w(out * in * kernel * kernel), b(out);
  for (auto& x : w) x = T(uniform_draw(rng, -bound, bound));
  for (auto& x : b) x = T(uniform_draw(rng, -bound, bound));
  c.weight = Tensor<T>(Shape{out, in, kernel, kernel}, std::move(w));
  c.bias = Tensor<T>(Shape{out}, std::move(b));
  return c;
}

template <typename T>
void Conv2d<T>::zero() {
  std::fill(weight.storage().begin(), weight.storage().end(), T(0));
  std::fill(bias.storage().begin(), bias.storage().end(), T(0));
}

template <typename T>
void Conv2d<T>::collect(const std::string& prefix, NamedTensors<T>& out) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

template <typename T>
NervDecoder<T>::NervDecoder(const ModelConfig& config, Rng& rng) {
  config.validate();
  has_stem_ = !uses_encoder(config.variant);
  base_ = std::size_t(config.base_width);
  grid_h_ = std::size_t(config.grid_h());
  grid_w_ = std::size_t(config.grid_w());
  input_channels_ = std::size_t(config.stage_input_width());
  if (has_stem_) {
    const std::size_t pe_dim = 2 * std::size_t(config.pe.num_freqs), hidden = std::size_t(config.stem_hidden);
    stem_hidden_ = Conv2d<T>::make(pe_dim, hidden, 1, 1, 0, rng);
    stem_out_ = Conv2d<T>::make(hidden, base_ * grid_h_ * grid_w_, 1, 1, 0, rng);
  }
  std::size_t in = input_channels_;
  const auto widths = config.stage_widths();
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const std::size_t s = std::size_t(config.strides[i]), out = std::size_t(widths[i]);
    stages_.push_back(Conv2d<T>::make(in, out * s * s, 3, 1, 1, rng));
    strides_.push_back(s);
    in = out;
  }
  head_ = Conv2d<T>::make(in, 3, 3, 1, 1, rng);
}

template <typename T>
Tensor<T> NervDecoder<T>::forward(const Tensor<T>& input) const {
  Tensor<T> x;
  if (has_stem_) {
    const Shape want{1, stem_hidden_.weight.dim(1), 1, 1};
    if (input.shape() != want)
      throw InvalidShape("decoder input " + shape_str(input.shape()) + ", expected " + shape_str(want));
    x = gelu(stem_out_(gelu(stem_hidden_(input))));
    x = reshape(x, Shape{1, base_, grid_h_, grid_w_});
  } else {
    const Shape want{1, input_channels_, grid_h_, grid_w_};
    if (input.shape() != want)
      throw InvalidShape("decoder input " + shape_str(input.shape()) + ", expected " + shape_str(want));
    x = input;
  }
  for (std::size_t i = 0; i < stages_.size(); ++i) x = gelu(pixel_shuffle(stages_[i](x), strides_[i]));
  return sigmoid(head_(x));
}

template <typename T>
void NervDecoder<T>::collect(const std::string& prefix, NamedTensors<T>& out) const {
  if (has_stem_) {
    stem_hidden_.collect(prefix + ".stem.0", out);
    stem_out_.collect(prefix + ".stem.1", out);
  }
  for (std::size_t i = 0; i < stages_.size(); ++i) stages_[i].collect(prefix + ".stage." + std::to_string(i), out);
  head_.collect(prefix + ".head", out);
}

template <typename T>
HnervEncoder<T>::HnervEncoder(const ModelConfig& config, Rng& rng) {
  config.validate();
  height_ = std::size_t(config.output_h);
  width_ = std::size_t(config.output_w);
  std::size_t in = 3;
  const std::size_t ew = std::size_t(config.embedding.encoder_width);
  for (int s : config.encoder_strides()) {
    const std::size_t k = encoder_kernel(s);
    stages_.push_back(Conv2d<T>::make(in, ew, k, std::size_t(s), k / 2, rng));
    in = ew;
  }
  project_ = Conv2d<T>::make(in, std::size_t(config.embedding.channels), 1, 1, 0, rng);
}

template <typename T>
Tensor<T> HnervEncoder<T>::forward(const Tensor<T>& frame) const {
  const Shape want{1, 3, height_, width_};
  if (frame.shape() != want)
    throw InvalidShape("encoder input " + shape_str(frame.shape()) + ", expected " + shape_str(want));
  Tensor<T> x = frame;
  for (const auto& conv : stages_) x = gelu(conv(x));
  return project_(x);
}

template <typename T>
void HnervEncoder<T>::collect(const std::string& prefix, NamedTensors<T>& out) const {
  for (std::size_t i = 0; i < stages_.size(); ++i) stages_[i].collect(prefix + ".stage." + std::to_string(i), out);
  project_.collect(prefix + ".project", out);
}

template <typename T>
SRModel<T>::SRModel(const SrbConfig& config, Rng& rng) : config_(config) {
  if (config.scale != 2 || config.channels < 1 || config.num_res_blocks < 0)
    throw ConfigError("SR block needs scale 2, channels >= 1 and blocks >= 0");
  const std::size_t c = std::size_t(config.channels);
  head_ = Conv2d<T>::make(3, c, 3, 1, 1, rng);
  for (int i = 0; i < config.num_res_blocks; ++i) {
    ResBlock b{Conv2d<T>::make(c, c, 3, 1, 1, rng), Conv2d<T>::make(c, c, 3, 1, 1, rng)};
    b.second.zero();
    blocks_.push_back(std::move(b));
  }
  body_ = Conv2d<T>::make(c, c, 3, 1, 1, rng);
  upsample_ = Conv2d<T>::make(c, 4 * c, 3, 1, 1, rng);
  tail_ = Conv2d<T>::make(c, 3, 3, 1, 1, rng);
  tail_.zero();
}

template <typename T>
Tensor<T> SRModel<T>::forward(const Tensor<T>& input) const {
  Tensor<T> x = input;
  if (x.rank() == 3) x = reshape(x, Shape{1, x.dim(0), x.dim(1), x.dim(2)});
  if (x.rank() != 4 || x.dim(0) != 1 || x.dim(1) != 3)
    throw InvalidShape("SR block expects [1,3,h,w] or [3,h,w], got " + shape_str(input.shape()));
  const Tensor<T> features = head_(x);
  Tensor<T> h = features;
  for (const auto& b : blocks_) h = add(h, b.second(gelu(b.first(h))));
  h = add(body_(h), features);
  h = pixel_shuffle(upsample_(h), 2);
  const Tensor<T> skip = upsample_nearest(logit(x, kLogitEps), 2);
  return sigmoid(add(tail_(h), skip));
}

template <typename T>
void SRModel<T>::collect(const std::string& prefix, NamedTensors<T>& out) const {
  head_.collect(prefix + ".head", out);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i].first.collect(prefix + ".block." + std::to_string(i) + ".0", out);
    blocks_[i].second.collect(prefix + ".block." + std::to_string(i) + ".1", out);
  }
  body_.collect(prefix + ".body", out);
  upsample_.collect(prefix + ".upsample", out);
  tail_.collect(prefix + ".tail", out);
}

template <typename T>
std::vector<Tensor<T>> SRModel<T>::parameters() const {
  NamedTensors<T> named;
  collect("srb", named);
  std::vector<Tensor<T>> out;
  for (auto& [name, t] : named) out.push_back(t);
  return out;
}

template <typename T>
void SRModel<T>::copy_from(const SRModel& other) {
  if (!(other.config_ == config_)) throw ConfigError("SR block configurations differ");
  auto dst = parameters();
  const auto src = other.parameters();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i].storage() = src[i].storage();
}

template <typename T>
VideoModel<T>::VideoModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config.validate();
  // Separate streams keep the decoder init independent of the SR block's presence.
  Rng decoder_rng(derive_seed(seed, 0)), encoder_rng(derive_seed(seed, 1)), srb_rng(derive_seed(seed, 2));
  decoder_.emplace(config, decoder_rng);
  if (uses_encoder(config.variant)) encoder_.emplace(config, encoder_rng);
  if (is_sr(config.variant)) srb_.emplace(config.srb, srb_rng);
}

template <typename T>
Tensor<T> VideoModel<T>::decode(double t, const Frame* source) const {
  if (encoder_) {
    if (!source) throw ContractError(std::string(variant_name(config_.variant)) + " needs the source frame to encode");
    if (source->height() != std::size_t(config_.output_h) || source->width() != std::size_t(config_.output_w))
      throw InvalidShape("source frame " + std::to_string(source->height()) + "x" + std::to_string(source->width()) +
                         " does not match the configured output " + std::to_string(config_.output_h) + "x" +
                         std::to_string(config_.output_w));
    return decoder_->forward(encoder_->forward(frame_to_tensor<T>(*source)));
  }
  const auto code = positional_encode(t, config_.pe);
  return decoder_->forward(Tensor<T>(Shape{1, code.size(), 1, 1}, std::vector<T>(code.begin(), code.end())));
}

template <typename T>
Tensor<T> VideoModel<T>::forward(double t, const Frame* source) const {
  Tensor<T> out = decode(t, source);
  return srb_ ? srb_->forward(out) : out;
}

template <typename T>
std::vector<ParamGroup<T>> VideoModel<T>::param_groups() const {
  auto tensors = [](auto collect_fn) {
    NamedTensors<T> named;
    collect_fn(named);
    std::vector<Tensor<T>> out;
    for (auto& [name, t] : named) out.push_back(t);
    return out;
  };
  std::vector<ParamGroup<T>> groups;
  groups.push_back({"decoder", tensors([&](auto& n) { decoder_->collect("decoder", n); }), true});
  if (encoder_) groups.push_back({"encoder", tensors([&](auto& n) { encoder_->collect("encoder", n); }), true});
  if (srb_) groups.push_back({"srb", srb_->parameters(), true});
  return groups;
}

template <typename T>
NamedTensors<T> VideoModel<T>::named_parameters() const {
  NamedTensors<T> out;
  decoder_->collect("decoder", out);
  if (encoder_) encoder_->collect("encoder", out);
  if (srb_) srb_->collect("srb", out);
  return out;
}

template <typename T>
Frame reconstruct_frame(const VideoModel<T>& model, const VideoClip& clip, std::size_t k) {
  const auto& c = model.config();
  if (clip.height() != std::size_t(c.output_h) || clip.width() != std::size_t(c.output_w))
    throw InvalidShape("clip is " + std::to_string(clip.height()) + "x" + std::to_string(clip.width()) +
                       " but the model outputs " + std::to_string(c.output_h) + "x" + std::to_string(c.output_w));
  return frame_from_tensor(model.forward(clip.time_index(k), &clip[k]));
}

template <typename T>
Frame reconstruct_frame(const VideoModel<T>& model, double t) {
  return frame_from_tensor(model.forward(t));
}

template <typename T>
ParamCount param_count(const VideoModel<T>& model, std::size_t num_frames) {
  ParamCount count;
  for (const auto& [name, t] : model.named_parameters()) {
    if (name.rfind("decoder.", 0) == 0) count.decoder += t.numel();
    else if (name.rfind("srb.", 0) == 0) count.srb += t.numel();
    else count.encoder += t.numel();
  }
  const auto& c = model.config();
  if (uses_encoder(c.variant))
    count.embedding = num_frames * std::size_t(c.embedding.channels * c.grid_h() * c.grid_w());
  return count;
}

std::size_t srb_param_count(const SrbConfig& s) {
  const std::size_t c = std::size_t(s.channels);
  return conv_params(3, c, 3) + std::size_t(s.num_res_blocks) * 2 * conv_params(c, c, 3) + conv_params(c, c, 3) +
         conv_params(c, 4 * c, 3) + conv_params(c, 3, 3);
}

ParamCount estimate_params(const ModelConfig& config, std::size_t num_frames) {
  config.validate();
  ParamCount count;
  const std::size_t cells = std::size_t(config.grid_h() * config.grid_w());
  if (!uses_encoder(config.variant)) {
    const std::size_t pe_dim = 2 * std::size_t(config.pe.num_freqs), hidden = std::size_t(config.stem_hidden);
    count.decoder += conv_params(pe_dim, hidden, 1) + conv_params(hidden, std::size_t(config.base_width) * cells, 1);
  } else {
    std::size_t in = 3;
    const std::size_t ew = std::size_t(config.embedding.encoder_width);
    for (int s : config.encoder_strides()) {
      count.encoder += conv_params(in, ew, encoder_kernel(s));
      in = ew;
    }
    count.encoder += conv_params(in, std::size_t(config.embedding.channels), 1);
    count.embedding = num_frames * std::size_t(config.embedding.channels) * cells;
  }
  std::size_t in = std::size_t(config.stage_input_width());
  const auto widths = config.stage_widths();
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const std::size_t s = std::size_t(config.strides[i]), out = std::size_t(widths[i]);
    count.decoder += conv_params(in, out * s * s, 3);
    in = out;
  }
  count.decoder += conv_params(in, 3, 3);
  if (is_sr(config.variant)) count.srb = srb_param_count(config.srb);
  return count;
}

int solve_width_for_budget(const ModelConfig& config, std::size_t budget) {
  const double limit = kBudgetSlack * double(budget);
  ModelConfig c = config;
  c.base_width = kMinSolvedWidth;
  if (double(estimate_params(c).total()) > limit)
    throw InfeasibleBudget("budget " + std::to_string(budget) + " is below the smallest " +
                           std::string(variant_name(config.variant)) + " model (" +
                           std::to_string(estimate_params(c).total()) + " params at width " +
                           std::to_string(kMinSolvedWidth) + ")");
  int best = kMinSolvedWidth;
  for (int w = kMinSolvedWidth + 1; w <= kMaxSolvedWidth; ++w) {
    c.base_width = w;
    if (double(estimate_params(c).total()) > limit) break;
    best = w;
  }
  return best;
}

ModelConfig fit_to_budget(ModelConfig config, std::size_t budget) {
  config.final_width = 0;
  config.base_width = solve_width_for_budget(config, budget);
  const double limit = kBudgetSlack * double(budget);
  const auto widths = config.stage_widths();
  // Never wider than the stage feeding it.
  const int cap = widths.size() > 1 ? widths[widths.size() - 2] : config.stage_input_width();
  ModelConfig probe = config;
  for (int w = widths.back() + 1; w <= cap; ++w) {
    probe.final_width = w;
    if (double(estimate_params(probe).total()) > limit) break;
    config.final_width = w;
  }
  return config;
}

#define NVSR_INSTANTIATE_MODELS(T)                                                                 \
  template struct Conv2d<T>;                                                                       \
  template class NervDecoder<T>;                                                                   \
  template class HnervEncoder<T>;                                                                  \
  template class SRModel<T>;                                                                       \
  template class VideoModel<T>;                                                                    \
  template Frame reconstruct_frame<T>(const VideoModel<T>&, const VideoClip&, std::size_t);        \
  template Frame reconstruct_frame<T>(const VideoModel<T>&, double);                               \
  template ParamCount param_count<T>(const VideoModel<T>&, std::size_t);

NVSR_INSTANTIATE_MODELS(float)
NVSR_INSTANTIATE_MODELS(double)

}  // namespace nvsr
