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

#include "nvsr/degrade.hpp"

#include <algorithm>
#include <cmath>

#include "nvsr/error.hpp"

namespace nvsr {

void DegradationParams::validate() const {
  if (blur.kernel_size < 1 || blur.kernel_size % 2 == 0)
    throw ContractError("degrade: kernel_size must be a positive odd integer");
  if (!(blur.sigma >= 0)) throw ContractError("degrade: sigma must be >= 0");
  for (double g : color.gain)
    if (!(g > 0)) throw ContractError("degrade: gains must be positive");
  if (!(color.saturation >= 0)) throw ContractError("degrade: saturation must be >= 0");
}

void DegradationRanges::validate() const {
  if (kernel_sizes.empty()) throw ConfigError("degradation ranges: no kernel sizes");
  for (int k : kernel_sizes)
    if (k < 1 || k % 2 == 0) throw ConfigError("degradation ranges: kernel sizes must be odd");
  auto check = [](const Interval& r, const char* name) {
    if (!(r.min <= r.max))
      throw ConfigError(std::string("degradation ranges: empty interval for ") + name);
  };
  check(sigma, "sigma");
  check(saturation, "saturation");
  check(gain, "gain");
  check(bias, "bias");
  if (sigma.min < 0) throw ConfigError("degradation ranges: sigma must be >= 0");
  if (gain.min <= 0) throw ConfigError("degradation ranges: gain must be positive");
  if (saturation.min < 0) throw ConfigError("degradation ranges: saturation must be >= 0");
}

double DegradationSampler::uniform(double lo, double hi) {
  return uniform_draw(rng_, lo, hi);
}

DegradationParams DegradationSampler::sample(const DegradationRanges& ranges) {
  ranges.validate();
  DegradationParams p;
  p.blur.kernel_size = ranges.kernel_sizes[rng_() % ranges.kernel_sizes.size()];
  p.blur.sigma = uniform(ranges.sigma.min, ranges.sigma.max);
  p.color.saturation = uniform(ranges.saturation.min, ranges.saturation.max);
  for (int c = 0; c < 3; ++c) p.color.gain[c] = uniform(ranges.gain.min, ranges.gain.max);
  for (int c = 0; c < 3; ++c) p.color.bias[c] = uniform(ranges.bias.min, ranges.bias.max);
  return p;
}

DegradationParams sample_params(DegradationSampler& sampler, const DegradationRanges& ranges) {
  return sampler.sample(ranges);
}

std::vector<double> gaussian_taps(int kernel_size, double sigma) {
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw ContractError("gaussian_blur: kernel size must be a positive odd integer");
  if (!(sigma >= 0)) throw ContractError("gaussian_blur: sigma must be >= 0");
  const int r = kernel_size / 2;
  std::vector<double> taps(kernel_size, 0.0);
  if (sigma == 0) {
    taps[r] = 1.0;
    return taps;
  }
  double total = 0;
  for (int i = -r; i <= r; ++i) total += taps[i + r] = std::exp(-double(i * i) / (2 * sigma * sigma));
  for (auto& t : taps) t /= total;
  return taps;
}

namespace {

// Mirror about the edge sample: ... c b | a b c ... (edge not repeated).
long mirror(long i, long n) {
  if (n == 1) return 0;
  const long period = 2 * (n - 1);
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

}  // namespace

Frame gaussian_blur(const Frame& frame, int kernel_size, double sigma) {
  const auto taps = gaussian_taps(kernel_size, sigma);
  if (sigma == 0) return frame;
  const long r = kernel_size / 2;
  const long H = long(frame.height()), W = long(frame.width());
  std::vector<double> tmp(std::size_t(H * W));
  std::vector<float> out(frame.size());
  for (std::size_t c = 0; c < 3; ++c) {
    const auto plane = frame.plane(c);
    for (long y = 0; y < H; ++y)
      for (long x = 0; x < W; ++x) {
        double acc = 0;
        for (long k = -r; k <= r; ++k) acc += taps[k + r] * plane[y * W + mirror(x + k, W)];
        tmp[y * W + x] = acc;
      }
    for (long y = 0; y < H; ++y)
      for (long x = 0; x < W; ++x) {
        double acc = 0;
        for (long k = -r; k <= r; ++k) acc += taps[k + r] * tmp[mirror(y + k, H) * W + x];
        out[c * H * W + y * W + x] = static_cast<float>(acc);
      }
  }
  return Frame::clamped(frame.height(), frame.width(), std::move(out));
}

Frame color_transform(const Frame& frame, const ColorParams& params) {
  const std::size_t n = frame.height() * frame.width();
  const auto d = frame.data();
  const float s = float(params.saturation);
  std::vector<float> out(d.size());
  for (std::size_t i = 0; i < n; ++i) {
    const float r = d[i], g = d[n + i], b = d[2 * n + i];
    const float lum = 0.299f * r + 0.587f * g + 0.114f * b;
    for (std::size_t c = 0; c < 3; ++c) {
      const float v = s * d[c * n + i] + (1.0f - s) * lum;
      out[c * n + i] = float(params.gain[c]) * v + float(params.bias[c]);
    }
  }
  return Frame::clamped(frame.height(), frame.width(), std::move(out));
}

Frame degrade(const Frame& frame, const DegradationParams& params) {
  params.validate();
  return color_transform(gaussian_blur(frame, params.blur.kernel_size, params.blur.sigma), params.color);
}

}  // namespace nvsr
