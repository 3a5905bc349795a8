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

// Synthetic degradation of low-resolution SR training inputs: a Gaussian
// blur followed by a color transform, mimicking the soft, slightly
// color-shifted frames an implicit video decoder produces.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "nvsr/media.hpp"
#include "nvsr/random.hpp"

namespace nvsr {

struct BlurParams {
  int kernel_size = 1;
  double sigma = 0.0;
  bool operator==(const BlurParams&) const = default;
};

struct ColorParams {
  std::array<double, 3> gain{1.0, 1.0, 1.0};
  std::array<double, 3> bias{0.0, 0.0, 0.0};
  double saturation = 1.0;
  bool operator==(const ColorParams&) const = default;
};

struct DegradationParams {
  BlurParams blur;
  ColorParams color;

  void validate() const;
  bool operator==(const DegradationParams&) const = default;
};

struct Interval {
  double min = 0.0;
  double max = 0.0;
};

/// Sampling ranges for DegradationParams.
struct DegradationRanges {
  std::vector<int> kernel_sizes{3, 5};
  Interval sigma{0.2, 1.5};
  Interval saturation{0.8, 1.2};
  Interval gain{0.9, 1.1};
  Interval bias{-0.05, 0.05};

  void validate() const;
};

/// Seeded source of degradation parameters. Draws are defined bit-for-bit
/// on top of the 64-bit Mersenne Twister, independent of the standard
/// library's distribution implementations.
class DegradationSampler {
 public:
  explicit DegradationSampler(std::uint64_t seed) : rng_(seed) {}

  DegradationParams sample(const DegradationRanges& ranges);
  double uniform(double lo, double hi);
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

DegradationParams sample_params(DegradationSampler& sampler, const DegradationRanges& ranges);

/// Normalized 1-D Gaussian taps, length kernel_size.
std::vector<double> gaussian_taps(int kernel_size, double sigma);

/// Separable Gaussian blur with mirrored borders; sigma 0 is the identity.
Frame gaussian_blur(const Frame& frame, int kernel_size, double sigma);

/// Pull toward BT.601 luminance by (1 - s), apply per-channel gain/bias,
/// clamp to [0,1].
Frame color_transform(const Frame& frame, const ColorParams& params);

/// Blur, then color transform.
Frame degrade(const Frame& frame, const DegradationParams& params);

}  // namespace nvsr
