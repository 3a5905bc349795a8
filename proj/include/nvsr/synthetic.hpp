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

// Seeded synthetic clips standing in for real footage.
//
//   moving-checker   two-color checkerboard translated by an integer velocity
//                    per frame with wraparound.
//   gradient-drift   smooth per-channel sinusoidal gradients whose phase
//                    drifts over time.
//   textured-noise   soft blobs drifting over a smooth background, overlaid
//                    with a static texture of random 2x2 pixel cells.

#include <cstdint>
#include <string_view>
#include <vector>

#include "nvsr/media.hpp"

namespace nvsr {

enum class SyntheticKind { moving_checker, textured_noise, gradient_drift };

std::string_view synthetic_kind_name(SyntheticKind kind);
/// Throws ConfigError on an unknown name.
SyntheticKind parse_synthetic_kind(std::string_view name);

struct SyntheticOptions {
  int checker_cell = 8;
  int velocity_x = 2;  // pixels per frame
  int velocity_y = 1;
  int texture_cell = 2;
  double texture_amplitude = 0.8;
};

/// Throws ConfigError unless t, h, w >= 1.
VideoClip make_synthetic_video(SyntheticKind kind, int frames, int height, int width, std::uint64_t seed,
                               const SyntheticOptions& options = {});

/// Still images for SR pre-training: the first frame of each family in turn,
/// with the checker cell growing from 3 px. Image i uses seed + i.
std::vector<Frame> make_texture_corpus(int count, int height, int width, std::uint64_t seed);

}  // namespace nvsr
