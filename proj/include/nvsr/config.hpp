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

// Plain-text experiment configuration:
//
//   # comment
//   model.variant = sr-nerv
//   schedule.total_epochs = 300
//
// One `section.key = value` per line. Lists are comma separated. Missing
// keys take the defaults below; unknown or repeated keys are errors. A '#'
// anywhere starts a comment, so string values cannot contain one.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nvsr/degrade.hpp"
#include "nvsr/models.hpp"
#include "nvsr/schedule.hpp"

namespace nvsr {

struct PretrainConfig {
  int epochs = 300;
  int crops_per_epoch = 64;
  /// Side of the high-resolution training crop; must be even.
  int crop_size = 32;
  double lr = 1e-3;
  bool operator==(const PretrainConfig&) const = default;
};

struct PathsConfig {
  std::string corpus;  // directory of .ppm images for SR pre-training
  std::string video;   // frame directory or raw clip file
  std::string output;
  std::string srb;     // pre-trained SR block checkpoint
  bool operator==(const PathsConfig&) const = default;
};

struct SyntheticConfig {
  std::string kind = "textured-noise";
  int frames = 8;
  int height = 64;
  int width = 128;
  /// Clip seed, separate from the training seed so runs share one clip.
  std::uint64_t seed = 1;
  bool operator==(const SyntheticConfig&) const = default;
};

struct ExperimentSettings {
  std::uint64_t seed = 0;
  /// Parameter budget for `compare`; 0 keeps the configured widths.
  std::size_t budget = 50000;
  /// Number of seeds for `ablate` and `compare` (seed, seed+1, ...).
  int seeds = 1;
  /// Empty means {0, T/6, T/2, T}.
  std::vector<int> ablate_starts;
  bool operator==(const ExperimentSettings&) const = default;
};

struct ExperimentConfig {
  ModelConfig model;
  TrainSchedule schedule;
  DegradationRanges degradation;
  PretrainConfig pretrain;
  PathsConfig paths;
  SyntheticConfig synthetic;
  ExperimentSettings experiment;

  bool operator==(const ExperimentConfig&) const;
};

/// One parsed `key = value` line.
struct ConfigEntry {
  std::string value;
  int line = 0;
};
using ConfigEntries = std::map<std::string, ConfigEntry>;

/// Tokenizes the grammar. Throws ConfigError naming the line on syntax errors
/// and naming both lines on a repeated key.
ConfigEntries parse_entries(const std::string& text);

/// Throws ConfigError on syntax errors, unknown keys, bad values and
/// inconsistent settings.
ExperimentConfig parse_config(const std::string& text);
/// Every key, in a fixed order; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// The model.* block alone, and its inverse.
std::string serialize_model_config(const ModelConfig& config);
ModelConfig parse_model_config(const std::string& text);

/// 16 hex digits of FNV-1a over `text`.
std::string config_hash(const std::string& text);

}  // namespace nvsr
