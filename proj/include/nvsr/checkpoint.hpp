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

// Checkpoint container:
//
//   "NVCK" | u32 version | u32 text bytes | text
//   u32 array count | per array: u32 name bytes, name, u32 rank,
//                                u64 extents[rank], float32 values
//
// All integers and floats little-endian. The text block holds the model
// configuration as `model.key = value` lines plus `state.*` lines for
// training progress.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nvsr/models.hpp"
#include "nvsr/optim.hpp"

namespace nvsr {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> values;
  bool operator==(const NamedArray&) const = default;
};

struct Checkpoint {
  std::string text;
  std::vector<NamedArray> arrays;

  const NamedArray* find(const std::string& name) const;
  /// Appends `key = value`.
  void set_state(const std::string& key, const std::string& value);
  /// Values of the state.* lines, keyed without the prefix.
  std::map<std::string, std::string> state() const;
  /// The text without state.* lines.
  std::string config_text() const;

  bool operator==(const Checkpoint&) const = default;
};

std::vector<unsigned char> encode_checkpoint(const Checkpoint& checkpoint);
/// Throws DecodeError (with the failing byte offset) on malformed input.
Checkpoint decode_checkpoint(std::span<const unsigned char> bytes);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Configuration text plus every parameter tensor.
Checkpoint model_checkpoint(const VideoModel<float>& model);
/// Rebuilds the model from the stored configuration and copies the values.
VideoModel<float> model_from_checkpoint(const Checkpoint& checkpoint);
/// Copies stored values into `params`; throws ConfigError on a missing name
/// or shape mismatch.
void load_parameters(const NamedTensors<float>& params, const Checkpoint& checkpoint);

Checkpoint srb_checkpoint(const SRModel<float>& srb);
SRModel<float> srb_from_checkpoint(const Checkpoint& checkpoint);

/// Moments, per-group step counters and trainability of an optimizer.
void add_optimizer_state(Checkpoint& checkpoint, const Adam<float>& optimizer);
/// Restores what add_optimizer_state wrote into an optimizer built over the
/// same parameter groups.
void restore_optimizer_state(Adam<float>& optimizer, const Checkpoint& checkpoint);

}  // namespace nvsr
