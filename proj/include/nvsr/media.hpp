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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nvsr/tensor.hpp"

namespace nvsr {

/// RGB image with values in [0,1], planar (C,H,W) layout.
class Frame {
 public:
  static constexpr std::size_t kChannels = 3;

  Frame() = default;
  /// Constant-filled frame.
  Frame(std::size_t height, std::size_t width, float fill = 0.0f);
  /// Throws ContractError if any value lies outside [0,1] or is NaN.
  Frame(std::size_t height, std::size_t width, std::vector<float> planar);
  /// Clamps every value into [0,1]; NaN becomes 0.
  static Frame clamped(std::size_t height, std::size_t width, std::vector<float> planar);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return kChannels; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const float> data() const { return data_; }
  std::span<const float> plane(std::size_t c) const {
    return std::span<const float>(data_).subspan(c * height_ * width_, height_ * width_);
  }
  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * height_ + y) * width_ + x];
  }

  bool same_dims(const Frame& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool operator==(const Frame& other) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
};

/// [1,3,H,W] tensor view of a frame (copied).
template <typename T>
Tensor<T> frame_to_tensor(const Frame& frame);

/// Accepts [3,H,W] or [1,3,H,W]; values are clamped into [0,1].
template <typename T>
Frame frame_from_tensor(const Tensor<T>& tensor);

/// Ordered frames of equal size with normalized time stamps.
class VideoClip {
 public:
  VideoClip() = default;
  /// Throws InvalidClip on an empty list or mismatched frame sizes.
  explicit VideoClip(std::vector<Frame> frames);

  std::size_t size() const { return frames_.size(); }
  std::size_t height() const { return frames_.front().height(); }
  std::size_t width() const { return frames_.front().width(); }
  const Frame& operator[](std::size_t k) const { return frames_.at(k); }
  const std::vector<Frame>& frames() const { return frames_; }

  /// k / (T - 1), or 0 for a single-frame clip.
  double time_index(std::size_t k) const;

  bool operator==(const VideoClip& other) const = default;

 private:
  std::vector<Frame> frames_;
};

// Binary PPM (P6, maxval 255): value = byte / 255.
Frame load_frame(const std::filesystem::path& path);
void save_frame(const Frame& frame, const std::filesystem::path& path);
Frame decode_ppm(std::span<const unsigned char> bytes);
std::vector<unsigned char> encode_ppm(const Frame& frame);
unsigned char quantize(float v);

/// Raw clip container: "NVSR", version, T, H, W (u32 LE), then T frames of
/// planar float32 LE samples.
inline constexpr std::uint32_t kClipFormatVersion = 1;
std::vector<unsigned char> encode_clip(const VideoClip& clip);
VideoClip decode_clip(std::span<const unsigned char> bytes);

/// A directory of numerically named .ppm frames, or a raw clip container file.
VideoClip load_video(const std::filesystem::path& path);
/// Writes 000.ppm, 001.ppm, ... into `dir` (created if needed).
void save_video(const VideoClip& clip, const std::filesystem::path& dir);
void save_clip_raw(const VideoClip& clip, const std::filesystem::path& file);

/// Keeps the window starting at floor((H-h)/2), floor((W-w)/2).
Frame center_crop(const Frame& frame, std::size_t height, std::size_t width);
VideoClip center_crop(const VideoClip& clip, std::size_t height, std::size_t width);

/// Box-filter downsampling; height and width must be divisible by `factor`.
Frame downsample_area(const Frame& frame, std::size_t factor);
Frame upsample_nearest(const Frame& frame, std::size_t factor);

std::vector<unsigned char> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const unsigned char> bytes);

}  // namespace nvsr
