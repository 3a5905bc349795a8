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

#include "nvsr/media.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "nvsr/error.hpp"

namespace nvsr {

namespace fs = std::filesystem;

Frame::Frame(std::size_t height, std::size_t width, float fill)
    : height_(height), width_(width), data_(kChannels * height * width, fill) {
  if (height == 0 || width == 0) throw ContractError("Frame: dimensions must be >= 1");
  if (!(fill >= 0.0f && fill <= 1.0f)) throw ContractError("Frame: fill value outside [0,1]");
}

Frame::Frame(std::size_t height, std::size_t width, std::vector<float> planar)
    : height_(height), width_(width), data_(std::move(planar)) {
  if (height == 0 || width == 0) throw ContractError("Frame: dimensions must be >= 1");
  if (data_.size() != kChannels * height * width)
    throw InvalidShape("Frame: expected " + std::to_string(kChannels * height * width) +
                       " samples, got " + std::to_string(data_.size()));
  for (float v : data_)
    if (!(v >= 0.0f && v <= 1.0f)) throw ContractError("Frame: sample outside [0,1]");
}

Frame Frame::clamped(std::size_t height, std::size_t width, std::vector<float> planar) {
  for (auto& v : planar) v = std::isnan(v) ? 0.0f : std::clamp(v, 0.0f, 1.0f);
  return Frame(height, width, std::move(planar));
}

template <typename T>
Tensor<T> frame_to_tensor(const Frame& frame) {
  std::vector<T> v(frame.data().begin(), frame.data().end());
  return Tensor<T>({1, Frame::kChannels, frame.height(), frame.width()}, std::move(v));
}

template <typename T>
Frame frame_from_tensor(const Tensor<T>& tensor) {
  const auto& s = tensor.shape();
  const bool ok = (s.size() == 3 && s[0] == 3) || (s.size() == 4 && s[0] == 1 && s[1] == 3);
  if (!ok) throw InvalidShape("frame_from_tensor: expected (3,H,W) or (1,3,H,W), got " + shape_str(s));
  const std::size_t h = s[s.size() - 2], w = s[s.size() - 1];
  std::vector<float> v(tensor.data().begin(), tensor.data().end());
  return Frame::clamped(h, w, std::move(v));
}

template Tensor<float> frame_to_tensor<float>(const Frame&);
template Tensor<double> frame_to_tensor<double>(const Frame&);
template Frame frame_from_tensor<float>(const Tensor<float>&);
template Frame frame_from_tensor<double>(const Tensor<double>&);

VideoClip::VideoClip(std::vector<Frame> frames) : frames_(std::move(frames)) {
  if (frames_.empty()) throw InvalidClip("VideoClip: at least one frame is required");
  for (std::size_t k = 1; k < frames_.size(); ++k)
    if (!frames_[k].same_dims(frames_[0]))
      throw InvalidClip("VideoClip: frame " + std::to_string(k) + " is " +
                        std::to_string(frames_[k].height()) + "x" + std::to_string(frames_[k].width()) +
                        ", expected " + std::to_string(frames_[0].height()) + "x" +
                        std::to_string(frames_[0].width()));
}

double VideoClip::time_index(std::size_t k) const {
  if (k >= frames_.size()) throw ContractError("time_index: frame index out of range");
  if (frames_.size() == 1) return 0.0;
  return double(k) / double(frames_.size() - 1);
}

// ---------------------------------------------------------------------------
// PPM

unsigned char quantize(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<unsigned char>(std::lround(c * 255.0f));
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::uint64_t number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::uint64_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1u << 30) throw DecodeError(std::string("ppm: ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw DecodeError(std::string("ppm: expected ") + what, pos_);
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Frame decode_ppm(std::span<const unsigned char> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    throw DecodeError("ppm: missing P6 magic", 0);
  HeaderReader r(bytes);
  r.advance(2);
  const auto width = r.number("width");
  const auto height = r.number("height");
  const std::size_t maxval_at = r.pos();
  const auto maxval = r.number("maxval");
  if (width == 0 || height == 0) throw DecodeError("ppm: zero image dimension", maxval_at);
  if (maxval != 255)
    throw UnsupportedFormat("ppm: only 8-bit samples (maxval 255) are supported, got maxval " +
                            std::to_string(maxval));
  if (r.pos() >= bytes.size() || !std::isspace(bytes[r.pos()]))
    throw DecodeError("ppm: expected whitespace after header", r.pos());
  r.advance(1);
  const std::size_t npix = width * height;
  const std::size_t need = npix * 3;
  if (bytes.size() - r.pos() < need)
    throw DecodeError("ppm: truncated pixel data (" + std::to_string(need) + " bytes expected)",
                      bytes.size());
  const unsigned char* px = bytes.data() + r.pos();
  std::vector<float> planar(need);
  for (std::size_t i = 0; i < npix; ++i)
    for (std::size_t c = 0; c < 3; ++c) planar[c * npix + i] = float(px[i * 3 + c]) / 255.0f;
  return Frame(height, width, std::move(planar));
}

std::vector<unsigned char> encode_ppm(const Frame& frame) {
  const std::string header =
      "P6\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  const std::size_t npix = frame.height() * frame.width();
  const auto d = frame.data();
  out.reserve(out.size() + npix * 3);
  for (std::size_t i = 0; i < npix; ++i)
    for (std::size_t c = 0; c < 3; ++c) out.push_back(quantize(d[c * npix + i]));
  return out;
}

std::vector<unsigned char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

Frame load_frame(const fs::path& path) { return decode_ppm(read_file(path)); }

void save_frame(const Frame& frame, const fs::path& path) { write_file(path, encode_ppm(frame)); }

// ---------------------------------------------------------------------------
// Raw container

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const unsigned char> bytes, std::size_t at) {
  if (at + 4 > bytes.size()) throw DecodeError("clip: truncated header", bytes.size());
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<unsigned char> encode_clip(const VideoClip& clip) {
  std::vector<unsigned char> out{'N', 'V', 'S', 'R'};
  put_u32(out, kClipFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(clip.size()));
  put_u32(out, static_cast<std::uint32_t>(clip.height()));
  put_u32(out, static_cast<std::uint32_t>(clip.width()));
  for (const auto& f : clip.frames())
    for (float v : f.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

VideoClip decode_clip(std::span<const unsigned char> bytes) {
  if (bytes.size() < 4 || bytes[0] != 'N' || bytes[1] != 'V' || bytes[2] != 'S' || bytes[3] != 'R')
    throw DecodeError("clip: missing NVSR magic", 0);
  const auto version = get_u32(bytes, 4);
  if (version != kClipFormatVersion)
    throw UnsupportedFormat("clip: unsupported container version " + std::to_string(version));
  const std::size_t T = get_u32(bytes, 8), H = get_u32(bytes, 12), W = get_u32(bytes, 16);
  if (T == 0 || H == 0 || W == 0) throw DecodeError("clip: zero extent in header", 8);
  const std::size_t per_frame = 3 * H * W;
  const std::size_t need = 20 + T * per_frame * 4;
  if (bytes.size() < need)
    throw DecodeError("clip: truncated sample data (" + std::to_string(need) + " bytes expected)",
                      bytes.size());
  if (bytes.size() > need) throw DecodeError("clip: trailing bytes after sample data", need);
  std::vector<Frame> frames;
  frames.reserve(T);
  std::size_t at = 20;
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<float> v(per_frame);
    for (auto& s : v) {
      s = std::bit_cast<float>(get_u32(bytes, at));
      if (!(s >= 0.0f && s <= 1.0f)) throw DecodeError("clip: sample outside [0,1]", at);
      at += 4;
    }
    frames.emplace_back(H, W, std::move(v));
  }
  return VideoClip(std::move(frames));
}

void save_clip_raw(const VideoClip& clip, const fs::path& file) { write_file(file, encode_clip(clip)); }

VideoClip load_video(const fs::path& path) {
  if (!fs::is_directory(path)) return decode_clip(read_file(path));
  std::map<unsigned long long, fs::path> ordered;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".ppm") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); }))
      continue;
    const auto index = std::stoull(stem);
    if (!ordered.emplace(index, entry.path()).second)
      throw InvalidClip("load_video: duplicate frame number " + stem + " in " + path.string());
  }
  if (ordered.empty()) throw InvalidClip("load_video: no numbered .ppm frames in " + path.string());
  std::vector<Frame> frames;
  for (const auto& [_, p] : ordered) frames.push_back(load_frame(p));
  return VideoClip(std::move(frames));
}

void save_video(const VideoClip& clip, const fs::path& dir) {
  fs::create_directories(dir);
  const int digits = std::max<int>(3, int(std::to_string(clip.size() - 1).size()));
  for (std::size_t k = 0; k < clip.size(); ++k) {
    std::ostringstream name;
    name << std::setw(digits) << std::setfill('0') << k << ".ppm";
    save_frame(clip[k], dir / name.str());
  }
}

Frame center_crop(const Frame& frame, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0 || height > frame.height() || width > frame.width())
    throw InvalidCrop("center_crop: cannot crop " + std::to_string(frame.height()) + "x" +
                      std::to_string(frame.width()) + " to " + std::to_string(height) + "x" +
                      std::to_string(width));
  const std::size_t y0 = (frame.height() - height) / 2;
  const std::size_t x0 = (frame.width() - width) / 2;
  std::vector<float> out;
  out.reserve(3 * height * width);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) out.push_back(frame.at(c, y0 + y, x0 + x));
  return Frame(height, width, std::move(out));
}

VideoClip center_crop(const VideoClip& clip, std::size_t height, std::size_t width) {
  std::vector<Frame> frames;
  for (const auto& f : clip.frames()) frames.push_back(center_crop(f, height, width));
  return VideoClip(std::move(frames));
}

Frame downsample_area(const Frame& frame, std::size_t factor) {
  if (factor == 0 || frame.height() % factor != 0 || frame.width() % factor != 0)
    throw InvalidShape("downsample_area: " + std::to_string(frame.height()) + "x" +
                       std::to_string(frame.width()) + " not divisible by " + std::to_string(factor));
  const std::size_t h = frame.height() / factor, w = frame.width() / factor;
  std::vector<float> out(3 * h * w);
  const double inv = 1.0 / double(factor * factor);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        double acc = 0;
        for (std::size_t dy = 0; dy < factor; ++dy)
          for (std::size_t dx = 0; dx < factor; ++dx) acc += frame.at(c, y * factor + dy, x * factor + dx);
        out[(c * h + y) * w + x] = float(acc * inv);
      }
  return Frame::clamped(h, w, std::move(out));
}

Frame upsample_nearest(const Frame& frame, std::size_t factor) {
  if (factor == 0) throw ContractError("upsample_nearest: factor must be >= 1");
  const std::size_t h = frame.height() * factor, w = frame.width() * factor;
  std::vector<float> out(3 * h * w);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) out[(c * h + y) * w + x] = frame.at(c, y / factor, x / factor);
  return Frame(h, w, std::move(out));
}

}  // namespace nvsr
