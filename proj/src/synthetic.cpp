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

#include "nvsr/synthetic.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "nvsr/error.hpp"
#include "nvsr/random.hpp"

namespace nvsr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Color = std::array<double, 3>;

Color random_color(Rng& rng, double lo, double hi) {
  return {uniform_draw(rng, lo, hi), uniform_draw(rng, lo, hi), uniform_draw(rng, lo, hi)};
}

std::size_t wrap(long v, std::size_t n) {
  const long m = long(n);
  return std::size_t(((v % m) + m) % m);
}

VideoClip moving_checker(int frames, std::size_t h, std::size_t w, Rng& rng, const SyntheticOptions& o) {
  const Color a = random_color(rng, 0.05, 0.45), b = random_color(rng, 0.55, 0.95);
  const std::size_t cell = std::size_t(std::max(1, o.checker_cell));
  std::vector<float> base(3 * h * w);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        base[(c * h + y) * w + x] = float(((y / cell + x / cell) % 2) ? b[c] : a[c]);
  std::vector<Frame> out;
  for (int t = 0; t < frames; ++t) {
    std::vector<float> v(base.size());
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          const std::size_t sy = wrap(long(y) - long(t) * o.velocity_y, h);
          const std::size_t sx = wrap(long(x) - long(t) * o.velocity_x, w);
          v[(c * h + y) * w + x] = base[(c * h + sy) * w + sx];
        }
    out.emplace_back(h, w, std::move(v));
  }
  return VideoClip(std::move(out));
}

struct Wave {
  double fy, fx, phase, speed, amplitude;
};

// 0.5 plus two low-frequency waves per channel, phases advancing with t.
struct SmoothField {
  std::array<std::array<Wave, 2>, 3> waves;

  explicit SmoothField(Rng& rng, double amplitude) {
    for (auto& channel : waves)
      for (auto& wv : channel)
        wv = {double(1 + index_draw(rng, 2)), double(1 + index_draw(rng, 2)), uniform_draw(rng, 0, kTwoPi),
              uniform_draw(rng, 0.15, 0.4), amplitude};
  }
  double at(std::size_t c, double y, double x, double h, double w, int t) const {
    double v = 0.5;
    for (const auto& wv : waves[c]) v += wv.amplitude * std::sin(kTwoPi * (wv.fy * y / h + wv.fx * x / w) + wv.phase + wv.speed * t);
    return v;
  }
};

VideoClip gradient_drift(int frames, std::size_t h, std::size_t w, Rng& rng) {
  const SmoothField field(rng, 0.2);
  std::vector<Frame> out;
  for (int t = 0; t < frames; ++t) {
    std::vector<float> v(3 * h * w);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
          v[(c * h + y) * w + x] = float(field.at(c, double(y), double(x), double(h), double(w), t));
    out.push_back(Frame::clamped(h, w, std::move(v)));
  }
  return VideoClip(std::move(out));
}

struct Blob {
  double y, x, vy, vx, radius;
  Color color;
};

VideoClip textured_noise(int frames, std::size_t h, std::size_t w, Rng& rng, const SyntheticOptions& o) {
  const SmoothField field(rng, 0.08);
  std::vector<Blob> blobs(3);
  for (auto& b : blobs) {
    b.y = uniform_draw(rng, 0, double(h));
    b.x = uniform_draw(rng, 0, double(w));
    b.vy = uniform_draw(rng, -1.5, 1.5);
    b.vx = uniform_draw(rng, -2.5, 2.5);
    b.radius = uniform_draw(rng, 0.12, 0.25) * double(std::min(h, w));
    b.color = random_color(rng, -0.2, 0.2);
  }
  // Static texture on a grid of texture_cell x texture_cell blocks.
  const std::size_t cell = std::size_t(std::max(1, o.texture_cell));
  const std::size_t ch = (h + cell - 1) / cell, cw = (w + cell - 1) / cell;
  std::vector<double> texture(3 * ch * cw);
  for (auto& v : texture) v = uniform_draw(rng, -0.5, 0.5) * o.texture_amplitude;

  std::vector<Frame> out;
  for (int t = 0; t < frames; ++t) {
    std::vector<float> v(3 * h * w);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          double s = field.at(c, double(y), double(x), double(h), double(w), t);
          for (const auto& b : blobs) {
            const double dy = double(y) - (b.y + b.vy * t), dx = double(x) - (b.x + b.vx * t);
            s += b.color[c] * std::exp(-(dy * dy + dx * dx) / (2 * b.radius * b.radius));
          }
          v[(c * h + y) * w + x] = float(s + texture[(c * ch + y / cell) * cw + x / cell]);
        }
    out.push_back(Frame::clamped(h, w, std::move(v)));
  }
  return VideoClip(std::move(out));
}

}  // namespace

std::string_view synthetic_kind_name(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::moving_checker: return "moving-checker";
    case SyntheticKind::textured_noise: return "textured-noise";
    case SyntheticKind::gradient_drift: return "gradient-drift";
  }
  return "?";
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  for (auto k : {SyntheticKind::moving_checker, SyntheticKind::textured_noise, SyntheticKind::gradient_drift})
    if (synthetic_kind_name(k) == name) return k;
  throw ConfigError("unknown synthetic kind '" + std::string(name) +
                    "' (expected moving-checker, textured-noise or gradient-drift)");
}

VideoClip make_synthetic_video(SyntheticKind kind, int frames, int height, int width, std::uint64_t seed,
                               const SyntheticOptions& options) {
  if (frames < 1 || height < 1 || width < 1)
    throw ConfigError("synthetic clip needs frames, height and width >= 1, got " + std::to_string(frames) + "x" +
                      std::to_string(height) + "x" + std::to_string(width));
  Rng rng(derive_seed(seed, 77));
  const auto h = std::size_t(height), w = std::size_t(width);
  switch (kind) {
    case SyntheticKind::moving_checker: return moving_checker(frames, h, w, rng, options);
    case SyntheticKind::gradient_drift: return gradient_drift(frames, h, w, rng);
    case SyntheticKind::textured_noise: return textured_noise(frames, h, w, rng, options);
  }
  throw ConfigError("unknown synthetic kind");
}

std::vector<Frame> make_texture_corpus(int count, int height, int width, std::uint64_t seed) {
  constexpr SyntheticKind kinds[] = {SyntheticKind::moving_checker, SyntheticKind::textured_noise,
                                     SyntheticKind::gradient_drift};
  std::vector<Frame> out;
  for (int i = 0; i < count; ++i) {
    SyntheticOptions options;
    options.checker_cell = 3 + i;
    out.push_back(make_synthetic_video(kinds[i % 3], 1, height, width, seed + std::uint64_t(i), options)[0]);
  }
  return out;
}

}  // namespace nvsr
