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

#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "nvsr/error.hpp"
#include "nvsr/media.hpp"
#include "support/tempdir.hpp"

using namespace nvsr;
using nvsr::testing::TempDir;

namespace {

Frame random_frame(std::size_t h, std::size_t w, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.f, 1.f);
  std::vector<float> v(3 * h * w);
  for (auto& x : v) x = u(rng);
  return Frame(h, w, std::move(v));
}

std::vector<unsigned char> ppm_bytes(const std::string& header, std::vector<unsigned char> px) {
  std::vector<unsigned char> b(header.begin(), header.end());
  b.insert(b.end(), px.begin(), px.end());
  return b;
}

}  // namespace

TEST_CASE("frame validation") {
  CHECK_THROWS_AS(Frame(0, 2), ContractError);
  CHECK_THROWS_AS(Frame(1, 1, std::vector<float>{0.f, 0.5f, 1.5f}), ContractError);
  CHECK_THROWS_AS(Frame(1, 1, std::vector<float>{0.f, 0.5f}), InvalidShape);
  auto f = Frame::clamped(1, 1, {-0.5f, 0.5f, 2.f});
  CHECK(f.at(0, 0, 0) == 0.f);
  CHECK(f.at(2, 0, 0) == 1.f);
}

TEST_CASE("2x2 ppm decodes to byte/255") {
  // row-major interleaved RGB
  std::vector<unsigned char> px{0, 51, 255, 10, 20, 30, 128, 64, 32, 1, 2, 3};
  auto f = decode_ppm(ppm_bytes("P6\n# comment\n2 2\n255\n", px));
  REQUIRE(f.height() == 2);
  REQUIRE(f.width() == 2);
  CHECK(f.at(0, 0, 0) == 0.f);
  CHECK(f.at(1, 0, 0) == 51.f / 255.f);
  CHECK(f.at(2, 0, 0) == 1.f);
  CHECK(f.at(0, 0, 1) == 10.f / 255.f);
  CHECK(f.at(1, 1, 0) == 64.f / 255.f);
  CHECK(f.at(2, 1, 1) == 3.f / 255.f);
  CHECK(encode_ppm(f) == ppm_bytes("P6\n2 2\n255\n", px));
}

TEST_CASE("ppm save/load roundtrip") {
  TempDir dir;
  std::mt19937_64 rng(31);
  auto f = random_frame(7, 5, rng);
  save_frame(f, dir / "a.ppm");
  auto g = load_frame(dir / "a.ppm");
  double worst = 0;
  for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, double(std::abs(f.data()[i] - g.data()[i])));
  CHECK(worst <= 1.0 / 510.0 + 1e-7);

  save_frame(g, dir / "b.ppm");
  CHECK(read_file(dir / "a.ppm") == read_file(dir / "b.ppm"));
  CHECK(load_frame(dir / "b.ppm") == g);
}

TEST_CASE("ppm decode errors") {
  std::vector<unsigned char> px(12, 7);
  CHECK_THROWS_AS(decode_ppm(ppm_bytes("P3\n2 2\n255\n", px)), DecodeError);
  CHECK_THROWS_AS(decode_ppm(ppm_bytes("P6\n2 2\n65535\n", px)), UnsupportedFormat);
  try {
    decode_ppm(ppm_bytes("P6\n2 2\n255\n", std::vector<unsigned char>(5, 0)));
    FAIL("expected DecodeError");
  } catch (const DecodeError& e) {
    CHECK(e.offset() == 16);
  }
  try {
    decode_ppm(ppm_bytes("P6\nxx 2\n255\n", px));
    FAIL("expected DecodeError");
  } catch (const DecodeError& e) {
    CHECK(e.offset() == 3);
  }
}

TEST_CASE("video directory ordering and time indices") {
  TempDir dir;
  std::mt19937_64 rng(32);
  std::vector<Frame> frames;
  for (int k = 0; k < 3; ++k) frames.push_back(Frame(2, 3, float(k) / 4.f));
  save_video(VideoClip(frames), dir.path());
  CHECK(std::filesystem::exists(dir / "000.ppm"));
  CHECK(std::filesystem::exists(dir / "002.ppm"));
  auto clip = load_video(dir.path());
  REQUIRE(clip.size() == 3);
  CHECK(clip.time_index(0) == 0.0);
  CHECK(clip.time_index(1) == 0.5);
  CHECK(clip.time_index(2) == 1.0);
  CHECK(clip[2].at(0, 0, 0) == 128.f / 255.f);

  save_frame(Frame(4, 4), dir / "003.ppm");
  CHECK_THROWS_AS(load_video(dir.path()), InvalidClip);
  CHECK(VideoClip({Frame(2, 2)}).time_index(0) == 0.0);
  CHECK_THROWS_AS(VideoClip(std::vector<Frame>{}), InvalidClip);
}

TEST_CASE("raw clip container roundtrip is bit-exact") {
  std::mt19937_64 rng(33);
  std::vector<Frame> frames;
  for (int k = 0; k < 8; ++k) frames.push_back(random_frame(4, 6, rng));
  VideoClip clip(frames);
  auto bytes = encode_clip(clip);
  // header fields read back directly
  auto u32 = [&](std::size_t at) {
    return std::uint32_t(bytes[at]) | std::uint32_t(bytes[at + 1]) << 8 | std::uint32_t(bytes[at + 2]) << 16 |
           std::uint32_t(bytes[at + 3]) << 24;
  };
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "NVSR");
  CHECK(u32(4) == kClipFormatVersion);
  CHECK(u32(8) == 8);
  CHECK(u32(12) == 4);
  CHECK(u32(16) == 6);
  CHECK(bytes.size() == 20 + 8 * 3 * 4 * 6 * 4);
  auto back = decode_clip(bytes);
  CHECK(back == clip);
  for (std::size_t k = 0; k < clip.size(); ++k) CHECK(back.time_index(k) == clip.time_index(k));

  TempDir dir;
  save_clip_raw(clip, dir / "clip.nvsr");
  CHECK(load_video(dir / "clip.nvsr") == clip);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_clip(bad), DecodeError);
  bad = bytes;
  bad[4] = 9;
  CHECK_THROWS_AS(decode_clip(bad), UnsupportedFormat);
  bad = bytes;
  bad.resize(bad.size() - 3);
  CHECK_THROWS_AS(decode_clip(bad), DecodeError);
}

TEST_CASE("center crop") {
  auto make = [](std::size_t n) {
    std::vector<float> v(3 * n * n);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) v[(c * n + y) * n + x] = float(y * 10 + x) / 100.f;
    return Frame(n, n, std::move(v));
  };
  auto five = make(5);
  CHECK(center_crop(five, 5, 5) == five);
  auto c5 = center_crop(five, 3, 3);
  CHECK(c5.at(0, 0, 0) == five.at(0, 1, 1));
  CHECK(c5.at(2, 2, 2) == five.at(2, 3, 3));
  auto six = make(6);
  auto c6 = center_crop(six, 3, 3);
  CHECK(c6.at(1, 0, 0) == six.at(1, 1, 1));
  CHECK(c6.at(1, 2, 2) == six.at(1, 3, 3));
  CHECK_THROWS_AS(center_crop(five, 6, 3), InvalidCrop);
}
