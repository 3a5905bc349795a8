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
#include <sstream>

#include "doctest.h"
#include "nvsr/error.hpp"
#include "nvsr/metrics.hpp"
#include "support/ms_ssim_reference.hpp"

using namespace nvsr;

namespace {

Frame random_frame(std::size_t h, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.f, 1.f);
  std::vector<float> v(3 * h * w);
  for (auto& x : v) x = u(rng);
  return Frame(h, w, std::move(v));
}

// Smooth content plus noise so that structure terms are far from zero.
Frame noisy_copy(const Frame& f, float amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.f, 1.f);
  std::vector<float> v(f.data().begin(), f.data().end());
  for (auto& x : v) x += amplitude * u(rng);
  return Frame::clamped(f.height(), f.width(), std::move(v));
}

Frame gradient_frame(std::size_t h, std::size_t w) {
  std::vector<float> v(3 * h * w);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        v[(c * h + y) * w + x] = 0.2f + 0.6f * float(x + y * (c + 1)) / float(w + h * 3);
  return Frame(h, w, std::move(v));
}

}  // namespace

TEST_CASE("psnr") {
  Frame a(4, 4, 0.5f);
  CHECK(psnr(a, a) == kPsnrCapDb);
  // uniform offset of 0.1: mse 0.01 -> 20 dB
  Frame b(4, 4, 0.6f);
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-5));
  CHECK(psnr(a, b) == psnr(b, a));
  CHECK_THROWS_AS(psnr(a, Frame(4, 5)), InvalidShape);

  auto base = gradient_frame(32, 32);
  double previous = kPsnrCapDb + 1;
  for (float amp : {0.01f, 0.02f, 0.05f, 0.1f, 0.2f}) {
    const double p = psnr(base, noisy_copy(base, amp, 9));
    CHECK(p < previous);
    previous = p;
  }
}

TEST_CASE("scale count adapts to image size") {
  CHECK(ms_ssim_scales(10, 100) == 0);
  CHECK(ms_ssim_scales(11, 11) == 1);
  CHECK(ms_ssim_scales(21, 40) == 1);
  CHECK(ms_ssim_scales(22, 40) == 2);
  CHECK(ms_ssim_scales(64, 64) == 3);
  CHECK(ms_ssim_scales(64, 128) == 3);
  CHECK(ms_ssim_scales(176, 176) == 5);
  CHECK(ms_ssim_scales(1000, 1000) == 5);
  CHECK_THROWS_AS(ms_ssim(Frame(10, 20), Frame(10, 20)), ContractError);
}

TEST_CASE("ms-ssim matches the direct windowed reference") {
  auto a = random_frame(64, 64, 50);
  auto b = noisy_copy(a, 0.3f, 51);
  const double want = testing::reference_ms_ssim(a, b, 3);
  CHECK(std::abs(ms_ssim(a, b) - want) <= 1e-6);

  auto g = gradient_frame(48, 80);
  auto h = noisy_copy(g, 0.1f, 52);
  CHECK(std::abs(ms_ssim(g, h) - testing::reference_ms_ssim(g, h, 3)) <= 1e-6);
  CHECK(std::abs(ms_ssim(g, h) - ms_ssim(h, g)) <= 1e-12);
}

TEST_CASE("ssim of constant frames has a closed form") {
  Frame a(16, 16, 0.4f), b(16, 16, 0.6f);
  const double m1 = double(0.4f), m2 = double(0.6f), c1 = 1e-4;
  const double want = (2 * m1 * m2 + c1) / (m1 * m1 + m2 * m2 + c1);
  CHECK(std::abs(ssim(a, b) - want) <= 1e-9);
  // single scale at 16x16, so ms_ssim reduces to the same value
  CHECK(std::abs(ms_ssim(a, b) - want) <= 1e-9);
}

TEST_CASE("ms-ssim identity and monotonicity") {
  auto base = gradient_frame(64, 96);
  CHECK(ms_ssim(base, base) == doctest::Approx(1.0).epsilon(1e-12));
  double previous = 1.0 + 1e-9;
  for (float amp : {0.01f, 0.03f, 0.1f, 0.3f}) {
    const double s = ms_ssim(base, noisy_copy(base, amp, 53));
    CHECK(s < previous);
    CHECK(s > 0.0);
    previous = s;
  }
}

TEST_CASE("report csv and means") {
  std::vector<Frame> ref, rec;
  for (int k = 0; k < 4; ++k) {
    ref.push_back(gradient_frame(24, 24));
    rec.push_back(noisy_copy(ref.back(), 0.02f * float(k), 60 + k));
  }
  auto report = evaluate_frames(rec, ref);
  REQUIRE(report.size() == 4);
  CHECK(report.psnr_db[0] == kPsnrCapDb);
  CHECK(report.ms_ssim[0] == doctest::Approx(1.0));
  double sum = 0;
  for (double p : report.psnr_db) sum += p;
  CHECK(std::abs(report.mean_psnr() - sum / 4) <= 1e-9);

  // permuting frames changes rows but not the clip means
  std::swap(rec[1], rec[3]);
  std::swap(ref[1], ref[3]);
  auto permuted = evaluate_frames(rec, ref);
  CHECK(std::abs(permuted.mean_psnr() - report.mean_psnr()) <= 1e-9);
  CHECK(std::abs(permuted.mean_ms_ssim() - report.mean_ms_ssim()) <= 1e-12);

  std::istringstream csv(report.to_csv());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "frame_index,psnr_db,ms_ssim");
  CHECK(lines[1].rfind("0,100.000000,1.00000000", 0) == 0);
  CHECK(lines[5].rfind("mean,", 0) == 0);

  CHECK_THROWS_AS(evaluate_frames(rec, {ref[0]}), InvalidShape);
}
