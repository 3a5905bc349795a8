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

#include "nvsr/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "nvsr/error.hpp"

namespace nvsr {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr std::array<double, 5> kScaleWeights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

void require_same_dims(const Frame& a, const Frame& b, const char* op) {
  if (!a.same_dims(b) || a.empty())
    throw InvalidShape(std::string(op) + ": frame sizes differ (" + std::to_string(a.height()) + "x" +
                       std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                       std::to_string(b.width()) + ")");
}

struct Plane {
  std::size_t h = 0, w = 0;
  std::vector<double> v;
  double at(std::size_t y, std::size_t x) const { return v[y * w + x]; }
};

Plane plane_of(const Frame& f, std::size_t c) {
  auto p = f.plane(c);
  return Plane{f.height(), f.width(), std::vector<double>(p.begin(), p.end())};
}

const std::array<double, kWindow>& window_taps() {
  static const auto taps = [] {
    std::array<double, kWindow> t{};
    double total = 0;
    for (int i = 0; i < kWindow; ++i) {
      const double d = i - kWindow / 2;
      total += t[i] = std::exp(-d * d / (2 * kSigma * kSigma));
    }
    for (auto& x : t) x /= total;
    return t;
  }();
  return taps;
}

// Separable Gaussian filtering without padding ("valid" region only).
Plane filter_valid(const Plane& p) {
  const auto& g = window_taps();
  const std::size_t ho = p.h - kWindow + 1, wo = p.w - kWindow + 1;
  Plane tmp{p.h, wo, std::vector<double>(p.h * wo)};
  for (std::size_t y = 0; y < p.h; ++y)
    for (std::size_t x = 0; x < wo; ++x) {
      double acc = 0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * p.at(y, x + k);
      tmp.v[y * wo + x] = acc;
    }
  Plane out{ho, wo, std::vector<double>(ho * wo)};
  for (std::size_t y = 0; y < ho; ++y)
    for (std::size_t x = 0; x < wo; ++x) {
      double acc = 0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * tmp.at(y + k, x);
      out.v[y * wo + x] = acc;
    }
  return out;
}

Plane product(const Plane& a, const Plane& b) {
  Plane out{a.h, a.w, std::vector<double>(a.v.size())};
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

/// Mean SSIM and mean contrast-structure term over the valid windows.
std::pair<double, double> ssim_terms(const Plane& x, const Plane& y) {
  const Plane mx = filter_valid(x), my = filter_valid(y);
  const Plane sxx = filter_valid(product(x, x)), syy = filter_valid(product(y, y)),
              sxy = filter_valid(product(x, y));
  double ssim_sum = 0, cs_sum = 0;
  for (std::size_t i = 0; i < mx.v.size(); ++i) {
    const double m1 = mx.v[i], m2 = my.v[i];
    const double v1 = sxx.v[i] - m1 * m1, v2 = syy.v[i] - m2 * m2, cov = sxy.v[i] - m1 * m2;
    const double cs = (2 * cov + kC2) / (v1 + v2 + kC2);
    const double lum = (2 * m1 * m2 + kC1) / (m1 * m1 + m2 * m2 + kC1);
    cs_sum += cs;
    ssim_sum += lum * cs;
  }
  const double n = double(mx.v.size());
  return {ssim_sum / n, cs_sum / n};
}

Plane halve(const Plane& p) {
  const std::size_t h = p.h / 2, w = p.w / 2;
  Plane out{h, w, std::vector<double>(h * w)};
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      out.v[y * w + x] =
          0.25 * (p.at(2 * y, 2 * x) + p.at(2 * y, 2 * x + 1) + p.at(2 * y + 1, 2 * x) + p.at(2 * y + 1, 2 * x + 1));
  return out;
}

}  // namespace

double mse(const Frame& a, const Frame& b) {
  require_same_dims(a, b, "mse");
  double acc = 0;
  const auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = double(x[i]) - double(y[i]);
    acc += d * d;
  }
  return acc / double(x.size());
}

double psnr(const Frame& a, const Frame& b) {
  const double e = mse(a, b);
  if (e <= 0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / e));
}

int ms_ssim_scales(std::size_t height, std::size_t width) {
  std::size_t side = std::min(height, width);
  int scales = 0;
  while (scales < int(kScaleWeights.size()) && side >= std::size_t(kWindow)) {
    ++scales;
    side /= 2;
  }
  return scales;
}

double ssim(const Frame& a, const Frame& b) {
  require_same_dims(a, b, "ssim");
  if (ms_ssim_scales(a.height(), a.width()) < 1)
    throw ContractError("ssim: image smaller than the 11x11 window");
  double total = 0;
  for (std::size_t c = 0; c < 3; ++c) total += ssim_terms(plane_of(a, c), plane_of(b, c)).first;
  return total / 3.0;
}

double ms_ssim(const Frame& a, const Frame& b) {
  require_same_dims(a, b, "ms_ssim");
  const int scales = ms_ssim_scales(a.height(), a.width());
  if (scales < 1) throw ContractError("ms_ssim: image smaller than the 11x11 window");
  double weight_total = 0;
  for (int s = 0; s < scales; ++s) weight_total += kScaleWeights[s];

  double total = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    Plane x = plane_of(a, c), y = plane_of(b, c);
    double value = 1.0;
    for (int s = 0; s < scales; ++s) {
      const auto [full, cs] = ssim_terms(x, y);
      const double term = (s == scales - 1) ? full : cs;
      value *= std::pow(std::max(term, 0.0), kScaleWeights[s] / weight_total);
      if (s + 1 < scales) {
        x = halve(x);
        y = halve(y);
      }
    }
    total += value;
  }
  return total / 3.0;
}

void MetricReport::add(double psnr_value, double ms_ssim_value) {
  psnr_db.push_back(psnr_value);
  ms_ssim.push_back(ms_ssim_value);
}

double MetricReport::mean_psnr() const {
  if (psnr_db.empty()) return 0.0;
  return std::accumulate(psnr_db.begin(), psnr_db.end(), 0.0) / double(psnr_db.size());
}

double MetricReport::mean_ms_ssim() const {
  if (ms_ssim.empty()) return 0.0;
  return std::accumulate(ms_ssim.begin(), ms_ssim.end(), 0.0) / double(ms_ssim.size());
}

std::string MetricReport::to_csv() const {
  std::string out = "frame_index,psnr_db,ms_ssim\n";
  char line[96];
  for (std::size_t k = 0; k < size(); ++k) {
    std::snprintf(line, sizeof(line), "%zu,%.6f,%.8f\n", k, psnr_db[k], ms_ssim[k]);
    out += line;
  }
  std::snprintf(line, sizeof(line), "mean,%.6f,%.8f\n", mean_psnr(), mean_ms_ssim());
  out += line;
  return out;
}

MetricReport evaluate_frames(const std::vector<Frame>& reconstructed, const std::vector<Frame>& reference) {
  if (reconstructed.size() != reference.size())
    throw InvalidShape("evaluate_frames: frame counts differ");
  MetricReport report;
  for (std::size_t k = 0; k < reference.size(); ++k)
    report.add(psnr(reconstructed[k], reference[k]), ms_ssim(reconstructed[k], reference[k]));
  return report;
}

}  // namespace nvsr
