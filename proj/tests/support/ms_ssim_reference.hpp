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

// Slow multi-scale SSIM: every window is visited with a full 2-D weight mask
// and centered moments, in long double.

#include <cmath>
#include <vector>

#include "nvsr/media.hpp"

namespace nvsr::testing {

struct RefImage {
  std::size_t h, w;
  std::vector<long double> px;
  long double operator()(std::size_t y, std::size_t x) const { return px[y * w + x]; }
};

inline RefImage ref_channel(const Frame& f, std::size_t c) {
  RefImage img{f.height(), f.width(), {}};
  for (std::size_t y = 0; y < f.height(); ++y)
    for (std::size_t x = 0; x < f.width(); ++x) img.px.push_back(f.at(c, y, x));
  return img;
}

inline RefImage ref_halve(const RefImage& a) {
  RefImage out{a.h / 2, a.w / 2, {}};
  for (std::size_t y = 0; y < out.h; ++y)
    for (std::size_t x = 0; x < out.w; ++x)
      out.px.push_back((a(2 * y, 2 * x) + a(2 * y + 1, 2 * x) + a(2 * y, 2 * x + 1) + a(2 * y + 1, 2 * x + 1)) / 4);
  return out;
}

/// {mean ssim, mean contrast-structure} over all fully contained windows.
inline std::pair<long double, long double> ref_ssim_terms(const RefImage& a, const RefImage& b) {
  long double mask[11][11], total = 0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j)
      total += mask[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5L * 1.5L));
  const long double c1 = 0.0001L, c2 = 0.0009L;
  long double ssim_sum = 0, cs_sum = 0;
  std::size_t count = 0;
  for (std::size_t y = 0; y + 11 <= a.h; ++y)
    for (std::size_t x = 0; x + 11 <= a.w; ++x) {
      long double ma = 0, mb = 0;
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          ma += mask[i][j] / total * a(y + i, x + j);
          mb += mask[i][j] / total * b(y + i, x + j);
        }
      long double va = 0, vb = 0, cov = 0;
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          const long double wgt = mask[i][j] / total;
          const long double da = a(y + i, x + j) - ma, db = b(y + i, x + j) - mb;
          va += wgt * da * da;
          vb += wgt * db * db;
          cov += wgt * da * db;
        }
      const long double cs = (2 * cov + c2) / (va + vb + c2);
      ssim_sum += cs * (2 * ma * mb + c1) / (ma * ma + mb * mb + c1);
      cs_sum += cs;
      ++count;
    }
  return {ssim_sum / count, cs_sum / count};
}

inline double reference_ms_ssim(const Frame& a, const Frame& b, int scales) {
  const long double weights[5] = {0.0448L, 0.2856L, 0.3001L, 0.2363L, 0.1333L};
  long double norm = 0;
  for (int s = 0; s < scales; ++s) norm += weights[s];
  long double mean = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    RefImage x = ref_channel(a, c), y = ref_channel(b, c);
    long double v = 1;
    for (int s = 0; s < scales; ++s) {
      const auto terms = ref_ssim_terms(x, y);
      const long double t = s + 1 == scales ? terms.first : terms.second;
      v *= std::pow(t < 0 ? 0.0L : t, weights[s] / norm);
      x = ref_halve(x);
      y = ref_halve(y);
    }
    mean += v / 3;
  }
  return double(mean);
}

}  // namespace nvsr::testing
