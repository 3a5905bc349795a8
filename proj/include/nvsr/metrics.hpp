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

#include <string>
#include <vector>

#include "nvsr/media.hpp"

namespace nvsr {

inline constexpr double kPsnrCapDb = 100.0;

/// Peak 1.0; identical frames report kPsnrCapDb.
double psnr(const Frame& a, const Frame& b);
double mse(const Frame& a, const Frame& b);

/// Multi-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, scale weights {0.0448, 0.2856, 0.3001, 0.2363, 0.1333}.
/// Images too small for five scales use the largest feasible count with
/// the leading weights renormalized. Channels are scored independently and
/// averaged.
double ms_ssim(const Frame& a, const Frame& b);

/// Number of scales ms_ssim uses for an image of this size (0 if < 11 px).
int ms_ssim_scales(std::size_t height, std::size_t width);

/// Single-scale SSIM with the same window and constants.
double ssim(const Frame& a, const Frame& b);

struct MetricReport {
  std::vector<double> psnr_db;
  std::vector<double> ms_ssim;

  void add(double psnr_value, double ms_ssim_value);
  std::size_t size() const { return psnr_db.size(); }
  double mean_psnr() const;
  double mean_ms_ssim() const;

  /// frame_index,psnr_db,ms_ssim rows followed by a "mean" row.
  std::string to_csv() const;
};

MetricReport evaluate_frames(const std::vector<Frame>& reconstructed, const std::vector<Frame>& reference);

}  // namespace nvsr
