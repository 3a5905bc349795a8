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

// Independent reference implementations. Nothing here calls into the code
// path being checked beyond constructing tensors.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "nvsr/tensor.hpp"

namespace nvsr::testing {

template <typename T>
double max_rel_error(std::span<const T> got, std::span<const T> want) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    diff = std::max(diff, std::abs(double(got[i]) - double(want[i])));
    scale = std::max(scale, std::abs(double(want[i])));
  }
  return diff / std::max(scale, 1e-12);
}

template <typename T>
double max_rel_error(std::span<T> got, std::span<T> want) {
  return max_rel_error(std::span<const T>(got), std::span<const T>(want));
}

/// Seven nested loops, no im2col.
template <typename T>
Tensor<T> naive_conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, std::size_t stride,
                       std::size_t pad) {
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t O = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const std::size_t Ho = (H + 2 * pad - kh) / stride + 1, Wo = (W + 2 * pad - kw) / stride + 1;
  Tensor<T> y({B, O, Ho, Wo});
  auto xd = x.data();
  auto wd = w.data();
  auto yd = y.data();
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t o = 0; o < O; ++o)
      for (std::size_t oy = 0; oy < Ho; ++oy)
        for (std::size_t ox = 0; ox < Wo; ++ox) {
          long double acc = b.defined() ? b.data()[o] : T(0);
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t i = 0; i < kh; ++i)
              for (std::size_t j = 0; j < kw; ++j) {
                const long iy = long(oy * stride + i) - long(pad);
                const long ix = long(ox * stride + j) - long(pad);
                if (iy < 0 || ix < 0 || iy >= long(H) || ix >= long(W)) continue;
                acc += (long double)xd[((n * C + c) * H + iy) * W + ix] *
                       wd[((o * C + c) * kh + i) * kw + j];
              }
          yd[((n * O + o) * Ho + oy) * Wo + ox] = static_cast<T>(acc);
        }
  return y;
}

/// Pixel shuffle as reshape (B,C,r,r,H,W) -> permute (0,1,4,2,5,3) ->
/// reshape (B,C,H*r,W*r), done with explicit strides.
template <typename T>
std::vector<T> shuffle_by_permute(const Tensor<T>& x, std::size_t r) {
  const std::size_t B = x.dim(0), C = x.dim(1) / (r * r), H = x.dim(2), W = x.dim(3);
  const std::size_t in_strides[6] = {C * r * r * H * W, r * r * H * W, r * H * W, H * W, W, 1};
  const std::size_t perm[6] = {0, 1, 4, 2, 5, 3};
  const std::size_t in_dims[6] = {B, C, r, r, H, W};
  std::size_t out_dims[6];
  for (int i = 0; i < 6; ++i) out_dims[i] = in_dims[perm[i]];
  std::vector<T> out(x.numel());
  std::size_t idx[6] = {0, 0, 0, 0, 0, 0};
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    std::size_t src = 0;
    for (int i = 0; i < 6; ++i) src += idx[i] * in_strides[perm[i]];
    out[flat] = x.data()[src];
    for (int i = 5; i >= 0; --i) {
      if (++idx[i] < out_dims[i]) break;
      idx[i] = 0;
    }
  }
  return out;
}

/// exp by Taylor series in extended precision.
inline long double exp_series(long double x) {
  // range-reduce by halving, then square back
  int halvings = 0;
  while (std::fabs(x) > 0.5L) {
    x /= 2;
    ++halvings;
  }
  long double term = 1, sum = 1;
  for (int n = 1; n < 40; ++n) {
    term *= x / n;
    sum += term;
  }
  for (int i = 0; i < halvings; ++i) sum *= sum;
  return sum;
}

/// Tanh-form GELU, 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))), in long double.
inline long double gelu_tanh_reference(long double x) {
  const long double pi = 3.14159265358979323846264338327950288L;
  const long double u = std::sqrt(2.0L / pi) * (x + 0.044715L * x * x * x);
  const long double e = exp_series(2 * u);
  return 0.5L * x * (1 + (e - 1) / (e + 1));
}

}  // namespace nvsr::testing
