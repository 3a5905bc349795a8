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

// Central finite-difference oracle shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "nvsr/tensor.hpp"

namespace nvsr::testing {

template <typename T>
Tensor<T> random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0,
                        bool trainable = false) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<T> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<T>(dist(rng));
  Tensor<T> t(std::move(shape), std::move(v));
  t.set_trainable(trainable);
  return t;
}

/// ||analytic - numeric||_2 / max(||analytic||_2, ||numeric||_2), computed
/// over every element of every parameter. `objective` must rebuild the graph
/// from the current parameter values on each call.
template <typename T>
double gradient_rel_error(const std::function<Tensor<T>()>& objective, std::vector<Tensor<T>> params,
                          double step) {
  for (auto& p : params) p.zero_grad();
  objective().backward();
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (auto& p : params) {
    std::vector<T> analytic(p.grad().begin(), p.grad().end());
    if (analytic.empty()) analytic.assign(p.numel(), T(0));
    auto values = p.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const T saved = values[i];
      values[i] = saved + static_cast<T>(step);
      const double up = double(objective().item());
      values[i] = saved - static_cast<T>(step);
      const double down = double(objective().item());
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = double(analytic[i]);
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
    }
  }
  const double denom = std::max(std::sqrt(std::max(a2, n2)), 1e-300);
  return std::sqrt(diff2) / denom;
}

}  // namespace nvsr::testing
