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

#include <algorithm>
#include <initializer_list>
#include <memory>
#include <thread>
#include <utility>
#include <vector>

#include "nvsr/tensor.hpp"

namespace nvsr::detail {

/// Builds an op result; attaches `fn` only if some input needs a gradient.
template <typename T>
Tensor<T> record(Shape shape, std::vector<T> data,
                 std::initializer_list<std::shared_ptr<TensorNode<T>>> inputs,
                 std::function<void(TensorNode<T>&)> fn) {
  auto node = std::make_shared<TensorNode<T>>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  for (const auto& p : inputs)
    if (p && p->requires_grad()) node->parents.push_back(p);
  if (!node->parents.empty()) node->backward_fn = std::move(fn);
  return Tensor<T>::wrap(std::move(node));
}

/// Runs fn(begin, end) over [0, n) split into contiguous chunks, one per
/// worker. Chunk boundaries depend only on n and the thread count.
template <typename Fn>
void parallel_ranges(std::size_t n, std::size_t min_chunk, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(num_threads(), 1), std::max<std::size_t>(n / min_chunk, 1));
  if (workers <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t step = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * step;
    const std::size_t e = std::min(n, b + step);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace nvsr::detail
