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

#include <cstdint>
#include <string>
#include <vector>

#include "nvsr/tensor.hpp"

namespace nvsr {

/// A named set of parameters that is frozen or trained as a unit.
template <typename T>
struct ParamGroup {
  std::string name;
  std::vector<Tensor<T>> params;
  bool trainable = true;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over parameter groups.
///
/// Frozen groups are skipped entirely: their values, moments and step
/// counters do not move. Unfreezing a group restarts its moments and its
/// bias-correction counter from zero.
template <typename T>
class Adam {
 public:
  struct Moments {
    std::vector<std::vector<T>> first;
    std::vector<std::vector<T>> second;
    std::int64_t steps = 0;  // steps applied since the moments were last reset
  };

  Adam(std::vector<ParamGroup<T>> groups, AdamOptions options = {});

  /// Applies one update with learning rate `lr`, then clears all gradients.
  /// Throws ContractError if a trainable parameter has no gradient.
  void step(double lr);

  void set_trainable(const std::string& group, bool flag);
  bool trainable(const std::string& group) const;

  const std::vector<ParamGroup<T>>& groups() const { return groups_; }
  const ParamGroup<T>& group(const std::string& name) const;
  Moments& moments(const std::string& group);
  const Moments& moments(const std::string& group) const;
  std::int64_t step_count() const { return step_count_; }
  void set_step_count(std::int64_t n) { step_count_ = n; }
  const AdamOptions& options() const { return options_; }

 private:
  std::size_t index_of(const std::string& name) const;

  std::vector<ParamGroup<T>> groups_;
  std::vector<Moments> moments_;
  AdamOptions options_;
  std::int64_t step_count_ = 0;
};

}  // namespace nvsr
