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

namespace nvsr {

/// Epoch-level plan for one video fit.
struct TrainSchedule {
  int total_epochs = 300;
  /// First epoch at which the SR block receives updates. 0 trains it from the
  /// start; total_epochs keeps it frozen throughout.
  int srb_finetune_start = 150;
  std::uint64_t seed = 0;
  double base_lr = 5e-4;
  double warmup_fraction = 0.1;
  /// Evaluation period in epochs; 0 means every 10% of total_epochs.
  int eval_every = 0;

  void validate() const;
  int warmup_epochs() const;
  int effective_eval_every() const;
};

/// Linear warmup to base_lr, then cosine decay reaching 0 at the last epoch.
double lr_at(int epoch, const TrainSchedule& schedule);

bool srb_trainable_at(int epoch, const TrainSchedule& schedule);

}  // namespace nvsr
