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

#include "nvsr/optim.hpp"

#include <cmath>
#include <numbers>
#include <unordered_set>

#include "nvsr/error.hpp"
#include "nvsr/schedule.hpp"

namespace nvsr {

void TrainSchedule::validate() const {
  if (total_epochs < 1) throw ConfigError("schedule: total_epochs must be >= 1");
  if (srb_finetune_start < 0 || srb_finetune_start > total_epochs)
    throw ConfigError("schedule: srb_finetune_start must lie in [0, total_epochs]");
  if (!(base_lr > 0)) throw ConfigError("schedule: base_lr must be positive");
  if (warmup_fraction < 0 || warmup_fraction >= 1)
    throw ConfigError("schedule: warmup_fraction must lie in [0, 1)");
  if (eval_every < 0) throw ConfigError("schedule: eval_every must be >= 0");
}

int TrainSchedule::warmup_epochs() const {
  return static_cast<int>(std::floor(warmup_fraction * total_epochs));
}

int TrainSchedule::effective_eval_every() const {
  if (eval_every > 0) return eval_every;
  return std::max(1, total_epochs / 10);
}

double lr_at(int epoch, const TrainSchedule& schedule) {
  if (epoch < 0 || epoch >= schedule.total_epochs)
    throw ContractError("lr_at: epoch " + std::to_string(epoch) + " outside [0, " +
                        std::to_string(schedule.total_epochs) + ")");
  const int warmup = schedule.warmup_epochs();
  if (epoch < warmup) return schedule.base_lr * double(epoch + 1) / double(warmup + 1);
  const int span = schedule.total_epochs - 1 - warmup;
  if (span <= 0) return schedule.base_lr;
  const double progress = double(epoch - warmup) / double(span);
  return schedule.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

bool srb_trainable_at(int epoch, const TrainSchedule& schedule) {
  if (epoch < 0 || epoch >= schedule.total_epochs)
    throw ContractError("srb_trainable_at: epoch " + std::to_string(epoch) + " outside [0, " +
                        std::to_string(schedule.total_epochs) + ")");
  return epoch >= schedule.srb_finetune_start;
}

// ---------------------------------------------------------------------------

template <typename T>
Adam<T>::Adam(std::vector<ParamGroup<T>> groups, AdamOptions options)
    : groups_(std::move(groups)), options_(options) {
  std::unordered_set<const void*> seen;
  std::unordered_set<std::string> names;
  for (auto& g : groups_) {
    if (!names.insert(g.name).second) throw ContractError("Adam: duplicate group name '" + g.name + "'");
    Moments m;
    for (auto& p : g.params) {
      if (!seen.insert(p.node().get()).second)
        throw ContractError("Adam: parameter appears in more than one group");
      m.first.emplace_back(p.numel(), T(0));
      m.second.emplace_back(p.numel(), T(0));
      p.set_trainable(g.trainable);
    }
    moments_.push_back(std::move(m));
  }
}

template <typename T>
void Adam<T>::step(double lr) {
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    if (!groups_[gi].trainable) continue;
    for (auto& p : groups_[gi].params)
      if (!p.has_grad())
        throw ContractError("Adam: trainable parameter in group '" + groups_[gi].name +
                            "' has no gradient");
  }
  const T b1 = T(options_.beta1), b2 = T(options_.beta2), eps = T(options_.eps);
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    auto& g = groups_[gi];
    if (!g.trainable) {
      for (auto& p : g.params) p.zero_grad();
      continue;
    }
    auto& m = moments_[gi];
    ++m.steps;
    const T c1 = T(1) - T(std::pow(options_.beta1, double(m.steps)));
    const T c2 = T(1) - T(std::pow(options_.beta2, double(m.steps)));
    const T step_lr = T(lr);
    for (std::size_t pi = 0; pi < g.params.size(); ++pi) {
      auto& p = g.params[pi];
      auto w = p.data();
      auto grad = p.grad();
      auto& m1 = m.first[pi];
      auto& m2 = m.second[pi];
      for (std::size_t i = 0; i < w.size(); ++i) {
        m1[i] = b1 * m1[i] + (T(1) - b1) * grad[i];
        m2[i] = b2 * m2[i] + (T(1) - b2) * grad[i] * grad[i];
        const T mhat = m1[i] / c1;
        const T vhat = m2[i] / c2;
        w[i] -= step_lr * mhat / (std::sqrt(vhat) + eps);
      }
      p.zero_grad();
    }
  }
  ++step_count_;
}

template <typename T>
std::size_t Adam<T>::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < groups_.size(); ++i)
    if (groups_[i].name == name) return i;
  throw ContractError("Adam: no parameter group named '" + name + "'");
}

template <typename T>
void Adam<T>::set_trainable(const std::string& name, bool flag) {
  const std::size_t i = index_of(name);
  auto& g = groups_[i];
  if (flag && !g.trainable) {
    auto& m = moments_[i];
    for (auto& v : m.first) std::fill(v.begin(), v.end(), T(0));
    for (auto& v : m.second) std::fill(v.begin(), v.end(), T(0));
    m.steps = 0;
  }
  g.trainable = flag;
  for (auto& p : g.params) p.set_trainable(flag);
}

template <typename T>
bool Adam<T>::trainable(const std::string& name) const {
  return groups_[index_of(name)].trainable;
}

template <typename T>
const ParamGroup<T>& Adam<T>::group(const std::string& name) const {
  return groups_[index_of(name)];
}

template <typename T>
typename Adam<T>::Moments& Adam<T>::moments(const std::string& name) {
  return moments_[index_of(name)];
}

template <typename T>
const typename Adam<T>::Moments& Adam<T>::moments(const std::string& name) const {
  return moments_[index_of(name)];
}

template class Adam<float>;
template class Adam<double>;

}  // namespace nvsr
