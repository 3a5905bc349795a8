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

#include "nvsr/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "nvsr/error.hpp"
#include "tensor_internal.hpp"

namespace nvsr {

namespace {
std::atomic<int> g_num_threads{0};
}  // namespace

void set_num_threads(int n) { g_num_threads.store(std::max(n, 0)); }
int num_threads() { return g_num_threads.load(); }

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : node_(std::make_shared<Node>()) {
  node_->data.assign(shape_numel(shape), fill);
  node_->shape = std::move(shape);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : node_(std::make_shared<Node>()) {
  if (values.size() != shape_numel(shape))
    throw InvalidShape("tensor data length " + std::to_string(values.size()) +
                       " does not match shape " + shape_str(shape));
  node_->shape = std::move(shape);
  node_->data = std::move(values);
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return node_->data[0];
}

template <typename T>
void Tensor<T>::backward() const {
  if (!defined() || numel() != 1)
    throw ContractError("backward() requires a scalar root");
  if (!node_->requires_grad())
    throw ContractError("backward() on a tensor with no recorded graph");

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  // Interior gradients belong to this pass only; leaves accumulate across passes.
  for (Node* n : order)
    if (n->backward_fn) n->grad.clear();
  node_->ensure_grad();
  node_->grad[0] += T(1);

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

template class Tensor<float>;
template class Tensor<double>;

// ---------------------------------------------------------------------------

namespace {

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape())
    throw InvalidShape(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                       shape_str(b.shape()));
}

}  // namespace

template <typename T>
Tensor<T> elementwise(ElementwiseKind kind, const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "elementwise");
  const auto& x = a.storage();
  const auto& y = b.storage();
  std::vector<T> out(x.size());
  switch (kind) {
    case ElementwiseKind::add:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
      break;
    case ElementwiseKind::sub:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
      break;
    case ElementwiseKind::mul:
    case ElementwiseKind::scale:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
      break;
  }
  auto an = a.node();
  auto bn = b.node();
  const bool ga = an->requires_grad();
  const bool gb = bn->requires_grad();
  return detail::record<T>(a.shape(), std::move(out), {an, bn}, [=](detail::TensorNode<T>& o) {
    const auto& g = o.grad;
    if (ga) {
      an->ensure_grad();
      auto& da = an->grad;
      if (kind == ElementwiseKind::add || kind == ElementwiseKind::sub) {
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * bn->data[i];
      }
    }
    if (gb) {
      bn->ensure_grad();
      auto& db = bn->grad;
      switch (kind) {
        case ElementwiseKind::add:
          for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i];
          break;
        case ElementwiseKind::sub:
          for (std::size_t i = 0; i < g.size(); ++i) db[i] -= g[i];
          break;
        default:
          for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * an->data[i];
      }
    }
  });
}

template <typename T>
Tensor<T> elementwise(ElementwiseKind kind, const Tensor<T>& a, T b) {
  const auto& x = a.storage();
  std::vector<T> out(x.size());
  T factor = T(1);
  switch (kind) {
    case ElementwiseKind::add:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + b;
      break;
    case ElementwiseKind::sub:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - b;
      break;
    case ElementwiseKind::mul:
    case ElementwiseKind::scale:
      factor = b;
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * b;
      break;
  }
  auto an = a.node();
  return detail::record<T>(a.shape(), std::move(out), {an}, [=](detail::TensorNode<T>& o) {
    an->ensure_grad();
    for (std::size_t i = 0; i < o.grad.size(); ++i) an->grad[i] += factor * o.grad[i];
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  T s = T(0);
  for (T v : a.storage()) s += v;
  auto an = a.node();
  return detail::record<T>(Shape{}, {s}, {an}, [=](detail::TensorNode<T>& o) {
    an->ensure_grad();
    const T g = o.grad[0];
    for (auto& d : an->grad) d += g;
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  return scale(sum(a), T(1) / static_cast<T>(a.numel()));
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (shape_numel(shape) != a.numel())
    throw InvalidShape("reshape " + shape_str(a.shape()) + " -> " + shape_str(shape));
  auto an = a.node();
  return detail::record<T>(std::move(shape), a.storage(), {an}, [=](detail::TensorNode<T>& o) {
    an->ensure_grad();
    for (std::size_t i = 0; i < o.grad.size(); ++i) an->grad[i] += o.grad[i];
  });
}

namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

template <typename T>
T sigmoid_scalar(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace

template <typename T>
Tensor<T> activation(ActivationKind kind, const Tensor<T>& x) {
  const auto& v = x.storage();
  std::vector<T> out(v.size());
  if (kind == ActivationKind::gelu) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const T u = T(kGeluC) * (v[i] + T(kGeluA) * v[i] * v[i] * v[i]);
      out[i] = T(0.5) * v[i] * (T(1) + std::tanh(u));
    }
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = sigmoid_scalar(v[i]);
  }
  auto xn = x.node();
  if (kind == ActivationKind::gelu) {
    return detail::record<T>(x.shape(), std::move(out), {xn}, [=](detail::TensorNode<T>& o) {
      xn->ensure_grad();
      for (std::size_t i = 0; i < o.grad.size(); ++i) {
        const T z = xn->data[i];
        const T th = std::tanh(T(kGeluC) * (z + T(kGeluA) * z * z * z));
        const T du = T(kGeluC) * (T(1) + T(3 * kGeluA) * z * z);
        const T d = T(0.5) * (T(1) + th) + T(0.5) * z * (T(1) - th * th) * du;
        xn->grad[i] += o.grad[i] * d;
      }
    });
  }
  return detail::record<T>(x.shape(), std::move(out), {xn}, [=](detail::TensorNode<T>& o) {
    xn->ensure_grad();
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      const T s = o.data[i];
      xn->grad[i] += o.grad[i] * s * (T(1) - s);
    }
  });
}

template <typename T>
Tensor<T> logit(const Tensor<T>& x, T eps) {
  const auto& v = x.storage();
  std::vector<T> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const T c = std::clamp(v[i], eps, T(1) - eps);
    out[i] = std::log(c / (T(1) - c));
  }
  auto xn = x.node();
  return detail::record<T>(x.shape(), std::move(out), {xn}, [=](detail::TensorNode<T>& o) {
    xn->ensure_grad();
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      const T z = xn->data[i];
      if (z < eps || z > T(1) - eps) continue;
      xn->grad[i] += o.grad[i] / (z * (T(1) - z));
    }
  });
}

template <typename T>
Tensor<T> loss(LossKind kind, const Tensor<T>& pred, const Tensor<T>& target) {
  require_same_shape(pred, target, "loss");
  if (target.requires_grad()) throw ContractError("loss: target must not require a gradient");
  const auto& p = pred.storage();
  const auto& t = target.storage();
  const std::size_t n = p.size();
  // Accumulate in double so single-precision losses over large frames stay stable.
  double acc = 0.0;
  if (kind == LossKind::l1) {
    for (std::size_t i = 0; i < n; ++i) acc += std::abs(double(p[i]) - double(t[i]));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = double(p[i]) - double(t[i]);
      acc += d * d;
    }
  }
  auto pn = pred.node();
  auto tn = target.node();
  return detail::record<T>(Shape{}, {static_cast<T>(acc / double(n))}, {pn},
                           [=](detail::TensorNode<T>& o) {
                             pn->ensure_grad();
                             const T g = o.grad[0] / static_cast<T>(n);
                             for (std::size_t i = 0; i < n; ++i) {
                               const T d = pn->data[i] - tn->data[i];
                               if (kind == LossKind::l1) {
                                 if (d > T(0)) pn->grad[i] += g;
                                 else if (d < T(0)) pn->grad[i] -= g;
                               } else {
                                 pn->grad[i] += T(2) * d * g;
                               }
                             }
                           });
}

#define NVSR_INSTANTIATE(T)                                                                \
  template Tensor<T> elementwise(ElementwiseKind, const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> elementwise(ElementwiseKind, const Tensor<T>&, T);                   \
  template Tensor<T> sum(const Tensor<T>&);                                               \
  template Tensor<T> mean(const Tensor<T>&);                                              \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                    \
  template Tensor<T> activation(ActivationKind, const Tensor<T>&);                        \
  template Tensor<T> logit(const Tensor<T>&, T);                                          \
  template Tensor<T> loss(LossKind, const Tensor<T>&, const Tensor<T>&);

NVSR_INSTANTIATE(float)
NVSR_INSTANTIATE(double)
#undef NVSR_INSTANTIATE

}  // namespace nvsr
