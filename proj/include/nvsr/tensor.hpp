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

// Reverse-mode autodiff over dense row-major tensors.
//
// A Tensor is a shared handle: copies alias the same storage, like the
// framework tensors the models here are ported from. Operations record a
// backward closure and their differentiable parents only when at least one
// input requires a gradient, so frozen sub-networks cost no weight-gradient
// work.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nvsr {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Numeric mode of a computation. Training runs in single; gradient checks
/// run in double.
enum class Precision { single, double_precision };

/// Worker threads used inside heavy ops. 0 and 1 both mean strictly
/// sequential execution, which is bit-reproducible.
void set_num_threads(int n);
int num_threads();

namespace detail {

template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until a gradient arrives
  bool trainable = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  bool requires_grad() const { return trainable || static_cast<bool>(backward_fn); }
  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), T(0));
  }
};

}  // namespace detail

template <typename T>
class Tensor {
 public:
  using value_type = T;
  using Node = detail::TensorNode<T>;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> values);

  static Tensor scalar(T value) { return Tensor(Shape{}, std::vector<T>{value}); }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t numel() const { return node_->data.size(); }

  std::span<T> data() { return node_->data; }
  std::span<const T> data() const { return node_->data; }
  std::vector<T>& storage() { return node_->data; }
  const std::vector<T>& storage() const { return node_->data; }
  T item() const;

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->grad; }
  /// Drops the gradient buffer; the next backward pass allocates it anew.
  void zero_grad() { node_->grad.clear(); }

  bool trainable() const { return node_->trainable; }
  Tensor& set_trainable(bool flag) {
    node_->trainable = flag;
    return *this;
  }
  bool requires_grad() const { return node_->requires_grad(); }

  /// Deep copy of the values with no graph and no gradient.
  Tensor detach() const { return Tensor(node_->shape, node_->data); }

  /// Accumulates d(this)/d(leaf) into every trainable leaf. `this` must be a
  /// scalar produced by recorded operations.
  void backward() const;

  const std::shared_ptr<Node>& node() const { return node_; }
  static Tensor wrap(std::shared_ptr<Node> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
  }

 private:
  std::shared_ptr<Node> node_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

// ---------------------------------------------------------------------------
// Operations. All are defined for float and double.

enum class ElementwiseKind { add, sub, mul, scale };

template <typename T>
Tensor<T> elementwise(ElementwiseKind kind, const Tensor<T>& a, const Tensor<T>& b);
/// Scalar right-hand side; `scale` and `mul` multiply, `add`/`sub` shift.
template <typename T>
Tensor<T> elementwise(ElementwiseKind kind, const Tensor<T>& a, T b);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return elementwise(ElementwiseKind::add, a, b);
}
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return elementwise(ElementwiseKind::sub, a, b);
}
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return elementwise(ElementwiseKind::mul, a, b);
}
template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  return elementwise(ElementwiseKind::scale, a, s);
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a);
template <typename T>
Tensor<T> mean(const Tensor<T>& a);

/// Same data, new shape of equal element count.
template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape);

/// 2-D cross-correlation with zero padding. input [B,Cin,H,W], weight
/// [Cout,Cin,kh,kw] with odd kh/kw, bias [Cout] or undefined.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 std::size_t stride, std::size_t padding);

/// out(b, c, r*y+dy, r*x+dx) = in(b, c*r*r + dy*r + dx, y, x)
template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& input, std::size_t r);
template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& input, std::size_t r);

/// Nearest-neighbor spatial upsampling by an integer factor.
template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& input, std::size_t r);

enum class ActivationKind { gelu, sigmoid };

/// gelu uses the tanh approximation.
template <typename T>
Tensor<T> activation(ActivationKind kind, const Tensor<T>& x);
template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  return activation(ActivationKind::gelu, x);
}
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return activation(ActivationKind::sigmoid, x);
}

/// log(v / (1 - v)) after clamping v into [eps, 1 - eps]; zero gradient
/// where the clamp is active.
template <typename T>
Tensor<T> logit(const Tensor<T>& x, T eps);

enum class LossKind { l1, l2 };

/// Mean absolute (l1) or mean squared (l2) error. `target` must not
/// require a gradient.
template <typename T>
Tensor<T> loss(LossKind kind, const Tensor<T>& pred, const Tensor<T>& target);

}  // namespace nvsr
