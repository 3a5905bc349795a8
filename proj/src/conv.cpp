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

// Convolution (im2col + GEMM) and the spatial rearrangement ops.

#include <Eigen/Core>
#include <string>

#include "nvsr/error.hpp"
#include "nvsr/tensor.hpp"
#include "tensor_internal.hpp"

namespace nvsr {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

struct ConvGeometry {
  std::size_t batch, cin, h, w;
  std::size_t cout, kh, kw;
  std::size_t stride, pad;
  std::size_t ho, wo;

  std::size_t k() const { return cin * kh * kw; }
  std::size_t n() const { return ho * wo; }
  bool direct() const { return kh == 1 && kw == 1 && stride == 1 && pad == 0; }
};

template <typename T>
void im2col(const T* img, const ConvGeometry& g, T* col) {
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        T* row = col + ((c * g.kh + ki) * g.kw + kj) * g.n();
        const T* plane = img + c * g.h * g.w;
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const long iy = long(oy * g.stride + ki) - long(g.pad);
          T* dst = row + oy * g.wo;
          if (iy < 0 || iy >= long(g.h)) {
            std::fill(dst, dst + g.wo, T(0));
            continue;
          }
          const T* src = plane + std::size_t(iy) * g.w;
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const long ix = long(ox * g.stride + kj) - long(g.pad);
            dst[ox] = (ix < 0 || ix >= long(g.w)) ? T(0) : src[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const ConvGeometry& g, T* img) {
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        const T* row = col + ((c * g.kh + ki) * g.kw + kj) * g.n();
        T* plane = img + c * g.h * g.w;
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const long iy = long(oy * g.stride + ki) - long(g.pad);
          if (iy < 0 || iy >= long(g.h)) continue;
          const T* src = row + oy * g.wo;
          T* dst = plane + std::size_t(iy) * g.w;
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const long ix = long(ox * g.stride + kj) - long(g.pad);
            if (ix >= 0 && ix < long(g.w)) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 std::size_t stride, std::size_t padding) {
  if (input.rank() != 4 || weight.rank() != 4)
    throw InvalidShape("conv2d: expected 4-d input and weight, got " + shape_str(input.shape()) +
                       " and " + shape_str(weight.shape()));
  ConvGeometry g{};
  g.batch = input.dim(0);
  g.cin = input.dim(1);
  g.h = input.dim(2);
  g.w = input.dim(3);
  g.cout = weight.dim(0);
  g.kh = weight.dim(2);
  g.kw = weight.dim(3);
  g.stride = stride;
  g.pad = padding;
  if (weight.dim(1) != g.cin)
    throw InvalidShape("conv2d: input has " + std::to_string(g.cin) + " channels, weight expects " +
                       std::to_string(weight.dim(1)));
  if (g.kh % 2 == 0 || g.kw % 2 == 0) throw ContractError("conv2d: kernel extents must be odd");
  if (stride < 1) throw ContractError("conv2d: stride must be >= 1");
  if (g.h + 2 * padding < g.kh || g.w + 2 * padding < g.kw)
    throw InvalidShape("conv2d: kernel larger than padded input");
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != g.cout))
    throw InvalidShape("conv2d: bias shape " + shape_str(bias.shape()));
  g.ho = (g.h + 2 * padding - g.kh) / stride + 1;
  g.wo = (g.w + 2 * padding - g.kw) / stride + 1;

  auto xn = input.node();
  auto wn = weight.node();
  auto bn = bias.defined() ? bias.node() : nullptr;
  const bool gx = xn->requires_grad();
  const bool gw = wn->requires_grad();
  const bool gb = bn && bn->requires_grad();

  const std::size_t K = g.k(), N = g.n();
  std::vector<T> out(g.batch * g.cout * N);
  // Columns are kept for the weight gradient only when it is needed.
  auto cols = std::make_shared<std::vector<std::vector<T>>>();
  if (gw && !g.direct()) cols->resize(g.batch);

  ConstMapMat<T> wmat(wn->data.data(), g.cout, K);
  std::vector<T> scratch;
  for (std::size_t b = 0; b < g.batch; ++b) {
    const T* img = xn->data.data() + b * g.cin * g.h * g.w;
    const T* colp = img;
    if (!g.direct()) {
      std::vector<T>& col = (gw ? (*cols)[b] : scratch);
      col.resize(K * N);
      im2col(img, g, col.data());
      colp = col.data();
    }
    ConstMapMat<T> cmat(colp, K, N);
    MapMat<T> omat(out.data() + b * g.cout * N, g.cout, N);
    detail::parallel_ranges(N, 256, [&](std::size_t c0, std::size_t c1) {
      omat.middleCols(c0, c1 - c0).noalias() = wmat * cmat.middleCols(c0, c1 - c0);
    });
    if (bn) {
      for (std::size_t o = 0; o < g.cout; ++o) omat.row(o).array() += bn->data[o];
    }
  }

  Shape oshape{g.batch, g.cout, g.ho, g.wo};
  return detail::record<T>(
      std::move(oshape), std::move(out), {xn, wn, bn}, [=](detail::TensorNode<T>& o) {
        const std::size_t K = g.k(), N = g.n();
        ConstMapMat<T> wmat(wn->data.data(), g.cout, K);
        if (gw) wn->ensure_grad();
        if (gb) bn->ensure_grad();
        if (gx) xn->ensure_grad();
        std::vector<T> dcol;
        for (std::size_t b = 0; b < g.batch; ++b) {
          ConstMapMat<T> gmat(o.grad.data() + b * g.cout * N, g.cout, N);
          if (gb) {
            // Plain loop: Eigen's vectorized sum peels by address, which
            // would make the result depend on where the buffer landed.
            for (std::size_t oc = 0; oc < g.cout; ++oc) {
              const T* row = o.grad.data() + (b * g.cout + oc) * N;
              T acc = 0;
              for (std::size_t i = 0; i < N; ++i) acc += row[i];
              bn->grad[oc] += acc;
            }
          }
          if (gw) {
            const T* colp = g.direct() ? xn->data.data() + b * g.cin * g.h * g.w
                                       : (*cols)[b].data();
            ConstMapMat<T> cmat(colp, K, N);
            MapMat<T> dw(wn->grad.data(), g.cout, K);
            detail::parallel_ranges(g.cout, 4, [&](std::size_t r0, std::size_t r1) {
              dw.middleRows(r0, r1 - r0).noalias() += gmat.middleRows(r0, r1 - r0) * cmat.transpose();
            });
          }
          if (gx) {
            T* dimg = xn->grad.data() + b * g.cin * g.h * g.w;
            if (g.direct()) {
              MapMat<T> dx(dimg, K, N);
              detail::parallel_ranges(N, 256, [&](std::size_t c0, std::size_t c1) {
                dx.middleCols(c0, c1 - c0).noalias() +=
                    wmat.transpose() * gmat.middleCols(c0, c1 - c0);
              });
            } else {
              dcol.resize(K * N);
              MapMat<T> dc(dcol.data(), K, N);
              detail::parallel_ranges(N, 256, [&](std::size_t c0, std::size_t c1) {
                dc.middleCols(c0, c1 - c0).noalias() =
                    wmat.transpose() * gmat.middleCols(c0, c1 - c0);
              });
              col2im_add(dcol.data(), g, dimg);
            }
          }
        }
      });
}

namespace {

void require_4d(const Shape& s, const char* op) {
  if (s.size() != 4) throw InvalidShape(std::string(op) + ": expected 4-d tensor, got " + shape_str(s));
}

}  // namespace

template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& input, std::size_t r) {
  require_4d(input.shape(), "pixel_shuffle");
  const std::size_t B = input.dim(0), Cin = input.dim(1), H = input.dim(2), W = input.dim(3);
  if (r == 0 || Cin % (r * r) != 0)
    throw InvalidShape("pixel_shuffle: " + std::to_string(Cin) + " channels not divisible by r^2 = " +
                       std::to_string(r * r));
  const std::size_t C = Cin / (r * r), Ho = H * r, Wo = W * r;
  // index map: output flat index -> input flat index
  auto src_index = [=](std::size_t b, std::size_t c, std::size_t oy, std::size_t ox) {
    const std::size_t y = oy / r, dy = oy % r, x = ox / r, dx = ox % r;
    const std::size_t ic = c * r * r + dy * r + dx;
    return ((b * Cin + ic) * H + y) * W + x;
  };
  const auto& in = input.storage();
  std::vector<T> out(in.size());
  std::size_t i = 0;
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t oy = 0; oy < Ho; ++oy)
        for (std::size_t ox = 0; ox < Wo; ++ox) out[i++] = in[src_index(b, c, oy, ox)];
  auto xn = input.node();
  return detail::record<T>(Shape{B, C, Ho, Wo}, std::move(out), {xn}, [=](detail::TensorNode<T>& o) {
    xn->ensure_grad();
    std::size_t i = 0;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t oy = 0; oy < Ho; ++oy)
          for (std::size_t ox = 0; ox < Wo; ++ox) xn->grad[src_index(b, c, oy, ox)] += o.grad[i++];
  });
}

template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& input, std::size_t r) {
  require_4d(input.shape(), "pixel_unshuffle");
  const std::size_t B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  if (r == 0 || H % r != 0 || W % r != 0)
    throw InvalidShape("pixel_unshuffle: spatial dims " + shape_str(input.shape()) +
                       " not divisible by " + std::to_string(r));
  const std::size_t Co = C * r * r, Ho = H / r, Wo = W / r;
  auto src_index = [=](std::size_t b, std::size_t oc, std::size_t y, std::size_t x) {
    const std::size_t c = oc / (r * r), dy = (oc / r) % r, dx = oc % r;
    return ((b * C + c) * H + y * r + dy) * W + x * r + dx;
  };
  const auto& in = input.storage();
  std::vector<T> out(in.size());
  std::size_t i = 0;
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t oc = 0; oc < Co; ++oc)
      for (std::size_t y = 0; y < Ho; ++y)
        for (std::size_t x = 0; x < Wo; ++x) out[i++] = in[src_index(b, oc, y, x)];
  auto xn = input.node();
  return detail::record<T>(Shape{B, Co, Ho, Wo}, std::move(out), {xn}, [=](detail::TensorNode<T>& o) {
    xn->ensure_grad();
    std::size_t i = 0;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t oc = 0; oc < Co; ++oc)
        for (std::size_t y = 0; y < Ho; ++y)
          for (std::size_t x = 0; x < Wo; ++x) xn->grad[src_index(b, oc, y, x)] += o.grad[i++];
  });
}

template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& input, std::size_t r) {
  require_4d(input.shape(), "upsample_nearest");
  if (r == 0) throw ContractError("upsample_nearest: factor must be >= 1");
  const std::size_t B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const std::size_t Ho = H * r, Wo = W * r;
  const auto& in = input.storage();
  std::vector<T> out(B * C * Ho * Wo);
  std::size_t i = 0;
  for (std::size_t p = 0; p < B * C; ++p)
    for (std::size_t oy = 0; oy < Ho; ++oy)
      for (std::size_t ox = 0; ox < Wo; ++ox) out[i++] = in[(p * H + oy / r) * W + ox / r];
  auto xn = input.node();
  return detail::record<T>(Shape{B, C, Ho, Wo}, std::move(out), {xn}, [=](detail::TensorNode<T>& o) {
    xn->ensure_grad();
    std::size_t i = 0;
    for (std::size_t p = 0; p < B * C; ++p)
      for (std::size_t oy = 0; oy < Ho; ++oy)
        for (std::size_t ox = 0; ox < Wo; ++ox) xn->grad[(p * H + oy / r) * W + ox / r] += o.grad[i++];
  });
}

#define NVSR_INSTANTIATE(T)                                                                         \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t,     \
                            std::size_t);                                                          \
  template Tensor<T> pixel_shuffle(const Tensor<T>&, std::size_t);                                 \
  template Tensor<T> pixel_unshuffle(const Tensor<T>&, std::size_t);                               \
  template Tensor<T> upsample_nearest(const Tensor<T>&, std::size_t);

NVSR_INSTANTIATE(float)
NVSR_INSTANTIATE(double)
#undef NVSR_INSTANTIATE

}  // namespace nvsr
