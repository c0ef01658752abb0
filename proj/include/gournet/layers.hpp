/* Copyright 2026 The GourNet-CPP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gournet/error.hpp"
#include "gournet/tensor.hpp"

namespace gournet {

enum class LayerKind { kConv2D, kMaxPool2D, kReLU, kFlatten, kDense, kSoftmax, kBatchNorm };
enum class Padding { kSame, kValid };
enum class Activation { kNone, kReLU, kSoftmax };

inline const char* to_string(Padding p) { return p == Padding::kSame ? "same" : "valid"; }

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::kReLU:
      return "relu";
    case Activation::kSoftmax:
      return "softmax";
    default:
      return "none";
  }
}

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::kConv2D:
      return "conv2d";
    case LayerKind::kMaxPool2D:
      return "max_pooling2d";
    case LayerKind::kReLU:
      return "relu";
    case LayerKind::kFlatten:
      return "flatten";
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kSoftmax:
      return "softmax";
    case LayerKind::kBatchNorm:
      return "batch_normalization";
  }
  return "?";
}

/// Declarative description of one layer in a sequential stack.
///
/// Conv and dense carry a fused activation. Conv stride is always 1 and pool
/// stride always equals the window. kBatchNorm is an accounting-only entry: it
/// contributes parameters to an audit but has no forward or backward pass.
struct LayerSpec {
  LayerKind kind = LayerKind::kFlatten;
  std::size_t filters = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  Padding padding = Padding::kValid;
  std::size_t pool_h = 0;
  std::size_t pool_w = 0;
  std::size_t units = 0;
  Activation activation = Activation::kNone;

  static LayerSpec conv(std::size_t filters, std::size_t kh, std::size_t kw, Padding pad,
                        Activation act = Activation::kReLU) {
    LayerSpec s;
    s.kind = LayerKind::kConv2D;
    s.filters = filters;
    s.kernel_h = kh;
    s.kernel_w = kw;
    s.padding = pad;
    s.activation = act;
    return s;
  }
  static LayerSpec maxpool(std::size_t h = 2, std::size_t w = 2) {
    LayerSpec s;
    s.kind = LayerKind::kMaxPool2D;
    s.pool_h = h;
    s.pool_w = w;
    return s;
  }
  static LayerSpec dense(std::size_t units, Activation act) {
    LayerSpec s;
    s.kind = LayerKind::kDense;
    s.units = units;
    s.activation = act;
    return s;
  }
  static LayerSpec flatten() { return LayerSpec{}; }
  static LayerSpec relu() {
    LayerSpec s;
    s.kind = LayerKind::kReLU;
    return s;
  }
  static LayerSpec softmax() {
    LayerSpec s;
    s.kind = LayerKind::kSoftmax;
    return s;
  }
  static LayerSpec batchnorm() {
    LayerSpec s;
    s.kind = LayerKind::kBatchNorm;
    return s;
  }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Total and trainable parameter counts.
struct ParamCount {
  std::uint64_t total = 0;
  std::uint64_t trainable = 0;

  ParamCount& operator+=(const ParamCount& o) {
    total += o.total;
    trainable += o.trainable;
    return *this;
  }
  friend bool operator==(const ParamCount&, const ParamCount&) = default;
};

/// Per-sample output shape of `spec` applied to a per-sample `input` shape
/// ((H, W, C) for images, (D) after flatten).
inline Shape infer_output_shape(const LayerSpec& spec, const Shape& input) {
  auto need_image = [&](const char* what) {
    if (input.size() != 3) {
      throw ShapeError(std::string(what) + " expects an HxWxC input, got " + shape_str(input));
    }
  };
  switch (spec.kind) {
    case LayerKind::kConv2D: {
      need_image("conv2d");
      if (spec.filters == 0 || spec.kernel_h == 0 || spec.kernel_w == 0) {
        throw ShapeError("conv2d: filters and kernel dims must be >= 1");
      }
      if (spec.padding == Padding::kSame) return {input[0], input[1], spec.filters};
      if (input[0] < spec.kernel_h || input[1] < spec.kernel_w) {
        throw ShapeError("conv2d: valid padding needs input " + shape_str(input) +
                         " at least as large as the " + std::to_string(spec.kernel_h) + "x" +
                         std::to_string(spec.kernel_w) + " kernel");
      }
      return {input[0] - spec.kernel_h + 1, input[1] - spec.kernel_w + 1, spec.filters};
    }
    case LayerKind::kMaxPool2D:
      need_image("maxpool2d");
      if (spec.pool_h == 0 || spec.pool_w == 0) throw ShapeError("maxpool2d: window dims must be >= 1");
      if (input[0] < spec.pool_h || input[1] < spec.pool_w) {
        throw ShapeError("maxpool2d: input " + shape_str(input) + " smaller than the " +
                         std::to_string(spec.pool_h) + "x" + std::to_string(spec.pool_w) + " window");
      }
      return {input[0] / spec.pool_h, input[1] / spec.pool_w, input[2]};
    case LayerKind::kFlatten:
      return {shape_size(input)};
    case LayerKind::kDense:
      if (spec.units == 0) throw ShapeError("dense: units must be >= 1");
      if (input.size() != 1) {
        throw ShapeError("dense expects a flat input, got " + shape_str(input) + " (missing flatten?)");
      }
      return {spec.units};
    case LayerKind::kReLU:
    case LayerKind::kBatchNorm:
      return input;
    case LayerKind::kSoftmax:
      if (input.size() != 1) throw ShapeError("softmax expects a flat input, got " + shape_str(input));
      return input;
  }
  return input;
}

/// Parameters of one layer given its per-sample input shape.
inline ParamCount param_count(const LayerSpec& spec, const Shape& input) {
  switch (spec.kind) {
    case LayerKind::kConv2D: {
      const std::uint64_t n = spec.kernel_h * spec.kernel_w * input.at(2) * spec.filters + spec.filters;
      return {n, n};
    }
    case LayerKind::kDense: {
      const std::uint64_t n = input.at(0) * spec.units + spec.units;
      return {n, n};
    }
    case LayerKind::kBatchNorm: {
      // gamma and beta train; moving mean and variance do not.
      const std::uint64_t c = input.back();
      return {4 * c, 2 * c};
    }
    default:
      return {};
  }
}

/// One row of a parameter audit.
struct LayerSummary {
  std::string name;
  LayerSpec spec;
  Shape output_shape;
  ParamCount params;
};

struct ParamSummary {
  std::vector<LayerSummary> layers;
  ParamCount totals;
};

/// Keras-style layer name, 1-based position in the stack: "conv2d_1".
inline std::string layer_name(const LayerSpec& spec, std::size_t position) {
  return std::string(to_string(spec.kind)) + "_" + std::to_string(position);
}

/// Propagates shapes through the whole stack and counts every layer.
/// Throws ShapeError naming the first layer that fails.
inline ParamSummary param_count(std::span<const LayerSpec> specs, const Shape& input_shape) {
  ParamSummary out;
  Shape shape = input_shape;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const std::string name = layer_name(specs[i], i + 1);
    LayerSummary row{name, specs[i], {}, {}};
    try {
      row.output_shape = infer_output_shape(specs[i], shape);
      row.params = param_count(specs[i], shape);
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i + 1) + " (" + name + "): " + e.what());
    }
    out.totals += row.params;
    shape = row.output_shape;
    out.layers.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Forward and backward passes. Batched tensors are NHWC for images and N x D
// after flatten.

/// Kernel is KH x KW x Cin x F; bias has one entry per filter or unit.
template <class T>
struct Weights {
  Tensor<T> kernel;
  Tensor<T> bias;
};

template <class T>
struct LayerGrads {
  Tensor<T> input;
  Tensor<T> kernel;
  Tensor<T> bias;
};

namespace detail {

struct ConvGeometry {
  std::size_t n, h, w, c, kh, kw, f, oh, ow, pad_top, pad_left;

  std::size_t patch() const { return kh * kw * c; }
  std::size_t out_pixels() const { return oh * ow; }
};

template <class T>
ConvGeometry conv_geometry(const Shape& in, const Weights<T>& wts, Padding pad) {
  if (in.size() != 4) throw ShapeError("conv2d: expected NxHxWxC input, got " + shape_str(in));
  const Shape& k = wts.kernel.shape();
  if (k.size() != 4) throw ShapeError("conv2d: expected KHxKWxCinxF kernel, got " + shape_str(k));
  if (k[2] != in[3]) {
    throw ShapeError("conv2d: input channels " + std::to_string(in[3]) + " do not match kernel depth " +
                     std::to_string(k[2]) + " (input " + shape_str(in) + ", kernel " + shape_str(k) + ")");
  }
  if (wts.bias.size() != k[3]) throw ShapeError("conv2d: bias length does not match filter count");
  ConvGeometry g{in[0], in[1], in[2], in[3], k[0], k[1], k[3], 0, 0, 0, 0};
  if (pad == Padding::kSame) {
    g.oh = g.h;
    g.ow = g.w;
    g.pad_top = (g.kh - 1) / 2;  // odd deficit: the extra zero row goes to the bottom
    g.pad_left = (g.kw - 1) / 2;
  } else {
    if (g.h < g.kh || g.w < g.kw) {
      throw ShapeError("conv2d: valid padding needs input " + shape_str(in) + " >= kernel " +
                       shape_str(k));
    }
    g.oh = g.h - g.kh + 1;
    g.ow = g.w - g.kw + 1;
  }
  return g;
}

/// Unfolds sample `x` (H x W x C) into (OH*OW) x (KH*KW*C) patches.
template <class T>
void im2col(const ConvGeometry& g, const T* x, T* col) {
  const std::size_t row_len = g.patch();
  for (std::size_t oy = 0; oy < g.oh; ++oy) {
    for (std::size_t ox = 0; ox < g.ow; ++ox) {
      T* dst = col + (oy * g.ow + ox) * row_len;
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        const auto iy = static_cast<std::ptrdiff_t>(oy + ky) - static_cast<std::ptrdiff_t>(g.pad_top);
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const auto ix = static_cast<std::ptrdiff_t>(ox + kx) - static_cast<std::ptrdiff_t>(g.pad_left);
          T* d = dst + (ky * g.kw + kx) * g.c;
          if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(g.h) ||
              ix >= static_cast<std::ptrdiff_t>(g.w)) {
            std::fill(d, d + g.c, T{});
          } else {
            const T* s = x + (static_cast<std::size_t>(iy) * g.w + static_cast<std::size_t>(ix)) * g.c;
            std::copy(s, s + g.c, d);
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: scatters patch gradients back onto dx (accumulating).
template <class T>
void col2im(const ConvGeometry& g, const T* col, T* dx) {
  const std::size_t row_len = g.patch();
  for (std::size_t oy = 0; oy < g.oh; ++oy) {
    for (std::size_t ox = 0; ox < g.ow; ++ox) {
      const T* src = col + (oy * g.ow + ox) * row_len;
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        const auto iy = static_cast<std::ptrdiff_t>(oy + ky) - static_cast<std::ptrdiff_t>(g.pad_top);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const auto ix = static_cast<std::ptrdiff_t>(ox + kx) - static_cast<std::ptrdiff_t>(g.pad_left);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
          const T* s = src + (ky * g.kw + kx) * g.c;
          T* d = dx + (static_cast<std::size_t>(iy) * g.w + static_cast<std::size_t>(ix)) * g.c;
          for (std::size_t ch = 0; ch < g.c; ++ch) d[ch] += s[ch];
        }
      }
    }
  }
}

}  // namespace detail

/// Stride-1 cross-correlation plus bias, via per-sample im2col + GEMM.
template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Weights<T>& wts, Padding pad) {
  const auto g = detail::conv_geometry(input.shape(), wts, pad);
  Tensor<T> out({g.n, g.oh, g.ow, g.f});
  std::vector<T> col(g.out_pixels() * g.patch());
  for (std::size_t s = 0; s < g.n; ++s) {
    detail::im2col(g, input.raw() + s * g.h * g.w * g.c, col.data());
    T* y = out.raw() + s * g.out_pixels() * g.f;
    gemm(Trans::kNo, Trans::kNo, g.out_pixels(), g.f, g.patch(), col.data(), wts.kernel.raw(), y, false);
    for (std::size_t p = 0; p < g.out_pixels(); ++p) {
      for (std::size_t f = 0; f < g.f; ++f) y[p * g.f + f] += wts.bias[f];
    }
  }
  return out;
}

/// Gradients of conv2d_forward with respect to its input, kernel, and bias.
template <class T>
LayerGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& input, const Weights<T>& wts,
                              Padding pad) {
  const auto g = detail::conv_geometry(input.shape(), wts, pad);
  const Shape expected{g.n, g.oh, g.ow, g.f};
  if (grad_out.shape() != expected) {
    throw ShapeError("conv2d_backward: grad_out " + shape_str(grad_out.shape()) + " != output " +
                     shape_str(expected));
  }
  LayerGrads<T> grads{Tensor<T>(input.shape()), Tensor<T>(wts.kernel.shape()), Tensor<T>(wts.bias.shape())};
  std::vector<T> col(g.out_pixels() * g.patch());
  std::vector<T> dcol(col.size());
  for (std::size_t s = 0; s < g.n; ++s) {
    const T* dy = grad_out.raw() + s * g.out_pixels() * g.f;
    detail::im2col(g, input.raw() + s * g.h * g.w * g.c, col.data());
    gemm(Trans::kYes, Trans::kNo, g.patch(), g.f, g.out_pixels(), col.data(), dy, grads.kernel.raw(), true);
    gemm(Trans::kNo, Trans::kYes, g.out_pixels(), g.patch(), g.f, dy, wts.kernel.raw(), dcol.data(), false);
    detail::col2im(g, dcol.data(), grads.input.raw() + s * g.h * g.w * g.c);
    for (std::size_t p = 0; p < g.out_pixels(); ++p) {
      for (std::size_t f = 0; f < g.f; ++f) grads.bias[f] += dy[p * g.f + f];
    }
  }
  return grads;
}

/// Max-pool output plus, for each output element, the flat input index that
/// won its window (first maximum in row-major scan order; a NaN wins).
template <class T>
struct PoolResult {
  Tensor<T> output;
  std::vector<std::size_t> argmax;
};

template <class T>
PoolResult<T> maxpool2d_forward(const Tensor<T>& input, std::size_t ph, std::size_t pw) {
  const Shape& in = input.shape();
  if (in.size() != 4) throw ShapeError("maxpool2d: expected NxHxWxC input, got " + shape_str(in));
  if (ph == 0 || pw == 0) throw ShapeError("maxpool2d: window dims must be >= 1");
  if (in[1] < ph || in[2] < pw) {
    throw ShapeError("maxpool2d: input " + shape_str(in) + " smaller than the " + std::to_string(ph) +
                     "x" + std::to_string(pw) + " window");
  }
  const std::size_t n = in[0], h = in[1], w = in[2], c = in[3];
  const std::size_t oh = h / ph, ow = w / pw;
  PoolResult<T> r{Tensor<T>({n, oh, ow, c}), std::vector<std::size_t>(n * oh * ow * c)};
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          std::size_t best_idx = ((s * h + oy * ph) * w + ox * pw) * c + ch;
          T best = input[best_idx];
          for (std::size_t dy = 0; dy < ph; ++dy) {
            for (std::size_t dx = 0; dx < pw; ++dx) {
              const std::size_t idx = ((s * h + oy * ph + dy) * w + ox * pw + dx) * c + ch;
              if (input[idx] > best || (input[idx] != input[idx] && best == best)) {
                best = input[idx];
                best_idx = idx;
              }
            }
          }
          const std::size_t o = ((s * oh + oy) * ow + ox) * c + ch;
          r.output[o] = best;
          r.argmax[o] = best_idx;
        }
      }
    }
  }
  return r;
}

/// Routes each output gradient to its window's argmax.
template <class T>
Tensor<T> maxpool2d_backward(const Tensor<T>& grad_out, const std::vector<std::size_t>& argmax,
                             const Shape& input_shape) {
  if (grad_out.size() != argmax.size()) {
    throw ShapeError("maxpool2d_backward: grad_out " + shape_str(grad_out.shape()) +
                     " does not match the cached forward output");
  }
  Tensor<T> dx(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) dx[argmax[i]] += grad_out[i];
  return dx;
}

/// x W + b for x of shape N x D and kernel D x U.
template <class T>
Tensor<T> dense_forward(const Tensor<T>& input, const Weights<T>& wts) {
  if (input.rank() != 2 || wts.kernel.rank() != 2 || input.dim(1) != wts.kernel.dim(0)) {
    throw ShapeError("dense: input " + shape_str(input.shape()) + " does not match kernel " +
                     shape_str(wts.kernel.shape()));
  }
  const std::size_t n = input.dim(0), d = input.dim(1), u = wts.kernel.dim(1);
  if (wts.bias.size() != u) throw ShapeError("dense: bias length does not match unit count");
  Tensor<T> out({n, u});
  gemm(Trans::kNo, Trans::kNo, n, u, d, input.raw(), wts.kernel.raw(), out.raw(), false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < u; ++j) out[i * u + j] += wts.bias[j];
  }
  return out;
}

template <class T>
LayerGrads<T> dense_backward(const Tensor<T>& grad_out, const Tensor<T>& input, const Weights<T>& wts) {
  const std::size_t n = input.dim(0), d = input.dim(1), u = wts.kernel.dim(1);
  if (grad_out.shape() != Shape{n, u}) {
    throw ShapeError("dense_backward: grad_out " + shape_str(grad_out.shape()) + " != output " +
                     shape_str({n, u}));
  }
  LayerGrads<T> g{Tensor<T>(input.shape()), Tensor<T>(wts.kernel.shape()), Tensor<T>(wts.bias.shape())};
  gemm(Trans::kYes, Trans::kNo, d, u, n, input.raw(), grad_out.raw(), g.kernel.raw(), false);
  gemm(Trans::kNo, Trans::kYes, n, d, u, grad_out.raw(), wts.kernel.raw(), g.input.raw(), false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < u; ++j) g.bias[j] += grad_out[i * u + j];
  }
  return g;
}

/// max(x, 0); NaN passes through.
template <class T>
Tensor<T> relu(const Tensor<T>& input) {
  Tensor<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] < T{} ? T{} : input[i];
  return out;
}

/// Passes the gradient where the forward input was strictly positive; the
/// subgradient at exactly 0 is 0.
template <class T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& input) {
  detail::require_same_shape("relu_backward", grad_out, input);
  Tensor<T> dx(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) dx[i] = input[i] > T{} ? grad_out[i] : T{};
  return dx;
}

/// Row-wise softmax over the last axis, with the row max subtracted first.
template <class T>
Tensor<T> softmax(const Tensor<T>& z) {
  if (z.rank() == 0) throw ShapeError("softmax: empty input");
  const std::size_t k = z.shape().back();
  const std::size_t rows = z.size() / k;
  Tensor<T> out(z.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = z.raw() + r * k;
    T* o = out.raw() + r * k;
    const T mx = *std::max_element(in, in + k);
    T sum{};
    for (std::size_t j = 0; j < k; ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    for (std::size_t j = 0; j < k; ++j) o[j] /= sum;
  }
  return out;
}

/// Vector-Jacobian product of softmax: dz = s * (g - <g, s>) per row.
template <class T>
Tensor<T> softmax_backward(const Tensor<T>& grad_out, const Tensor<T>& probs) {
  detail::require_same_shape("softmax_backward", grad_out, probs);
  const std::size_t k = probs.shape().back();
  const std::size_t rows = probs.size() / k;
  Tensor<T> dz(probs.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    T dot{};
    for (std::size_t j = 0; j < k; ++j) dot += grad_out[r * k + j] * probs[r * k + j];
    for (std::size_t j = 0; j < k; ++j) dz[r * k + j] = probs[r * k + j] * (grad_out[r * k + j] - dot);
  }
  return dz;
}

}  // namespace gournet
