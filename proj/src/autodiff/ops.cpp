// Copyright 2026 The ACVC Authors.
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

#include "acvc/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace acvc::ad {

using detail::make_result;
using detail::Node;

namespace {

std::size_t normalize_axis(int axis, std::size_t rank) {
  int r = static_cast<int>(rank);
  int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw ShapeError("invalid axis " + std::to_string(axis) + " for rank " +
                     std::to_string(rank));
  }
  return static_cast<std::size_t>(a);
}

// Splits a shape around an axis into (outer, n, inner) lane geometry.
struct Lanes {
  std::size_t outer = 1, n = 1, inner = 1;
};

Lanes lanes_of(const Shape& shape, std::size_t axis) {
  Lanes l;
  for (std::size_t i = 0; i < axis; ++i) l.outer *= shape[i];
  l.n = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) l.inner *= shape[i];
  return l;
}

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  std::size_t off = big.size() - small.size();
  for (std::size_t i = 0; i < small.size(); ++i) {
    if (small[i] != big[off + i]) return false;
  }
  return true;
}

// Gradient helpers. `in` is the input node; grads only flow into inputs that
// require them.
inline std::vector<double>* grad_of(Node& self, std::size_t i) {
  Node& in = *self.inputs[i];
  return in.requires_grad ? &in.ensure_grad() : nullptr;
}

template <class Fwd, class Bwd>
Tensor unary(const char* op, const Tensor& x, Fwd f, Bwd df) {
  auto xs = x.data();
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = f(xs[i]);
  return make_result(op, x.shape(), std::move(out), {x}, [df](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& xv = self.inputs[0]->value;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      (*gx)[i] += self.grad[i] * df(xv[i], self.value[i]);
    }
  });
}

enum class BinOp { kAdd, kSub, kMul, kDiv };

Tensor binary(const char* op, BinOp kind, const Tensor& a, const Tensor& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  std::size_t na = shape_numel(sa), nb = shape_numel(sb);
  Shape out_shape;
  if (sa == sb) {
    out_shape = sa;
  } else if (nb == 1 || is_suffix(sb, sa)) {
    out_shape = sa;
  } else if (na == 1 || is_suffix(sa, sb)) {
    out_shape = sb;
  } else {
    throw ShapeError(std::string(op) + ": shapes " + shape_string(sa) +
                     " and " + shape_string(sb) + " are not broadcastable");
  }
  std::size_t n = shape_numel(out_shape);
  auto av = a.data();
  auto bv = b.data();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = av[i % na], y = bv[i % nb];
    switch (kind) {
      case BinOp::kAdd: out[i] = x + y; break;
      case BinOp::kSub: out[i] = x - y; break;
      case BinOp::kMul: out[i] = x * y; break;
      case BinOp::kDiv: out[i] = x / y; break;
    }
  }
  return make_result(op, out_shape, std::move(out), {a, b},
                     [kind, na, nb, n](Node& self) {
    auto* ga = grad_of(self, 0);
    auto* gb = grad_of(self, 1);
    const auto& av = self.inputs[0]->value;
    const auto& bv = self.inputs[1]->value;
    for (std::size_t i = 0; i < n; ++i) {
      double g = self.grad[i];
      double x = av[i % na], y = bv[i % nb];
      switch (kind) {
        case BinOp::kAdd:
          if (ga) (*ga)[i % na] += g;
          if (gb) (*gb)[i % nb] += g;
          break;
        case BinOp::kSub:
          if (ga) (*ga)[i % na] += g;
          if (gb) (*gb)[i % nb] -= g;
          break;
        case BinOp::kMul:
          if (ga) (*ga)[i % na] += g * y;
          if (gb) (*gb)[i % nb] += g * x;
          break;
        case BinOp::kDiv:
          if (ga) (*ga)[i % na] += g / y;
          if (gb) (*gb)[i % nb] -= g * x / (y * y);
          break;
      }
    }
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary("add", BinOp::kAdd, a, b);
}
Tensor sub(const Tensor& a, const Tensor& b) {
  return binary("sub", BinOp::kSub, a, b);
}
Tensor mul(const Tensor& a, const Tensor& b) {
  return binary("mul", BinOp::kMul, a, b);
}
Tensor div(const Tensor& a, const Tensor& b) {
  return binary("div", BinOp::kDiv, a, b);
}

Tensor neg(const Tensor& x) {
  return unary("neg", x, [](double v) { return -v; },
               [](double, double) { return -1.0; });
}

Tensor scale(const Tensor& x, double factor) {
  return unary("scale", x, [factor](double v) { return v * factor; },
               [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary("add_scalar", x, [value](double v) { return v + value; },
               [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& x) {
  // Subgradient 0 at the kink.
  return unary("relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      "sigmoid", x,
      [](double v) {
        return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                        : std::exp(v) / (1.0 + std::exp(v));
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor silu(const Tensor& x) {
  auto sig = [](double v) {
    return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                    : std::exp(v) / (1.0 + std::exp(v));
  };
  return unary("silu", x, [sig](double v) { return v * sig(v); },
               [sig](double v, double) {
                 double s = sig(v);
                 return s * (1.0 + v * (1.0 - s));
               });
}

Tensor tanh(const Tensor& x) {
  return unary("tanh", x, [](double v) { return std::tanh(v); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& x) {
  return unary("exp", x, [](double v) { return std::exp(v); },
               [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary("log", x, [](double v) { return std::log(v); },
               [](double v, double) { return 1.0 / v; });
}

Tensor sqrt(const Tensor& x) {
  return unary("sqrt", x, [](double v) { return std::sqrt(v); },
               [](double, double y) { return 0.5 / y; });
}

Tensor square(const Tensor& x) {
  return unary("square", x, [](double v) { return v * v; },
               [](double v, double) { return 2.0 * v; });
}

Tensor abs(const Tensor& x) {
  return unary("abs", x, [](double v) { return std::fabs(v); },
               [](double v, double) {
                 return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
               });
}

Tensor sin(const Tensor& x) {
  return unary("sin", x, [](double v) { return std::sin(v); },
               [](double v, double) { return std::cos(v); });
}

Tensor cos(const Tensor& x) {
  return unary("cos", x, [](double v) { return std::cos(v); },
               [](double v, double) { return -std::sin(v); });
}

Tensor clamp_min(const Tensor& x, double lo) {
  return unary("clamp_min", x, [lo](double v) { return v > lo ? v : lo; },
               [lo](double v, double) { return v > lo ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& x, int axis, bool keepdim) {
  const Shape& s = x.shape();
  std::size_t ax = normalize_axis(axis, s.size());
  Lanes l = lanes_of(s, ax);
  Shape out_shape = s;
  if (keepdim) {
    out_shape[ax] = 1;
  } else {
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(ax));
    if (out_shape.empty()) out_shape = {1};
  }
  auto xv = x.data();
  std::vector<double> out(l.outer * l.inner, 0.0);
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t i = 0; i < l.n; ++i) {
      const double* row = xv.data() + (o * l.n + i) * l.inner;
      double* dst = out.data() + o * l.inner;
      for (std::size_t j = 0; j < l.inner; ++j) dst[j] += row[j];
    }
  }
  return make_result("sum", out_shape, std::move(out), {x}, [l](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t o = 0; o < l.outer; ++o) {
      for (std::size_t i = 0; i < l.n; ++i) {
        double* row = gx->data() + (o * l.n + i) * l.inner;
        const double* g = self.grad.data() + o * l.inner;
        for (std::size_t j = 0; j < l.inner; ++j) row[j] += g[j];
      }
    }
  });
}

Tensor mean(const Tensor& x, int axis, bool keepdim) {
  std::size_t ax = normalize_axis(axis, x.rank());
  return scale(sum(x, axis, keepdim), 1.0 / static_cast<double>(x.dim(ax)));
}

Tensor sum_all(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  return make_result("sum_all", {1}, {total}, {x}, [](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    for (double& g : *gx) g += self.grad[0];
  });
}

Tensor mean_all(const Tensor& x) {
  return scale(sum_all(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("cannot reshape " + shape_string(x.shape()) + " to " +
                     shape_string(shape));
  }
  return make_result("reshape", std::move(shape), x.to_vector(), {x},
                     [](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) (*gx)[i] += self.grad[i];
  });
}

namespace {

// Index map for swapping two axes: out flat index -> in flat index.
std::vector<std::size_t> transpose_map(const Shape& in_shape, std::size_t a0,
                                       std::size_t a1, Shape& out_shape) {
  out_shape = in_shape;
  std::swap(out_shape[a0], out_shape[a1]);
  std::size_t rank = in_shape.size();
  std::vector<std::size_t> in_strides(rank, 1);
  for (std::size_t i = rank; i-- > 1;) {
    in_strides[i - 1] = in_strides[i] * in_shape[i];
  }
  std::vector<std::size_t> perm_strides = in_strides;
  std::swap(perm_strides[a0], perm_strides[a1]);
  std::size_t n = shape_numel(in_shape);
  std::vector<std::size_t> map(n);
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t src = 0;
    for (std::size_t d = 0; d < rank; ++d) src += idx[d] * perm_strides[d];
    map[flat] = src;
    for (std::size_t d = rank; d-- > 0;) {
      if (++idx[d] < out_shape[d]) break;
      idx[d] = 0;
    }
  }
  return map;
}

}  // namespace

Tensor transpose(const Tensor& x, int axis0, int axis1) {
  std::size_t a0 = normalize_axis(axis0, x.rank());
  std::size_t a1 = normalize_axis(axis1, x.rank());
  Shape out_shape;
  std::vector<double> out(x.numel());
  auto xv = x.data();
  if (x.rank() == 2 && a0 != a1) {
    std::size_t r = x.dim(0), c = x.dim(1);
    out_shape = {c, r};
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) out[j * r + i] = xv[i * c + j];
    }
    return make_result("transpose", out_shape, std::move(out), {x},
                       [r, c](Node& self) {
      auto* gx = grad_of(self, 0);
      if (!gx) return;
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
          (*gx)[i * c + j] += self.grad[j * r + i];
        }
      }
    });
  }
  auto map = transpose_map(x.shape(), a0, a1, out_shape);
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = xv[map[i]];
  return make_result("transpose", out_shape, std::move(out), {x},
                     [map = std::move(map)](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t i = 0; i < map.size(); ++i) (*gx)[map[i]] += self.grad[i];
  });
}

Tensor concat(std::span<const Tensor> parts, int axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  const Shape& s0 = parts[0].shape();
  std::size_t ax = normalize_axis(axis, s0.size());
  Shape out_shape = s0;
  out_shape[ax] = 0;
  std::vector<std::size_t> sizes;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != s0.size()) throw ShapeError("concat rank mismatch");
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != ax && s[d] != s0[d]) {
        throw ShapeError("concat shape mismatch: " + shape_string(s) + " vs " +
                         shape_string(s0));
      }
    }
    sizes.push_back(s[ax]);
    out_shape[ax] += s[ax];
  }
  Lanes l = lanes_of(out_shape, ax);
  std::vector<double> out(shape_numel(out_shape));
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    auto pv = parts[p].data();
    std::size_t block = sizes[p] * l.inner;
    for (std::size_t o = 0; o < l.outer; ++o) {
      std::copy_n(pv.data() + o * block, block,
                  out.data() + o * l.n * l.inner + offset * l.inner);
    }
    offset += sizes[p];
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return make_result("concat", out_shape, std::move(out), inputs,
                     [l, sizes](Node& self) {
    std::size_t offset = 0;
    for (std::size_t p = 0; p < sizes.size(); ++p) {
      auto* gp = grad_of(self, p);
      std::size_t block = sizes[p] * l.inner;
      if (gp) {
        for (std::size_t o = 0; o < l.outer; ++o) {
          const double* src =
              self.grad.data() + o * l.n * l.inner + offset * l.inner;
          double* dst = gp->data() + o * block;
          for (std::size_t j = 0; j < block; ++j) dst[j] += src[j];
        }
      }
      offset += sizes[p];
    }
  });
}

Tensor slice(const Tensor& x, int axis, std::size_t start,
             std::size_t length) {
  std::size_t ax = normalize_axis(axis, x.rank());
  if (start + length > x.dim(ax)) {
    throw ShapeError("slice [" + std::to_string(start) + ", " +
                     std::to_string(start + length) + ") out of range for " +
                     shape_string(x.shape()));
  }
  Lanes l = lanes_of(x.shape(), ax);
  Shape out_shape = x.shape();
  out_shape[ax] = length;
  std::vector<double> out(l.outer * length * l.inner);
  auto xv = x.data();
  for (std::size_t o = 0; o < l.outer; ++o) {
    std::copy_n(xv.data() + (o * l.n + start) * l.inner, length * l.inner,
                out.data() + o * length * l.inner);
  }
  return make_result("slice", out_shape, std::move(out), {x},
                     [l, start, length](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t o = 0; o < l.outer; ++o) {
      const double* src = self.grad.data() + o * length * l.inner;
      double* dst = gx->data() + (o * l.n + start) * l.inner;
      for (std::size_t j = 0; j < length * l.inner; ++j) dst[j] += src[j];
    }
  });
}

Tensor take(const Tensor& x, std::size_t flat_index) {
  if (flat_index >= x.numel()) {
    throw ShapeError("take index " + std::to_string(flat_index) +
                     " out of range for " + shape_string(x.shape()));
  }
  return make_result("take", {1}, {x.data()[flat_index]}, {x},
                     [flat_index](Node& self) {
    auto* gx = grad_of(self, 0);
    if (gx) (*gx)[flat_index] += self.grad[0];
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul shapes " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()) + " are incompatible");
  }
  std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  auto av = a.data();
  auto bv = b.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return make_result("matmul", {m, n}, std::move(out), {a, b},
                     [m, k, n](Node& self) {
    auto* ga = grad_of(self, 0);
    auto* gb = grad_of(self, 1);
    const auto& av = self.inputs[0]->value;
    const auto& bv = self.inputs[1]->value;
    const auto& g = self.grad;
    if (ga) {
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = bv.data() + p * n;
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          (*ga)[i * k + p] += acc;
        }
      }
    }
    if (gb) {
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          double aip = av[i * k + p];
          if (aip == 0.0) continue;
          double* gbrow = gb->data() + p * n;
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
        }
      }
    }
  });
}

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel,
                                 const Conv1dOptions& opts) {
  long span = static_cast<long>(opts.dilation * (kernel - 1) + 1);
  long padded = static_cast<long>(length + 2 * opts.padding);
  if (padded < span) return 0;
  return static_cast<std::size_t>((padded - span) /
                                  static_cast<long>(opts.stride)) + 1;
}

std::size_t conv_transpose1d_output_length(std::size_t length,
                                           std::size_t kernel,
                                           std::size_t stride,
                                           std::size_t padding) {
  long out = static_cast<long>((length - 1) * stride + kernel) -
             2 * static_cast<long>(padding);
  return out > 0 ? static_cast<std::size_t>(out) : 0;
}

namespace {

// Output range [lo, hi) of t such that 0 <= t*stride + offset < length.
inline void valid_range(long offset, long stride, long length, long t_out,
                        long& lo, long& hi) {
  lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  long last = length - 1 - offset;
  hi = last < 0 ? 0 : last / stride + 1;
  hi = std::min(hi, t_out);
  if (lo > hi) lo = hi;
}

}  // namespace

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              const Conv1dOptions& opts) {
  if (x.rank() != 3 || weight.rank() != 3) {
    throw ShapeError("conv1d expects rank-3 input and weight, got " +
                     shape_string(x.shape()) + " and " +
                     shape_string(weight.shape()));
  }
  const std::size_t batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
  const std::size_t cout = weight.dim(0), cig = weight.dim(1),
                    kernel = weight.dim(2);
  const std::size_t groups = opts.groups;
  if (groups == 0 || opts.stride == 0 || opts.dilation == 0 ||
      cin % groups != 0 || cout % groups != 0 || cin / groups != cig) {
    throw ShapeError("conv1d channel/group mismatch: input " +
                     shape_string(x.shape()) + ", weight " +
                     shape_string(weight.shape()) + ", groups " +
                     std::to_string(groups));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != cout)) {
    throw ShapeError("conv1d bias shape " + shape_string(bias.shape()));
  }
  const std::size_t tout = conv1d_output_length(len, kernel, opts);
  if (tout == 0) {
    throw ShapeError("conv1d input length " + std::to_string(len) +
                     " too short for kernel " + std::to_string(kernel));
  }
  const std::size_t cog = cout / groups;
  const long stride = static_cast<long>(opts.stride);
  const long pad = static_cast<long>(opts.padding);
  const long dil = static_cast<long>(opts.dilation);
  auto xv = x.data();
  auto wv = weight.data();
  std::vector<double> out(batch * cout * tout, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < cout; ++co) {
      double* y = out.data() + (b * cout + co) * tout;
      if (bias.defined()) std::fill_n(y, tout, bias.data()[co]);
      std::size_t g = co / cog;
      for (std::size_t cl = 0; cl < cig; ++cl) {
        const double* xr = xv.data() + (b * cin + g * cig + cl) * len;
        for (std::size_t k = 0; k < kernel; ++k) {
          double w = wv[(co * cig + cl) * kernel + k];
          long offset = static_cast<long>(k) * dil - pad;
          long lo, hi;
          valid_range(offset, stride, static_cast<long>(len),
                      static_cast<long>(tout), lo, hi);
          for (long t = lo; t < hi; ++t) y[t] += w * xr[t * stride + offset];
        }
      }
    }
  }
  std::vector<Tensor> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  bool has_bias = bias.defined();
  return make_result(
      "conv1d", {batch, cout, tout}, std::move(out), inputs,
      [=](Node& self) {
        auto* gx = grad_of(self, 0);
        auto* gw = grad_of(self, 1);
        auto* gb = has_bias ? grad_of(self, 2) : nullptr;
        const auto& xv = self.inputs[0]->value;
        const auto& wv = self.inputs[1]->value;
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t co = 0; co < cout; ++co) {
            const double* gy = self.grad.data() + (b * cout + co) * tout;
            if (gb) {
              double acc = 0.0;
              for (std::size_t t = 0; t < tout; ++t) acc += gy[t];
              (*gb)[co] += acc;
            }
            std::size_t g = co / cog;
            for (std::size_t cl = 0; cl < cig; ++cl) {
              std::size_t xoff = (b * cin + g * cig + cl) * len;
              const double* xr = xv.data() + xoff;
              for (std::size_t k = 0; k < kernel; ++k) {
                std::size_t widx = (co * cig + cl) * kernel + k;
                long offset = static_cast<long>(k) * dil - pad;
                long lo, hi;
                valid_range(offset, stride, static_cast<long>(len),
                            static_cast<long>(tout), lo, hi);
                if (gw) {
                  double acc = 0.0;
                  for (long t = lo; t < hi; ++t) {
                    acc += gy[t] * xr[t * stride + offset];
                  }
                  (*gw)[widx] += acc;
                }
                if (gx) {
                  double w = wv[widx];
                  double* gxr = gx->data() + xoff;
                  for (long t = lo; t < hi; ++t) {
                    gxr[t * stride + offset] += w * gy[t];
                  }
                }
              }
            }
          }
        }
      });
}

Tensor conv_transpose1d(const Tensor& x, const Tensor& weight,
                        const Tensor& bias, std::size_t stride,
                        std::size_t padding) {
  if (x.rank() != 3 || weight.rank() != 3 || x.dim(1) != weight.dim(0)) {
    throw ShapeError("conv_transpose1d shapes " + shape_string(x.shape()) +
                     " and " + shape_string(weight.shape()) +
                     " are incompatible");
  }
  if (stride == 0) throw ShapeError("conv_transpose1d stride must be >= 1");
  const std::size_t batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
  const std::size_t cout = weight.dim(1), kernel = weight.dim(2);
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != cout)) {
    throw ShapeError("conv_transpose1d bias shape " +
                     shape_string(bias.shape()));
  }
  const std::size_t tout =
      conv_transpose1d_output_length(len, kernel, stride, padding);
  if (tout == 0) throw ShapeError("conv_transpose1d output would be empty");
  const long pad = static_cast<long>(padding);
  auto xv = x.data();
  auto wv = weight.data();
  std::vector<double> out(batch * cout * tout, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < cout; ++co) {
      double* y = out.data() + (b * cout + co) * tout;
      if (bias.defined()) std::fill_n(y, tout, bias.data()[co]);
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* xr = xv.data() + (b * cin + ci) * len;
        for (std::size_t k = 0; k < kernel; ++k) {
          double w = wv[(ci * cout + co) * kernel + k];
          for (std::size_t t = 0; t < len; ++t) {
            long pos = static_cast<long>(t * stride + k) - pad;
            if (pos >= 0 && pos < static_cast<long>(tout)) y[pos] += w * xr[t];
          }
        }
      }
    }
  }
  std::vector<Tensor> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  bool has_bias = bias.defined();
  return make_result(
      "conv_transpose1d", {batch, cout, tout}, std::move(out), inputs,
      [=](Node& self) {
        auto* gx = grad_of(self, 0);
        auto* gw = grad_of(self, 1);
        auto* gb = has_bias ? grad_of(self, 2) : nullptr;
        const auto& xv = self.inputs[0]->value;
        const auto& wv = self.inputs[1]->value;
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t co = 0; co < cout; ++co) {
            const double* gy = self.grad.data() + (b * cout + co) * tout;
            if (gb) {
              double acc = 0.0;
              for (std::size_t t = 0; t < tout; ++t) acc += gy[t];
              (*gb)[co] += acc;
            }
            for (std::size_t ci = 0; ci < cin; ++ci) {
              std::size_t xoff = (b * cin + ci) * len;
              const double* xr = xv.data() + xoff;
              for (std::size_t k = 0; k < kernel; ++k) {
                std::size_t widx = (ci * cout + co) * kernel + k;
                double w = wv[widx];
                double acc = 0.0;
                for (std::size_t t = 0; t < len; ++t) {
                  long pos = static_cast<long>(t * stride + k) - pad;
                  if (pos < 0 || pos >= static_cast<long>(tout)) continue;
                  acc += gy[pos] * xr[t];
                  if (gx) (*gx)[xoff + t] += w * gy[pos];
                }
                if (gw) (*gw)[widx] += acc;
              }
            }
          }
        }
      });
}

Tensor softmax(const Tensor& x, int axis) {
  std::size_t ax = normalize_axis(axis, x.rank());
  Lanes l = lanes_of(x.shape(), ax);
  auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t j = 0; j < l.inner; ++j) {
      std::size_t base = o * l.n * l.inner + j;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < l.n; ++i) mx = std::max(mx, xv[base + i * l.inner]);
      double total = 0.0;
      for (std::size_t i = 0; i < l.n; ++i) {
        double e = std::exp(xv[base + i * l.inner] - mx);
        out[base + i * l.inner] = e;
        total += e;
      }
      for (std::size_t i = 0; i < l.n; ++i) out[base + i * l.inner] /= total;
    }
  }
  return make_result("softmax", x.shape(), std::move(out), {x},
                     [l](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& y = self.value;
    const auto& g = self.grad;
    for (std::size_t o = 0; o < l.outer; ++o) {
      for (std::size_t j = 0; j < l.inner; ++j) {
        std::size_t base = o * l.n * l.inner + j;
        double dot = 0.0;
        for (std::size_t i = 0; i < l.n; ++i) {
          std::size_t idx = base + i * l.inner;
          dot += g[idx] * y[idx];
        }
        for (std::size_t i = 0; i < l.n; ++i) {
          std::size_t idx = base + i * l.inner;
          (*gx)[idx] += y[idx] * (g[idx] - dot);
        }
      }
    }
  });
}

Tensor log_softmax(const Tensor& x, int axis) {
  std::size_t ax = normalize_axis(axis, x.rank());
  Lanes l = lanes_of(x.shape(), ax);
  auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t j = 0; j < l.inner; ++j) {
      std::size_t base = o * l.n * l.inner + j;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < l.n; ++i) mx = std::max(mx, xv[base + i * l.inner]);
      double total = 0.0;
      for (std::size_t i = 0; i < l.n; ++i) {
        total += std::exp(xv[base + i * l.inner] - mx);
      }
      double lse = mx + std::log(total);
      for (std::size_t i = 0; i < l.n; ++i) {
        out[base + i * l.inner] = xv[base + i * l.inner] - lse;
      }
    }
  }
  return make_result("log_softmax", x.shape(), std::move(out), {x},
                     [l](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& y = self.value;
    const auto& g = self.grad;
    for (std::size_t o = 0; o < l.outer; ++o) {
      for (std::size_t j = 0; j < l.inner; ++j) {
        std::size_t base = o * l.n * l.inner + j;
        double gsum = 0.0;
        for (std::size_t i = 0; i < l.n; ++i) gsum += g[base + i * l.inner];
        for (std::size_t i = 0; i < l.n; ++i) {
          std::size_t idx = base + i * l.inner;
          (*gx)[idx] += g[idx] - std::exp(y[idx]) * gsum;
        }
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, int axis, double eps) {
  std::size_t ax = normalize_axis(axis, x.rank());
  Lanes l = lanes_of(x.shape(), ax);
  auto xv = x.data();
  std::vector<double> out(xv.size());
  std::vector<double> inv_std(l.outer * l.inner);
  const double n = static_cast<double>(l.n);
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t j = 0; j < l.inner; ++j) {
      std::size_t base = o * l.n * l.inner + j;
      double mu = 0.0;
      for (std::size_t i = 0; i < l.n; ++i) mu += xv[base + i * l.inner];
      mu /= n;
      double var = 0.0;
      for (std::size_t i = 0; i < l.n; ++i) {
        double d = xv[base + i * l.inner] - mu;
        var += d * d;
      }
      var /= n;
      double is = 1.0 / std::sqrt(var + eps);
      inv_std[o * l.inner + j] = is;
      for (std::size_t i = 0; i < l.n; ++i) {
        out[base + i * l.inner] = (xv[base + i * l.inner] - mu) * is;
      }
    }
  }
  return make_result("layer_norm", x.shape(), std::move(out), {x},
                     [l, inv_std = std::move(inv_std)](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& y = self.value;
    const auto& g = self.grad;
    const double n = static_cast<double>(l.n);
    for (std::size_t o = 0; o < l.outer; ++o) {
      for (std::size_t j = 0; j < l.inner; ++j) {
        std::size_t base = o * l.n * l.inner + j;
        double gmean = 0.0, gymean = 0.0;
        for (std::size_t i = 0; i < l.n; ++i) {
          std::size_t idx = base + i * l.inner;
          gmean += g[idx];
          gymean += g[idx] * y[idx];
        }
        gmean /= n;
        gymean /= n;
        double is = inv_std[o * l.inner + j];
        for (std::size_t i = 0; i < l.n; ++i) {
          std::size_t idx = base + i * l.inner;
          (*gx)[idx] += is * (g[idx] - gmean - y[idx] * gymean);
        }
      }
    }
  });
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            std::span<const std::uint8_t> mask) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2 ||
      q.dim(1) != k.dim(1) || k.dim(0) != v.dim(0)) {
    throw ShapeError("attention shapes q" + shape_string(q.shape()) + " k" +
                     shape_string(k.shape()) + " v" +
                     shape_string(v.shape()) + " are incompatible");
  }
  const std::size_t tq = q.dim(0), tk = k.dim(0);
  Tensor scores = scale(matmul(q, transpose(k, 0, 1)),
                        1.0 / std::sqrt(static_cast<double>(q.dim(1))));
  if (!mask.empty()) {
    if (mask.size() != tq * tk) {
      throw ShapeError("attention mask size " + std::to_string(mask.size()) +
                       " does not match " + std::to_string(tq) + " x " +
                       std::to_string(tk));
    }
    std::vector<double> additive(tq * tk);
    for (std::size_t i = 0; i < additive.size(); ++i) {
      additive[i] = mask[i] ? 0.0 : -1e30;
    }
    scores = add(scores, Tensor::from_vector({tq, tk}, std::move(additive)));
  }
  return matmul(softmax(scores, -1), v);
}

Tensor embedding_lookup(const Tensor& table, std::span<const std::size_t> ids) {
  if (table.rank() != 2) {
    throw ShapeError("embedding table must be rank 2, got " +
                     shape_string(table.shape()));
  }
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<std::size_t> idv(ids.begin(), ids.end());
  std::vector<double> out(idv.size() * d);
  auto tv = table.data();
  for (std::size_t r = 0; r < idv.size(); ++r) {
    if (idv[r] >= vocab) {
      throw ShapeError("embedding id " + std::to_string(idv[r]) +
                       " out of range " + std::to_string(vocab));
    }
    std::copy_n(tv.data() + idv[r] * d, d, out.data() + r * d);
  }
  return make_result("embedding_lookup", {idv.size(), d}, std::move(out),
                     {table}, [idv, d](Node& self) {
    auto* gt = grad_of(self, 0);
    if (!gt) return;
    for (std::size_t r = 0; r < idv.size(); ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        (*gt)[idv[r] * d + j] += self.grad[r * d + j];
      }
    }
  });
}

Tensor l2_normalize(const Tensor& x, int axis, double eps) {
  std::size_t ax = normalize_axis(axis, x.rank());
  Lanes l = lanes_of(x.shape(), ax);
  auto xv = x.data();
  std::vector<double> out(xv.size(), 0.0);
  std::vector<double> norms(l.outer * l.inner);
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t j = 0; j < l.inner; ++j) {
      std::size_t base = o * l.n * l.inner + j;
      double ss = 0.0;
      for (std::size_t i = 0; i < l.n; ++i) {
        double v = xv[base + i * l.inner];
        ss += v * v;
      }
      double nrm = std::sqrt(ss);
      norms[o * l.inner + j] = nrm;
      if (nrm < eps) continue;
      for (std::size_t i = 0; i < l.n; ++i) {
        out[base + i * l.inner] = xv[base + i * l.inner] / nrm;
      }
    }
  }
  return make_result("l2_normalize", x.shape(), std::move(out), {x},
                     [l, eps, norms = std::move(norms)](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& y = self.value;
    const auto& g = self.grad;
    for (std::size_t o = 0; o < l.outer; ++o) {
      for (std::size_t j = 0; j < l.inner; ++j) {
        double nrm = norms[o * l.inner + j];
        if (nrm < eps) continue;
        std::size_t base = o * l.n * l.inner + j;
        double dot = 0.0;
        for (std::size_t i = 0; i < l.n; ++i) {
          std::size_t idx = base + i * l.inner;
          dot += y[idx] * g[idx];
        }
        for (std::size_t i = 0; i < l.n; ++i) {
          std::size_t idx = base + i * l.inner;
          (*gx)[idx] += (g[idx] - y[idx] * dot) / nrm;
        }
      }
    }
  });
}

}  // namespace acvc::ad
