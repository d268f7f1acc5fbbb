// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include "attndrop/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "attndrop/errors.hpp"
#include "op_builder.hpp"

namespace attndrop {
namespace {

using detail::BackwardFn;
using detail::make_result;
using detail::Node;
using detail::parent_grad;

[[noreturn]] void shape_mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_to_string(a.shape()) + " and " +
                       shape_to_string(b.shape()));
}

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

// Layout of a leading-dimension broadcast: `big` has outer*inner elements,
// `small` has inner.
struct Broadcast {
  bool a_is_big;
  std::size_t inner;
};

Broadcast suffix_broadcast(const char* op, const Tensor& a, const Tensor& b) {
  if (is_suffix(b.shape(), a.shape())) return {true, b.numel()};
  if (is_suffix(a.shape(), b.shape())) return {false, a.numel()};
  shape_mismatch(op, a, b);
}

std::size_t last_dim(const char* op, const Tensor& a) {
  if (a.rank() == 0) throw DimensionError(std::string(op) + ": needs at least one dimension");
  return a.shape().back();
}

Tensor add_impl(const char* op, const Tensor& a, const Tensor& b, double sign) {
  const auto bc = suffix_broadcast(op, a, b);
  const Tensor& big = bc.a_is_big ? a : b;
  const Tensor& small = bc.a_is_big ? b : a;
  const auto n = big.numel();
  std::vector<double> out(n);
  const auto bd = big.data();
  const auto sd = small.data();
  const double big_sign = bc.a_is_big ? 1.0 : sign;
  const double small_sign = bc.a_is_big ? sign : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = bc.a_is_big ? bd[i] + sign * sd[i % bc.inner] : sd[i % bc.inner] + sign * bd[i];
  }
  const std::size_t inner = bc.inner;
  const bool a_big = bc.a_is_big;
  return make_result(op, big.shape(), std::move(out), {&a, &b},
                     [inner, a_big, big_sign, small_sign](Node& self) {
                       double* gbig = parent_grad(self, a_big ? 0 : 1);
                       double* gsmall = parent_grad(self, a_big ? 1 : 0);
                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                         if (gbig) gbig[i] += big_sign * self.grad[i];
                         if (gsmall) gsmall[i % inner] += small_sign * self.grad[i];
                       }
                     });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_impl("add", a, b, 1.0); }
Tensor sub(const Tensor& a, const Tensor& b) { return add_impl("sub", a, b, -1.0); }

Tensor mul(const Tensor& a, const Tensor& b) {
  const auto bc = suffix_broadcast("mul", a, b);
  const Tensor& big = bc.a_is_big ? a : b;
  const Tensor& small = bc.a_is_big ? b : a;
  const auto n = big.numel();
  std::vector<double> out(n);
  const auto bd = big.data();
  const auto sd = small.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = bd[i] * sd[i % bc.inner];
  const std::size_t inner = bc.inner;
  const bool a_big = bc.a_is_big;
  return make_result("mul", big.shape(), std::move(out), {&a, &b}, [inner, a_big](Node& self) {
    const auto& big_node = *self.parents[a_big ? 0 : 1];
    const auto& small_node = *self.parents[a_big ? 1 : 0];
    double* gbig = parent_grad(self, a_big ? 0 : 1);
    double* gsmall = parent_grad(self, a_big ? 1 : 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (gbig) gbig[i] += self.grad[i] * small_node.data[i % inner];
      if (gsmall) gsmall[i % inner] += self.grad[i] * big_node.data[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (auto& v : out) v *= factor;
  return make_result("scale", a.shape(), std::move(out), {&a}, [factor](Node& self) {
    double* g = parent_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += factor * self.grad[i];
  });
}

Tensor exp(const Tensor& a) {
  std::vector<double> out(a.numel());
  std::transform(a.data().begin(), a.data().end(), out.begin(), [](double v) { return std::exp(v); });
  return make_result("exp", a.shape(), std::move(out), {&a}, [](Node& self) {
    double* g = parent_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * self.data[i];
  });
}

Tensor ln(const Tensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = a.data()[i];
    if (!(v > 0.0)) throw DomainError("ln: non-positive input " + std::to_string(v), v);
    out[i] = std::log(v);
  }
  return make_result("ln", a.shape(), std::move(out), {&a}, [](Node& self) {
    const auto& x = self.parents[0]->data;
    double* g = parent_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] / x[i];
  });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.numel());
  std::transform(a.data().begin(), a.data().end(), out.begin(), [](double v) { return v > 0.0 ? v : 0.0; });
  return make_result("relu", a.shape(), std::move(out), {&a}, [](Node& self) {
    const auto& x = self.parents[0]->data;
    double* g = parent_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (x[i] > 0.0) g[i] += self.grad[i];
    }
  });
}

Tensor sum(const Tensor& a) {
  const double s = std::accumulate(a.data().begin(), a.data().end(), 0.0);
  return make_result("sum", Shape{}, {s}, {&a}, [](Node& self) {
    double* g = parent_grad(self, 0);
    const auto n = self.parents[0]->data.size();
    for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  const auto n = static_cast<double>(a.numel());
  const double s = std::accumulate(a.data().begin(), a.data().end(), 0.0) / n;
  return make_result("mean", Shape{}, {s}, {&a}, [n](Node& self) {
    double* g = parent_grad(self, 0);
    const auto count = self.parents[0]->data.size();
    for (std::size_t i = 0; i < count; ++i) g[i] += self.grad[0] / n;
  });
}

Tensor mean_dim(const Tensor& a, std::ptrdiff_t axis) {
  const auto r = static_cast<std::ptrdiff_t>(a.rank());
  const auto ax = axis < 0 ? axis + r : axis;
  if (ax < 0 || ax >= r) {
    throw DimensionError("mean_dim: axis " + std::to_string(axis) + " out of range for " + shape_to_string(a.shape()));
  }
  const auto& s = a.shape();
  const auto uax = static_cast<std::size_t>(ax);
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < uax; ++i) outer *= s[i];
  for (std::size_t i = uax + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t len = s[uax];
  Shape out_shape;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i != uax) out_shape.push_back(s[i]);
  }
  std::vector<double> out(outer * inner, 0.0);
  const auto x = a.data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t l = 0; l < len; ++l)
      for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] += x[(o * len + l) * inner + i];
  for (auto& v : out) v /= static_cast<double>(len);
  return make_result("mean_dim", std::move(out_shape), std::move(out), {&a}, [outer, inner, len](Node& self) {
    double* g = parent_grad(self, 0);
    const double f = 1.0 / static_cast<double>(len);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t l = 0; l < len; ++l)
        for (std::size_t i = 0; i < inner; ++i) g[(o * len + l) * inner + i] += f * self.grad[o * inner + i];
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || b.rank() < 2) shape_mismatch("matmul", a, b);
  const std::size_t m = a.dim(-2), kk = a.dim(-1), p = b.dim(-1);
  if (b.dim(-2) != kk) shape_mismatch("matmul", a, b);
  const bool b_shared = b.rank() == 2;
  if (!b_shared) {
    if (a.rank() != b.rank() || !std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin())) {
      shape_mismatch("matmul", a, b);
    }
  }
  const std::size_t batch = a.numel() / (m * kk);
  Shape out_shape(a.shape().begin(), a.shape().end() - 2);
  out_shape.push_back(m);
  out_shape.push_back(p);
  std::vector<double> out(batch * m * p, 0.0);
  const auto ad = a.data();
  const auto bd = b.data();
  for (std::size_t s = 0; s < batch; ++s) {
    const double* as = ad.data() + s * m * kk;
    const double* bs = bd.data() + (b_shared ? 0 : s * kk * p);
    double* os = out.data() + s * m * p;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t t = 0; t < kk; ++t) {
        const double av = as[i * kk + t];
        for (std::size_t j = 0; j < p; ++j) os[i * p + j] += av * bs[t * p + j];
      }
  }
  return make_result("matmul", std::move(out_shape), std::move(out), {&a, &b},
                     [batch, m, kk, p, b_shared](Node& self) {
                       const auto& av = self.parents[0]->data;
                       const auto& bv = self.parents[1]->data;
                       double* ga = parent_grad(self, 0);
                       double* gb = parent_grad(self, 1);
                       for (std::size_t s = 0; s < batch; ++s) {
                         const double* gs = self.grad.data() + s * m * p;
                         const double* as = av.data() + s * m * kk;
                         const std::size_t boff = b_shared ? 0 : s * kk * p;
                         const double* bs = bv.data() + boff;
                         if (ga) {
                           double* gas = ga + s * m * kk;
                           for (std::size_t i = 0; i < m; ++i)
                             for (std::size_t t = 0; t < kk; ++t) {
                               double acc = 0.0;
                               for (std::size_t j = 0; j < p; ++j) acc += gs[i * p + j] * bs[t * p + j];
                               gas[i * kk + t] += acc;
                             }
                         }
                         if (gb) {
                           double* gbs = gb + boff;
                           for (std::size_t i = 0; i < m; ++i)
                             for (std::size_t t = 0; t < kk; ++t) {
                               const double aval = as[i * kk + t];
                               for (std::size_t j = 0; j < p; ++j) gbs[t * p + j] += aval * gs[i * p + j];
                             }
                         }
                       }
                     });
}

namespace {

// Generic gather-by-index op: out[o] = a[src[o]].
Tensor index_copy(const char* op, const Tensor& a, Shape out_shape, std::vector<std::size_t> src) {
  std::vector<double> out(src.size());
  const auto ad = a.data();
  for (std::size_t o = 0; o < src.size(); ++o) out[o] = ad[src[o]];
  return make_result(op, std::move(out_shape), std::move(out), {&a}, [src = std::move(src)](Node& self) {
    double* g = parent_grad(self, 0);
    for (std::size_t o = 0; o < src.size(); ++o) g[src[o]] += self.grad[o];
  });
}

}  // namespace

Tensor permute(const Tensor& a, const std::vector<std::size_t>& perm) {
  const auto& s = a.shape();
  const auto r = s.size();
  if (perm.size() != r) throw DimensionError("permute: permutation length does not match rank of " + shape_to_string(s));
  std::vector<bool> seen(r, false);
  for (auto p : perm) {
    if (p >= r || seen[p]) throw DimensionError("permute: invalid permutation for " + shape_to_string(s));
    seen[p] = true;
  }
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t i = r; i-- > 1;) in_stride[i - 1] = in_stride[i] * s[i];
  Shape out_shape(r);
  for (std::size_t i = 0; i < r; ++i) out_shape[i] = s[perm[i]];
  const auto n = a.numel();
  std::vector<std::size_t> src(n);
  std::vector<std::size_t> idx(r, 0);
  for (std::size_t o = 0; o < n; ++o) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < r; ++i) off += idx[i] * in_stride[perm[i]];
    src[o] = off;
    for (std::size_t i = r; i-- > 0;) {
      if (++idx[i] < out_shape[i]) break;
      idx[i] = 0;
    }
  }
  return index_copy("permute", a, std::move(out_shape), std::move(src));
}

Tensor transpose_last2(const Tensor& a) {
  if (a.rank() < 2) throw DimensionError("transpose_last2: needs rank >= 2, got " + shape_to_string(a.shape()));
  std::vector<std::size_t> perm(a.rank());
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[a.rank() - 1], perm[a.rank() - 2]);
  return permute(a, perm);
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw DimensionError("reshape: cannot view " + shape_to_string(a.shape()) + " as " + shape_to_string(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_result("reshape", std::move(shape), std::move(out), {&a}, [](Node& self) {
    double* g = parent_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor softmax_rows(const Tensor& a) {
  const auto n = last_dim("softmax_rows", a);
  const auto rows = a.numel() / n;
  const auto x = a.data();
  std::vector<double> out(a.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * n;
    double* yr = out.data() + r * n;
    const double mx = *std::max_element(xr, xr + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += (yr[j] = std::exp(xr[j] - mx));
    for (std::size_t j = 0; j < n; ++j) yr[j] /= z;
  }
  return make_result("softmax_rows", a.shape(), std::move(out), {&a}, [rows, n](Node& self) {
    double* g = parent_grad(self, 0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.data.data() + r * n;
      const double* gy = self.grad.data() + r * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += gy[j] * y[j];
      for (std::size_t j = 0; j < n; ++j) g[r * n + j] += y[j] * (gy[j] - dot);
    }
  });
}

Tensor log_softmax_rows(const Tensor& a) {
  const auto n = last_dim("log_softmax_rows", a);
  const auto rows = a.numel() / n;
  const auto x = a.data();
  std::vector<double> out(a.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * n;
    const double mx = *std::max_element(xr, xr + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(xr[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] = xr[j] - lse;
  }
  return make_result("log_softmax_rows", a.shape(), std::move(out), {&a}, [rows, n](Node& self) {
    double* g = parent_grad(self, 0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* ly = self.data.data() + r * n;
      const double* gy = self.grad.data() + r * n;
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) total += gy[j];
      for (std::size_t j = 0; j < n; ++j) g[r * n + j] += gy[j] - std::exp(ly[j]) * total;
    }
  });
}

Tensor gather_last_dim(const Tensor& a, std::span<const std::size_t> indices, std::size_t k) {
  const auto n = last_dim("gather_last_dim", a);
  const auto rows = a.numel() / n;
  if (k == 0 || indices.size() != rows * k) {
    throw DimensionError("gather_last_dim: expected " + std::to_string(rows) + "x" + std::to_string(k) +
                         " indices for " + shape_to_string(a.shape()) + ", got " + std::to_string(indices.size()));
  }
  std::vector<std::size_t> src(rows * k);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < k; ++j) {
      const auto c = indices[r * k + j];
      if (c >= n) throw ParameterError("gather_last_dim: index " + std::to_string(c) + " out of range");
      src[r * k + j] = r * n + c;
    }
  Shape out_shape = a.shape();
  out_shape.back() = k;
  return index_copy("gather_last_dim", a, std::move(out_shape), std::move(src));
}

Tensor scatter_mul_last_dim(const Tensor& a, std::span<const std::size_t> indices, std::span<const double> factors,
                            std::size_t k) {
  const auto n = last_dim("scatter_mul_last_dim", a);
  const auto rows = a.numel() / n;
  if (k == 0 || indices.size() != rows * k || factors.size() != rows * k) {
    throw DimensionError("scatter_mul_last_dim: expected " + std::to_string(rows * k) + " indices and factors for " +
                         shape_to_string(a.shape()));
  }
  std::vector<double> mask(a.numel(), 1.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < k; ++j) {
      const auto c = indices[r * k + j];
      if (c >= n) throw ParameterError("scatter_mul_last_dim: index " + std::to_string(c) + " out of range");
      mask[r * n + c] *= factors[r * k + j];
    }
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * mask[i];
  return make_result("scatter_mul_last_dim", a.shape(), std::move(out), {&a}, [mask = std::move(mask)](Node& self) {
    double* g = parent_grad(self, 0);
    for (std::size_t i = 0; i < mask.size(); ++i) g[i] += self.grad[i] * mask[i];
  });
}

Tensor cross_entropy_with_logits(const Tensor& logits, std::span<const std::size_t> labels) {
  if (logits.rank() != 2) {
    throw DimensionError("cross_entropy_with_logits: logits must be [B,C], got " + shape_to_string(logits.shape()));
  }
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) {
    throw DimensionError("cross_entropy_with_logits: " + std::to_string(labels.size()) + " labels for batch of " +
                         std::to_string(batch));
  }
  std::vector<std::size_t> lab(labels.begin(), labels.end());
  for (auto y : lab) {
    if (y >= classes) throw ParameterError("cross_entropy_with_logits: label " + std::to_string(y) + " out of range");
  }
  const auto x = logits.data();
  std::vector<double> probs(logits.numel());
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xr = x.data() + b * classes;
    const double mx = *std::max_element(xr, xr + classes);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += (probs[b * classes + c] = std::exp(xr[c] - mx));
    for (std::size_t c = 0; c < classes; ++c) probs[b * classes + c] /= z;
    loss -= xr[lab[b]] - mx - std::log(z);
  }
  loss /= static_cast<double>(batch);
  return make_result("cross_entropy_with_logits", Shape{}, {loss}, {&logits},
                     [probs = std::move(probs), lab = std::move(lab), batch, classes](Node& self) {
                       double* g = parent_grad(self, 0);
                       const double f = self.grad[0] / static_cast<double>(batch);
                       for (std::size_t b = 0; b < batch; ++b)
                         for (std::size_t c = 0; c < classes; ++c) {
                           const double target = c == lab[b] ? 1.0 : 0.0;
                           g[b * classes + c] += f * (probs[b * classes + c] - target);
                         }
                     });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const auto d = last_dim("layer_norm", x);
  if (gain.shape() != Shape{d} || bias.shape() != Shape{d}) {
    throw DimensionError("layer_norm: gain/bias must be [" + std::to_string(d) + "], got " +
                         shape_to_string(gain.shape()) + " and " + shape_to_string(bias.shape()));
  }
  const auto rows = x.numel() / d;
  const auto xv = x.data();
  const auto gv = gain.data();
  const auto bv = bias.data();
  std::vector<double> xhat(x.numel()), rstd(rows), out(x.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += xr[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(d);
    rstd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[r * d + j] = (xr[j] - mu) * rstd[r];
      out[r * d + j] = xhat[r * d + j] * gv[j] + bv[j];
    }
  }
  return make_result("layer_norm", x.shape(), std::move(out), {&x, &gain, &bias},
                     [xhat = std::move(xhat), rstd = std::move(rstd), rows, d](Node& self) {
                       const auto& gv = self.parents[1]->data;
                       double* gx = parent_grad(self, 0);
                       double* gg = parent_grad(self, 1);
                       double* gb = parent_grad(self, 2);
                       const double inv_d = 1.0 / static_cast<double>(d);
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double* gy = self.grad.data() + r * d;
                         const double* xh = xhat.data() + r * d;
                         double mean_dxh = 0.0, mean_dxh_xh = 0.0;
                         for (std::size_t j = 0; j < d; ++j) {
                           const double dxh = gy[j] * gv[j];
                           mean_dxh += dxh;
                           mean_dxh_xh += dxh * xh[j];
                           if (gg) gg[j] += gy[j] * xh[j];
                           if (gb) gb[j] += gy[j];
                         }
                         mean_dxh *= inv_d;
                         mean_dxh_xh *= inv_d;
                         if (gx) {
                           for (std::size_t j = 0; j < d; ++j) {
                             gx[r * d + j] += rstd[r] * (gy[j] * gv[j] - mean_dxh - xh[j] * mean_dxh_xh);
                           }
                         }
                       }
                     });
}

Tensor embedding(const Tensor& table, std::span<const std::size_t> ids, const Shape& ids_shape) {
  if (table.rank() != 2) throw DimensionError("embedding: table must be [V,D], got " + shape_to_string(table.shape()));
  if (shape_numel(ids_shape) != ids.size()) {
    throw DimensionError("embedding: " + std::to_string(ids.size()) + " ids do not fill " + shape_to_string(ids_shape));
  }
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<std::size_t> src(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab) throw ParameterError("embedding: id " + std::to_string(ids[i]) + " outside vocabulary");
    for (std::size_t j = 0; j < d; ++j) src[i * d + j] = ids[i] * d + j;
  }
  Shape out_shape = ids_shape;
  out_shape.push_back(d);
  return index_copy("embedding", table, std::move(out_shape), std::move(src));
}

Tensor conv_last_dim(const Tensor& a, std::span<const double> kernel) {
  const auto n = last_dim("conv_last_dim", a);
  const auto w = kernel.size();
  if (w == 0 || w % 2 == 0) throw ParameterError("conv_last_dim: kernel width must be odd, got " + std::to_string(w));
  const auto rows = a.numel() / n;
  const auto half = static_cast<std::ptrdiff_t>(w / 2);
  const auto sn = static_cast<std::ptrdiff_t>(n);
  const auto x = a.data();
  std::vector<double> out(a.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * n;
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
      double acc = 0.0;
      for (std::size_t t = 0; t < w; ++t) {
        const auto j = i + static_cast<std::ptrdiff_t>(t) - half;
        if (j >= 0 && j < sn) acc += kernel[t] * xr[j];
      }
      out[r * n + static_cast<std::size_t>(i)] = acc;
    }
  }
  std::vector<double> k(kernel.begin(), kernel.end());
  return make_result("conv_last_dim", a.shape(), std::move(out), {&a}, [k = std::move(k), rows, sn, half](Node& self) {
    double* g = parent_grad(self, 0);
    const auto n = static_cast<std::size_t>(sn);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::ptrdiff_t i = 0; i < sn; ++i) {
        const double gi = self.grad[r * n + static_cast<std::size_t>(i)];
        for (std::size_t t = 0; t < k.size(); ++t) {
          const auto j = i + static_cast<std::ptrdiff_t>(t) - half;
          if (j >= 0 && j < sn) g[r * n + static_cast<std::size_t>(j)] += k[t] * gi;
        }
      }
    }
  });
}

}  // namespace attndrop
