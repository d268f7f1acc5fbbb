// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

// Straightforward reference implementations, written independently of the
// library code paths they are compared against.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace attndrop::testing {

using BigFloat = boost::multiprecision::cpp_bin_float_50;

// [m,k] x [k,n] triple loop.
inline std::vector<double> matmul_oracle(std::span<const double> a, std::span<const double> b, std::size_t m,
                                         std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t t = 0; t < k; ++t) c[i * n + j] += a[i * k + t] * b[t * n + j];
  return c;
}

// exp(x_j) / sum exp(x), no max shift.
inline std::vector<double> softmax_oracle(std::span<const double> row) {
  std::vector<double> e(row.size());
  double z = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) z += e[j] = std::exp(row[j]);
  for (auto& v : e) v /= z;
  return e;
}

// Zero-padded sliding window; output[j] = sum_t kernel[t] * row[j + t - w/2].
inline std::vector<double> sliding_window_oracle(std::span<const double> row, std::span<const double> kernel) {
  const auto n = static_cast<std::ptrdiff_t>(row.size());
  const auto half = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  std::vector<double> out(row.size(), 0.0);
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(kernel.size()); ++t) {
      const auto src = j + t - half;
      if (src >= 0 && src < n) out[j] += kernel[t] * row[src];
    }
  }
  return out;
}

// Full stable sort by value descending; ties keep the smaller index first.
inline std::vector<std::size_t> topk_oracle(std::span<const double> row, std::size_t k) {
  std::vector<std::size_t> idx(row.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
  idx.resize(k);
  return idx;
}

// Gaussian kernel of odd width evaluated in 50-digit arithmetic.
inline std::vector<BigFloat> gaussian_kernel_oracle(std::size_t w, const BigFloat& sigma) {
  std::vector<BigFloat> k(w);
  const auto half = static_cast<long>(w / 2);
  BigFloat total = 0;
  for (long i = -half; i <= half; ++i) {
    k[i + half] = exp(-BigFloat(i * i) / (2 * sigma * sigma));
    total += k[i + half];
  }
  for (auto& v : k) v /= total;
  return k;
}

struct TwoPassVariance {
  double var_base = 0.0, var_ad = 0.0, var_delta = 0.0, cov = 0.0;
};

// Textbook two-pass sample statistics, summed over coordinates.
inline TwoPassVariance two_pass_variance(const std::vector<std::vector<double>>& base,
                                         const std::vector<std::vector<double>>& ad) {
  const std::size_t n = base.size(), d = base.front().size();
  TwoPassVariance r;
  for (std::size_t c = 0; c < d; ++c) {
    double mb = 0, ma = 0, md = 0;
    for (std::size_t s = 0; s < n; ++s) {
      mb += base[s][c];
      ma += ad[s][c];
      md += ad[s][c] - base[s][c];
    }
    mb /= n;
    ma /= n;
    md /= n;
    for (std::size_t s = 0; s < n; ++s) {
      const double db = base[s][c] - mb, da = ad[s][c] - ma, dd = (ad[s][c] - base[s][c]) - md;
      r.var_base += db * db;
      r.var_ad += da * da;
      r.var_delta += dd * dd;
      r.cov += db * dd;
    }
  }
  const double denom = static_cast<double>(n - 1);
  r.var_base /= denom;
  r.var_ad /= denom;
  r.var_delta /= denom;
  r.cov /= denom;
  return r;
}

}  // namespace attndrop::testing
