// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace attndrop {

/// -1/2 ln(2 pi e).
inline constexpr double kGaussianKlConstant = -1.4189385332046727417803297364056176398613974736377834128171515;

struct TheoryInputs {
  std::size_t heads = 1;
  std::size_t seq_len = 1;
  std::size_t samples = 2;     // N, training-set size
  double delta = 0.05;         // confidence parameter
  double sigma = 1.0;          // logit noise stddev
  double empirical_risk = 0.0; // in [0,1]

  void validate() const;
};

/// KL between the Gaussian logit posterior and the point-mass prior, summed
/// over H heads and n^2 logits: H n^2 (-ln sigma + C0). The per-logit term
/// drops an infinite constant, so the result can be negative.
double kl_gaussian_attention(std::size_t heads, std::size_t seq_len, double sigma);

/// (kl + ln(2 sqrt(N) / delta)) / (2N - 1).
double pac_bayes_radicand(const TheoryInputs& in, double kl);

/// empirical_risk + sqrt(radicand). Throws DomainError carrying the radicand
/// when it is negative.
double pac_bayes_bound(const TheoryInputs& in, double kl);

struct VarianceReport {
  double var_base = 0.0;   // trace of the sample covariance of g_base
  double var_ad = 0.0;     // same for g_ad
  double var_delta = 0.0;  // same for g_ad - g_base
  double cov = 0.0;        // sum over coordinates of Cov(g_base, delta)
  double identity_residual = 0.0;  // var_ad - (var_base + 2 cov + var_delta)
  bool condition_holds = false;    // cov < -var_delta / 2, i.e. var_ad < var_base

  /// |residual| / max(|var_ad|, floor).
  double relative_residual(double floor = 1e-300) const;
};

/// Paired gradient samples -> variance decomposition of g_ad = g_base + delta.
/// Uses sample (n-1) statistics computed in one streaming pass. Needs at
/// least two pairs of equal-length vectors.
VarianceReport variance_decomposition(std::span<const std::vector<double>> g_base,
                                      std::span<const std::vector<double>> g_ad);

}  // namespace attndrop
