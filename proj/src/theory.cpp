// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include "attndrop/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "attndrop/errors.hpp"

namespace attndrop {

void TheoryInputs::validate() const {
  if (heads == 0) throw ParameterError("theory: heads must be >= 1");
  if (seq_len == 0) throw ParameterError("theory: seq_len must be >= 1");
  if (samples < 2) throw ParameterError("theory: sample count N must be >= 2");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("theory: delta must lie in (0,1)");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("theory: sigma must be > 0");
  if (!(empirical_risk >= 0.0 && empirical_risk <= 1.0)) {
    throw ParameterError("theory: empirical risk must lie in [0,1]");
  }
}

double kl_gaussian_attention(std::size_t heads, std::size_t seq_len, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("kl_gaussian_attention: sigma must be > 0, got " + std::to_string(sigma));
  }
  if (heads == 0 || seq_len == 0) throw ParameterError("kl_gaussian_attention: heads and seq_len must be >= 1");
  const double n = static_cast<double>(seq_len);
  return static_cast<double>(heads) * n * n * (-std::log(sigma) + kGaussianKlConstant);
}

double pac_bayes_radicand(const TheoryInputs& in, double kl) {
  in.validate();
  const double n = static_cast<double>(in.samples);
  return (kl + std::log(2.0 * std::sqrt(n) / in.delta)) / (2.0 * n - 1.0);
}

double pac_bayes_bound(const TheoryInputs& in, double kl) {
  const double r = pac_bayes_radicand(in, kl);
  if (r < 0.0) {
    throw DomainError("pac_bayes_bound: negative radicand " + std::to_string(r) +
                          " (KL term too negative for this N and delta)",
                      r);
  }
  return in.empirical_risk + std::sqrt(r);
}

double VarianceReport::relative_residual(double floor) const {
  return std::abs(identity_residual) / std::max(std::abs(var_ad), floor);
}

VarianceReport variance_decomposition(std::span<const std::vector<double>> g_base,
                                      std::span<const std::vector<double>> g_ad) {
  if (g_base.size() != g_ad.size()) {
    throw DimensionError("variance_decomposition: " + std::to_string(g_base.size()) + " base samples vs " +
                         std::to_string(g_ad.size()) + " perturbed samples");
  }
  if (g_base.size() < 2) throw ParameterError("variance_decomposition: need at least 2 paired samples");
  const std::size_t dim = g_base.front().size();
  for (std::size_t s = 0; s < g_base.size(); ++s) {
    if (g_base[s].size() != dim || g_ad[s].size() != dim) {
      throw DimensionError("variance_decomposition: sample " + std::to_string(s) + " has mismatched length");
    }
  }

  // Welford co-moment updates per coordinate for (base, delta, ad).
  std::vector<double> mean_b(dim, 0.0), mean_d(dim, 0.0), mean_a(dim, 0.0);
  std::vector<double> m2_b(dim, 0.0), m2_d(dim, 0.0), m2_a(dim, 0.0), c_bd(dim, 0.0);
  double count = 0.0;
  for (std::size_t s = 0; s < g_base.size(); ++s) {
    count += 1.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double b = g_base[s][c];
      const double a = g_ad[s][c];
      const double d = a - b;
      const double db = b - mean_b[c];
      const double dd = d - mean_d[c];
      const double da = a - mean_a[c];
      mean_b[c] += db / count;
      mean_d[c] += dd / count;
      mean_a[c] += da / count;
      m2_b[c] += db * (b - mean_b[c]);
      m2_d[c] += dd * (d - mean_d[c]);
      m2_a[c] += da * (a - mean_a[c]);
      c_bd[c] += db * (d - mean_d[c]);
    }
  }
  VarianceReport r;
  const double denom = count - 1.0;
  for (std::size_t c = 0; c < dim; ++c) {
    r.var_base += m2_b[c];
    r.var_delta += m2_d[c];
    r.var_ad += m2_a[c];
    r.cov += c_bd[c];
  }
  r.var_base /= denom;
  r.var_delta /= denom;
  r.var_ad /= denom;
  r.cov /= denom;
  r.identity_residual = r.var_ad - (r.var_base + 2.0 * r.cov + r.var_delta);
  r.condition_holds = r.cov < -0.5 * r.var_delta;
  return r;
}

}  // namespace attndrop
