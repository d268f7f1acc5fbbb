// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "attndrop/errors.hpp"
#include "attndrop/rng.hpp"
#include "attndrop/theory.hpp"
#include "oracles.hpp"

namespace attndrop {
namespace {

using testing::BigFloat;

BigFloat kl_oracle(std::size_t h, std::size_t n, double sigma) {
  const BigFloat pi = boost::math::constants::pi<BigFloat>();
  const BigFloat e = boost::math::constants::e<BigFloat>();
  return BigFloat(h) * BigFloat(n) * BigFloat(n) * (-log(BigFloat(sigma)) - log(2 * pi * e) / 2);
}

BigFloat bound_oracle(const TheoryInputs& in, const BigFloat& kl) {
  const BigFloat n(in.samples);
  return BigFloat(in.empirical_risk) + sqrt((kl + log(2 * sqrt(n) / BigFloat(in.delta))) / (2 * n - 1));
}

TEST(Theory, ConstantAndUnitCase) {
  const BigFloat pi = boost::math::constants::pi<BigFloat>();
  const BigFloat e = boost::math::constants::e<BigFloat>();
  const double c0 = static_cast<double>(-log(2 * pi * e) / 2);
  EXPECT_EQ(kGaussianKlConstant, c0);
  EXPECT_NEAR(kl_gaussian_attention(1, 1, 1.0), c0, 1e-12);
  EXPECT_NEAR(kl_gaussian_attention(2, 3, 0.5), static_cast<double>(kl_oracle(2, 3, 0.5)), 1e-12);
}

TEST(Theory, WorkedExample) {
  TheoryInputs in{1, 1, 1000, 0.05, 1.0, 0.0};
  const double kl = kl_gaussian_attention(1, 1, 1.0);
  const double bound = pac_bayes_bound(in, kl);
  EXPECT_NEAR(bound, static_cast<double>(bound_oracle(in, kl_oracle(1, 1, 1.0))), 1e-15);
  EXPECT_GT(pac_bayes_radicand(in, kl), 0.0);
}

TEST(Theory, BoundMatchesHighPrecisionOnRandomInputs) {
  RngStream rng(1);
  int accepted = 0;
  while (accepted < 20) {
    TheoryInputs in;
    in.heads = 1 + rng.below(8);
    in.seq_len = 1 + rng.below(32);
    in.samples = 2 + rng.below(100000);
    in.delta = rng.uniform(0.001, 0.5);
    in.sigma = std::exp(rng.uniform(std::log(1e-3), std::log(2.0)));
    in.empirical_risk = rng.uniform();
    const BigFloat kl = kl_oracle(in.heads, in.seq_len, in.sigma);
    const BigFloat num = kl + log(2 * sqrt(BigFloat(in.samples)) / BigFloat(in.delta));
    if (num <= 0) continue;
    ++accepted;
    const double got = pac_bayes_bound(in, kl_gaussian_attention(in.heads, in.seq_len, in.sigma));
    const double ref = static_cast<double>(bound_oracle(in, kl));
    EXPECT_LE(std::abs(got - ref) / std::abs(ref), 1e-12);
  }
}

TEST(Theory, Monotonicity) {
  RngStream rng(2);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t h = 1 + rng.below(8), n = 1 + rng.below(64);
    const double s1 = rng.uniform(1e-3, 5.0), s2 = rng.uniform(1e-3, 5.0);
    const double lo = std::min(s1, s2), hi = std::max(s1, s2);
    EXPECT_GE(kl_gaussian_attention(h, n, lo), kl_gaussian_attention(h, n, hi));

    TheoryInputs in{1, 1, 2 + rng.below(10000), rng.uniform(0.01, 0.5), 1.0, rng.uniform()};
    const double k1 = rng.uniform(0.0, 1e4), k2 = rng.uniform(0.0, 1e4);
    EXPECT_LE(pac_bayes_bound(in, std::min(k1, k2)), pac_bayes_bound(in, std::max(k1, k2)));
  }
}

TEST(Theory, NegativeRadicandIsDomainError) {
  TheoryInputs in{4, 16, 1000, 0.05, 100.0, 0.1};
  const double kl = kl_gaussian_attention(in.heads, in.seq_len, in.sigma);
  ASSERT_LT(kl, 0.0);
  try {
    pac_bayes_bound(in, kl);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_LT(e.value(), 0.0);
    EXPECT_DOUBLE_EQ(e.value(), pac_bayes_radicand(in, kl));
  }
}

TEST(Theory, InputValidation) {
  EXPECT_THROW(kl_gaussian_attention(1, 1, 0.0), ParameterError);
  EXPECT_THROW(kl_gaussian_attention(0, 1, 1.0), ParameterError);
  TheoryInputs in;
  in.delta = 1.0;
  EXPECT_THROW(in.validate(), ParameterError);
  in = {};
  in.samples = 1;
  EXPECT_THROW(in.validate(), ParameterError);
  in = {};
  in.empirical_risk = 1.5;
  EXPECT_THROW(in.validate(), ParameterError);
}

TEST(Variance, MatchesTwoPassOracleAndIdentity) {
  RngStream rng(3);
  std::vector<std::vector<double>> base(10, std::vector<double>(50)), ad(10, std::vector<double>(50));
  for (std::size_t s = 0; s < 10; ++s)
    for (std::size_t c = 0; c < 50; ++c) {
      base[s][c] = rng.normal() * 3.0 + 100.0;
      ad[s][c] = 0.6 * base[s][c] + rng.normal();
    }
  const auto r = variance_decomposition(base, ad);
  const auto o = testing::two_pass_variance(base, ad);
  EXPECT_NEAR(r.var_base, o.var_base, 1e-10 * o.var_base);
  EXPECT_NEAR(r.var_ad, o.var_ad, 1e-10 * o.var_ad);
  EXPECT_NEAR(r.var_delta, o.var_delta, 1e-10 * o.var_delta);
  EXPECT_NEAR(r.cov, o.cov, 1e-10 * std::abs(o.cov));
  EXPECT_LT(r.relative_residual(), 1e-12);
  EXPECT_TRUE(r.condition_holds);
  EXPECT_LT(r.var_ad, r.var_base);
}

TEST(Variance, IndependentNoiseIncreasesVariance) {
  RngStream rng(4);
  std::vector<std::vector<double>> base(200, std::vector<double>(3)), ad = base;
  for (std::size_t s = 0; s < 200; ++s)
    for (std::size_t c = 0; c < 3; ++c) {
      base[s][c] = rng.normal();
      ad[s][c] = base[s][c] + rng.normal();
    }
  const auto r = variance_decomposition(base, ad);
  EXPECT_FALSE(r.condition_holds);
  EXPECT_GT(r.var_ad, r.var_base);
}

TEST(Variance, Errors) {
  std::vector<std::vector<double>> one{{1.0}};
  EXPECT_THROW(variance_decomposition(one, one), ParameterError);
  std::vector<std::vector<double>> a{{1.0}, {2.0}}, b{{1.0}, {2.0, 3.0}};
  EXPECT_THROW(variance_decomposition(a, b), DimensionError);
}

}  // namespace
}  // namespace attndrop
