// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "attndrop/attention.hpp"
#include "attndrop/errors.hpp"
#include "attndrop/ops.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

namespace attndrop {
namespace {

using testing::random_tensor;

TEST(AttentionConfig, Validation) {
  EXPECT_EQ(AttentionConfig::make(16, 2, 8).head_dim, 8u);
  EXPECT_THROW(AttentionConfig::make(15, 2, 8), ConfigError);
  EXPECT_THROW(AttentionConfig::make(16, 0, 8), ConfigError);
  EXPECT_THROW(AttentionConfig::make(16, 2, 0), ConfigError);
}

TEST(Attention, SplitMergeRoundTrip) {
  RngStream rng(1);
  const auto x = random_tensor({2, 5, 6}, rng);
  const auto h = split_heads(x, 3);
  EXPECT_EQ(h.shape(), (Shape{2, 3, 5, 2}));
  // head 1, token 4 of batch 1 holds features 2..3
  EXPECT_EQ(h.data()[((1 * 3 + 1) * 5 + 4) * 2 + 1], x.data()[(1 * 5 + 4) * 6 + 3]);
  const auto back = merge_heads(h);
  ASSERT_EQ(back.shape(), x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(back.data()[i], x.data()[i]);
  EXPECT_THROW(split_heads(x, 4), DimensionError);
}

TEST(Attention, LogitsMatchScaledDotProducts) {
  RngStream rng(2);
  const auto q = random_tensor({1, 2, 3, 4}, rng), k = random_tensor({1, 2, 3, 4}, rng);
  const auto l = attention_logits(q, k);
  ASSERT_EQ(l.shape(), (Shape{1, 2, 3, 3}));
  for (std::size_t h = 0; h < 2; ++h)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double dot = 0;
        for (std::size_t d = 0; d < 4; ++d) dot += q.data()[(h * 3 + i) * 4 + d] * k.data()[(h * 3 + j) * 4 + d];
        EXPECT_NEAR(l.data()[(h * 3 + i) * 3 + j], dot / 2.0, 1e-15);
      }
}

TEST(Attention, AttendChecksRows) {
  RngStream rng(3);
  const auto v = random_tensor({1, 1, 3, 2}, rng);
  const auto bad = Tensor({1, 1, 3, 3}, std::vector<double>(9, 0.5));
  EXPECT_THROW(attend(bad, v), ContractError);
  EXPECT_NO_THROW(attend(bad, v, RowCheck::kDisabled));
  const auto good = softmax_rows(random_tensor({1, 1, 3, 3}, rng));
  const auto z = attend(good, v);
  const auto ref = testing::matmul_oracle(good.data(), v.data(), 3, 3, 2);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(z.data()[i], ref[i], 1e-15);
}

TEST(Attention, SelfAttentionShapesAndRows) {
  RngStream rng(4);
  const auto cfg = AttentionConfig::make(8, 2, 5);
  const auto x = random_tensor({3, 5, 8}, rng);
  const auto wq = random_tensor({8, 8}, rng), wk = random_tensor({8, 8}, rng), wv = random_tensor({8, 8}, rng);
  const auto out = self_attention(x, wq, wk, wv, cfg);
  EXPECT_EQ(out.q.shape(), (Shape{3, 2, 5, 4}));
  EXPECT_EQ(out.logits.shape(), (Shape{3, 2, 5, 5}));
  EXPECT_EQ(out.output.shape(), (Shape{3, 2, 5, 4}));
  for (std::size_t r = 0; r < 30; ++r) {
    double s = 0;
    for (std::size_t j = 0; j < 5; ++j) s += out.weights.data()[r * 5 + j];
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  EXPECT_THROW(self_attention(random_tensor({3, 4, 8}, rng), wq, wk, wv, cfg), DimensionError);
}

TEST(Attention, GradientThroughFullPass) {
  RngStream rng(5);
  const auto cfg = AttentionConfig::make(4, 2, 3);
  for (int point = 0; point < 10; ++point) {
    std::vector<Tensor> in{random_tensor({2, 3, 4}, rng), random_tensor({4, 4}, rng), random_tensor({4, 4}, rng),
                           random_tensor({4, 4}, rng)};
    const auto r = testing::gradcheck(
        [&](const std::vector<Tensor>& t) { return self_attention(t[0], t[1], t[2], t[3], cfg).output; }, in);
    EXPECT_LT(r.max_rel_error, 1e-4);
  }
}

}  // namespace
}  // namespace attndrop
