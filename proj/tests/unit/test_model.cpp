// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "attndrop/errors.hpp"
#include "attndrop/metrics.hpp"
#include "attndrop/model.hpp"
#include "attndrop/ops.hpp"
#include "attndrop/task.hpp"

namespace attndrop {
namespace {

TEST(Model, ShapesAndParameterCount) {
  ModelConfig cfg;
  const auto m = build_model(cfg);
  // emb 8*16 + pos 16*16 + 4 proj 16*16 + 2 LN 2*16 + ffn 16*32+32+32*16+16 + head 16*2+2
  const std::size_t expected = 128 + 256 + 4 * 256 + 4 * 16 + (512 + 32 + 512 + 16) + 34;
  EXPECT_EQ(m.parameter_count(), expected);
  std::vector<std::size_t> tokens(3 * 16, 1);
  const auto logits = m.forward(tokens, 3);
  EXPECT_EQ(logits.shape(), (Shape{3, 2}));
  EXPECT_THROW(m.forward(tokens, 2), DimensionError);
}

TEST(Model, DeterministicInSeed) {
  ModelConfig cfg;
  EXPECT_EQ(build_model(cfg).flat_parameters(), build_model(cfg).flat_parameters());
  auto other = cfg;
  other.seed = 3;
  EXPECT_NE(build_model(cfg).flat_parameters(), build_model(other).flat_parameters());
}

TEST(Model, Validation) {
  ModelConfig cfg;
  cfg.model_dim = 15;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.layers = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Model, UntrainedIsNearChance) {
  SyntheticTask task;
  const auto data = generate_task(task);
  ModelConfig cfg;
  const auto m = build_model(cfg);
  const auto logits = m.forward(data.val.tokens, data.val.size());
  EXPECT_NEAR(accuracy(predictions_from_logits(logits, data.val.labels)), 0.5, 0.1);
}

TEST(Model, GradientsReachEveryParameter) {
  ModelConfig cfg;
  cfg.layers = 2;
  auto m = build_model(cfg);
  SyntheticTask task;
  task.train_size = 16;
  task.val_size = 4;
  const auto data = generate_task(task);
  DropConfig drop;
  drop.variant = DropVariant::kHardMask;
  RngStream rng(1);
  ForwardContext ctx{&drop, nullptr, &rng, true};
  backward(cross_entropy_with_logits(m.forward(data.train.tokens, 16, ctx), data.train.labels));
  for (const auto& p : m.parameters()) {
    ASSERT_TRUE(p.has_grad());
    double norm = 0;
    for (double g : p.grad()) norm += g * g;
    EXPECT_GT(norm, 0.0);
  }
  EXPECT_EQ(m.flat_gradient().size(), m.parameter_count());
  m.zero_grad();
  for (double g : m.flat_gradient()) EXPECT_EQ(g, 0.0);
}

TEST(Model, PerturbedPassNeedsRng) {
  ModelConfig cfg;
  const auto m = build_model(cfg);
  DropConfig drop;
  drop.variant = DropVariant::kHardMask;
  std::vector<std::size_t> tokens(16, 0);
  EXPECT_THROW(m.forward(tokens, 1, ForwardContext{&drop, nullptr, nullptr, true}), ContractError);
}

}  // namespace
}  // namespace attndrop
