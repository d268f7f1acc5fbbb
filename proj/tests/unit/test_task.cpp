// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "attndrop/errors.hpp"
#include "attndrop/task.hpp"

namespace attndrop {
namespace {

std::set<std::vector<std::size_t>> sequences(const Dataset& d) {
  std::set<std::vector<std::size_t>> s;
  for (std::size_t i = 0; i < d.size(); ++i) s.emplace(d.sequence(i).begin(), d.sequence(i).end());
  return s;
}

TEST(Task, KindStrings) {
  for (auto k : {TaskKind::kMajorityToken, TaskKind::kCopyFirstToken, TaskKind::kSparseSignal}) {
    EXPECT_EQ(task_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(task_kind_from_string("majority"), ConfigError);
}

TEST(Task, LabelRules) {
  SyntheticTask t;
  t.seq_len = 5;
  const std::vector<std::size_t> maj{1, 3, 5, 2, 0};  // groups 1,1,1,0,0
  EXPECT_EQ(true_label(t, maj), 1u);
  t.kind = TaskKind::kCopyFirstToken;
  t.num_classes = 3;
  const std::vector<std::size_t> first{7, 0, 0, 0, 0};
  EXPECT_EQ(true_label(t, first), 1u);
  t.kind = TaskKind::kSparseSignal;
  t.vocab = 8;
  const std::vector<std::size_t> sparse{0, 1, 6, 2, 3};  // signal ids 5,6,7
  EXPECT_EQ(true_label(t, sparse), 1u);
}

TEST(Task, DeterministicDisjointAndLabelled) {
  for (auto kind : {TaskKind::kMajorityToken, TaskKind::kCopyFirstToken, TaskKind::kSparseSignal}) {
    SyntheticTask t;
    t.kind = kind;
    t.num_classes = 3;
    t.train_size = 300;
    t.val_size = 100;
    const auto a = generate_task(t), b = generate_task(t);
    EXPECT_EQ(a.train.tokens, b.train.tokens);
    EXPECT_EQ(a.val.labels, b.val.labels);
    ASSERT_EQ(a.train.size(), 300u);
    ASSERT_EQ(a.val.size(), 100u);
    const auto train = sequences(a.train);
    for (std::size_t i = 0; i < a.val.size(); ++i) {
      const std::vector<std::size_t> s(a.val.sequence(i).begin(), a.val.sequence(i).end());
      EXPECT_FALSE(train.count(s));
      EXPECT_EQ(a.val.labels[i], true_label(t, s));
    }
    for (std::size_t i = 0; i < a.train.size(); ++i) {
      EXPECT_EQ(a.train.labels[i], true_label(t, a.train.sequence(i)));
      for (auto tok : a.train.sequence(i)) EXPECT_LT(tok, t.vocab);
    }
    t.seed = 2;
    EXPECT_NE(generate_task(t).train.tokens, a.train.tokens);
  }
}

TEST(Task, MajorityHasNoTies) {
  SyntheticTask t;
  t.num_classes = 2;
  const auto d = generate_task(t);
  for (std::size_t i = 0; i < d.train.size(); ++i) {
    std::size_t even = 0;
    for (auto tok : d.train.sequence(i)) even += tok % 2 == 0;
    EXPECT_NE(even * 2, t.seq_len);
  }
}

TEST(Task, LabelNoiseOnlyTouchesTrain) {
  SyntheticTask t;
  t.label_noise = 0.2;
  const auto d = generate_task(t);
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < d.train.size(); ++i) flipped += d.train.labels[i] != true_label(t, d.train.sequence(i));
  EXPECT_NEAR(static_cast<double>(flipped) / d.train.size(), 0.2, 0.03);
  for (std::size_t i = 0; i < d.val.size(); ++i) EXPECT_EQ(d.val.labels[i], true_label(t, d.val.sequence(i)));
  SyntheticTask clean = t;
  clean.label_noise = 0.0;
  EXPECT_EQ(generate_task(clean).train.tokens, d.train.tokens);
}

TEST(Task, Validation) {
  SyntheticTask t;
  t.num_classes = 1;
  EXPECT_THROW(t.validate(), ConfigError);
  t = {};
  t.label_noise = 1.5;
  EXPECT_THROW(t.validate(), ConfigError);
  t = {};
  t.kind = TaskKind::kSparseSignal;
  t.vocab = 2;
  EXPECT_THROW(t.validate(), ConfigError);
  t = {};
  t.vocab = 2;
  t.seq_len = 3;
  t.train_size = 50;
  EXPECT_THROW(generate_task(t), ConfigError);
}

}  // namespace
}  // namespace attndrop
