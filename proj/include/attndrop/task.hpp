// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace attndrop {

/// Synthetic sequence-classification problems with noiseless labels.
///   MajorityToken:  token t belongs to group t % C; the label is the group
///                   with the most tokens (sequences with a tied maximum are
///                   never generated). Needs global context.
///   CopyFirstToken: label = first token % C. Needs positional routing.
///   SparseSignal:   the last C vocabulary ids are signal tokens; exactly one
///                   position holds one, the label is its offset. Every other
///                   position is noise drawn from the remaining ids.
enum class TaskKind { kMajorityToken, kCopyFirstToken, kSparseSignal };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& s);

struct SyntheticTask {
  TaskKind kind = TaskKind::kMajorityToken;
  std::size_t vocab = 8;
  std::size_t seq_len = 16;
  std::size_t num_classes = 2;
  std::size_t train_size = 2000;
  std::size_t val_size = 500;
  std::uint64_t seed = 1;
  /// Fraction of training labels replaced by a different random class.
  double label_noise = 0.0;

  void validate() const;
};

struct Dataset {
  std::size_t seq_len = 0;
  std::size_t num_classes = 0;
  std::vector<std::size_t> tokens;  // size() * seq_len, row-major
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const std::size_t> sequence(std::size_t i) const { return {tokens.data() + i * seq_len, seq_len}; }
};

struct TaskSplit {
  Dataset train;
  Dataset val;
};

/// The noiseless labeling rule of `task.kind`.
std::size_t true_label(const SyntheticTask& task, std::span<const std::size_t> sequence);

/// Train and validation sets from one generator; no validation sequence also
/// occurs in the training set. Label noise touches the training split only.
TaskSplit generate_task(const SyntheticTask& task);

}  // namespace attndrop
