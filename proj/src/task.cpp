// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include "attndrop/task.hpp"

#include <algorithm>
#include <set>

#include "attndrop/errors.hpp"
#include "attndrop/rng.hpp"

namespace attndrop {

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kMajorityToken: return "MajorityToken";
    case TaskKind::kCopyFirstToken: return "CopyFirstToken";
    case TaskKind::kSparseSignal: return "SparseSignal";
  }
  return "?";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "MajorityToken") return TaskKind::kMajorityToken;
  if (s == "CopyFirstToken") return TaskKind::kCopyFirstToken;
  if (s == "SparseSignal") return TaskKind::kSparseSignal;
  throw ConfigError("unknown task kind '" + s + "' (expected MajorityToken, CopyFirstToken or SparseSignal)");
}

void SyntheticTask::validate() const {
  if (num_classes < 2) throw ConfigError("task.num_classes must be >= 2");
  if (seq_len == 0) throw ConfigError("task.seq_len must be >= 1");
  if (train_size == 0 || val_size == 0) throw ConfigError("task.train_size and task.val_size must be >= 1");
  if (!(label_noise >= 0.0 && label_noise <= 1.0)) throw ConfigError("task.label_noise must lie in [0,1]");
  const std::size_t min_vocab = kind == TaskKind::kSparseSignal ? num_classes + 1 : num_classes;
  if (vocab < min_vocab) {
    throw ConfigError("task.vocab must be >= " + std::to_string(min_vocab) + " for " + to_string(kind));
  }
}

namespace {

std::vector<std::size_t> group_counts(const SyntheticTask& task, std::span<const std::size_t> seq) {
  std::vector<std::size_t> counts(task.num_classes, 0);
  for (auto t : seq) ++counts[t % task.num_classes];
  return counts;
}

bool has_tied_majority(const SyntheticTask& task, std::span<const std::size_t> seq) {
  const auto counts = group_counts(task, seq);
  const auto mx = *std::max_element(counts.begin(), counts.end());
  return std::count(counts.begin(), counts.end(), mx) > 1;
}

// One labeled sequence; MajorityToken resamples until the maximum is unique.
std::vector<std::size_t> draw_sequence(const SyntheticTask& task, RngStream& rng) {
  std::vector<std::size_t> seq(task.seq_len);
  switch (task.kind) {
    case TaskKind::kMajorityToken:
      do {
        for (auto& t : seq) t = rng.below(task.vocab);
      } while (has_tied_majority(task, seq));
      break;
    case TaskKind::kCopyFirstToken:
      for (auto& t : seq) t = rng.below(task.vocab);
      break;
    case TaskKind::kSparseSignal: {
      const auto noise_ids = task.vocab - task.num_classes;
      for (auto& t : seq) t = rng.below(noise_ids);
      const auto pos = rng.below(task.seq_len);
      seq[pos] = noise_ids + rng.below(task.num_classes);
      break;
    }
  }
  return seq;
}

}  // namespace

std::size_t true_label(const SyntheticTask& task, std::span<const std::size_t> seq) {
  switch (task.kind) {
    case TaskKind::kMajorityToken: {
      const auto counts = group_counts(task, seq);
      return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }
    case TaskKind::kCopyFirstToken:
      return seq.front() % task.num_classes;
    case TaskKind::kSparseSignal: {
      const auto noise_ids = task.vocab - task.num_classes;
      for (auto t : seq) {
        if (t >= noise_ids) return t - noise_ids;
      }
      throw ParameterError("SparseSignal sequence without a signal token");
    }
  }
  return 0;
}

TaskSplit generate_task(const SyntheticTask& task) {
  task.validate();
  const RngStream root(task.seed);
  RngStream gen = root.fork(0x7461736b);  // "task"
  TaskSplit split;
  split.train.seq_len = split.val.seq_len = task.seq_len;
  split.train.num_classes = split.val.num_classes = task.num_classes;

  std::set<std::vector<std::size_t>> train_seen;
  for (std::size_t i = 0; i < task.train_size; ++i) {
    auto seq = draw_sequence(task, gen);
    split.train.labels.push_back(true_label(task, seq));
    split.train.tokens.insert(split.train.tokens.end(), seq.begin(), seq.end());
    train_seen.insert(std::move(seq));
  }
  const std::size_t max_attempts = 1000 * task.val_size + 1000;
  std::size_t attempts = 0;
  while (split.val.size() < task.val_size) {
    if (++attempts > max_attempts) {
      throw ConfigError("task: sequence space too small to draw a validation set disjoint from training");
    }
    auto seq = draw_sequence(task, gen);
    if (train_seen.count(seq)) continue;
    split.val.labels.push_back(true_label(task, seq));
    split.val.tokens.insert(split.val.tokens.end(), seq.begin(), seq.end());
  }

  if (task.label_noise > 0.0) {
    RngStream noise = root.fork(0x6e6f697365);  // "noise"
    for (auto& y : split.train.labels) {
      if (noise.bernoulli(task.label_noise)) {
        y = (y + 1 + noise.below(task.num_classes - 1)) % task.num_classes;
      }
    }
  }
  return split;
}

}  // namespace attndrop
