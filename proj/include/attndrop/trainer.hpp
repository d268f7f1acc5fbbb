// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attndrop/attention_drop.hpp"
#include "attndrop/kernel_table.hpp"
#include "attndrop/metrics.hpp"
#include "attndrop/model.hpp"
#include "attndrop/optim.hpp"
#include "attndrop/task.hpp"
#include "attndrop/theory.hpp"

namespace attndrop {

struct EvalConfig {
  std::size_t ece_bins = 15;
  /// Training batches (taken in dataset order) used for the paired
  /// gradient-variance probe after every epoch.
  std::size_t probe_batches = 4;
};

struct OutputConfig {
  std::string dir = ".";
  std::string name = "run";
};

/// Everything that determines a training run. The model's vocab, seq_len and
/// num_classes always follow the task.
struct RunConfig {
  SyntheticTask task;
  ModelConfig model;
  OptimConfig optim;
  DropConfig drop;
  EvalConfig eval;
  OutputConfig output;
  /// Optional precomputed kernel table; must match drop.w and drop.sigma_max.
  std::string kernel_table_path;
  /// When false the wall_ms column is written as 0 so outputs are byte-stable.
  bool record_wall_time = false;

  ModelConfig resolved_model() const;
  void validate() const;
};

struct Batch {
  std::vector<std::size_t> tokens;
  std::vector<std::size_t> labels;
  std::size_t size() const { return labels.size(); }
};

Batch make_batch(const Dataset& data, std::span<const std::size_t> rows);

/// Loss graph of one training objective, before backward.
struct Objective {
  Tensor loss;    // what gets differentiated
  Tensor task;    // CE on the first pass
  Tensor cons;    // KL term (scalar 0 for single-pass objectives)
  Tensor logits;  // first-pass logits [B,C]
};

/// One perturbed pass (draws from rng.fork(0)) and cross-entropy.
Objective single_objective(const Model& model, const Batch& batch, const DropConfig& drop,
                           const GaussianKernelTable* table, const RngStream& rng);

/// Two independently perturbed passes (rng.fork(0), rng.fork(1)); CE on the
/// first, KL(P1 || P2) between them, combined as task + lambda * cons.
Objective consistency_objective(const Model& model, const Batch& batch, const DropConfig& drop,
                                const GaussianKernelTable* table, const RngStream& rng);

struct StepResult {
  double task_loss = 0.0;
  double cons_loss = 0.0;
  std::vector<Prediction> predictions;  // from the first pass
};

/// Requires drop.consistency == false.
StepResult train_step_single(Model& model, AdamW& optim, double lr, const Batch& batch, const DropConfig& drop,
                             const GaussianKernelTable* table, const RngStream& rng);

/// Requires drop.consistency == true.
StepResult train_step_consistency(Model& model, AdamW& optim, double lr, const Batch& batch, const DropConfig& drop,
                                  const GaussianKernelTable* table, const RngStream& rng);

struct ProbeSamples {
  std::vector<std::vector<double>> base;       // clean-pass gradients
  std::vector<std::vector<double>> perturbed;  // same batch, perturbed pass
};

/// For each batch, the task-loss gradient without and with the attention
/// perturbation (batch i draws from rng.fork(i)). Parameters are unchanged.
ProbeSamples collect_probe_gradients(Model& model, std::span<const Batch> batches, const DropConfig& drop,
                                     const GaussianKernelTable* table, const RngStream& rng);

/// collect_probe_gradients followed by variance_decomposition.
VarianceReport grad_variance_probe(Model& model, std::span<const Batch> batches, const DropConfig& drop,
                                   const GaussianKernelTable* table, const RngStream& rng);

struct EpochRow {
  std::size_t epoch = 0;
  double task_loss = 0.0;
  double cons_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double ece = 0.0;
  double grad_var = 0.0;
  double wall_ms = 0.0;
};

struct RunRecord {
  RunConfig config;
  std::vector<EpochRow> epochs;
  VarianceReport final_variance;
  std::size_t parameter_count = 0;
};

/// Kernel table for a drop config: loaded from `path` when non-empty,
/// otherwise built in memory. Returns nullopt when the variant needs none.
std::optional<GaussianKernelTable> kernel_table_for(const DropConfig& drop, const std::string& path);

class Trainer {
 public:
  explicit Trainer(RunConfig cfg);

  RunRecord run(const std::function<void(const EpochRow&)>& on_epoch = {});

  /// Clean-pass accuracy and calibration on a dataset.
  std::vector<Prediction> evaluate(const Dataset& data) const;

  const RunConfig& config() const { return cfg_; }
  const TaskSplit& data() const { return data_; }
  const Model& model() const { return model_; }
  Model& model() { return model_; }
  const GaussianKernelTable* kernel_table() const { return table_ ? &*table_ : nullptr; }
  std::vector<Batch> probe_batches() const;

 private:
  RunConfig cfg_;
  TaskSplit data_;
  Model model_;
  std::optional<GaussianKernelTable> table_;
};

RunRecord run_training(const RunConfig& cfg);

}  // namespace attndrop
