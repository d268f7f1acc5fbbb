// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include "attndrop/trainer.hpp"

#include <chrono>
#include <numeric>

#include "attndrop/errors.hpp"
#include "attndrop/ops.hpp"

namespace attndrop {

namespace {

// Domain tags for RngStream::fork.
constexpr std::uint64_t kStepStream = 0x73746570;     // "step"
constexpr std::uint64_t kProbeStream = 0x70726f6265;  // "probe"
constexpr std::uint64_t kShuffleStream = 0x73687566;  // "shuf"

constexpr std::size_t kEvalBatch = 250;

}  // namespace

ModelConfig RunConfig::resolved_model() const {
  ModelConfig m = model;
  m.vocab = task.vocab;
  m.seq_len = task.seq_len;
  m.num_classes = task.num_classes;
  return m;
}

void RunConfig::validate() const {
  task.validate();
  resolved_model().validate();
  optim.validate();
  drop.validate(task.seq_len);
  if (eval.ece_bins == 0) throw ConfigError("eval.ece_bins must be >= 1");
  if (eval.probe_batches < 2) throw ConfigError("eval.probe_batches must be >= 2");
  if (eval.probe_batches * optim.batch_size > task.train_size) {
    throw ConfigError("eval.probe_batches x optim.batch_size exceeds task.train_size");
  }
  if (output.name.empty()) throw ConfigError("output.name must not be empty");
}

Batch make_batch(const Dataset& data, std::span<const std::size_t> rows) {
  Batch b;
  b.tokens.reserve(rows.size() * data.seq_len);
  b.labels.reserve(rows.size());
  for (auto r : rows) {
    if (r >= data.size()) throw ParameterError("make_batch: row " + std::to_string(r) + " out of range");
    const auto seq = data.sequence(r);
    b.tokens.insert(b.tokens.end(), seq.begin(), seq.end());
    b.labels.push_back(data.labels[r]);
  }
  return b;
}

namespace {

Tensor perturbed_logits(const Model& model, const Batch& batch, const DropConfig& drop,
                        const GaussianKernelTable* table, RngStream rng) {
  ForwardContext ctx{&drop, table, &rng, true};
  return model.forward(batch.tokens, batch.size(), ctx);
}

Tensor clean_logits(const Model& model, const Batch& batch) { return model.forward(batch.tokens, batch.size()); }

}  // namespace

Objective single_objective(const Model& model, const Batch& batch, const DropConfig& drop,
                           const GaussianKernelTable* table, const RngStream& rng) {
  auto logits = perturbed_logits(model, batch, drop, table, rng.fork(0));
  auto task = cross_entropy_with_logits(logits, batch.labels);
  return {task, task, Tensor::scalar(0.0), logits};
}

Objective consistency_objective(const Model& model, const Batch& batch, const DropConfig& drop,
                                const GaussianKernelTable* table, const RngStream& rng) {
  auto z1 = perturbed_logits(model, batch, drop, table, rng.fork(0));
  auto z2 = perturbed_logits(model, batch, drop, table, rng.fork(1));
  auto task = cross_entropy_with_logits(z1, batch.labels);
  auto cons = consistency_loss(z1, z2);
  auto loss = total_loss(task, cons, drop.lambda);
  return {loss, task, cons, z1};
}

namespace {

StepResult apply_step(Model& model, AdamW& optim, double lr, const Objective& obj, const Batch& batch) {
  StepResult r{obj.task.item(), obj.cons.item(), predictions_from_logits(obj.logits, batch.labels)};
  model.zero_grad();
  backward(obj.loss);
  optim.step(lr);
  model.zero_grad();
  return r;
}

}  // namespace

StepResult train_step_single(Model& model, AdamW& optim, double lr, const Batch& batch, const DropConfig& drop,
                             const GaussianKernelTable* table, const RngStream& rng) {
  if (drop.consistency) throw ContractError("train_step_single: drop.consistency must be false");
  return apply_step(model, optim, lr, single_objective(model, batch, drop, table, rng), batch);
}

StepResult train_step_consistency(Model& model, AdamW& optim, double lr, const Batch& batch, const DropConfig& drop,
                                  const GaussianKernelTable* table, const RngStream& rng) {
  if (!drop.consistency) throw ContractError("train_step_consistency: drop.consistency must be true");
  return apply_step(model, optim, lr, consistency_objective(model, batch, drop, table, rng), batch);
}

ProbeSamples collect_probe_gradients(Model& model, std::span<const Batch> batches, const DropConfig& drop,
                                     const GaussianKernelTable* table, const RngStream& rng) {
  if (batches.size() < 2) throw ParameterError("grad_variance_probe: need at least 2 probe batches");
  ProbeSamples s;
  model.zero_grad();
  for (std::size_t i = 0; i < batches.size(); ++i) {
    const auto& b = batches[i];
    backward(cross_entropy_with_logits(clean_logits(model, b), b.labels));
    s.base.push_back(model.flat_gradient());
    model.zero_grad();
    backward(cross_entropy_with_logits(perturbed_logits(model, b, drop, table, rng.fork(i)), b.labels));
    s.perturbed.push_back(model.flat_gradient());
    model.zero_grad();
  }
  return s;
}

VarianceReport grad_variance_probe(Model& model, std::span<const Batch> batches, const DropConfig& drop,
                                   const GaussianKernelTable* table, const RngStream& rng) {
  const auto s = collect_probe_gradients(model, batches, drop, table, rng);
  return variance_decomposition(s.base, s.perturbed);
}

std::optional<GaussianKernelTable> kernel_table_for(const DropConfig& drop, const std::string& path) {
  if (drop.variant != DropVariant::kBlurSmooth) return std::nullopt;
  if (path.empty()) return GaussianKernelTable::build(drop.w, drop.sigma_max, drop.kernel_steps);
  auto t = GaussianKernelTable::load(path);
  if (t.width() != drop.w || t.sigma_max() != drop.sigma_max) {
    throw ConfigError("kernel table '" + path + "' (w=" + std::to_string(t.width()) +
                      ", sigma_max=" + std::to_string(t.sigma_max()) + ") does not match drop.w / drop.sigma_max");
  }
  return t;
}

Trainer::Trainer(RunConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      data_(generate_task(cfg_.task)),
      model_(cfg_.resolved_model()),
      table_(kernel_table_for(cfg_.drop, cfg_.kernel_table_path)) {}

std::vector<Batch> Trainer::probe_batches() const {
  std::vector<Batch> out;
  const auto bs = cfg_.optim.batch_size;
  for (std::size_t i = 0; i < cfg_.eval.probe_batches; ++i) {
    std::vector<std::size_t> rows(bs);
    std::iota(rows.begin(), rows.end(), i * bs);
    out.push_back(make_batch(data_.train, rows));
  }
  return out;
}

std::vector<Prediction> Trainer::evaluate(const Dataset& data) const {
  std::vector<Prediction> preds;
  preds.reserve(data.size());
  for (std::size_t start = 0; start < data.size(); start += kEvalBatch) {
    const auto end = std::min(start + kEvalBatch, data.size());
    std::vector<std::size_t> rows(end - start);
    std::iota(rows.begin(), rows.end(), start);
    const auto batch = make_batch(data, rows);
    const auto p = predictions_from_logits(clean_logits(model_, batch), batch.labels);
    preds.insert(preds.end(), p.begin(), p.end());
  }
  return preds;
}

RunRecord Trainer::run(const std::function<void(const EpochRow&)>& on_epoch) {
  using Clock = std::chrono::steady_clock;
  const auto& oc = cfg_.optim;
  const auto n_train = data_.train.size();
  const auto steps_per_epoch = (n_train + oc.batch_size - 1) / oc.batch_size;
  const auto total_steps = steps_per_epoch * oc.epochs;

  AdamW optim(model_.parameters(), oc);
  const RngStream drop_root(cfg_.drop.seed);
  const RngStream step_root = drop_root.fork(kStepStream);
  const RngStream probe_root = drop_root.fork(kProbeStream);
  const RngStream shuffle_root = RngStream(cfg_.task.seed).fork(kShuffleStream);
  const auto probes = probe_batches();
  const auto* table = kernel_table();

  RunRecord record;
  record.config = cfg_;
  record.parameter_count = model_.parameter_count();

  std::vector<std::size_t> order(n_train);
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= oc.epochs; ++epoch) {
    const auto t0 = Clock::now();
    std::iota(order.begin(), order.end(), 0);
    RngStream shuffle = shuffle_root.fork(epoch);
    for (std::size_t i = n_train; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    double task_sum = 0.0, cons_sum = 0.0, hits = 0.0;
    for (std::size_t s = 0; s < steps_per_epoch; ++s, ++step) {
      const auto begin = s * oc.batch_size;
      const auto end = std::min(begin + oc.batch_size, n_train);
      const auto batch = make_batch(data_.train, std::span(order).subspan(begin, end - begin));
      const double lr = scheduled_lr(oc.lr, step, total_steps, oc.warmup_fraction);
      const auto rng = step_root.fork(step);
      const auto r = cfg_.drop.consistency ? train_step_consistency(model_, optim, lr, batch, cfg_.drop, table, rng)
                                           : train_step_single(model_, optim, lr, batch, cfg_.drop, table, rng);
      task_sum += r.task_loss * static_cast<double>(batch.size());
      cons_sum += r.cons_loss * static_cast<double>(batch.size());
      for (const auto& p : r.predictions) hits += p.correct ? 1.0 : 0.0;
    }

    EpochRow row;
    row.epoch = epoch;
    row.task_loss = task_sum / static_cast<double>(n_train);
    row.cons_loss = cons_sum / static_cast<double>(n_train);
    row.train_acc = hits / static_cast<double>(n_train);
    const auto val = evaluate(data_.val);
    row.val_acc = accuracy(val);
    row.ece = expected_calibration_error(val, cfg_.eval.ece_bins);
    record.final_variance = grad_variance_probe(model_, probes, cfg_.drop, table, probe_root.fork(epoch));
    row.grad_var = record.final_variance.var_ad;
    if (cfg_.record_wall_time) {
      row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    }
    record.epochs.push_back(row);
    if (on_epoch) on_epoch(row);
  }
  return record;
}

RunRecord run_training(const RunConfig& cfg) { return Trainer(cfg).run(); }

}  // namespace attndrop
