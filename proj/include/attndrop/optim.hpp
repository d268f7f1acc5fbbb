// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "attndrop/tensor.hpp"

namespace attndrop {

struct OptimConfig {
  double lr = 3e-3;
  double weight_decay = 1e-2;
  double warmup_fraction = 0.10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;

  void validate() const;
};

/// Linear warmup over the first floor(warmup_fraction * total) steps, then
/// cosine decay to zero:
///   t <  Tw: lr * t / Tw
///   t >= Tw: lr * (1 + cos(pi (t - Tw) / (T - Tw))) / 2
double scheduled_lr(double base_lr, std::size_t step, std::size_t total_steps, double warmup_fraction);

/// Adam with decoupled weight decay.
class AdamW {
 public:
  AdamW(std::vector<Tensor> params, const OptimConfig& cfg);

  /// One update from the parameters' accumulated gradients. Parameters
  /// without a gradient only decay.
  void step(double lr);
  std::size_t steps_taken() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  OptimConfig cfg_;
  std::size_t t_ = 0;
};

}  // namespace attndrop
