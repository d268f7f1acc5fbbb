// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include "attndrop/optim.hpp"

#include <cmath>
#include <numbers>

#include "attndrop/errors.hpp"

namespace attndrop {

void OptimConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("optim.lr must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("optim.weight_decay must be >= 0");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) throw ConfigError("optim.warmup_fraction must lie in [0,1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("optim.beta1 and optim.beta2 must lie in [0,1)");
  }
  if (!(eps > 0.0)) throw ConfigError("optim.eps must be > 0");
  if (epochs == 0) throw ConfigError("optim.epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("optim.batch_size must be >= 1");
}

double scheduled_lr(double base_lr, std::size_t step, std::size_t total_steps, double warmup_fraction) {
  const auto warmup = static_cast<std::size_t>(std::floor(warmup_fraction * static_cast<double>(total_steps)));
  if (step < warmup) return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  if (total_steps <= warmup) return base_lr;
  const double progress = static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

AdamW::AdamW(std::vector<Tensor> params, const OptimConfig& cfg) : params_(std::move(params)), cfg_(cfg) {
  cfg_.validate();
  for (const auto& p : params_) {
    if (!p.is_leaf()) throw ContractError("AdamW: parameters must be leaf tensors");
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

void AdamW::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    const auto g = p.grad();
    auto w = p.mutable_data();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = g.empty() ? 0.0 : g[j];
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
      const double update = (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg_.eps);
      w[j] -= lr * (update + cfg_.weight_decay * w[j]);
    }
  }
}

}  // namespace attndrop
