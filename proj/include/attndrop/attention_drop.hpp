// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "attndrop/kernel_table.hpp"
#include "attndrop/rng.hpp"
#include "attndrop/tensor.hpp"

// Stochastic regularizers acting on attention logits L [B,H,N,N]. Each
// returns attention weights (softmax over the last axis). With
// training == false all of them return softmax_rows(L) untouched.

namespace attndrop {

enum class DropVariant { kNone, kHardMask, kBlurSmooth };

/// kRow convolves each logit row; kSeparable2D additionally blurs along the
/// query axis (row pass, then column pass).
enum class BlurMode { kRow, kSeparable2D };

std::string to_string(DropVariant v);
DropVariant drop_variant_from_string(const std::string& s);
std::string to_string(BlurMode m);
BlurMode blur_mode_from_string(const std::string& s);

struct DropConfig {
  DropVariant variant = DropVariant::kNone;
  double p = 0.1;           // drop probability for each top-k logit
  std::size_t k = 3;        // logits per query row eligible for dropping
  double sigma_max = 0.5;   // blur sigma ~ U(0, sigma_max)
  std::size_t w = 5;        // blur kernel width, odd
  double lambda = 0.5;      // consistency weight
  bool consistency = false; // two perturbed passes + KL term
  std::uint64_t seed = 0;
  BlurMode blur_mode = BlurMode::kRow;
  std::size_t kernel_steps = 50;

  /// True when no forward pass can differ from the plain transformer.
  bool is_baseline() const { return variant == DropVariant::kNone && !consistency; }

  /// Range checks; seq_len bounds k and w for the variant in use.
  void validate(std::size_t seq_len) const;
};

/// Indices of the k largest entries, largest first; ties go to the smaller
/// index. Runs in O(n log k).
std::vector<std::size_t> topk_indices(std::span<const double> row, std::size_t k);

/// One realization of the hard-mask noise: per query row, the top-k column
/// indices and the Bernoulli(1-p) keep factor (1 or 0) for each.
struct HardMaskDraw {
  std::size_t k = 0;
  std::vector<std::size_t> indices;
  std::vector<double> keep;
};

/// Top-k selection plus k Bernoulli draws per row, in row-major row order and
/// descending-logit order within a row.
HardMaskDraw sample_hard_mask(const Tensor& logits, double p, std::size_t k, RngStream& rng);

/// softmax(L') with L'_ij = M_ij L_ij on the drawn positions. Masked logits
/// become 0, not -inf, so a dropped key still gets weight proportional to e^0.
Tensor apply_hard_mask(const Tensor& logits, const HardMaskDraw& draw);

Tensor hard_mask(const Tensor& logits, double p, std::size_t k, RngStream& rng, bool training);

/// Convolves the logits with `kernel` (zero padding, length preserved).
/// Edge positions lose the mass that falls outside the row.
Tensor smooth_logits(const Tensor& logits, std::span<const double> kernel, BlurMode mode = BlurMode::kRow);

/// Samples one sigma ~ U(0, sigma_max) for the whole batch and returns the
/// nearest row of `table`.
std::size_t sample_blur_row(const GaussianKernelTable& table, RngStream& rng);

Tensor blur_smooth(const Tensor& logits, const GaussianKernelTable& table, RngStream& rng, bool training,
                   BlurMode mode = BlurMode::kRow);

/// Dispatch on cfg.variant. `table` is required for kBlurSmooth.
Tensor apply_attention_drop(const Tensor& logits, const DropConfig& cfg, const GaussianKernelTable* table,
                            RngStream& rng, bool training);

/// Batch mean of KL(softmax(z1) || softmax(z2)) for logits [B,C]. Evaluated
/// as sum_c p1 (d + expm1(-d)), d = log p1 - log p2, so every term is
/// non-negative in floating point. Gradients flow into both inputs.
Tensor consistency_loss(const Tensor& z1, const Tensor& z2);

/// task + lambda * cons.
Tensor total_loss(const Tensor& task, const Tensor& cons, double lambda);

}  // namespace attndrop
