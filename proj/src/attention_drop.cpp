// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include "attndrop/attention_drop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "attndrop/errors.hpp"
#include "attndrop/ops.hpp"
#include "op_builder.hpp"

namespace attndrop {

std::string to_string(DropVariant v) {
  switch (v) {
    case DropVariant::kNone: return "None";
    case DropVariant::kHardMask: return "HardMask";
    case DropVariant::kBlurSmooth: return "BlurSmooth";
  }
  return "?";
}

DropVariant drop_variant_from_string(const std::string& s) {
  if (s == "None") return DropVariant::kNone;
  if (s == "HardMask") return DropVariant::kHardMask;
  if (s == "BlurSmooth") return DropVariant::kBlurSmooth;
  throw ConfigError("unknown drop variant '" + s + "' (expected None, HardMask or BlurSmooth)");
}

std::string to_string(BlurMode m) { return m == BlurMode::kRow ? "row" : "separable2d"; }

BlurMode blur_mode_from_string(const std::string& s) {
  if (s == "row") return BlurMode::kRow;
  if (s == "separable2d") return BlurMode::kSeparable2D;
  throw ConfigError("unknown blur mode '" + s + "' (expected row or separable2d)");
}

void DropConfig::validate(std::size_t seq_len) const {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("drop.p must lie in [0,1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("drop.lambda must be >= 0");
  if (w == 0 || w % 2 == 0) throw ParameterError("drop.w must be odd and >= 1");
  if (!(sigma_max > 0.0) || !std::isfinite(sigma_max)) throw ParameterError("drop.sigma_max must be > 0");
  if (kernel_steps == 0) throw ParameterError("drop.kernel_steps must be >= 1");
  if (variant == DropVariant::kHardMask && (k == 0 || k > seq_len)) {
    throw ParameterError("drop.k must satisfy 1 <= k <= seq_len (" + std::to_string(seq_len) + "), got " +
                         std::to_string(k));
  }
  if (variant == DropVariant::kBlurSmooth && w > seq_len) {
    throw ParameterError("drop.w (" + std::to_string(w) + ") exceeds seq_len (" + std::to_string(seq_len) + ")");
  }
}

std::vector<std::size_t> topk_indices(std::span<const double> row, std::size_t k) {
  if (k == 0 || k > row.size()) {
    throw ParameterError("topk_indices: k=" + std::to_string(k) + " outside [1, " + std::to_string(row.size()) + "]");
  }
  std::vector<std::size_t> idx(row.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) { return row[a] > row[b] || (row[a] == row[b] && a < b); });
  idx.resize(k);
  return idx;
}

HardMaskDraw sample_hard_mask(const Tensor& logits, double p, std::size_t k, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("hard_mask: p must lie in [0,1]");
  if (logits.rank() == 0) throw DimensionError("hard_mask: logits need at least one dimension");
  const auto n = logits.dim(-1);
  if (k == 0 || k > n) {
    throw ParameterError("hard_mask: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  const auto rows = logits.numel() / n;
  const auto x = logits.data();
  HardMaskDraw draw;
  draw.k = k;
  draw.indices.reserve(rows * k);
  draw.keep.reserve(rows * k);
  const double keep_prob = 1.0 - p;
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto j : topk_indices(x.subspan(r * n, n), k)) {
      draw.indices.push_back(j);
      draw.keep.push_back(rng.bernoulli(keep_prob) ? 1.0 : 0.0);
    }
  }
  return draw;
}

Tensor apply_hard_mask(const Tensor& logits, const HardMaskDraw& draw) {
  return softmax_rows(scatter_mul_last_dim(logits, draw.indices, draw.keep, draw.k));
}

Tensor hard_mask(const Tensor& logits, double p, std::size_t k, RngStream& rng, bool training) {
  if (logits.rank() == 0) throw DimensionError("hard_mask: logits need at least one dimension");
  if (k == 0 || k > logits.dim(-1)) {
    throw ParameterError("hard_mask: k=" + std::to_string(k) + " outside [1, " + std::to_string(logits.dim(-1)) + "]");
  }
  if (!training) return softmax_rows(logits);
  return apply_hard_mask(logits, sample_hard_mask(logits, p, k, rng));
}

Tensor smooth_logits(const Tensor& logits, std::span<const double> kernel, BlurMode mode) {
  if (logits.rank() < 2) throw DimensionError("blur: logits must be at least [N,N]");
  const auto w = kernel.size();
  if (w > logits.dim(-1)) {
    throw ParameterError("blur: kernel width " + std::to_string(w) + " exceeds sequence length " +
                         std::to_string(logits.dim(-1)));
  }
  auto out = conv_last_dim(logits, kernel);
  if (mode == BlurMode::kSeparable2D) {
    if (w > logits.dim(-2)) throw ParameterError("blur: kernel width exceeds number of query rows");
    out = transpose_last2(conv_last_dim(transpose_last2(out), kernel));
  }
  return out;
}

std::size_t sample_blur_row(const GaussianKernelTable& table, RngStream& rng) {
  const double sigma = rng.uniform() * table.sigma_max();
  return table.nearest_row(sigma);
}

Tensor blur_smooth(const Tensor& logits, const GaussianKernelTable& table, RngStream& rng, bool training,
                   BlurMode mode) {
  if (logits.rank() < 2) throw DimensionError("blur_smooth: logits must be at least [N,N]");
  if (table.width() > logits.dim(-1)) {
    throw ParameterError("blur_smooth: kernel width " + std::to_string(table.width()) + " exceeds sequence length " +
                         std::to_string(logits.dim(-1)));
  }
  if (!training) return softmax_rows(logits);
  const auto row = sample_blur_row(table, rng);
  return softmax_rows(smooth_logits(logits, table.kernel(row), mode));
}

Tensor apply_attention_drop(const Tensor& logits, const DropConfig& cfg, const GaussianKernelTable* table,
                            RngStream& rng, bool training) {
  switch (cfg.variant) {
    case DropVariant::kNone:
      return softmax_rows(logits);
    case DropVariant::kHardMask:
      return hard_mask(logits, cfg.p, cfg.k, rng, training);
    case DropVariant::kBlurSmooth:
      if (table == nullptr) throw ContractError("apply_attention_drop: BlurSmooth needs a kernel table");
      return blur_smooth(logits, *table, rng, training, cfg.blur_mode);
  }
  throw ContractError("apply_attention_drop: unknown variant");
}

namespace {

void log_softmax_row(const double* x, std::size_t n, double* out) {
  const double mx = *std::max_element(x, x + n);
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) z += std::exp(x[j] - mx);
  const double lse = mx + std::log(z);
  for (std::size_t j = 0; j < n; ++j) out[j] = x[j] - lse;
}

}  // namespace

Tensor consistency_loss(const Tensor& z1, const Tensor& z2) {
  if (z1.shape() != z2.shape() || z1.rank() != 2) {
    throw DimensionError("consistency_loss: expected matching [B,C] logits, got " + shape_to_string(z1.shape()) +
                         " and " + shape_to_string(z2.shape()));
  }
  const std::size_t batch = z1.dim(0), classes = z1.dim(1);
  if (classes < 2) throw DimensionError("consistency_loss: need at least 2 classes");
  std::vector<double> lp1(z1.numel()), lp2(z2.numel()), row_kl(batch, 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    double* l1 = lp1.data() + b * classes;
    double* l2 = lp2.data() + b * classes;
    log_softmax_row(z1.data().data() + b * classes, classes, l1);
    log_softmax_row(z2.data().data() + b * classes, classes, l2);
    double kl = 0.0, plain = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double p1 = std::exp(l1[c]);
      const double d = l1[c] - l2[c];
      plain += p1 * d;
      // p1 * expm1(-d) == p2 - p1; the direct form avoids 0 * inf when p1 underflows.
      kl += d > -30.0 ? p1 * (d + std::expm1(-d)) : p1 * d + (std::exp(l2[c]) - p1);
    }
    row_kl[b] = plain;
    total += kl;
  }
  total /= static_cast<double>(batch);
  return detail::make_result(
      "consistency_loss", Shape{}, {total}, {&z1, &z2},
      [lp1 = std::move(lp1), lp2 = std::move(lp2), row_kl = std::move(row_kl), batch, classes](detail::Node& self) {
        double* g1 = detail::parent_grad(self, 0);
        double* g2 = detail::parent_grad(self, 1);
        const double f = self.grad[0] / static_cast<double>(batch);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t c = 0; c < classes; ++c) {
            const auto i = b * classes + c;
            const double p1 = std::exp(lp1[i]);
            const double p2 = std::exp(lp2[i]);
            if (g1) g1[i] += f * p1 * ((lp1[i] - lp2[i]) - row_kl[b]);
            if (g2) g2[i] += f * (p2 - p1);
          }
        }
      });
}

Tensor total_loss(const Tensor& task, const Tensor& cons, double lambda) {
  if (task.numel() != 1 || cons.numel() != 1) throw DimensionError("total_loss: both losses must be scalars");
  if (!std::isfinite(task.item()) || !std::isfinite(cons.item())) {
    throw DomainError("total_loss: non-finite loss component", std::isfinite(task.item()) ? cons.item() : task.item());
  }
  if (!(lambda >= 0.0)) throw ParameterError("total_loss: lambda must be >= 0");
  return add(task, scale(cons, lambda));
}

}  // namespace attndrop
