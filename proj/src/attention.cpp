// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include "attndrop/attention.hpp"

#include <cmath>
#include <string>

#include "attndrop/errors.hpp"
#include "attndrop/ops.hpp"

namespace attndrop {

AttentionConfig AttentionConfig::make(std::size_t model_dim, std::size_t heads, std::size_t seq_len) {
  if (heads == 0) throw ConfigError("attention: heads must be >= 1");
  AttentionConfig cfg{model_dim, heads, model_dim / heads, seq_len};
  cfg.validate();
  return cfg;
}

void AttentionConfig::validate() const {
  if (heads == 0) throw ConfigError("attention: heads must be >= 1");
  if (seq_len == 0) throw ConfigError("attention: seq_len must be >= 1");
  if (head_dim == 0 || heads * head_dim != model_dim) {
    throw ConfigError("attention: heads (" + std::to_string(heads) + ") x head_dim (" + std::to_string(head_dim) +
                      ") must equal model_dim (" + std::to_string(model_dim) + ")");
  }
}

Tensor split_heads(const Tensor& x, std::size_t heads) {
  if (x.rank() != 3 || heads == 0 || x.dim(2) % heads != 0) {
    throw DimensionError("split_heads: cannot split " + shape_to_string(x.shape()) + " into " +
                         std::to_string(heads) + " heads");
  }
  const auto b = x.dim(0), n = x.dim(1), dk = x.dim(2) / heads;
  return permute(reshape(x, {b, n, heads, dk}), {0, 2, 1, 3});
}

Tensor merge_heads(const Tensor& x) {
  if (x.rank() != 4) throw DimensionError("merge_heads: expected [B,H,N,d_k], got " + shape_to_string(x.shape()));
  const auto b = x.dim(0), h = x.dim(1), n = x.dim(2), dk = x.dim(3);
  return reshape(permute(x, {0, 2, 1, 3}), {b, n, h * dk});
}

Projections project_qkv(const Tensor& x, const Tensor& wq, const Tensor& wk, const Tensor& wv,
                        const AttentionConfig& cfg) {
  cfg.validate();
  if (x.rank() != 3 || x.dim(1) != cfg.seq_len || x.dim(2) != cfg.model_dim) {
    throw DimensionError("project_qkv: input " + shape_to_string(x.shape()) + " should be [B," +
                         std::to_string(cfg.seq_len) + "," + std::to_string(cfg.model_dim) + "]");
  }
  const Shape wshape{cfg.model_dim, cfg.model_dim};
  for (const Tensor* w : {&wq, &wk, &wv}) {
    if (w->shape() != wshape) {
      throw DimensionError("project_qkv: weight " + shape_to_string(w->shape()) + " should be " +
                           shape_to_string(wshape));
    }
  }
  return {split_heads(matmul(x, wq), cfg.heads), split_heads(matmul(x, wk), cfg.heads),
          split_heads(matmul(x, wv), cfg.heads)};
}

Tensor attention_logits(const Tensor& q, const Tensor& k) {
  if (q.shape() != k.shape() || q.rank() < 2) {
    throw DimensionError("attention_logits: Q " + shape_to_string(q.shape()) + " and K " +
                         shape_to_string(k.shape()) + " must match");
  }
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(q.dim(-1)));
  return scale(matmul(q, transpose_last2(k)), inv_sqrt_dk);
}

Tensor attend(const Tensor& weights, const Tensor& v, RowCheck check) {
  if (check == RowCheck::kEnabled) {
    const auto n = weights.dim(-1);
    const auto w = weights.data();
    for (std::size_t r = 0; r < weights.numel() / n; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += w[r * n + j];
      if (std::abs(s - 1.0) > 1e-6) {
        throw ContractError("attend: attention row " + std::to_string(r) + " sums to " + std::to_string(s));
      }
    }
  }
  return matmul(weights, v);
}

AttentionBatch self_attention(const Tensor& x, const Tensor& wq, const Tensor& wk, const Tensor& wv,
                              const AttentionConfig& cfg) {
  auto [q, k, v] = project_qkv(x, wq, wk, wv, cfg);
  auto logits = attention_logits(q, k);
  auto weights = softmax_rows(logits);
  auto output = attend(weights, v);
  return {std::move(q), std::move(k), std::move(v), std::move(logits), std::move(weights), std::move(output)};
}

}  // namespace attndrop
