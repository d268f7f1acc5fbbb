// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "attndrop/tensor.hpp"

namespace attndrop {

/// Dimensions of one multi-head self-attention block. heads * head_dim must
/// equal model_dim; each head sees a head_dim slice of the projections.
struct AttentionConfig {
  std::size_t model_dim = 0;
  std::size_t heads = 1;
  std::size_t head_dim = 0;
  std::size_t seq_len = 1;

  /// Derives head_dim = model_dim / heads; throws ConfigError when not exact.
  static AttentionConfig make(std::size_t model_dim, std::size_t heads, std::size_t seq_len);
  void validate() const;
};

struct Projections {
  Tensor q, k, v;  // [B,H,N,d_k]
};

/// Everything one attention pass produced, kept for inspection.
struct AttentionBatch {
  Tensor q, k, v;   // [B,H,N,d_k]
  Tensor logits;    // [B,H,N,N]
  Tensor weights;   // [B,H,N,N], rows sum to 1
  Tensor output;    // [B,H,N,d_k]
};

enum class RowCheck { kEnabled, kDisabled };

/// [B,N,d] -> [B,H,N,d_k].
Tensor split_heads(const Tensor& x, std::size_t heads);
/// [B,H,N,d_k] -> [B,N,H*d_k].
Tensor merge_heads(const Tensor& x);

/// Bias-free projections X W followed by the head split.
Projections project_qkv(const Tensor& x, const Tensor& wq, const Tensor& wk, const Tensor& wv,
                        const AttentionConfig& cfg);

/// Scaled scores Q K^T / sqrt(d_k).
Tensor attention_logits(const Tensor& q, const Tensor& k);

/// Z = A V. With RowCheck::kEnabled every row of A must sum to 1 within 1e-6
/// (ContractError otherwise); hot training loops pass kDisabled.
Tensor attend(const Tensor& weights, const Tensor& v, RowCheck check = RowCheck::kEnabled);

/// Unperturbed reference pass: project, score, softmax, attend.
AttentionBatch self_attention(const Tensor& x, const Tensor& wq, const Tensor& wk, const Tensor& wv,
                              const AttentionConfig& cfg);

}  // namespace attndrop
