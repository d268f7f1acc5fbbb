// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "attndrop/attention.hpp"
#include "attndrop/attention_drop.hpp"
#include "attndrop/tensor.hpp"

namespace attndrop {

struct ModelConfig {
  std::size_t layers = 1;
  std::size_t model_dim = 16;
  std::size_t heads = 2;
  std::size_t ffn_dim = 32;
  std::size_t vocab = 8;
  std::size_t seq_len = 16;
  std::size_t num_classes = 2;
  std::uint64_t seed = 2;

  AttentionConfig attention() const { return AttentionConfig::make(model_dim, heads, seq_len); }
  void validate() const;
};

/// How attention logits are turned into weights during one forward pass.
/// A default-constructed context is the clean (inference) path.
struct ForwardContext {
  const DropConfig* drop = nullptr;
  const GaussianKernelTable* table = nullptr;
  RngStream* rng = nullptr;
  bool training = false;
};

/// Post-norm transformer encoder classifier:
///   token + position embedding
///   -> layers x [x = LN(x + MHSA(x)); x = LN(x + FFN(x))]
///   -> mean over tokens -> linear head -> logits [B, C].
class Model {
 public:
  explicit Model(const ModelConfig& cfg);
  // Parameters are shared handles; a copy would alias them.
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  /// `tokens` holds batch * seq_len ids.
  Tensor forward(std::span<const std::size_t> tokens, std::size_t batch, const ForwardContext& ctx = {}) const;

  const ModelConfig& config() const { return cfg_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  std::vector<Tensor>& parameters() { return params_; }
  std::size_t parameter_count() const;

  /// Concatenated gradients of all parameters (zeros where none was computed).
  std::vector<double> flat_gradient() const;
  std::vector<double> flat_parameters() const;
  void zero_grad();

 private:
  struct Layer {
    Tensor wq, wk, wv, wo;
    Tensor ln1_gain, ln1_bias;
    Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    Tensor ln2_gain, ln2_bias;
  };

  Tensor attention_sublayer(const Layer& layer, const Tensor& x, const ForwardContext& ctx) const;

  ModelConfig cfg_;
  AttentionConfig attn_;
  Tensor token_embedding_, position_embedding_;
  std::vector<Layer> layers_;
  Tensor head_w_, head_b_;
  std::vector<Tensor> params_;
};

/// Deterministic in cfg.seed.
Model build_model(const ModelConfig& cfg);

}  // namespace attndrop
