// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include "attndrop/model.hpp"

#include <cmath>

#include "attndrop/errors.hpp"
#include "attndrop/ops.hpp"

namespace attndrop {

void ModelConfig::validate() const {
  if (layers == 0) throw ConfigError("model.layers must be >= 1");
  if (ffn_dim == 0) throw ConfigError("model.ffn_dim must be >= 1");
  if (vocab == 0 || num_classes < 2) throw ConfigError("model: vocab must be >= 1 and num_classes >= 2");
  attention();
}

namespace {

Tensor gaussian_param(Shape shape, double stddev, RngStream& rng) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = stddev * rng.normal();
  return Tensor(std::move(shape), std::move(v), true);
}

Tensor constant_param(Shape shape, double value) { return Tensor::full(std::move(shape), value, true); }

}  // namespace

Model::Model(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  attn_ = cfg_.attention();
  const auto d = cfg_.model_dim;
  const double proj_std = 1.0 / std::sqrt(static_cast<double>(d));
  RngStream rng = RngStream(cfg_.seed).fork(0x6d6f64656c);  // "model"

  token_embedding_ = gaussian_param({cfg_.vocab, d}, 1.0, rng);
  position_embedding_ = gaussian_param({cfg_.seq_len, d}, 0.1, rng);
  params_ = {token_embedding_, position_embedding_};
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    Layer layer{
        gaussian_param({d, d}, proj_std, rng),
        gaussian_param({d, d}, proj_std, rng),
        gaussian_param({d, d}, proj_std, rng),
        gaussian_param({d, d}, proj_std, rng),
        constant_param({d}, 1.0),
        constant_param({d}, 0.0),
        gaussian_param({d, cfg_.ffn_dim}, proj_std, rng),
        constant_param({cfg_.ffn_dim}, 0.0),
        gaussian_param({cfg_.ffn_dim, d}, 1.0 / std::sqrt(static_cast<double>(cfg_.ffn_dim)), rng),
        constant_param({d}, 0.0),
        constant_param({d}, 1.0),
        constant_param({d}, 0.0),
    };
    params_.insert(params_.end(), {layer.wq, layer.wk, layer.wv, layer.wo, layer.ln1_gain, layer.ln1_bias,
                                   layer.ffn_w1, layer.ffn_b1, layer.ffn_w2, layer.ffn_b2, layer.ln2_gain,
                                   layer.ln2_bias});
    layers_.push_back(std::move(layer));
  }
  head_w_ = gaussian_param({d, cfg_.num_classes}, proj_std, rng);
  head_b_ = constant_param({cfg_.num_classes}, 0.0);
  params_.push_back(head_w_);
  params_.push_back(head_b_);
}

Tensor Model::attention_sublayer(const Layer& layer, const Tensor& x, const ForwardContext& ctx) const {
  const auto [q, k, v] = project_qkv(x, layer.wq, layer.wk, layer.wv, attn_);
  const auto logits = attention_logits(q, k);
  Tensor weights;
  if (ctx.drop != nullptr && ctx.drop->variant != DropVariant::kNone) {
    if (ctx.training && ctx.rng == nullptr) throw ContractError("Model::forward: perturbed training pass needs an RNG");
    RngStream unused;
    weights = apply_attention_drop(logits, *ctx.drop, ctx.table, ctx.rng ? *ctx.rng : unused, ctx.training);
  } else {
    weights = softmax_rows(logits);
  }
  return matmul(merge_heads(attend(weights, v, RowCheck::kDisabled)), layer.wo);
}

Tensor Model::forward(std::span<const std::size_t> tokens, std::size_t batch, const ForwardContext& ctx) const {
  if (batch == 0 || tokens.size() != batch * cfg_.seq_len) {
    throw DimensionError("Model::forward: expected " + std::to_string(batch) + " x " + std::to_string(cfg_.seq_len) +
                         " tokens, got " + std::to_string(tokens.size()));
  }
  Tensor x = add(embedding(token_embedding_, tokens, {batch, cfg_.seq_len}), position_embedding_);
  for (const auto& layer : layers_) {
    x = layer_norm(add(x, attention_sublayer(layer, x, ctx)), layer.ln1_gain, layer.ln1_bias);
    const auto hidden = relu(add(matmul(x, layer.ffn_w1), layer.ffn_b1));
    x = layer_norm(add(x, add(matmul(hidden, layer.ffn_w2), layer.ffn_b2)), layer.ln2_gain, layer.ln2_bias);
  }
  return add(matmul(mean_dim(x, 1), head_w_), head_b_);
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.numel();
  return n;
}

std::vector<double> Model::flat_gradient() const {
  std::vector<double> g;
  g.reserve(parameter_count());
  for (const auto& p : params_) {
    if (p.has_grad()) {
      g.insert(g.end(), p.grad().begin(), p.grad().end());
    } else {
      g.insert(g.end(), p.numel(), 0.0);
    }
  }
  return g;
}

std::vector<double> Model::flat_parameters() const {
  std::vector<double> v;
  v.reserve(parameter_count());
  for (const auto& p : params_) v.insert(v.end(), p.data().begin(), p.data().end());
  return v;
}

void Model::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

Model build_model(const ModelConfig& cfg) { return Model(cfg); }

}  // namespace attndrop
