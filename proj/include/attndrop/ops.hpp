// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "attndrop/tensor.hpp"

// Differentiable tensor primitives. Every operation records a backward rule
// when any input requires a gradient.
//
// Broadcasting is limited to leading dimensions: in add/sub/mul the smaller
// operand's shape must equal the trailing dimensions of the larger one, and
// matmul broadcasts a rank-2 right operand across the batch dimensions of the
// left one. Shape errors throw DimensionError naming both shapes.

namespace attndrop {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

Tensor exp(const Tensor& a);
/// Natural log; throws DomainError on non-positive input.
Tensor ln(const Tensor& a);
Tensor relu(const Tensor& a);

/// Sum of all elements (scalar).
Tensor sum(const Tensor& a);
/// Mean of all elements (scalar).
Tensor mean(const Tensor& a);
/// Mean over one axis, which is removed from the shape.
Tensor mean_dim(const Tensor& a, std::ptrdiff_t axis);

/// Batched matrix product [..,M,K] x [..,K,P] -> [..,M,P].
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose_last2(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);
/// out.shape[i] = a.shape[perm[i]].
Tensor permute(const Tensor& a, const std::vector<std::size_t>& perm);

/// Softmax along the last dimension, max-subtracted.
Tensor softmax_rows(const Tensor& a);
Tensor log_softmax_rows(const Tensor& a);

/// Picks `k` entries per row of the last dimension. `indices` holds k entries
/// per row, row-major over the leading dimensions. Output shape [.., k].
Tensor gather_last_dim(const Tensor& a, std::span<const std::size_t> indices, std::size_t k);

/// Copy of `a` where, per row, the entries at `indices` (k per row) are
/// multiplied by the matching constant in `factors`. Factors are not
/// differentiated.
Tensor scatter_mul_last_dim(const Tensor& a, std::span<const std::size_t> indices,
                            std::span<const double> factors, std::size_t k);

/// Mean cross-entropy of logits [B,C] against integer labels.
Tensor cross_entropy_with_logits(const Tensor& logits, std::span<const std::size_t> labels);

/// Normalizes over the last dimension then applies gain and bias (both [D]).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

/// Row lookup: table [V,D], `ids` shaped `ids_shape` -> ids_shape + [D].
Tensor embedding(const Tensor& table, std::span<const std::size_t> ids, const Shape& ids_shape);

/// Zero-padded 1D correlation of every last-dimension row with an odd-length
/// kernel; output keeps the row length. The kernel is a constant.
Tensor conv_last_dim(const Tensor& a, std::span<const double> kernel);

}  // namespace attndrop
