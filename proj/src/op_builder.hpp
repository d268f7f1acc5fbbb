// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "node.hpp"

namespace attndrop::detail {

using BackwardFn = std::function<void(Node&)>;

// Wraps a computed value as a tensor; records `fn` only when some input
// requires a gradient.
inline Tensor make_result(std::string op, Shape shape, std::vector<double> data,
                          std::initializer_list<const Tensor*> inputs, BackwardFn fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->op = std::move(op);
  bool needs_grad = false;
  for (const auto* t : inputs) needs_grad = needs_grad || t->requires_grad();
  if (needs_grad) {
    node->requires_grad = true;
    node->is_leaf = false;
    for (const auto* t : inputs) node->parents.push_back(TensorAccess::node(*t));
    node->backward_fn = std::move(fn);
  }
  return TensorAccess::wrap(std::move(node));
}

// Gradient buffer of parent `i`, or nullptr when that parent needs none.
inline double* parent_grad(Node& n, std::size_t i) {
  auto& p = *n.parents[i];
  if (!p.requires_grad) return nullptr;
  p.ensure_grad();
  return p.grad.data();
}

}  // namespace attndrop::detail
