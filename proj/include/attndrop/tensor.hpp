// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace attndrop {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace detail {
struct Node;
}

/// Dense row-major tensor of doubles with optional reverse-mode gradient.
///
/// A Tensor is a cheap handle: copies share the same underlying storage and
/// graph node. Results of operations on tensors that require gradients keep
/// their inputs alive until backward() has consumed the graph. Leaves (tensors
/// not produced by an operation) may be updated in place through
/// mutable_data(); everything else is read-only.
class Tensor {
 public:
  /// Scalar zero.
  Tensor();
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  const Shape& shape() const;
  std::size_t rank() const;
  /// Size of dimension `axis`; negative values count from the end.
  std::size_t dim(std::ptrdiff_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  /// Writable view; only valid on leaves.
  std::span<double> mutable_data();
  /// Value of a one-element tensor.
  double item() const;

  bool requires_grad() const;
  bool is_leaf() const;
  bool has_grad() const;
  /// Accumulated gradient; empty span until a backward pass reached this tensor.
  std::span<const double> grad() const;
  void zero_grad();

  /// New leaf holding a copy of the values, disconnected from any graph.
  Tensor detach() const;

  /// True when both handles refer to the same storage.
  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

  /// Name of the operation that produced this tensor ("leaf" for leaves).
  const std::string& op_name() const;

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node);

  std::shared_ptr<detail::Node> node_;

  friend struct detail::Node;
  friend class Graph;
  friend void backward(const Tensor& loss);
  friend class TensorAccess;
};

/// Reverse-topological view of the operations that produced a tensor.
///
/// Nodes are ordered so that every node appears after all of its parents.
class Graph {
 public:
  static Graph trace(const Tensor& root);

  std::size_t size() const { return nodes_.size(); }
  std::vector<std::string> op_names() const;
  /// Every node's parents precede it.
  bool is_topologically_ordered() const;
  const Tensor& root() const { return root_; }

 private:
  Graph() = default;

  Tensor root_;
  std::vector<std::shared_ptr<detail::Node>> nodes_;

  friend void backward(const Tensor& loss, const Graph& graph);
};

/// Accumulates d(loss)/d(leaf) into every requires_grad leaf reachable from
/// `loss`. The graph is single use: intermediate nodes are released
/// afterwards and a second call on the same graph throws ContractError.
void backward(const Tensor& loss);
void backward(const Tensor& loss, const Graph& graph);

}  // namespace attndrop
