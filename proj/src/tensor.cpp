// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include "attndrop/tensor.hpp"

#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "attndrop/errors.hpp"
#include "node.hpp"

namespace attndrop {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor() : Tensor(Shape{}, std::vector<double>{0.0}) {}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : node_(std::make_shared<detail::Node>()) {
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_to_string(shape));
  }
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("shape " + shape_to_string(shape) + " needs " +
                         std::to_string(shape_numel(shape)) + " values, got " +
                         std::to_string(data.size()));
  }
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

Tensor::Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(Shape{}, std::vector<double>{value}, requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::rank() const { return node_->shape.size(); }

std::size_t Tensor::dim(std::ptrdiff_t axis) const {
  const auto r = static_cast<std::ptrdiff_t>(rank());
  const auto a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                         shape_to_string(shape()));
  }
  return node_->shape[static_cast<std::size_t>(a)];
}

std::size_t Tensor::numel() const { return node_->data.size(); }
std::span<const double> Tensor::data() const { return node_->data; }

std::span<double> Tensor::mutable_data() {
  if (!node_->is_leaf) throw ContractError("mutable_data() is only available on leaf tensors");
  return node_->data;
}

double Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_to_string(shape()));
  return node_->data[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
bool Tensor::is_leaf() const { return node_->is_leaf; }
bool Tensor::has_grad() const { return !node_->grad.empty(); }
std::span<const double> Tensor::grad() const { return node_->grad; }
void Tensor::zero_grad() { node_->grad.clear(); }

Tensor Tensor::detach() const { return Tensor(node_->shape, node_->data, false); }

const std::string& Tensor::op_name() const { return node_->op; }

namespace {

// Iterative post-order DFS; parents land before children.
std::vector<std::shared_ptr<detail::Node>> topo_order(const std::shared_ptr<detail::Node>& root) {
  std::vector<std::shared_ptr<detail::Node>> order;
  std::unordered_set<const detail::Node*> visited;
  std::vector<std::pair<std::shared_ptr<detail::Node>, std::size_t>> stack;
  stack.emplace_back(root, 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      auto parent = node->parents[next++];
      if (visited.insert(parent.get()).second) stack.emplace_back(std::move(parent), 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

}  // namespace

Graph Graph::trace(const Tensor& root) {
  Graph g;
  g.root_ = root;
  g.nodes_ = topo_order(root.node_);
  return g;
}

std::vector<std::string> Graph::op_names() const {
  std::vector<std::string> names;
  names.reserve(nodes_.size());
  for (const auto& n : nodes_) names.push_back(n->op);
  return names;
}

bool Graph::is_topologically_ordered() const {
  std::unordered_map<const detail::Node*, std::size_t> position;
  for (std::size_t i = 0; i < nodes_.size(); ++i) position[nodes_[i].get()] = i;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (const auto& p : nodes_[i]->parents) {
      auto it = position.find(p.get());
      if (it == position.end() || it->second >= i) return false;
    }
  }
  return true;
}

void backward(const Tensor& loss, const Graph& graph) {
  if (!graph.root_.same_storage(loss)) {
    throw ContractError("backward(): graph was traced from a different tensor");
  }
  if (loss.numel() != 1) {
    throw ContractError("backward(): loss must be a scalar, got shape " + shape_to_string(loss.shape()));
  }
  if (!loss.requires_grad()) throw ContractError("backward(): loss does not depend on any requires_grad tensor");
  for (const auto& n : graph.nodes_) {
    if (n->consumed) throw ContractError("backward(): graph has already been consumed by a previous backward pass");
  }

  const auto& root = graph.nodes_.back();
  root->ensure_grad();
  root->grad[0] += 1.0;

  for (auto it = graph.nodes_.rbegin(); it != graph.nodes_.rend(); ++it) {
    auto& node = **it;
    if (node.is_leaf) continue;
    if (node.backward_fn && !node.grad.empty()) node.backward_fn(node);
    node.consumed = true;
    node.backward_fn = nullptr;
    node.grad.clear();
    node.grad.shrink_to_fit();
  }
  // Only now drop the parent links: the loop above still needed them.
  for (const auto& n : graph.nodes_) {
    if (!n->is_leaf) n->parents.clear();
  }
}

void backward(const Tensor& loss) { backward(loss, Graph::trace(loss)); }

}  // namespace attndrop
