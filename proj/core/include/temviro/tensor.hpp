#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace temviro::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

struct Node;

// Called during backward with the node whose grad is complete; accumulates
// into the grads of node.parents.
using BackwardFn = std::function<void(Node&)>;

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  bool consumed = false;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;

  // Zero-filled on first use.
  std::vector<double>& grad_buffer();
};

// Shared handle to a node of the recorded computation graph. Copies alias
// the same storage; use clone() for an independent copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim(std::size_t i) const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const { return node_->data.size(); }

  std::span<const double> data() const { return node_->data; }
  std::span<double> data() { return node_->data; }
  double item() const;

  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool has_grad() const { return node_ && !node_->grad.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  std::vector<double>& grad_buffer() { return node_->grad_buffer(); }
  void zero_grad();

  // Reverse-mode sweep from this scalar. Leaf grads accumulate; the graph
  // behind this tensor is released afterwards. A second call without a new
  // forward pass throws GraphConsumed.
  void backward();

  Tensor clone() const;
  Tensor detach() const;
  Tensor reshape(Shape shape) const;

  bool all_finite() const;

  Node& node() const { return *node_; }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  friend Tensor make_result(Shape, std::vector<double>, std::vector<Tensor>, BackwardFn);

  std::shared_ptr<Node> node_;
};

// Builds an op output. The graph edge is only recorded when at least one
// parent requires grad, so inference passes allocate nothing extra.
Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> parents, BackwardFn backward);

// Throws NumericFailure naming `where` if any value is NaN/Inf.
void require_finite(const Tensor& t, const std::string& where);

}  // namespace temviro::nn
