#include "temviro/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <unordered_set>

#include "temviro/error.hpp"

namespace temviro::nn {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

std::vector<double>& Node::grad_buffer() {
  if (grad.empty()) grad.assign(data.size(), 0.0);
  return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = nn::numel(shape);
  return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  if (nn::numel(shape) != data.size()) {
    fail(ErrorCode::ShapeMismatch, "tensor of shape " + to_string(shape) + " given " + std::to_string(data.size()) + " values");
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t i) const {
  if (i >= node_->shape.size()) fail(ErrorCode::ShapeMismatch, "dimension " + std::to_string(i) + " of " + to_string(node_->shape));
  return node_->shape[i];
}

double Tensor::item() const {
  if (node_->data.size() != 1) fail(ErrorCode::ShapeMismatch, "item() on tensor of shape " + to_string(node_->shape));
  return node_->data[0];
}

void Tensor::zero_grad() {
  if (node_) node_->grad.clear();
}

void Tensor::backward() {
  if (node_->consumed) fail(ErrorCode::GraphConsumed, "backward() called twice on the same graph");
  if (node_->data.size() != 1) fail(ErrorCode::ShapeMismatch, "backward() needs a scalar, got " + to_string(node_->shape));
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }

  for (Node* n : order) {
    if (n->backward) {
      n->backward = nullptr;
      n->parents.clear();
      n->grad.clear();
      n->grad.shrink_to_fit();
      n->consumed = true;
    }
  }
  node_->consumed = true;
}

Tensor Tensor::clone() const {
  auto t = from(node_->shape, node_->data, node_->requires_grad);
  t.node_->grad = node_->grad;
  return t;
}

Tensor Tensor::detach() const { return from(node_->shape, node_->data, false); }

Tensor Tensor::reshape(Shape shape) const {
  if (nn::numel(shape) != numel()) {
    fail(ErrorCode::ShapeMismatch, "cannot reshape " + to_string(node_->shape) + " to " + to_string(shape));
  }
  return make_result(std::move(shape), node_->data, {*this}, [](Node& self) {
    auto& pg = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += self.grad[i];
  });
}

bool Tensor::all_finite() const {
  return std::all_of(node_->data.begin(), node_->data.end(), [](double v) { return std::isfinite(v); });
}

Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> parents, BackwardFn backward) {
  Tensor out = Tensor::from(std::move(shape), std::move(data), false);
  const bool needs = std::any_of(parents.begin(), parents.end(), [](const Tensor& p) { return p.requires_grad(); });
  if (needs) {
    out.node_->requires_grad = true;
    out.node_->backward = std::move(backward);
    for (auto& p : parents) out.node_->parents.push_back(p.node_ptr());
  }
  return out;
}

void require_finite(const Tensor& t, const std::string& where) {
  if (!t.all_finite()) fail(ErrorCode::NumericFailure, "non-finite value in " + where);
}

}  // namespace temviro::nn
