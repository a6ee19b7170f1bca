#include "temviro/optim.hpp"

#include <cmath>
#include <string>

#include "temviro/error.hpp"

namespace temviro::nn {

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "sgd") return OptimizerKind::sgd;
  if (text == "adam") return OptimizerKind::adam;
  fail(ErrorCode::InvalidArgument, "unknown optimizer '" + std::string(text) + "'");
}

Optimizer::Optimizer(OptimizerSettings settings, std::vector<Tensor> params)
    : settings_(settings), params_(std::move(params)) {
  if (!(settings_.learning_rate > 0.0)) fail(ErrorCode::InvalidArgument, "learning rate must be positive");
  if (settings_.kind == OptimizerKind::adam) {
    for (const auto& p : params_) {
      m_.emplace_back(p.numel(), 0.0);
      v_.emplace_back(p.numel(), 0.0);
    }
  }
}

void Optimizer::step() {
  ++steps_;
  const double lr = settings_.learning_rate;
  if (settings_.kind == OptimizerKind::sgd) {
    for (auto& p : params_) {
      if (!p.has_grad()) continue;
      auto data = p.data();
      const auto g = p.grad();
      for (std::size_t i = 0; i < data.size(); ++i) data[i] -= lr * g[i];
    }
    return;
  }

  const double b1 = settings_.beta1, b2 = settings_.beta2;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto data = params_[k].data();
    const bool has = params_[k].has_grad();
    const auto g = params_[k].grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double gi = has ? g[i] : 0.0;
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      data[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + settings_.epsilon);
    }
  }
}

void Optimizer::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace temviro::nn
