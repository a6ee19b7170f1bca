#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "temviro/tensor.hpp"

namespace temviro::nn {

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view text);

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// sgd:  p <- p - lr * g
// adam: bias-corrected moments, p <- p - lr * m_hat / (sqrt(v_hat) + eps)
// Parameters without a populated grad are treated as having zero gradient.
class Optimizer {
 public:
  Optimizer(OptimizerSettings settings, std::vector<Tensor> params);

  void step();
  void zero_grad();

  const OptimizerSettings& settings() const { return settings_; }
  std::uint64_t steps() const { return steps_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  OptimizerSettings settings_;
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::uint64_t steps_ = 0;
};

}  // namespace temviro::nn
