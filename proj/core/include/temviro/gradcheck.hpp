#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "temviro/tensor.hpp"

namespace temviro::nn {

// A scalar-valued function of some leaf tensors. The function must be
// deterministic: it is re-evaluated for every perturbed input element.
struct GradCheckCase {
  std::string name;
  std::vector<Tensor> inputs;
  std::function<Tensor(const std::vector<Tensor>&)> fn;
};

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckResult> results;

  bool passed() const;
  std::optional<GradCheckResult> first_failure() const;
  // Worst error per case name across all seeds, in first-seen order.
  std::vector<GradCheckResult> worst_by_name() const;
};

inline constexpr double kGradCheckStep = 1e-5;
inline constexpr double kGradCheckTolerance = 1e-4;

// Element error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-4);
// the floor keeps vanishing gradient entries from amplifying rounding noise.
GradCheckResult check_gradient(const GradCheckCase& c, double h = kGradCheckStep, double tol = kGradCheckTolerance);

// One randomized case per layer type (conv2d, dense, sigmoid, relu,
// softmax, fused softmax + cross-entropy, cross-entropy on probabilities,
// maxpool2d, batchnorm train/infer, dropout, flatten + concat) plus a small
// two-branch network.
std::vector<GradCheckCase> layer_cases(std::uint64_t seed);

GradCheckReport run_gradcheck(const std::vector<GradCheckCase>& cases, double h = kGradCheckStep,
                              double tol = kGradCheckTolerance);

// layer_cases for seeds [first_seed, first_seed + seeds).
GradCheckReport run_standard_gradcheck(std::uint64_t first_seed = 1, int seeds = 10);

}  // namespace temviro::nn
