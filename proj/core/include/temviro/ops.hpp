#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "temviro/rng.hpp"
#include "temviro/tensor.hpp"

// Differentiable layer primitives. Image tensors are [batch, channels,
// height, width]; feature tensors are [batch, features]. Every op records
// its backward closure when any input requires grad.
namespace temviro::nn {

enum class Mode { train, infer };

enum class Activation { identity, sigmoid, relu, softmax };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view text);

// Valid (unpadded), stride-1 cross-correlation.
// x [B, C, m, n], filters [K, C, s, s], bias [K] -> [B, K, m-s+1, n-s+1].
Tensor conv2d(const Tensor& x, const Tensor& filters, const Tensor& bias);

// Numerically stable logistic: never evaluates exp of a positive argument.
Tensor sigmoid(const Tensor& x);

// max(0, x); the subgradient at 0 is 0.
Tensor relu(const Tensor& x);

// Row-wise softmax over the last axis of a [B, J] tensor, max-subtracted.
Tensor softmax(const Tensor& x);

Tensor activate(const Tensor& x, Activation a);

// Non-overlapping pool x pool max; trailing rows/columns that do not fill a
// window are dropped. Ties resolve to the first element in row-major order.
Tensor maxpool2d(const Tensor& x, std::size_t pool);

struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.9;
  double eps = 1e-5;

  explicit BatchNormState(std::size_t channels = 0) : running_mean(channels, 0.0), running_var(channels, 1.0) {}
};

// Per-channel normalization for [B, C, H, W] (statistics over B, H, W) or
// per-feature for [B, F]. Train mode uses biased batch statistics and folds
// them into the running estimates (running = momentum * running +
// (1 - momentum) * batch, with the unbiased variance). Infer mode uses the
// running estimates only.
Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state, Mode mode);

// Inverted dropout: train mode zeroes each element with probability `rate`
// and scales survivors by 1 / (1 - rate); infer mode is the identity.
Tensor dropout(const Tensor& x, double rate, Mode mode, Xoshiro256& rng);

// x [B, n_in] * W [n_in, n_out] + b [n_out].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor dense(const Tensor& x, const Tensor& weight, const Tensor& bias, Activation f);

// [B, ...] -> [B, prod(...)].
Tensor flatten(const Tensor& x);

// Concatenates [B, F1] and [B, F2] into [B, F1 + F2].
Tensor concat(const Tensor& a, const Tensor& b);

inline constexpr double kProbabilityFloor = 1e-12;

// Mean over the batch of -log(max(p[true], 1e-12)) on probability rows.
Tensor cross_entropy_loss(const Tensor& probs, std::span<const int> labels);

// Fused softmax + cross-entropy on logits; gradient is (p - onehot) / B.
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

Tensor sum(const Tensor& x);

// sum_i weights[i] * x[i], a scalar probe used by gradient checks.
Tensor weighted_sum(const Tensor& x, std::span<const double> weights);

}  // namespace temviro::nn
