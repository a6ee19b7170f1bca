#include <gtest/gtest.h>

#include <cmath>
#include <iterator>
#include <numeric>

#include "oracle_values.hpp"
#include "temviro/ops.hpp"
#include "temviro/parallel.hpp"
#include "test_support.hpp"

using namespace temviro;
using namespace temviro::nn;
using testing_support::max_abs_diff;

namespace {

template <std::size_t N>
std::vector<double> vec(const double (&v)[N]) {
  return {std::begin(v), std::end(v)};
}

template <std::size_t N>
std::vector<int> labels_of(const double (&v)[N]) {
  std::vector<int> out;
  for (double d : v) out.push_back(static_cast<int>(d));
  return out;
}

Tensor random_tensor(Shape shape, Xoshiro256& rng, bool grad = false) {
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::from(std::move(shape), std::move(v), grad);
}

}  // namespace

TEST(Conv2d, MatchesReferenceForwardAndBackward) {
  auto x = Tensor::from({2, 2, 5, 6}, vec(oracle::kConvX), true);
  auto w = Tensor::from({3, 2, 3, 3}, vec(oracle::kConvW), true);
  auto b = Tensor::from({3}, vec(oracle::kConvB), true);
  auto y = conv2d(x, w, b);
  ASSERT_EQ(y.shape(), (Shape{2, 3, 3, 4}));
  EXPECT_LT(max_abs_diff(y.data(), oracle::kConvY), 1e-12);
  weighted_sum(y, oracle::kConvUpstream).backward();
  EXPECT_LT(max_abs_diff(x.grad(), oracle::kConvGradX), 1e-12);
  EXPECT_LT(max_abs_diff(w.grad(), oracle::kConvGradW), 1e-12);
  EXPECT_LT(max_abs_diff(b.grad(), oracle::kConvGradB), 1e-12);
}

TEST(Conv2d, ShapeErrors) {
  Xoshiro256 rng(1);
  auto b = Tensor::zeros({4});
  EXPECT_TEMVIRO_ERROR(conv2d(random_tensor({1, 2, 5, 5}, rng), random_tensor({4, 3, 3, 3}, rng), b), ErrorCode::ShapeMismatch);
  EXPECT_TEMVIRO_ERROR(conv2d(random_tensor({1, 3, 2, 5}, rng), random_tensor({4, 3, 3, 3}, rng), b), ErrorCode::ShapeMismatch);
}

TEST(Conv2d, ThreadCountDoesNotChangeResult) {
  Xoshiro256 rng(2);
  auto x = random_tensor({6, 2, 9, 8}, rng);
  auto w = random_tensor({4, 2, 3, 3}, rng);
  auto b = random_tensor({4}, rng);
  const int saved = worker_count();
  set_worker_count(0);
  auto serial_x = x.clone(), serial_w = w.clone();
  serial_x.node().requires_grad = serial_w.node().requires_grad = true;
  auto ys = conv2d(serial_x, serial_w, b);
  const std::vector<double> serial(ys.data().begin(), ys.data().end());
  sum(ys).backward();
  set_worker_count(4);
  auto par_x = x.clone(), par_w = w.clone();
  par_x.node().requires_grad = par_w.node().requires_grad = true;
  auto yp = conv2d(par_x, par_w, b);
  EXPECT_EQ(serial, std::vector<double>(yp.data().begin(), yp.data().end()));
  sum(yp).backward();
  EXPECT_EQ(max_abs_diff(serial_w.grad(), par_w.grad()), 0.0);
  EXPECT_EQ(max_abs_diff(serial_x.grad(), par_x.grad()), 0.0);
  set_worker_count(saved);
}

TEST(MaxPool, MatchesReference) {
  auto x = Tensor::from({1, 2, 7, 8}, vec(oracle::kPoolX));
  auto y = maxpool2d(x, 3);
  ASSERT_EQ(y.shape(), (Shape{1, 2, 2, 2}));
  EXPECT_EQ(max_abs_diff(y.data(), oracle::kPoolY), 0.0);
}

TEST(MaxPool, TiesRouteGradientToFirst) {
  auto x = Tensor::from({1, 1, 2, 2}, {1.0, 1.0, 1.0, 1.0}, true);
  sum(maxpool2d(x, 2)).backward();
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{1.0, 0.0, 0.0, 0.0}));
}

TEST(MaxPool, DegenerateOutput) {
  EXPECT_TEMVIRO_ERROR(maxpool2d(Tensor::zeros({1, 1, 2, 5}), 3), ErrorCode::DegenerateOutput);
}

TEST(ShapeRules, RandomSweep) {
  Xoshiro256 rng(99);
  for (int t = 0; t < 60; ++t) {
    const std::size_t s = 1 + 2 * rng.below(3);
    const std::size_t m = s + rng.below(12), n = s + rng.below(12);
    const std::size_t c = 1 + rng.below(3), k = 1 + rng.below(3);
    auto y = conv2d(random_tensor({2, c, m, n}, rng), random_tensor({k, c, s, s}, rng), Tensor::zeros({k}));
    ASSERT_EQ(y.shape(), (Shape{2, k, m - s + 1, n - s + 1}));
    const std::size_t p = 1 + rng.below(4);
    if (m - s + 1 >= p && n - s + 1 >= p) {
      EXPECT_EQ(maxpool2d(y, p).shape(), (Shape{2, k, (m - s + 1) / p, (n - s + 1) / p}));
    }
  }
  EXPECT_EQ(maxpool2d(Tensor::zeros({1, 1, 7, 7}), 3).shape(), (Shape{1, 1, 2, 2}));
}

TEST(BatchNorm, MatchesReferenceTrainMode) {
  auto x = Tensor::from({4, 3, 2, 2}, vec(oracle::kBnX));
  auto gamma = Tensor::from({3}, vec(oracle::kBnGamma));
  auto beta = Tensor::from({3}, vec(oracle::kBnBeta));
  BatchNormState state(3);
  auto y = batchnorm(x, gamma, beta, state, Mode::train);
  EXPECT_LT(max_abs_diff(y.data(), oracle::kBnY), 1e-12);
  EXPECT_LT(max_abs_diff(state.running_mean, oracle::kBnRunningMean), 1e-12);
  EXPECT_LT(max_abs_diff(state.running_var, oracle::kBnRunningVar), 1e-12);
}

TEST(BatchNorm, InferUsesRunningStats) {
  BatchNormState state(1);
  state.running_mean = {2.0};
  state.running_var = {4.0};
  auto y = batchnorm(Tensor::from({2, 1}, {2.0, 4.0}), Tensor::from({1}, {3.0}), Tensor::from({1}, {1.0}), state, Mode::infer);
  EXPECT_DOUBLE_EQ(y.data()[0], 1.0);
  EXPECT_NEAR(y.data()[1], 1.0 + 3.0 * 2.0 / std::sqrt(4.0 + 1e-5), 1e-12);
  EXPECT_EQ(state.running_mean[0], 2.0);
}

TEST(BatchNorm, TrainNeedsTwoSamples) {
  BatchNormState state(1);
  EXPECT_TEMVIRO_ERROR(batchnorm(Tensor::zeros({1, 1}), Tensor::full({1}, 1.0), Tensor::zeros({1}), state, Mode::train),
                       ErrorCode::BatchTooSmall);
}

TEST(CrossEntropy, FusedMatchesReference) {
  auto logits = Tensor::from({3, 4}, vec(oracle::kCeLogits), true);
  const auto labels = labels_of(oracle::kCeLabels);
  auto loss = softmax_cross_entropy(logits, labels);
  EXPECT_NEAR(loss.item(), oracle::kCeLoss, 1e-12);
  loss.backward();
  EXPECT_LT(max_abs_diff(logits.grad(), oracle::kCeGrad), 1e-12);
}

TEST(CrossEntropy, ProbabilityPathAgrees) {
  auto logits = Tensor::from({3, 4}, vec(oracle::kCeLogits));
  const auto labels = labels_of(oracle::kCeLabels);
  EXPECT_NEAR(cross_entropy_loss(softmax(logits), labels).item(), oracle::kCeLoss, 1e-12);
  EXPECT_TEMVIRO_ERROR(cross_entropy_loss(softmax(logits), std::vector<int>{0, 1, 4}), ErrorCode::LabelOutOfRange);
  EXPECT_TEMVIRO_ERROR(cross_entropy_loss(softmax(logits), std::vector<int>{0, 1}), ErrorCode::ShapeMismatch);
}

TEST(CrossEntropy, ClampsZeroProbability) {
  auto p = Tensor::from({1, 2}, {1.0, 0.0});
  EXPECT_NEAR(cross_entropy_loss(p, std::vector<int>{1}).item(), -std::log(1e-12), 1e-9);
}

TEST(Activations, SigmoidIsStable) {
  auto y = sigmoid(Tensor::from({4}, {-1000.0, -1.0, 0.0, 1000.0}));
  EXPECT_EQ(y.data()[0], 0.0);
  EXPECT_DOUBLE_EQ(y.data()[1], 1.0 / (1.0 + std::exp(1.0)));
  EXPECT_EQ(y.data()[2], 0.5);
  EXPECT_EQ(y.data()[3], 1.0);
  EXPECT_TRUE(y.all_finite());
}

TEST(Activations, ReluSubgradientAtZero) {
  auto x = Tensor::from({3}, {-1.0, 0.0, 2.0}, true);
  sum(relu(x)).backward();
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{0.0, 0.0, 1.0}));
}

TEST(Activations, SoftmaxRowsSumToOne) {
  auto y = softmax(Tensor::from({2, 3}, {1000.0, 1001.0, 1002.0, -5.0, 0.0, 5.0}));
  for (int r = 0; r < 2; ++r) EXPECT_NEAR(y.data()[3 * r] + y.data()[3 * r + 1] + y.data()[3 * r + 2], 1.0, 1e-15);
  EXPECT_NEAR(y.data()[0], 1.0 / (1.0 + std::exp(1.0) + std::exp(2.0)), 1e-15);
  EXPECT_EQ(parse_activation(to_string(Activation::relu)), Activation::relu);
  EXPECT_TEMVIRO_ERROR(parse_activation("tanh"), ErrorCode::InvalidArgument);
}

TEST(Dropout, InvertedScalingAndIdentityAtInference) {
  Xoshiro256 rng(5);
  auto x = Tensor::full({1, 20000}, 1.0);
  auto y = dropout(x, 0.25, Mode::train, rng);
  std::size_t zeros = 0;
  double total = 0.0;
  for (double v : y.data()) {
    if (v == 0.0) ++zeros;
    else EXPECT_DOUBLE_EQ(v, 1.0 / 0.75);
    total += v;
  }
  EXPECT_NEAR(static_cast<double>(zeros) / 20000.0, 0.25, 0.015);
  EXPECT_NEAR(total / 20000.0, 1.0, 0.02);
  auto z = dropout(x, 0.25, Mode::infer, rng);
  for (double v : z.data()) EXPECT_EQ(v, 1.0);
  EXPECT_TEMVIRO_ERROR(dropout(x, 1.0, Mode::train, rng), ErrorCode::InvalidArgument);
}

TEST(Dense, ForwardAndShape) {
  auto x = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  auto w = Tensor::from({3, 2}, {1, 0, 0, 1, 1, 1});
  auto b = Tensor::from({2}, {0.5, -0.5});
  auto y = linear(x, w, b);
  EXPECT_EQ(std::vector<double>(y.data().begin(), y.data().end()), (std::vector<double>{4.5, 4.5, 10.5, 10.5}));
  EXPECT_TEMVIRO_ERROR(linear(x, Tensor::zeros({2, 2}), b), ErrorCode::ShapeMismatch);
}

TEST(FlattenConcat, Shapes) {
  auto a = flatten(Tensor::zeros({3, 2, 4, 5}));
  EXPECT_EQ(a.shape(), (Shape{3, 40}));
  EXPECT_EQ(concat(a, Tensor::zeros({3, 7})).shape(), (Shape{3, 47}));
  EXPECT_TEMVIRO_ERROR(concat(a, Tensor::zeros({2, 7})), ErrorCode::ShapeMismatch);
}
