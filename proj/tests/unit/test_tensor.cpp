#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "temviro/ops.hpp"
#include "temviro/tensor.hpp"
#include "test_support.hpp"

using namespace temviro;
using namespace temviro::nn;

TEST(Tensor, Construction) {
  auto t = Tensor::full({2, 3}, 1.5);
  EXPECT_EQ(t.numel(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.dim(1), 3u);
  EXPECT_EQ(to_string(t.shape()), "[2,3]");
  EXPECT_EQ(Tensor::scalar(4.0).item(), 4.0);
  EXPECT_ANY_THROW(Tensor::from({2, 2}, {1.0, 2.0}));
}

TEST(Tensor, CloneIsIndependent) {
  auto a = Tensor::from({2}, {1.0, 2.0});
  auto alias = a;
  auto copy = a.clone();
  a.data()[0] = 9.0;
  EXPECT_EQ(alias.data()[0], 9.0);
  EXPECT_EQ(copy.data()[0], 1.0);
}

TEST(Tensor, BackwardAccumulatesIntoLeaves) {
  auto x = Tensor::from({3}, {1.0, -2.0, 0.5}, true);
  const std::vector<double> w = {2.0, 3.0, -1.0};
  weighted_sum(x, w).backward();
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), w);
  weighted_sum(x, w).backward();
  EXPECT_EQ(x.grad()[1], 6.0);
  x.zero_grad();
  EXPECT_FALSE(x.has_grad());
}

TEST(Tensor, SecondBackwardThrows) {
  auto x = Tensor::from({2}, {1.0, 2.0}, true);
  auto y = sum(relu(x));
  y.backward();
  EXPECT_TEMVIRO_ERROR(y.backward(), ErrorCode::GraphConsumed);
}

TEST(Tensor, SharedSubgraph) {
  // y = sum(x) + sum(x) must give grad 2 through the shared leaf.
  auto x = Tensor::from({1, 2}, {1.0, 2.0}, true);
  auto s = concat(x, x);
  sum(s).backward();
  EXPECT_EQ(x.grad()[0], 2.0);
  EXPECT_EQ(x.grad()[1], 2.0);
}

TEST(Tensor, InferenceRecordsNoGraph) {
  auto x = Tensor::from({1, 2}, {1.0, 2.0});
  auto y = sigmoid(x);
  EXPECT_FALSE(y.requires_grad());
  EXPECT_TRUE(y.node().parents.empty());
}

TEST(Tensor, RequireFinite) {
  auto ok = Tensor::from({2}, {1.0, 2.0});
  EXPECT_NO_THROW(require_finite(ok, "ok"));
  auto bad = Tensor::from({2}, {1.0, std::numeric_limits<double>::quiet_NaN()});
  EXPECT_FALSE(bad.all_finite());
  EXPECT_TEMVIRO_ERROR(require_finite(bad, "bad"), ErrorCode::NumericFailure);
}

TEST(Tensor, ReshapeAndDetach) {
  auto x = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6}, true);
  auto r = x.reshape({3, 2});
  EXPECT_EQ(r.dim(0), 3u);
  EXPECT_FALSE(x.detach().requires_grad());
  EXPECT_ANY_THROW(x.reshape({4, 2}));
}
