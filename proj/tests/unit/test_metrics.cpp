#include <gtest/gtest.h>

#include <cmath>
#include <iterator>
#include <numeric>

#include "oracle_values.hpp"
#include "temviro/metrics.hpp"
#include "test_support.hpp"

using namespace temviro;
using namespace temviro::metrics;

namespace {

template <std::size_t N>
ConfusionMatrix cm_of(std::size_t j, const double (&v)[N]) {
  ConfusionMatrix cm(j);
  for (std::size_t i = 0; i < N; ++i) cm.counts[i] = static_cast<std::uint64_t>(v[i]);
  return cm;
}

template <std::size_t N>
std::vector<int> ints(const double (&v)[N]) {
  std::vector<int> out;
  for (double d : v) out.push_back(static_cast<int>(d));
  return out;
}

}  // namespace

TEST(PublishedIdentities, Accuracy) {
  // 2576 samples with 66 errors.
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 1300;
  cm.at(1, 1) = 1210;
  cm.at(0, 1) = 40;
  cm.at(1, 0) = 26;
  EXPECT_EQ(cm.total(), 2576u);
  EXPECT_NEAR(accuracy(cm), oracle::kAccuracy2510of2576, 1e-15);
  EXPECT_NEAR(100.0 * accuracy(cm), 97.44, 0.005);
}

TEST(PublishedIdentities, PerClassF1) {
  EXPECT_NEAR(f1_score(96.57, 91.85), oracle::kF1Eb, 1e-12);
  EXPECT_NEAR(f1_score(95.77, 98.37), oracle::kF1If, 1e-12);
  EXPECT_NEAR(f1_score(96.57, 91.85), 94.15, 0.005);
  EXPECT_NEAR(f1_score(95.77, 98.37), 97.05, 0.005);
  EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
}

TEST(PublishedIdentities, MacroF1) {
  const double mean = std::accumulate(std::begin(oracle::kTableF1), std::end(oracle::kTableF1), 0.0) / 14.0;
  EXPECT_NEAR(mean, oracle::kTableF1Mean, 1e-12);
  EXPECT_NEAR(mean, 97.44, 0.005);
}

TEST(PublishedIdentities, PerfectDiagonalQwk) {
  ConfusionMatrix cm(14);
  for (std::size_t i = 0; i < 14; ++i) cm.at(i, i) = 3 + i;
  EXPECT_EQ(qwk(cm), 1.0);
}

TEST(PublishedIdentities, UniformVersusOneHotKld) {
  std::vector<double> pred(14, 1.0 / 14.0);
  EXPECT_NEAR(kld(pred, std::vector<int>{5}, 14), std::log(14.0), 1e-9);
}

TEST(Confusion, CountsAndErrors) {
  const std::vector<int> t = {0, 1, 2, 2, 1};
  const std::vector<int> p = {0, 2, 2, 1, 1};
  const auto cm = confusion_matrix(t, p, 3);
  EXPECT_EQ(cm.at(1, 2), 1u);
  EXPECT_EQ(cm.at(2, 1), 1u);
  EXPECT_EQ(cm.trace(), 3u);
  EXPECT_EQ(cm.row_sum(2), 2u);
  EXPECT_EQ(cm.col_sum(1), 2u);
  EXPECT_TEMVIRO_ERROR(confusion_matrix(std::vector<int>{3}, std::vector<int>{0}, 3), ErrorCode::LabelOutOfRange);
  EXPECT_TEMVIRO_ERROR(confusion_matrix(std::vector<int>{0}, std::vector<int>{-1}, 3), ErrorCode::LabelOutOfRange);
  EXPECT_TEMVIRO_ERROR(confusion_matrix(std::vector<int>{0, 1}, std::vector<int>{0}, 3), ErrorCode::ShapeMismatch);
  EXPECT_TEMVIRO_ERROR(accuracy(ConfusionMatrix(3)), ErrorCode::EmptyMatrix);
}

TEST(PrecisionRecall, UndefinedRatiosFlagged) {
  // Class 2 never predicted and class 3 has no samples but is predicted once.
  ConfusionMatrix cm(4);
  cm.at(0, 0) = 4;
  cm.at(1, 1) = 3;
  cm.at(1, 3) = 1;
  cm.at(2, 0) = 2;
  const auto prf = precision_recall_f1(cm);
  EXPECT_DOUBLE_EQ(prf.per_class[0].precision, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(prf.per_class[1].recall, 0.75);
  EXPECT_FALSE(prf.per_class[2].precision_defined);
  EXPECT_EQ(prf.per_class[2].precision, 0.0);
  EXPECT_TRUE(prf.per_class[2].recall_defined);
  EXPECT_FALSE(prf.per_class[3].recall_defined);
  EXPECT_EQ(prf.per_class[3].f1, 0.0);
  double sum = 0.0;
  for (const auto& c : prf.per_class) sum += c.f1;
  EXPECT_DOUBLE_EQ(prf.macro_f1, sum / 4.0);
}

TEST(Qwk, MatchesReference) {
  ConfusionMatrix two(2);
  two.at(0, 0) = 50;
  two.at(0, 1) = 10;
  two.at(1, 0) = 5;
  two.at(1, 1) = 35;
  EXPECT_NEAR(qwk(two), oracle::kQwk2Class, 1e-12);
  EXPECT_NEAR(qwk(cm_of(3, oracle::kQwkCm3)), oracle::kQwk3Class, 1e-12);
  EXPECT_NEAR(qwk(cm_of(4, oracle::kQwkCm4)), oracle::kQwk4Class, 1e-12);
}

TEST(Qwk, Degenerate) {
  EXPECT_TEMVIRO_ERROR(qwk(ConfusionMatrix(3)), ErrorCode::EmptyMatrix);
  ConfusionMatrix one_class(3);
  one_class.at(1, 1) = 7;
  EXPECT_TEMVIRO_ERROR(qwk(one_class), ErrorCode::DegenerateMarginals);
  ConfusionMatrix single(1);
  single.at(0, 0) = 3;
  EXPECT_TEMVIRO_ERROR(qwk(single), ErrorCode::DegenerateMarginals);
}

TEST(Qwk, Symmetric) {
  auto cm = cm_of(4, oracle::kQwkCm4);
  ConfusionMatrix t(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) t.at(i, j) = cm.at(j, i);
  EXPECT_NEAR(qwk(cm), qwk(t), 1e-15);
}

TEST(Kld, MatchesReference) {
  EXPECT_NEAR(kld(oracle::kKldPred, ints(oracle::kKldLabels), 5), oracle::kKld, 1e-12);
  EXPECT_NEAR(kld(oracle::kKldPred, oracle::kKldSoftTarget, 5), oracle::kKldSoft, 1e-12);
}

TEST(Kld, OneHotEqualsCrossEntropy) {
  const auto labels = ints(oracle::kKldLabels);
  EXPECT_NEAR(kld(oracle::kKldPred, labels, 5), cross_entropy(oracle::kKldPred, labels, 5), 1e-15);
}

TEST(Kld, ZeroForIdenticalAndClamped) {
  const std::vector<double> p = {0.2, 0.8, 0.5, 0.5};
  EXPECT_NEAR(kld(p, p, 2), 0.0, 1e-15);
  EXPECT_NEAR(kld(std::vector<double>{1.0, 0.0}, std::vector<int>{1}, 2), -std::log(kProbabilityFloor), 1e-9);
}

TEST(Auc, TiesGetHalfCredit) {
  std::vector<std::uint8_t> pos;
  for (double v : oracle::kAucLabels) pos.push_back(static_cast<std::uint8_t>(v));
  EXPECT_NEAR(*binary_auc(oracle::kAucScores, pos), oracle::kAucTies, 1e-15);
}

TEST(Auc, PerfectAndInverted) {
  const std::vector<double> s = {0.1, 0.2, 0.8, 0.9};
  EXPECT_EQ(*binary_auc(s, std::vector<std::uint8_t>{0, 0, 1, 1}), 1.0);
  EXPECT_EQ(*binary_auc(s, std::vector<std::uint8_t>{1, 1, 0, 0}), 0.0);
  EXPECT_FALSE(binary_auc(s, std::vector<std::uint8_t>{1, 1, 1, 1}).has_value());
}

TEST(Auc, MacroSkipsUndefinedClasses) {
  // Three classes, class 2 has no samples.
  const std::vector<double> probs = {0.7, 0.2, 0.1, 0.6, 0.3, 0.1, 0.2, 0.7, 0.1, 0.4, 0.5, 0.1};
  const std::vector<int> labels = {0, 0, 1, 1};
  const auto r = roc_auc(probs, labels, 3);
  ASSERT_TRUE(r.per_class[0].has_value());
  EXPECT_EQ(*r.per_class[0], 1.0);
  EXPECT_EQ(*r.per_class[1], 1.0);
  EXPECT_FALSE(r.per_class[2].has_value());
  EXPECT_EQ(*r.macro, 1.0);
}

TEST(Evaluate, FullReport) {
  const std::vector<double> probs = {0.8, 0.1, 0.1, 0.2, 0.7, 0.1, 0.3, 0.3, 0.4, 0.5, 0.4, 0.1};
  const std::vector<int> labels = {0, 1, 2, 1};
  const auto r = evaluate_predictions(probs, labels, {"a", "b", "c"}, 4);
  EXPECT_EQ(r.epoch, 4);
  EXPECT_EQ(r.samples, 4u);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.75);
  EXPECT_EQ(r.per_class[2].name, "c");
  EXPECT_DOUBLE_EQ(r.loss, cross_entropy(probs, labels, 3));
  EXPECT_DOUBLE_EQ(r.kld, r.loss);
  ASSERT_TRUE(r.qwk.has_value());
  EXPECT_EQ(predict_labels(probs, 3), (std::vector<int>{0, 1, 2, 0}));
}

TEST(Evaluate, DegenerateQwkIsUndefined) {
  const std::vector<double> probs = {0.9, 0.1, 0.8, 0.2};
  const auto r = evaluate_predictions(probs, std::vector<int>{0, 0}, {"a", "b"});
  EXPECT_FALSE(r.qwk.has_value());
  EXPECT_FALSE(r.macro_auc.has_value());
}
