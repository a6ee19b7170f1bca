#include "temviro/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "temviro/error.hpp"

namespace temviro::metrics {
namespace {

void check_rows(std::span<const double> values, std::size_t classes, std::size_t rows, const char* what) {
  if (classes == 0 || values.size() != rows * classes) {
    fail(ErrorCode::ShapeMismatch, std::string(what) + ": " + std::to_string(values.size()) + " values for " +
                                       std::to_string(rows) + " rows of " + std::to_string(classes));
  }
}

void check_label(int y, std::size_t classes) {
  if (y < 0 || static_cast<std::size_t>(y) >= classes) {
    fail(ErrorCode::LabelOutOfRange, "label " + std::to_string(y) + " outside [0, " + std::to_string(classes) + ")");
  }
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t c = 0; c < classes; ++c) t += at(c, c);
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t c) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < classes; ++p) s += at(c, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t c) const {
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < classes; ++t) s += at(t, c);
  return s;
}

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted, std::size_t classes) {
  if (truth.size() != predicted.size()) fail(ErrorCode::ShapeMismatch, "label sequences differ in length");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    check_label(truth[i], classes);
    check_label(predicted[i], classes);
    ++cm.at(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) fail(ErrorCode::EmptyMatrix, "accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

double f1_score(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

PrecisionRecallF1 precision_recall_f1(const ConfusionMatrix& cm) {
  if (cm.total() == 0) fail(ErrorCode::EmptyMatrix, "precision/recall of an empty confusion matrix");
  PrecisionRecallF1 out;
  for (std::size_t c = 0; c < cm.classes; ++c) {
    ClassScores s;
    const auto tp = static_cast<double>(cm.at(c, c));
    const auto col = cm.col_sum(c), row = cm.row_sum(c);
    s.precision_defined = col > 0;
    s.recall_defined = row > 0;
    s.precision = col > 0 ? tp / static_cast<double>(col) : 0.0;
    s.recall = row > 0 ? tp / static_cast<double>(row) : 0.0;
    s.f1 = f1_score(s.precision, s.recall);
    out.macro_precision += s.precision;
    out.macro_recall += s.recall;
    out.macro_f1 += s.f1;
    out.per_class.push_back(s);
  }
  const auto j = static_cast<double>(cm.classes);
  out.macro_precision /= j;
  out.macro_recall /= j;
  out.macro_f1 /= j;
  return out;
}

double qwk(const ConfusionMatrix& cm) {
  const std::size_t j = cm.classes;
  const double total = static_cast<double>(cm.total());
  if (total == 0.0) fail(ErrorCode::EmptyMatrix, "QWK of an empty confusion matrix");
  if (j < 2) fail(ErrorCode::DegenerateMarginals, "QWK needs at least two classes");
  const double scale = static_cast<double>((j - 1) * (j - 1));
  std::vector<double> rows(j), cols(j);
  for (std::size_t c = 0; c < j; ++c) {
    rows[c] = static_cast<double>(cm.row_sum(c));
    cols[c] = static_cast<double>(cm.col_sum(c));
  }
  double observed = 0.0, expected = 0.0;
  for (std::size_t a = 0; a < j; ++a) {
    for (std::size_t b = 0; b < j; ++b) {
      const double d = static_cast<double>(a) - static_cast<double>(b);
      const double w = d * d / scale;
      observed += w * static_cast<double>(cm.at(a, b));
      expected += w * rows[a] * cols[b] / total;
    }
  }
  if (expected == 0.0) fail(ErrorCode::DegenerateMarginals, "QWK expected disagreement is zero");
  return 1.0 - observed / expected;
}

double kld(std::span<const double> pred, std::span<const double> target, std::size_t classes) {
  if (classes == 0 || pred.size() != target.size() || pred.size() % classes != 0) {
    fail(ErrorCode::ShapeMismatch, "kld: prediction and target shapes differ");
  }
  const std::size_t rows = pred.size() / classes;
  if (rows == 0) fail(ErrorCode::ShapeMismatch, "kld of zero rows");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (target[i] > 0.0) total += target[i] * std::log(target[i] / std::max(pred[i], kProbabilityFloor));
  }
  return std::max(0.0, total / static_cast<double>(rows));
}

double kld(std::span<const double> pred, std::span<const int> labels, std::size_t classes) {
  check_rows(pred, classes, labels.size(), "kld");
  if (labels.empty()) fail(ErrorCode::ShapeMismatch, "kld of zero rows");
  double total = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    check_label(labels[r], classes);
    // One-hot target: only the true class contributes, with t log(t / p) = -log p.
    total -= std::log(std::max(pred[r * classes + static_cast<std::size_t>(labels[r])], kProbabilityFloor));
  }
  return std::max(0.0, total / static_cast<double>(labels.size()));
}

double cross_entropy(std::span<const double> pred, std::span<const int> labels, std::size_t classes) {
  check_rows(pred, classes, labels.size(), "cross_entropy");
  if (labels.empty()) fail(ErrorCode::ShapeMismatch, "cross entropy of zero rows");
  double total = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    check_label(labels[r], classes);
    total -= std::log(std::max(pred[r * classes + static_cast<std::size_t>(labels[r])], kProbabilityFloor));
  }
  return total / static_cast<double>(labels.size());
}

std::optional<double> binary_auc(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) fail(ErrorCode::ShapeMismatch, "binary_auc: score and label counts differ");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t k = i;
    while (k < n && scores[order[k]] == scores[order[i]]) ++k;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(k)) / 2.0;
    for (std::size_t t = i; t < k; ++t) {
      if (positive[order[t]]) {
        rank_sum += mid_rank;
        ++n_pos;
      }
    }
    i = k;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

RocAuc roc_auc(std::span<const double> scores, std::span<const int> labels, std::size_t classes) {
  check_rows(scores, classes, labels.size(), "roc_auc");
  RocAuc out;
  std::vector<double> column(labels.size());
  std::vector<std::uint8_t> positive(labels.size());
  double sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t r = 0; r < labels.size(); ++r) {
      check_label(labels[r], classes);
      column[r] = scores[r * classes + c];
      positive[r] = static_cast<std::size_t>(labels[r]) == c;
    }
    auto auc = binary_auc(column, positive);
    if (auc) {
      sum += *auc;
      ++defined;
    }
    out.per_class.push_back(auc);
  }
  if (defined > 0) out.macro = sum / static_cast<double>(defined);
  return out;
}

std::vector<int> predict_labels(std::span<const double> probs, std::size_t classes) {
  if (classes == 0 || probs.size() % classes != 0) fail(ErrorCode::ShapeMismatch, "probability rows do not divide evenly");
  std::vector<int> out(probs.size() / classes);
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double* row = probs.data() + r * classes;
    out[r] = static_cast<int>(std::max_element(row, row + classes) - row);
  }
  return out;
}

MetricsReport evaluate_predictions(std::span<const double> probs, std::span<const int> labels,
                                   const std::vector<std::string>& class_names, int epoch) {
  const std::size_t j = class_names.size();
  check_rows(probs, j, labels.size(), "evaluate_predictions");
  const auto predicted = predict_labels(probs, j);
  ConfusionMatrix cm = confusion_matrix(labels, predicted, j);

  MetricsReport report;
  report.epoch = epoch;
  report.samples = cm.total();
  report.accuracy = accuracy(cm);
  const auto prf = precision_recall_f1(cm);
  const auto auc = roc_auc(probs, labels, j);
  for (std::size_t c = 0; c < j; ++c) {
    const auto& s = prf.per_class[c];
    report.per_class.push_back({class_names[c], s.precision, s.recall, s.f1, auc.per_class[c], s.precision_defined, s.recall_defined});
  }
  report.macro_precision = prf.macro_precision;
  report.macro_recall = prf.macro_recall;
  report.macro_f1 = prf.macro_f1;
  report.macro_auc = auc.macro;
  try {
    report.qwk = qwk(cm);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateMarginals) throw;
  }
  report.kld = kld(probs, labels, j);
  report.loss = cross_entropy(probs, labels, j);
  return report;
}

}  // namespace temviro::metrics
