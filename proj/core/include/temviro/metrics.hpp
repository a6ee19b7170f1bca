#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace temviro::metrics {

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<std::uint64_t> counts;  // row-major classes x classes
  std::vector<std::string> class_names;

  explicit ConfusionMatrix(std::size_t j = 0) : classes(j), counts(j * j, 0) {}

  std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts[truth * classes + pred]; }
  std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts[truth * classes + pred]; }
  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(std::size_t c) const;
  std::uint64_t col_sum(std::size_t c) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Throws LabelOutOfRange for labels outside [0, classes) and ShapeMismatch
// for sequences of different length.
ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted, std::size_t classes);

// trace / total; EmptyMatrix when total is 0.
double accuracy(const ConfusionMatrix& cm);

// Harmonic mean 2pr / (p + r), 0 when both are 0.
double f1_score(double precision, double recall);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = true;  // false when nothing was predicted as the class
  bool recall_defined = true;     // false when the class has no samples
};

struct PrecisionRecallF1 {
  std::vector<ClassScores> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;  // unweighted mean of the per-class F1 values
};

// Undefined ratios are reported as 0 and flagged; macro values average every
// class. EmptyMatrix when total is 0.
PrecisionRecallF1 precision_recall_f1(const ConfusionMatrix& cm);

// Quadratic weighted kappa over class indices 0..J-1 with weights
// (i - j)^2 / (J - 1)^2. DegenerateMarginals when the expected disagreement
// is zero.
double qwk(const ConfusionMatrix& cm);

inline constexpr double kProbabilityFloor = 1e-12;

// Mean over rows of sum_j t_j log(t_j / max(p_j, 1e-12)) with 0 log 0 = 0.
// pred and target are row-major [rows, classes].
double kld(std::span<const double> pred, std::span<const double> target, std::size_t classes);
double kld(std::span<const double> pred, std::span<const int> labels, std::size_t classes);

// Mean of -log(max(p[true], 1e-12)).
double cross_entropy(std::span<const double> pred, std::span<const int> labels, std::size_t classes);

// Mann-Whitney rank statistic with mid-ranks, so tied positive/negative pairs
// contribute 1/2. Returns nullopt when either group is empty.
std::optional<double> binary_auc(std::span<const double> scores, std::span<const std::uint8_t> positive);

struct RocAuc {
  std::vector<std::optional<double>> per_class;  // nullopt: class lacks positives or negatives
  std::optional<double> macro;                   // mean over defined classes
};

// One-vs-rest AUC of each class's probability column.
RocAuc roc_auc(std::span<const double> scores, std::span<const int> labels, std::size_t classes);

struct ClassReport {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;
  bool precision_defined = true;
  bool recall_defined = true;
};

struct MetricsReport {
  int epoch = 0;
  std::uint64_t samples = 0;
  double accuracy = 0.0;
  std::vector<ClassReport> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::optional<double> macro_auc;
  std::optional<double> qwk;  // nullopt on degenerate marginals
  double kld = 0.0;
  double loss = 0.0;
};

// Everything above from one batch of probability rows.
MetricsReport evaluate_predictions(std::span<const double> probs, std::span<const int> labels,
                                   const std::vector<std::string>& class_names, int epoch = 0);

// Predictions (argmax, lowest index on ties) of probability rows.
std::vector<int> predict_labels(std::span<const double> probs, std::size_t classes);

}  // namespace temviro::metrics
