#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace temviro {

struct SplitMetrics {
  double accuracy = 0.0;
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  double f1 = 0.0;         // macro
  double loss = 0.0;
  double kld = 0.0;

  friend bool operator==(const SplitMetrics&, const SplitMetrics&) = default;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  SplitMetrics train;
  SplitMetrics test;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainingHistory {
  std::vector<EpochRecord> records;
  int best_epoch = 0;  // 1-based, 0 when empty
  std::map<std::string, std::string> settings;

  const EpochRecord& best() const;

  friend bool operator==(const TrainingHistory&, const TrainingHistory&) = default;
};

// Epoch with the highest test accuracy; the earliest wins ties.
int select_best_epoch(const std::vector<EpochRecord>& records);

inline constexpr int kHistoryVersion = 1;

// Structured text:
//   version = 1
//   setting.<name> = <value>
//   best_epoch = <n>
//   record = <epoch> <train acc prec rec f1 loss kld> <test acc prec rec f1 loss kld>
// Reals use %.17g so a parse restores the exact doubles.
std::string history_text(const TrainingHistory& h);
TrainingHistory parse_history_text(std::string_view text);
void save_history(const std::filesystem::path& path, const TrainingHistory& h);
TrainingHistory load_history(const std::filesystem::path& path);

inline constexpr std::array<std::string_view, 6> kCurveNames = {"accuracy", "precision", "recall", "f1", "loss", "kld"};

// One `<name>.csv` per curve with columns epoch,train,test. Throws
// InvalidArgument on an empty history and Io on write failure.
void export_curves(const TrainingHistory& h, const std::filesystem::path& out_dir);

}  // namespace temviro
