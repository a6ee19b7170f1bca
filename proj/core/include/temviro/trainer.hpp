#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "temviro/arch_config.hpp"
#include "temviro/checkpoint.hpp"
#include "temviro/dataset.hpp"
#include "temviro/history.hpp"
#include "temviro/manifest.hpp"
#include "temviro/metrics.hpp"
#include "temviro/model.hpp"
#include "temviro/optim.hpp"
#include "temviro/report.hpp"

namespace temviro {

struct TrainConfig {
  ArchConfig arch = default_arch_config();  // arch.mode selects fused / branch-only
  int epochs = 100;
  std::size_t batch_size = 32;
  std::size_t eval_batch_size = 4;
  nn::OptimizerSettings optimizer;
  std::uint64_t seed = 1;
  double train_fraction = 0.75;  // used only when the manifest carries no split
  std::string precision = "float64";
  std::optional<std::filesystem::path> cache_dir;
  std::function<void(const EpochRecord&)> on_epoch;
  // Checked after each epoch; returning true ends the run there.
  std::function<bool(const TrainingHistory&)> stop;

  // epochs >= 1, batch_size >= 2, eval_batch_size >= 1, precision float64.
  void validate() const;

  // Every knob above as strings, echoed into histories, reports and
  // checkpoints.
  metrics::ReportSettings settings() const;
};

struct TrainResult {
  TrainingHistory history;
  Model best;  // highest test accuracy, earliest epoch on ties
  Model last;
};

// Shuffles the train split with a seed derived from (seed, epoch), steps the
// optimizer on every mini-batch of at least two samples (a trailing batch of
// one is skipped), then scores both splits in infer mode. Deterministic for
// a given (cfg, data) at any worker count.
TrainResult train(const TrainConfig& cfg, const PreparedDataset& data);

// Assigns a stratified split when the manifest has none, then preprocesses
// with the architecture's input options.
TrainResult train(const TrainConfig& cfg, const DatasetManifest& manifest);

PrepareOptions prepare_options(const ArchConfig& arch, std::optional<std::filesystem::path> cache_dir = {});

struct Evaluation {
  metrics::MetricsReport report;
  metrics::ConfusionMatrix confusion;
};

// Infer-mode probabilities, row-major [indices.size(), num_classes].
std::vector<double> predict_probabilities(Model& model, const PreparedDataset& data, std::span<const std::size_t> indices,
                                          std::size_t batch_size = 4);

// Throws EmptySplit when the split has no samples.
Evaluation evaluate(Model& model, const PreparedDataset& data, Split split, std::size_t batch_size = 4, int epoch = 0);

// Loads the checkpoint, checks the manifest's class count against it and
// evaluates one split.
Evaluation evaluate_checkpoint(const std::filesystem::path& checkpoint, const DatasetManifest& manifest, Split split,
                               std::optional<std::filesystem::path> cache_dir = {});

struct Prediction {
  int class_id = 0;
  std::string class_name;
  std::vector<double> probabilities;
};

Prediction predict(Model& model, const std::vector<std::string>& class_names, const RawImage& image);
Prediction predict_checkpoint(const std::filesystem::path& checkpoint, const std::filesystem::path& image);

// Class names travel in checkpoint metadata under "classes", ';'-separated.
CheckpointMeta checkpoint_meta(const TrainConfig& cfg, const std::vector<std::string>& class_names, int epoch);
std::vector<std::string> checkpoint_classes(const Checkpoint& ckpt);

// Writes best.tvck, last.tvck, history.txt and curves/ under out_dir.
void save_run(const TrainResult& result, const TrainConfig& cfg, const std::vector<std::string>& class_names,
              const std::filesystem::path& out_dir);

}  // namespace temviro
