#include "temviro/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "temviro/error.hpp"
#include "temviro/ops.hpp"
#include "temviro/parallel.hpp"
#include "temviro/rng.hpp"

namespace temviro {
namespace {

constexpr std::uint64_t kInitTag = 0x696e6974ULL;
constexpr std::uint64_t kShuffleTag = 1ULL << 32;
constexpr std::uint64_t kDropoutTag = 2ULL << 32;

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Batch {
  nn::Tensor x1;
  nn::Tensor x2;
  std::vector<int> labels;
};

Batch make_batch(const ArchConfig& arch, const PreparedDataset& data, std::span<const std::size_t> idx) {
  Batch b;
  std::vector<const FeatureMap*> a, d;
  for (std::size_t i : idx) {
    a.push_back(&data.inputs[i].stdfilt);
    d.push_back(&data.inputs[i].dct);
    b.labels.push_back(data.labels[i]);
  }
  if (arch.uses_branch1()) b.x1 = stack_maps(a);
  if (arch.uses_branch2()) b.x2 = stack_maps(d);
  return b;
}

SplitMetrics summarize(const metrics::MetricsReport& r) {
  return {r.accuracy, r.macro_precision, r.macro_recall, r.macro_f1, r.loss, r.kld};
}

std::vector<std::string> split_names(const std::string& joined) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(joined);
  while (std::getline(in, cur, ';')) out.push_back(cur);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (batch_size < 2) fail(ErrorCode::BatchTooSmall, "batch size must be >= 2 for batchnorm");
  if (eval_batch_size < 1) fail(ErrorCode::InvalidArgument, "eval batch size must be >= 1");
  if (precision != "float64") fail(ErrorCode::InvalidArgument, "unsupported precision " + precision + " (float64 only)");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1)");
}

metrics::ReportSettings TrainConfig::settings() const {
  return {
      {"batch_size", std::to_string(batch_size)},
      {"beta1", real(optimizer.beta1)},
      {"beta2", real(optimizer.beta2)},
      {"epochs", std::to_string(epochs)},
      {"epsilon", real(optimizer.epsilon)},
      {"eval_batch_size", std::to_string(eval_batch_size)},
      {"learning_rate", real(optimizer.learning_rate)},
      {"mode", std::string(to_string(arch.mode))},
      {"optimizer", std::string(nn::to_string(optimizer.kind))},
      {"precision", precision},
      {"seed", std::to_string(seed)},
      {"train_fraction", real(train_fraction)},
  };
}

PrepareOptions prepare_options(const ArchConfig& arch, std::optional<std::filesystem::path> cache_dir) {
  PrepareOptions opts;
  opts.input_size = arch.input_size;
  opts.dct_signed_log = arch.dct_signed_log;
  opts.cache_dir = std::move(cache_dir);
  return opts;
}

std::vector<double> predict_probabilities(Model& model, const PreparedDataset& data, std::span<const std::size_t> indices,
                                          std::size_t batch_size) {
  if (batch_size == 0) fail(ErrorCode::InvalidArgument, "batch size must be >= 1");
  std::vector<double> out;
  out.reserve(indices.size() * model.config().num_classes);
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const auto chunk = indices.subspan(start, std::min(batch_size, indices.size() - start));
    const Batch b = make_batch(model.config(), data, chunk);
    const nn::Tensor p = model.forward(b.x1, b.x2, nn::Mode::infer, nullptr);
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  return out;
}

Evaluation evaluate(Model& model, const PreparedDataset& data, Split split, std::size_t batch_size, int epoch) {
  const auto idx = data.indices(split);
  if (idx.empty()) fail(ErrorCode::EmptySplit, std::string("no samples in the ") + std::string(to_string(split)) + " split");
  if (data.class_names.size() != model.config().num_classes) {
    fail(ErrorCode::ClassCountMismatch, std::to_string(data.class_names.size()) + " dataset classes for a " +
                                            std::to_string(model.config().num_classes) + "-class model");
  }
  const auto probs = predict_probabilities(model, data, idx, batch_size);
  std::vector<int> labels;
  for (std::size_t i : idx) labels.push_back(data.labels[i]);
  Evaluation ev;
  ev.report = metrics::evaluate_predictions(probs, labels, data.class_names, epoch);
  ev.confusion = metrics::confusion_matrix(labels, metrics::predict_labels(probs, data.class_names.size()),
                                           data.class_names.size());
  ev.confusion.class_names = data.class_names;
  return ev;
}

TrainResult train(const TrainConfig& cfg, const PreparedDataset& data) {
  cfg.validate();
  if (data.class_names.size() != cfg.arch.num_classes) {
    fail(ErrorCode::ClassCountMismatch, std::to_string(data.class_names.size()) + " dataset classes for num_classes = " +
                                            std::to_string(cfg.arch.num_classes));
  }
  const auto train_idx = data.indices(Split::train);
  if (train_idx.size() < 2) fail(ErrorCode::EmptySplit, "train split needs at least two samples");
  if (data.indices(Split::test).empty()) fail(ErrorCode::EmptySplit, "test split is empty");

  Model model(cfg.arch, derive_seed(cfg.seed, kInitTag));
  nn::Optimizer opt(cfg.optimizer, model.trainable());
  TrainingHistory history;
  history.settings = cfg.settings();
  std::optional<Model> best;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Xoshiro256 order_rng(derive_seed(cfg.seed, kShuffleTag + static_cast<std::uint64_t>(epoch)));
    Xoshiro256 dropout_rng(derive_seed(cfg.seed, kDropoutTag + static_cast<std::uint64_t>(epoch)));
    std::vector<std::size_t> order = train_idx;
    shuffle(std::span<std::size_t>(order), order_rng);

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      if (len < 2) break;
      const Batch b = make_batch(cfg.arch, data, std::span<const std::size_t>(order).subspan(start, len));
      nn::Tensor loss = nn::softmax_cross_entropy(model.logits(b.x1, b.x2, nn::Mode::train, &dropout_rng), b.labels);
      nn::require_finite(loss, "training loss at epoch " + std::to_string(epoch));
      loss.backward();
      opt.step();
      opt.zero_grad();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train = summarize(evaluate(model, data, Split::train, cfg.eval_batch_size, epoch).report);
    rec.test = summarize(evaluate(model, data, Split::test, cfg.eval_batch_size, epoch).report);
    history.records.push_back(rec);
    if (!best || rec.test.accuracy > history.best().test.accuracy) {
      history.best_epoch = epoch;
      best = model.clone();
    }
    if (cfg.on_epoch) cfg.on_epoch(rec);
    if (cfg.stop && cfg.stop(history)) break;
  }
  return {std::move(history), std::move(*best), std::move(model)};
}

TrainResult train(const TrainConfig& cfg, const DatasetManifest& manifest) {
  cfg.validate();
  const bool has_split = std::any_of(manifest.records.begin(), manifest.records.end(),
                                     [](const SampleRecord& r) { return r.split != Split::unassigned; });
  const DatasetManifest split = has_split ? manifest : split_stratified(manifest, cfg.train_fraction, cfg.seed);
  return train(cfg, prepare_dataset(split, prepare_options(cfg.arch, cfg.cache_dir)));
}

CheckpointMeta checkpoint_meta(const TrainConfig& cfg, const std::vector<std::string>& class_names, int epoch) {
  CheckpointMeta meta;
  for (const auto& [k, v] : cfg.settings()) meta[k] = v;
  std::string joined;
  for (std::size_t i = 0; i < class_names.size(); ++i) joined += (i ? ";" : "") + class_names[i];
  meta["classes"] = joined;
  meta["epoch"] = std::to_string(epoch);
  return meta;
}

std::vector<std::string> checkpoint_classes(const Checkpoint& ckpt) {
  const auto it = ckpt.meta.find("classes");
  std::vector<std::string> names;
  if (it != ckpt.meta.end()) names = split_names(it->second);
  if (names.size() != ckpt.model.config().num_classes) {
    names.clear();
    for (std::size_t c = 0; c < ckpt.model.config().num_classes; ++c) names.push_back("class" + std::to_string(c));
  }
  return names;
}

Evaluation evaluate_checkpoint(const std::filesystem::path& checkpoint, const DatasetManifest& manifest, Split split,
                               std::optional<std::filesystem::path> cache_dir) {
  Checkpoint ckpt = load_checkpoint(checkpoint);
  if (manifest.class_names.size() != ckpt.model.config().num_classes) {
    fail(ErrorCode::ClassCountMismatch, "manifest has " + std::to_string(manifest.class_names.size()) +
                                            " classes, checkpoint expects " +
                                            std::to_string(ckpt.model.config().num_classes));
  }
  DatasetManifest only;
  only.class_names = manifest.class_names;
  for (const auto& r : manifest.records) {
    if (r.split == split) only.records.push_back(r);
  }
  if (only.records.empty()) fail(ErrorCode::EmptySplit, std::string("no samples in the ") + std::string(to_string(split)) + " split");
  const PreparedDataset data = prepare_dataset(only, prepare_options(ckpt.model.config(), std::move(cache_dir)));
  std::size_t batch = 4;
  if (auto it = ckpt.meta.find("eval_batch_size"); it != ckpt.meta.end()) batch = std::stoul(it->second);
  int epoch = 0;
  if (auto it = ckpt.meta.find("epoch"); it != ckpt.meta.end()) epoch = std::stoi(it->second);
  return evaluate(ckpt.model, data, split, batch, epoch);
}

Prediction predict(Model& model, const std::vector<std::string>& class_names, const RawImage& image) {
  const BranchInputs in = prepare_image(image, prepare_options(model.config()));
  Prediction p;
  p.probabilities = forward_fused(model, in.stdfilt, in.dct);
  p.class_id = static_cast<int>(argmax(p.probabilities));
  p.class_name = static_cast<std::size_t>(p.class_id) < class_names.size() ? class_names[p.class_id]
                                                                             : std::to_string(p.class_id);
  return p;
}

Prediction predict_checkpoint(const std::filesystem::path& checkpoint, const std::filesystem::path& image) {
  Checkpoint ckpt = load_checkpoint(checkpoint);
  return predict(ckpt.model, checkpoint_classes(ckpt), load_image(image));
}

void save_run(const TrainResult& result, const TrainConfig& cfg, const std::vector<std::string>& class_names,
              const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + out_dir.string() + ": " + ec.message());
  save_checkpoint(result.best, out_dir / "best.tvck", checkpoint_meta(cfg, class_names, result.history.best_epoch));
  save_checkpoint(result.last, out_dir / "last.tvck",
                  checkpoint_meta(cfg, class_names, result.history.records.empty() ? 0 : result.history.records.back().epoch));
  save_history(out_dir / "history.txt", result.history);
  export_curves(result.history, out_dir / "curves");
}

}  // namespace temviro
