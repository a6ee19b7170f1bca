// temviro: preprocess images, train and evaluate the two-branch classifier,
// export curves, generate the synthetic grating set and run gradient checks.
//
// Exit status: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "temviro/arch_config.hpp"
#include "temviro/checkpoint.hpp"
#include "temviro/dataset.hpp"
#include "temviro/error.hpp"
#include "temviro/feature_map.hpp"
#include "temviro/gradcheck.hpp"
#include "temviro/history.hpp"
#include "temviro/imageio.hpp"
#include "temviro/manifest.hpp"
#include "temviro/parallel.hpp"
#include "temviro/preprocess.hpp"
#include "temviro/report.hpp"
#include "temviro/synth.hpp"
#include "temviro/trainer.hpp"

namespace fs = std::filesystem;
using namespace temviro;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NumericFailure: return kExitNumeric;
    case ErrorCode::InvalidArgument: return kExitUsage;
    default: return kExitData;
  }
}

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext == ".pgm" || ext == ".png" || ext == ".tif" || ext == ".tiff";
}

// A manifest argument is either a CSV written by `synth` / write_manifest_csv
// or a directory with one subdirectory per class. expected_classes = 0 takes
// whatever the directory holds.
DatasetManifest load_manifest(const fs::path& p, std::size_t expected_classes) {
  if (!fs::is_directory(p)) return read_manifest_csv(p);
  if (expected_classes == 0) {
    for (const auto& e : fs::directory_iterator(p)) expected_classes += e.is_directory() ? 1 : 0;
  }
  return build_manifest(p, expected_classes);
}

ArchConfig with_classes(ArchConfig cfg, std::size_t classes) {
  cfg.num_classes = classes;
  if (!cfg.classifier.empty()) cfg.classifier.back().units = classes;
  return cfg;
}

struct PreprocessArgs {
  fs::path input_dir, out;
  std::string mode = "both";
  std::size_t size = kBranchInputSize;
  std::size_t window = 3;
  bool signed_log = false;
};

int run_preprocess(const PreprocessArgs& a) {
  PrepareOptions opts;
  opts.input_size = a.size;
  opts.filter.window_size = a.window;
  opts.filter.validate();
  opts.dct_signed_log = a.signed_log;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a.input_dir)) {
    if (e.is_regular_file() && is_image(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorCode::CorruptFile, "no images under " + a.input_dir.string());
  const bool want_std = a.mode == "stdfilt" || a.mode == "both";
  const bool want_dct = a.mode == "dct" || a.mode == "both";
  for (const auto& f : files) {
    BranchInputs in;
    try {
      in = prepare_image(load_image(f), opts);
    } catch (const Error& e) {
      fail(e.code(), f.string() + ": " + e.detail());
    }
    fs::path stem = a.out / fs::relative(f, a.input_dir);
    fs::create_directories(stem.parent_path());
    if (want_std) write_tvfm(stem.string() + ".stdfilt.tvfm", in.stdfilt);
    if (want_dct) write_tvfm(stem.string() + ".dct.tvfm", in.dct);
  }
  std::printf("preprocessed %zu images into %s\n", files.size(), a.out.string().c_str());
  return kExitOk;
}

struct TrainArgs {
  fs::path manifest, config, out_dir = "run";
  std::uint64_t seed = 1;
  int epochs = 100;
  std::string mode;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::string optimizer = "adam";
  fs::path cache_dir;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  TrainConfig cfg;
  const bool explicit_config = !a.config.empty();
  cfg.arch = explicit_config ? load_arch_config(a.config) : default_arch_config();
  if (!a.mode.empty()) cfg.arch.mode = parse_fusion_mode(a.mode);
  DatasetManifest manifest = load_manifest(a.manifest, explicit_config ? cfg.arch.num_classes : 0);
  if (!explicit_config) cfg.arch = with_classes(cfg.arch, manifest.class_names.size());
  validate(cfg.arch);
  cfg.epochs = a.epochs;
  cfg.seed = a.seed;
  // Fix the split here so evaluate can reuse it from <out-dir>/manifest.csv.
  const bool has_split = std::any_of(manifest.records.begin(), manifest.records.end(),
                                     [](const SampleRecord& r) { return r.split != Split::unassigned; });
  if (!has_split) manifest = split_stratified(manifest, cfg.train_fraction, cfg.seed);
  cfg.batch_size = a.batch_size;
  cfg.optimizer.kind = nn::parse_optimizer(a.optimizer);
  cfg.optimizer.learning_rate = a.learning_rate;
  if (!a.cache_dir.empty()) cfg.cache_dir = a.cache_dir;
  if (!a.quiet) {
    cfg.on_epoch = [](const EpochRecord& r) {
      std::printf("epoch %3d  train acc %6.2f%% loss %.4f  test acc %6.2f%% loss %.4f\n", r.epoch, 100.0 * r.train.accuracy,
                  r.train.loss, 100.0 * r.test.accuracy, r.test.loss);
      std::fflush(stdout);
    };
  }
  std::printf("mode %s, %zu classes, %zu parameters, %zu samples\n", std::string(to_string(cfg.arch.mode)).c_str(),
              cfg.arch.num_classes, parameter_count(cfg.arch), manifest.records.size());
  const TrainResult result = train(cfg, manifest);
  save_run(result, cfg, manifest.class_names, a.out_dir);
  write_manifest_csv(a.out_dir / "manifest.csv", manifest);
  const auto& best = result.history.best();
  std::printf("best epoch %d: test accuracy %.2f%%; wrote %s\n", best.epoch, 100.0 * best.test.accuracy,
              a.out_dir.string().c_str());
  return kExitOk;
}

struct EvaluateArgs {
  fs::path checkpoint, manifest, report, cache_dir;
  std::string split = "test";
};

int run_evaluate(const EvaluateArgs& a) {
  const Split split = parse_split(a.split);
  if (split == Split::unassigned) fail(ErrorCode::InvalidArgument, "split must be train or test");
  Checkpoint probe = load_checkpoint(a.checkpoint);
  const DatasetManifest manifest = load_manifest(a.manifest, probe.model.config().num_classes);
  std::optional<fs::path> cache;
  if (!a.cache_dir.empty()) cache = a.cache_dir;
  const Evaluation ev = evaluate_checkpoint(a.checkpoint, manifest, split, cache);
  std::cout << metrics::report_table(ev.report);
  if (!a.report.empty()) {
    metrics::ReportSettings settings = probe.meta;
    settings.erase("classes");
    settings["split"] = std::string(to_string(split));
    metrics::write_text_file(a.report, metrics::report_text(ev.report, settings));
    metrics::write_text_file(a.report.string() + ".csv", metrics::report_csv(ev.report));
    metrics::write_text_file(a.report.string() + ".confusion.csv", metrics::confusion_csv(ev.confusion, manifest.class_names));
    std::printf("wrote %s (+ .csv, .confusion.csv)\n", a.report.string().c_str());
  }
  return kExitOk;
}

int run_predict(const fs::path& checkpoint, const fs::path& image) {
  Checkpoint ckpt = load_checkpoint(checkpoint);
  const auto names = checkpoint_classes(ckpt);
  const Prediction p = predict(ckpt.model, names, load_image(image));
  std::printf("%s\n", p.class_name.c_str());
  for (std::size_t c = 0; c < p.probabilities.size(); ++c) {
    std::printf("  %-12s %.6f\n", names[c].c_str(), p.probabilities[c]);
  }
  return kExitOk;
}

int run_export_curves(const fs::path& history, const fs::path& out_dir) {
  const TrainingHistory h = load_history(history);
  export_curves(h, out_dir);
  std::printf("wrote %zu curves with %zu epochs to %s\n", kCurveNames.size(), h.records.size(), out_dir.string().c_str());
  return kExitOk;
}

int run_synth(const fs::path& out, const SynthOptions& opts) {
  const DatasetManifest m = synth_dataset(out, opts);
  std::printf("wrote %zu images (%zu train / %zu test) and %s\n", m.records.size(), m.indices(Split::train).size(),
              m.indices(Split::test).size(), (out / "manifest.csv").string().c_str());
  return kExitOk;
}

int run_gradcheck(std::uint64_t first_seed, int seeds) {
  const nn::GradCheckReport report = nn::run_standard_gradcheck(first_seed, seeds);
  for (const auto& r : report.worst_by_name()) {
    std::printf("%-24s max rel error %.3e  %s\n", r.name.c_str(), r.max_rel_error, r.passed ? "ok" : "FAIL");
  }
  if (const auto bad = report.first_failure()) {
    std::printf("gradient check failed: %s (relative error %.3e)\n", bad->name.c_str(), bad->max_rel_error);
    return kExitNumeric;
  }
  std::printf("all %zu gradient checks passed\n", report.results.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"temviro: two-branch TEM texture classifier"};
  app.require_subcommand(1);
  int threads = -1;
  app.add_option("--threads", threads, "Worker threads (0 = single-threaded deterministic mode)");

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Write std-filter and DCT maps (TVFM) for every image in a tree");
  c_pre->add_option("--input-dir", pre.input_dir)->required()->check(CLI::ExistingDirectory);
  c_pre->add_option("--out", pre.out)->required();
  c_pre->add_option("--mode", pre.mode)->check(CLI::IsMember({"stdfilt", "dct", "both"}));
  c_pre->add_option("--size", pre.size, "Resize target side");
  c_pre->add_option("--window", pre.window, "Std-filter window (odd)");
  c_pre->add_flag("--signed-log", pre.signed_log, "Compress DCT maps with sign(x) log(1 + |x|)");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train and keep best/last checkpoints, history and curves");
  c_train->add_option("--manifest", tr.manifest, "manifest.csv or class-per-directory root")->required();
  c_train->add_option("--config", tr.config, "Architecture config (default: built-in, sized to the manifest)");
  c_train->add_option("--seed", tr.seed);
  c_train->add_option("--epochs", tr.epochs)->check(CLI::PositiveNumber);
  c_train->add_option("--mode", tr.mode)->check(CLI::IsMember({"fused", "branch1", "branch2", "branch1_only", "branch2_only"}));
  c_train->add_option("--out-dir", tr.out_dir);
  c_train->add_option("--batch-size", tr.batch_size);
  c_train->add_option("--lr", tr.learning_rate);
  c_train->add_option("--optimizer", tr.optimizer)->check(CLI::IsMember({"adam", "sgd"}));
  c_train->add_option("--cache-dir", tr.cache_dir, "Reuse preprocessed maps stored here");
  c_train->add_flag("--quiet", tr.quiet);

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Score a checkpoint on one split");
  c_eval->add_option("--checkpoint", ev.checkpoint)->required()->check(CLI::ExistingFile);
  c_eval->add_option("--manifest", ev.manifest)->required();
  c_eval->add_option("--split", ev.split)->check(CLI::IsMember({"train", "test"}));
  c_eval->add_option("--report", ev.report, "Write the structured report here (plus .csv and .confusion.csv)");
  c_eval->add_option("--cache-dir", ev.cache_dir);

  fs::path pred_ckpt, pred_image;
  auto* c_pred = app.add_subcommand("predict", "Classify one image");
  c_pred->add_option("--checkpoint", pred_ckpt)->required()->check(CLI::ExistingFile);
  c_pred->add_option("--image", pred_image)->required()->check(CLI::ExistingFile);

  fs::path curves_history, curves_out = "curves";
  auto* c_curves = app.add_subcommand("export-curves", "Write epoch,train,test CSVs from a history file");
  c_curves->add_option("--history", curves_history)->required()->check(CLI::ExistingFile);
  c_curves->add_option("--out-dir", curves_out);

  fs::path synth_out;
  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Generate the synthetic grating dataset");
  c_synth->add_option("--out", synth_out)->required();
  c_synth->add_option("--seed", synth.seed);
  c_synth->add_option("--classes", synth.classes)->check(CLI::Range(2, 64));
  c_synth->add_option("--train-per-class", synth.train_per_class);
  c_synth->add_option("--test-per-class", synth.test_per_class);

  std::uint64_t gc_seed = 1;
  int gc_seeds = 10;
  auto* c_grad = app.add_subcommand("gradcheck", "Finite-difference check of every layer's backward pass");
  c_grad->add_option("--seed", gc_seed, "First seed");
  c_grad->add_option("--seeds", gc_seeds, "Number of seeds")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  if (threads >= 0) set_worker_count(threads);

  try {
    if (*c_pre) return run_preprocess(pre);
    if (*c_train) return run_train(tr);
    if (*c_eval) return run_evaluate(ev);
    if (*c_pred) return run_predict(pred_ckpt, pred_image);
    if (*c_curves) return run_export_curves(curves_history, curves_out);
    if (*c_synth) return run_synth(synth_out, synth);
    if (*c_grad) return run_gradcheck(gc_seed, gc_seeds);
  } catch (const Error& e) {
    std::fprintf(stderr, "temviro: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "temviro: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
