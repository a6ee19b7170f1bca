#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "temviro/ops.hpp"

namespace temviro {

enum class LayerKind { conv2d, sigmoid, relu, softmax, maxpool2d, batchnorm, dropout, dense, flatten, concat };

std::string_view to_string(LayerKind k);

struct LayerSpec {
  LayerKind kind = LayerKind::flatten;
  std::size_t filters = 0;  // conv2d: output channels
  std::size_t kernel = 0;   // conv2d: square kernel side
  std::size_t pool = 0;     // maxpool2d: window and stride
  std::size_t units = 0;    // dense: output width
  double rate = 0.0;        // dropout
  nn::Activation activation = nn::Activation::identity;  // conv2d, dense

  static LayerSpec conv(std::size_t filters, std::size_t kernel, nn::Activation a);
  static LayerSpec maxpool(std::size_t pool);
  static LayerSpec batchnorm();
  static LayerSpec dropout(double rate);
  static LayerSpec dense(std::size_t units, nn::Activation a);
  static LayerSpec flatten();

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Which preprocessing branches feed the classifier.
enum class FusionMode { fused, branch1_only, branch2_only };

std::string_view to_string(FusionMode m);
FusionMode parse_fusion_mode(std::string_view text);  // accepts branch1/branch2 shorthands

inline constexpr int kArchConfigVersion = 1;

// Declarative description of both convolutional branches and the classifier.
//
// Text form (one `key = value` per line, `#` comments):
//
//   version = 1
//   num_classes = 14
//   input_size = 128
//   mode = fused                # fused | branch1_only | branch2_only
//   dct_signed_log = false
//   branch1 = conv(16,3,sigmoid) maxpool(3) batchnorm dropout(0.25) flatten ...
//   branch2 = ...
//   classifier = dense(512,relu) dropout(0.5) ... dense(14,softmax)
//
// Layer tokens: conv(filters,kernel,activation), maxpool(pool), batchnorm,
// dropout(rate), dense(units,activation), flatten, sigmoid, relu, softmax.
struct ArchConfig {
  int version = kArchConfigVersion;
  std::vector<LayerSpec> branch1;
  std::vector<LayerSpec> branch2;
  std::vector<LayerSpec> classifier;
  std::size_t num_classes = 14;
  std::size_t input_size = 128;
  FusionMode mode = FusionMode::fused;
  bool dct_signed_log = false;

  bool uses_branch1() const { return mode != FusionMode::branch2_only; }
  bool uses_branch2() const { return mode != FusionMode::branch1_only; }

  std::string to_text() const;

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

// The shipped default (configs/default.cfg carries the same values).
ArchConfig default_arch_config();

// Keys outside the schema are rejected, except `meta.*` lines which are
// ignored so checkpoint headers parse as configs.
ArchConfig parse_arch_config(std::string_view text);
ArchConfig load_arch_config(const std::filesystem::path& path);

// Throws InvalidArchitecture naming the first violated structural rule:
// branch1 = 3 conv (two sigmoid, one relu), branch2 = 4 relu conv, each with
// 3 maxpools, 1 batchnorm and a trailing flatten; classifier = 5 dense with
// >= 1 dropout ending in dense(num_classes, softmax); all kernels 3x3; every
// intermediate map non-empty at input_size.
void validate(const ArchConfig& cfg);

// Flattened feature length a branch produces at cfg.input_size.
std::size_t branch_feature_length(const std::vector<LayerSpec>& branch, std::size_t input_size);
std::size_t classifier_input_length(const ArchConfig& cfg);

// Trainable scalars of one layer given its input channels (conv2d,
// batchnorm on maps) or input width (dense, batchnorm on features).
std::size_t parameter_count(const LayerSpec& layer, std::size_t inputs);

// Trainable scalar count of the active layers in cfg.mode.
std::size_t parameter_count(const ArchConfig& cfg);

}  // namespace temviro
