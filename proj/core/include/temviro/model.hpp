#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "temviro/arch_config.hpp"
#include "temviro/feature_map.hpp"
#include "temviro/ops.hpp"
#include "temviro/rng.hpp"
#include "temviro/tensor.hpp"

namespace temviro {

struct Parameter {
  std::string name;
  nn::Tensor value;
};

struct BatchNormBuffer {
  std::string name;
  nn::BatchNormState state;
};

// Two convolutional branches (std-filter input, DCT input) whose flattened
// features are concatenated and classified by a dense stack. In a
// branch-only mode the inactive branch owns no parameters and its input is
// never read.
class Model {
 public:
  // Validates cfg and initializes weights: Glorot-uniform filters and dense
  // matrices, zero biases, unit gamma / zero beta, each tensor seeded from
  // (seed, parameter name).
  Model(ArchConfig cfg, std::uint64_t seed);

  const ArchConfig& config() const { return cfg_; }

  // Inputs are [B, 1, S, S] with S = input_size. `rng` drives dropout and
  // is required in train mode.
  nn::Tensor features(const nn::Tensor& x1, const nn::Tensor& x2, nn::Mode mode, Xoshiro256* rng);
  nn::Tensor logits(const nn::Tensor& x1, const nn::Tensor& x2, nn::Mode mode, Xoshiro256* rng);
  nn::Tensor forward(const nn::Tensor& x1, const nn::Tensor& x2, nn::Mode mode, Xoshiro256* rng);

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  std::vector<nn::Tensor> trainable() const;

  std::vector<BatchNormBuffer>& batchnorm_buffers() { return buffers_; }
  const std::vector<BatchNormBuffer>& batchnorm_buffers() const { return buffers_; }

  std::size_t parameter_count() const;
  std::size_t feature_length() const { return classifier_input_length(cfg_); }

  // Independent copy of weights and running statistics.
  Model clone() const;

 private:
  struct Layer {
    LayerSpec spec;
    int weight = -1;
    int bias = -1;
    int bn = -1;
  };

  void build_branch(const std::vector<LayerSpec>& specs, const std::string& prefix, std::size_t channels,
                    std::vector<Layer>& out, std::uint64_t seed);
  nn::Tensor run(std::vector<Layer>& layers, nn::Tensor x, nn::Mode mode, Xoshiro256* rng, bool stop_before_softmax);
  int add_param(std::string name, nn::Shape shape, std::vector<double> data);

  ArchConfig cfg_;
  std::vector<Parameter> params_;
  std::vector<BatchNormBuffer> buffers_;
  std::vector<Layer> branch1_;
  std::vector<Layer> branch2_;
  std::vector<Layer> classifier_;
};

// Stacks equally sized maps into a [B, 1, H, W] tensor.
nn::Tensor stack_maps(std::span<const FeatureMap* const> maps);

// Infer-mode class probabilities for one sample.
std::vector<double> forward_fused(Model& model, const FeatureMap& x1, const FeatureMap& x2);

// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

}  // namespace temviro
