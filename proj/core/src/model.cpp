#include "temviro/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "temviro/error.hpp"

namespace temviro {
namespace {

std::uint64_t name_hash(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> glorot(std::size_t count, std::size_t fan_in, std::size_t fan_out, std::uint64_t seed) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Xoshiro256 rng(seed);
  std::vector<double> v(count);
  for (auto& x : v) x = rng.uniform(-limit, limit);
  return v;
}

void check_input(const nn::Tensor& x, std::size_t size, const char* which) {
  if (!x.defined() || x.rank() != 4 || x.dim(1) != 1 || x.dim(2) != size || x.dim(3) != size) {
    fail(ErrorCode::ShapeMismatch, std::string(which) + " must be [B,1," + std::to_string(size) + "," + std::to_string(size) +
                                       "], got " + (x.defined() ? nn::to_string(x.shape()) : std::string("undefined")));
  }
}

}  // namespace

Model::Model(ArchConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  validate(cfg_);
  if (cfg_.uses_branch1()) build_branch(cfg_.branch1, "branch1", 1, branch1_, seed);
  if (cfg_.uses_branch2()) build_branch(cfg_.branch2, "branch2", 1, branch2_, seed);
  build_branch(cfg_.classifier, "classifier", feature_length(), classifier_, seed);
}

int Model::add_param(std::string name, nn::Shape shape, std::vector<double> data) {
  params_.push_back({std::move(name), nn::Tensor::from(std::move(shape), std::move(data), true)});
  return static_cast<int>(params_.size() - 1);
}

void Model::build_branch(const std::vector<LayerSpec>& specs, const std::string& prefix, std::size_t width,
                         std::vector<Layer>& out, std::uint64_t seed) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const LayerSpec& spec = specs[i];
    const std::string base = prefix + "." + std::to_string(i) + ".";
    Layer layer{spec};
    switch (spec.kind) {
      case LayerKind::conv2d: {
        const std::size_t s = spec.kernel, k = spec.filters;
        const std::string wname = base + "weight";
        layer.weight = add_param(wname, {k, width, s, s},
                                 glorot(k * width * s * s, width * s * s, k * s * s, derive_seed(seed, name_hash(wname))));
        layer.bias = add_param(base + "bias", {k}, std::vector<double>(k, 0.0));
        width = k;
        break;
      }
      case LayerKind::dense: {
        const std::string wname = base + "weight";
        layer.weight = add_param(wname, {width, spec.units},
                                 glorot(width * spec.units, width, spec.units, derive_seed(seed, name_hash(wname))));
        layer.bias = add_param(base + "bias", {spec.units}, std::vector<double>(spec.units, 0.0));
        width = spec.units;
        break;
      }
      case LayerKind::batchnorm:
        layer.weight = add_param(base + "gamma", {width}, std::vector<double>(width, 1.0));
        layer.bias = add_param(base + "beta", {width}, std::vector<double>(width, 0.0));
        buffers_.push_back({base.substr(0, base.size() - 1), nn::BatchNormState(width)});
        layer.bn = static_cast<int>(buffers_.size() - 1);
        break;
      default:
        break;
    }
    out.push_back(layer);
  }
}

nn::Tensor Model::run(std::vector<Layer>& layers, nn::Tensor x, nn::Mode mode, Xoshiro256* rng, bool stop_before_softmax) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    const bool last = i + 1 == layers.size();
    switch (l.spec.kind) {
      case LayerKind::conv2d:
        x = nn::activate(nn::conv2d(x, params_[l.weight].value, params_[l.bias].value), l.spec.activation);
        break;
      case LayerKind::dense: {
        const bool skip = stop_before_softmax && last && l.spec.activation == nn::Activation::softmax;
        x = nn::linear(x, params_[l.weight].value, params_[l.bias].value);
        if (!skip) x = nn::activate(x, l.spec.activation);
        break;
      }
      case LayerKind::sigmoid: x = nn::sigmoid(x); break;
      case LayerKind::relu: x = nn::relu(x); break;
      case LayerKind::softmax:
        if (!(stop_before_softmax && last)) x = nn::softmax(x);
        break;
      case LayerKind::maxpool2d: x = nn::maxpool2d(x, l.spec.pool); break;
      case LayerKind::batchnorm:
        x = nn::batchnorm(x, params_[l.weight].value, params_[l.bias].value, buffers_[l.bn].state, mode);
        break;
      case LayerKind::dropout:
        if (mode == nn::Mode::train && rng == nullptr) fail(ErrorCode::InvalidArgument, "train-mode forward needs a dropout rng");
        if (mode == nn::Mode::train) x = nn::dropout(x, l.spec.rate, mode, *rng);
        break;
      case LayerKind::flatten: x = nn::flatten(x); break;
      case LayerKind::concat: break;
    }
  }
  return x;
}

nn::Tensor Model::features(const nn::Tensor& x1, const nn::Tensor& x2, nn::Mode mode, Xoshiro256* rng) {
  nn::Tensor f1, f2;
  if (cfg_.uses_branch1()) {
    check_input(x1, cfg_.input_size, "branch1 input");
    f1 = run(branch1_, x1, mode, rng, false);
  }
  if (cfg_.uses_branch2()) {
    check_input(x2, cfg_.input_size, "branch2 input");
    f2 = run(branch2_, x2, mode, rng, false);
  }
  if (f1.defined() && f2.defined()) {
    if (f1.dim(0) != f2.dim(0)) fail(ErrorCode::ShapeMismatch, "branch inputs carry different batch sizes");
    return nn::concat(f1, f2);
  }
  return f1.defined() ? f1 : f2;
}

nn::Tensor Model::logits(const nn::Tensor& x1, const nn::Tensor& x2, nn::Mode mode, Xoshiro256* rng) {
  nn::Tensor out = run(classifier_, features(x1, x2, mode, rng), mode, rng, true);
  nn::require_finite(out, "model logits");
  return out;
}

nn::Tensor Model::forward(const nn::Tensor& x1, const nn::Tensor& x2, nn::Mode mode, Xoshiro256* rng) {
  return nn::softmax(logits(x1, x2, mode, rng));
}

std::vector<nn::Tensor> Model::trainable() const {
  std::vector<nn::Tensor> out;
  for (const auto& p : params_) out.push_back(p.value);
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

Model Model::clone() const {
  Model copy = *this;
  for (auto& p : copy.params_) {
    p.value = p.value.clone();
    p.value.zero_grad();
  }
  return copy;
}

nn::Tensor stack_maps(std::span<const FeatureMap* const> maps) {
  if (maps.empty()) fail(ErrorCode::ShapeMismatch, "cannot stack zero maps");
  const std::size_t h = maps[0]->height, w = maps[0]->width;
  std::vector<double> data;
  data.reserve(maps.size() * h * w);
  for (const FeatureMap* m : maps) {
    if (m->height != h || m->width != w) fail(ErrorCode::ShapeMismatch, "stacked maps differ in size");
    data.insert(data.end(), m->values.begin(), m->values.end());
  }
  return nn::Tensor::from({maps.size(), 1, h, w}, std::move(data));
}

std::vector<double> forward_fused(Model& model, const FeatureMap& x1, const FeatureMap& x2) {
  const FeatureMap* a[] = {&x1};
  const FeatureMap* b[] = {&x2};
  const nn::Tensor probs = model.forward(stack_maps(a), stack_maps(b), nn::Mode::infer, nullptr);
  return {probs.data().begin(), probs.data().end()};
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace temviro
