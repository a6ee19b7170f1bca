#include "temviro/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "temviro/ops.hpp"
#include "temviro/rng.hpp"

namespace temviro::nn {
namespace {

Tensor random_tensor(Shape shape, Xoshiro256& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor::from(std::move(shape), std::move(v), true);
}

// Values bounded away from zero so relu never sits on its kink.
Tensor off_kink_tensor(Shape shape, Xoshiro256& rng) {
  std::vector<double> v(numel(shape));
  for (auto& x : v) {
    const double mag = rng.uniform(0.1, 1.0);
    x = rng.uniform() < 0.5 ? -mag : mag;
  }
  return Tensor::from(std::move(shape), std::move(v), true);
}

// Distinct values at least 0.01 apart, so no pooling window holds a near tie.
Tensor separated_tensor(Shape shape, Xoshiro256& rng) {
  std::vector<double> v(numel(shape));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.01 * static_cast<double>(i) - 0.005 * static_cast<double>(v.size());
  shuffle(std::span(v), rng);
  return Tensor::from(std::move(shape), std::move(v), true);
}

std::vector<double> probe_weights(std::size_t n, Xoshiro256& rng) {
  std::vector<double> w(n);
  for (auto& x : w) x = rng.uniform(-1.0, 1.0);
  return w;
}

std::vector<int> random_labels(std::size_t n, std::size_t classes, Xoshiro256& rng) {
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(rng.below(classes));
  return y;
}

}  // namespace

bool GradCheckReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const GradCheckResult& r) { return r.passed; });
}

std::optional<GradCheckResult> GradCheckReport::first_failure() const {
  for (const auto& r : results) {
    if (!r.passed) return r;
  }
  return std::nullopt;
}

std::vector<GradCheckResult> GradCheckReport::worst_by_name() const {
  std::vector<GradCheckResult> out;
  std::map<std::string, std::size_t> index;
  for (const auto& r : results) {
    auto [it, inserted] = index.emplace(r.name, out.size());
    if (inserted) {
      out.push_back(r);
      continue;
    }
    auto& w = out[it->second];
    w.max_rel_error = std::max(w.max_rel_error, r.max_rel_error);
    w.checked += r.checked;
    w.passed = w.passed && r.passed;
  }
  return out;
}

GradCheckResult check_gradient(const GradCheckCase& c, double h, double tol) {
  GradCheckResult result{c.name, 0.0, 0, true};

  auto inputs = c.inputs;
  for (auto& t : inputs) t.zero_grad();
  Tensor out = c.fn(inputs);
  out.backward();
  std::vector<std::vector<double>> analytic;
  for (const auto& t : inputs) {
    analytic.push_back(t.has_grad() ? std::vector<double>(t.grad().begin(), t.grad().end()) : std::vector<double>(t.numel(), 0.0));
  }

  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (!inputs[k].requires_grad()) continue;
    auto data = inputs[k].data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + h;
      const double plus = c.fn(inputs).item();
      data[i] = saved - h;
      const double minus = c.fn(inputs).item();
      data[i] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[k][i];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-4});
      result.max_rel_error = std::max(result.max_rel_error, std::isfinite(err) ? err : INFINITY);
      ++result.checked;
    }
  }
  result.passed = result.max_rel_error < tol;
  return result;
}

std::vector<GradCheckCase> layer_cases(std::uint64_t seed) {
  Xoshiro256 rng(derive_seed(seed, 0x67726164));  // "grad"
  std::vector<GradCheckCase> cases;

  {
    const std::size_t b = 2, c = 1 + rng.below(2), m = 5 + rng.below(3), n = 5 + rng.below(3), k = 1 + rng.below(3);
    auto w = probe_weights(b * k * (m - 2) * (n - 2), rng);
    cases.push_back({"conv2d",
                     {random_tensor({b, c, m, n}, rng), random_tensor({k, c, 3, 3}, rng), random_tensor({k}, rng)},
                     [w](const std::vector<Tensor>& in) { return weighted_sum(conv2d(in[0], in[1], in[2]), w); }});
  }
  {
    const std::size_t b = 3, i = 2 + rng.below(5), o = 2 + rng.below(5);
    auto w = probe_weights(b * o, rng);
    cases.push_back({"dense",
                     {random_tensor({b, i}, rng), random_tensor({i, o}, rng), random_tensor({o}, rng)},
                     [w](const std::vector<Tensor>& in) { return weighted_sum(linear(in[0], in[1], in[2]), w); }});
  }
  {
    auto w = probe_weights(12, rng);
    cases.push_back({"sigmoid", {random_tensor({3, 4}, rng, -4.0, 4.0)},
                     [w](const std::vector<Tensor>& in) { return weighted_sum(sigmoid(in[0]), w); }});
  }
  {
    auto w = probe_weights(12, rng);
    cases.push_back({"relu", {off_kink_tensor({3, 4}, rng)},
                     [w](const std::vector<Tensor>& in) { return weighted_sum(relu(in[0]), w); }});
  }
  {
    auto w = probe_weights(3 * 5, rng);
    cases.push_back({"softmax", {random_tensor({3, 5}, rng, -3.0, 3.0)},
                     [w](const std::vector<Tensor>& in) { return weighted_sum(softmax(in[0]), w); }});
  }
  {
    auto y = random_labels(4, 6, rng);
    cases.push_back({"softmax_cross_entropy", {random_tensor({4, 6}, rng, -3.0, 3.0)},
                     [y](const std::vector<Tensor>& in) { return softmax_cross_entropy(in[0], y); }});
  }
  {
    auto y = random_labels(4, 5, rng);
    cases.push_back({"cross_entropy", {random_tensor({4, 5}, rng, -2.0, 2.0)},
                     [y](const std::vector<Tensor>& in) { return cross_entropy_loss(softmax(in[0]), y); }});
  }
  {
    const std::size_t pool = 2 + rng.below(2), m = 6 + rng.below(4), n = 6 + rng.below(4);
    auto w = probe_weights(2 * 2 * (m / pool) * (n / pool), rng);
    cases.push_back({"maxpool2d", {separated_tensor({2, 2, m, n}, rng)},
                     [w, pool](const std::vector<Tensor>& in) { return weighted_sum(maxpool2d(in[0], pool), w); }});
  }
  {
    auto w = probe_weights(3 * 2 * 3 * 3, rng);
    cases.push_back({"batchnorm_train",
                     {random_tensor({3, 2, 3, 3}, rng, -2.0, 2.0), random_tensor({2}, rng, 0.5, 1.5), random_tensor({2}, rng)},
                     [w](const std::vector<Tensor>& in) {
                       BatchNormState state(2);
                       return weighted_sum(batchnorm(in[0], in[1], in[2], state, Mode::train), w);
                     }});
  }
  {
    auto w = probe_weights(4 * 5, rng);
    cases.push_back({"batchnorm_train_dense",
                     {random_tensor({4, 5}, rng, -2.0, 2.0), random_tensor({5}, rng, 0.5, 1.5), random_tensor({5}, rng)},
                     [w](const std::vector<Tensor>& in) {
                       BatchNormState state(5);
                       return weighted_sum(batchnorm(in[0], in[1], in[2], state, Mode::train), w);
                     }});
  }
  {
    auto w = probe_weights(2 * 3 * 2 * 2, rng);
    BatchNormState frozen(3);
    for (std::size_t i = 0; i < 3; ++i) {
      frozen.running_mean[i] = rng.uniform(-0.5, 0.5);
      frozen.running_var[i] = rng.uniform(0.5, 2.0);
    }
    cases.push_back({"batchnorm_infer",
                     {random_tensor({2, 3, 2, 2}, rng), random_tensor({3}, rng, 0.5, 1.5), random_tensor({3}, rng)},
                     [w, frozen](const std::vector<Tensor>& in) {
                       BatchNormState state = frozen;
                       return weighted_sum(batchnorm(in[0], in[1], in[2], state, Mode::infer), w);
                     }});
  }
  {
    auto w = probe_weights(4 * 6, rng);
    const std::uint64_t mask_seed = rng();
    cases.push_back({"dropout", {random_tensor({4, 6}, rng)},
                     [w, mask_seed](const std::vector<Tensor>& in) {
                       Xoshiro256 mask_rng(mask_seed);
                       return weighted_sum(dropout(in[0], 0.5, Mode::train, mask_rng), w);
                     }});
  }
  {
    auto w = probe_weights(2 * (2 * 2 * 2 + 3), rng);
    cases.push_back({"flatten_concat", {random_tensor({2, 2, 2, 2}, rng), random_tensor({2, 3}, rng)},
                     [w](const std::vector<Tensor>& in) { return weighted_sum(concat(flatten(in[0]), in[1]), w); }});
  }
  {
    // Two tiny branches -> concat -> dense -> fused loss.
    auto y = random_labels(2, 3, rng);
    cases.push_back({"two_branch_network",
                     {random_tensor({2, 1, 6, 6}, rng), random_tensor({2, 1, 6, 6}, rng),
                      random_tensor({2, 1, 3, 3}, rng), random_tensor({2}, rng),
                      random_tensor({2, 1, 3, 3}, rng), random_tensor({2}, rng),
                      random_tensor({16, 3}, rng), random_tensor({3}, rng)},
                     [y](const std::vector<Tensor>& in) {
                       Tensor a = flatten(maxpool2d(sigmoid(conv2d(in[0], in[2], in[3])), 2));
                       Tensor b = flatten(maxpool2d(sigmoid(conv2d(in[1], in[4], in[5])), 2));
                       return softmax_cross_entropy(linear(concat(a, b), in[6], in[7]), y);
                     }});
  }
  return cases;
}

GradCheckReport run_gradcheck(const std::vector<GradCheckCase>& cases, double h, double tol) {
  GradCheckReport report;
  for (const auto& c : cases) report.results.push_back(check_gradient(c, h, tol));
  return report;
}

GradCheckReport run_standard_gradcheck(std::uint64_t first_seed, int seeds) {
  GradCheckReport report;
  for (int s = 0; s < seeds; ++s) {
    auto part = run_gradcheck(layer_cases(first_seed + static_cast<std::uint64_t>(s)));
    report.results.insert(report.results.end(), part.results.begin(), part.results.end());
  }
  return report;
}

}  // namespace temviro::nn
