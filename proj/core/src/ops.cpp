#include "temviro/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "temviro/error.hpp"
#include "temviro/parallel.hpp"

namespace temviro::nn {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;
using ConstMapVector = Eigen::Map<const Eigen::VectorXd>;

void expect_rank(const Tensor& t, std::size_t rank, std::string_view op) {
  if (t.rank() != rank) {
    fail(ErrorCode::ShapeMismatch, std::string(op) + " expects rank " + std::to_string(rank) + ", got " + to_string(t.shape()));
  }
}

void check_labels(std::span<const int> labels, std::size_t batch, std::size_t classes, std::string_view op) {
  if (labels.size() != batch) {
    fail(ErrorCode::ShapeMismatch, std::string(op) + ": " + std::to_string(labels.size()) + " labels for batch of " + std::to_string(batch));
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      fail(ErrorCode::LabelOutOfRange, std::string(op) + ": label " + std::to_string(y) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

// Elementwise op whose local derivative can be written in terms of the
// input and output values.
template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& x, Fwd fwd, Deriv deriv) {
  std::vector<double> out(x.numel());
  const auto in = x.data();
  std::transform(in.begin(), in.end(), out.begin(), fwd);
  return make_result(x.shape(), std::move(out), {x}, [deriv](Node& self) {
    Node& p = *self.parents[0];
    auto& pg = p.grad_buffer();
    for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += self.grad[i] * deriv(p.data[i], self.data[i]);
  });
}

// Copies one sample's [C, m, n] planes into the [C*s*s, Ho*Wo] patch matrix.
void im2col(const double* x, std::size_t c, std::size_t m, std::size_t n, std::size_t s, double* col) {
  const std::size_t ho = m - s + 1, wo = n - s + 1;
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* plane = x + ch * m * n;
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) {
        double* dst = col + ((ch * s + i) * s + j) * ho * wo;
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const double* src = plane + (oy + i) * n + j;
          std::copy_n(src, wo, dst + oy * wo);
        }
      }
    }
  }
}

void col2im_add(const double* col, std::size_t c, std::size_t m, std::size_t n, std::size_t s, double* dx) {
  const std::size_t ho = m - s + 1, wo = n - s + 1;
  for (std::size_t ch = 0; ch < c; ++ch) {
    double* plane = dx + ch * m * n;
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) {
        const double* src = col + ((ch * s + i) * s + j) * ho * wo;
        for (std::size_t oy = 0; oy < ho; ++oy) {
          double* dst = plane + (oy + i) * n + j;
          const double* row = src + oy * wo;
          for (std::size_t ox = 0; ox < wo; ++ox) dst[ox] += row[ox];
        }
      }
    }
  }
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::sigmoid: return "sigmoid";
    case Activation::relu: return "relu";
    case Activation::softmax: return "softmax";
  }
  return "identity";
}

Activation parse_activation(std::string_view text) {
  if (text == "identity" || text == "linear") return Activation::identity;
  if (text == "sigmoid") return Activation::sigmoid;
  if (text == "relu") return Activation::relu;
  if (text == "softmax") return Activation::softmax;
  fail(ErrorCode::InvalidArgument, "unknown activation '" + std::string(text) + "'");
}

Tensor conv2d(const Tensor& x, const Tensor& filters, const Tensor& bias) {
  expect_rank(x, 4, "conv2d input");
  expect_rank(filters, 4, "conv2d filters");
  expect_rank(bias, 1, "conv2d bias");
  const std::size_t batch = x.dim(0), c = x.dim(1), m = x.dim(2), n = x.dim(3);
  const std::size_t k = filters.dim(0), s = filters.dim(2);
  if (filters.dim(1) != c || filters.dim(3) != s || bias.dim(0) != k || s == 0) {
    fail(ErrorCode::ShapeMismatch, "conv2d: input " + to_string(x.shape()) + ", filters " + to_string(filters.shape()) +
                                       ", bias " + to_string(bias.shape()));
  }
  if (m < s || n < s) fail(ErrorCode::ShapeMismatch, "conv2d: input " + to_string(x.shape()) + " smaller than kernel");

  const std::size_t ho = m - s + 1, wo = n - s + 1, patch = c * s * s, positions = ho * wo;
  const bool keep_cols = filters.requires_grad() || x.requires_grad();
  auto cols = std::make_shared<std::vector<double>>(keep_cols ? batch * patch * positions : 0);

  std::vector<double> out(batch * k * positions);
  const double* xd = x.data().data();
  const ConstMapMatrix w(filters.data().data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(patch));
  const ConstMapVector b(bias.data().data(), static_cast<Eigen::Index>(k));

  parallel_for(batch, [&](std::size_t bi) {
    std::vector<double> local;
    double* col = nullptr;
    if (keep_cols) {
      col = cols->data() + bi * patch * positions;
    } else {
      local.resize(patch * positions);
      col = local.data();
    }
    im2col(xd + bi * c * m * n, c, m, n, s, col);
    MapMatrix y(out.data() + bi * k * positions, static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(positions));
    y.noalias() = w * ConstMapMatrix(col, static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(positions));
    y.colwise() += b;
  });

  return make_result({batch, k, ho, wo}, std::move(out), {x, filters, bias},
                     [=](Node& self) {
                       Node& xn = *self.parents[0];
                       Node& wn = *self.parents[1];
                       Node& bn = *self.parents[2];
                       const auto P = static_cast<Eigen::Index>(patch), Q = static_cast<Eigen::Index>(positions),
                                  K = static_cast<Eigen::Index>(k);
                       const ConstMapMatrix wmat(wn.data.data(), K, P);

                       // Per-sample partials, summed in sample order so the
                       // result does not depend on the worker count.
                       std::vector<double> dw_parts(wn.requires_grad ? batch * k * patch : 0);
                       std::vector<double> db_parts(bn.requires_grad ? batch * k : 0);
                       double* dx = xn.requires_grad ? xn.grad_buffer().data() : nullptr;

                       parallel_for(batch, [&](std::size_t bi) {
                         const ConstMapMatrix dy(self.grad.data() + bi * k * positions, K, Q);
                         const ConstMapMatrix col(cols->data() + bi * patch * positions, P, Q);
                         if (wn.requires_grad) {
                           MapMatrix(dw_parts.data() + bi * k * patch, K, P).noalias() = dy * col.transpose();
                         }
                         if (bn.requires_grad) {
                           // Plain loop: Eigen's vectorized reductions peel by
                           // pointer alignment, so their rounding varies run to run.
                           const double* g = self.grad.data() + bi * k * positions;
                           for (std::size_t i = 0; i < k; ++i) {
                             double acc = 0.0;
                             for (std::size_t q = 0; q < positions; ++q) acc += g[i * positions + q];
                             db_parts[bi * k + i] = acc;
                           }
                         }
                         if (dx != nullptr) {
                           RowMatrix dcol = wmat.transpose() * dy;
                           col2im_add(dcol.data(), c, m, n, s, dx + bi * c * m * n);
                         }
                       });
                       if (wn.requires_grad) {
                         auto& g = wn.grad_buffer();
                         for (std::size_t bi = 0; bi < batch; ++bi) {
                           const double* part = dw_parts.data() + bi * k * patch;
                           for (std::size_t i = 0; i < g.size(); ++i) g[i] += part[i];
                         }
                       }
                       if (bn.requires_grad) {
                         auto& g = bn.grad_buffer();
                         for (std::size_t bi = 0; bi < batch; ++bi) {
                           for (std::size_t i = 0; i < k; ++i) g[i] += db_parts[bi * k + i];
                         }
                       }
                     });
}

Tensor sigmoid(const Tensor& x) {
  const auto n = static_cast<Eigen::Index>(x.numel());
  std::vector<double> out(x.numel());
  const Eigen::Map<const Eigen::ArrayXd> a(x.data().data(), n);
  const Eigen::ArrayXd e = (-a.abs()).exp();
  Eigen::Map<Eigen::ArrayXd>(out.data(), n) = (a >= 0.0).select(1.0 / (1.0 + e), e / (1.0 + e));
  return make_result(x.shape(), std::move(out), {x}, [n](Node& self) {
    const Eigen::Map<const Eigen::ArrayXd> y(self.data.data(), n), g(self.grad.data(), n);
    Eigen::Map<Eigen::ArrayXd>(self.parents[0]->grad_buffer().data(), n) += g * y * (1.0 - y);
  });
}

Tensor relu(const Tensor& x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor softmax(const Tensor& x) {
  expect_rank(x, 2, "softmax");
  const std::size_t batch = x.dim(0), j = x.dim(1);
  if (j == 0) fail(ErrorCode::ShapeMismatch, "softmax over zero classes");
  std::vector<double> out(x.numel());
  const auto in = x.data();
  for (std::size_t r = 0; r < batch; ++r) {
    const double* row = in.data() + r * j;
    double* o = out.data() + r * j;
    const double mx = *std::max_element(row, row + j);
    double z = 0.0;
    for (std::size_t i = 0; i < j; ++i) z += (o[i] = std::exp(row[i] - mx));
    for (std::size_t i = 0; i < j; ++i) o[i] /= z;
  }
  return make_result(x.shape(), std::move(out), {x}, [batch, j](Node& self) {
    auto& pg = self.parents[0]->grad_buffer();
    for (std::size_t r = 0; r < batch; ++r) {
      const double* p = self.data.data() + r * j;
      const double* g = self.grad.data() + r * j;
      double dot = 0.0;
      for (std::size_t i = 0; i < j; ++i) dot += g[i] * p[i];
      for (std::size_t i = 0; i < j; ++i) pg[r * j + i] += p[i] * (g[i] - dot);
    }
  });
}

Tensor activate(const Tensor& x, Activation a) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::sigmoid: return sigmoid(x);
    case Activation::relu: return relu(x);
    case Activation::softmax: return softmax(x);
  }
  return x;
}

Tensor maxpool2d(const Tensor& x, std::size_t pool) {
  expect_rank(x, 4, "maxpool2d");
  if (pool == 0) fail(ErrorCode::InvalidArgument, "pool size must be >= 1");
  const std::size_t batch = x.dim(0), c = x.dim(1), m = x.dim(2), n = x.dim(3);
  const std::size_t ho = m / pool, wo = n / pool;
  if (ho == 0 || wo == 0) {
    fail(ErrorCode::DegenerateOutput, "maxpool2d: " + to_string(x.shape()) + " with pool " + std::to_string(pool) + " has no output");
  }
  const std::size_t planes = batch * c;
  std::vector<double> out(planes * ho * wo);
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  const double* xd = x.data().data();

  parallel_for(planes, [&](std::size_t pl) {
    const double* plane = xd + pl * m * n;
    for (std::size_t oy = 0; oy < ho; ++oy) {
      for (std::size_t ox = 0; ox < wo; ++ox) {
        std::size_t best = (oy * pool) * n + ox * pool;
        for (std::size_t i = 0; i < pool; ++i) {
          for (std::size_t j = 0; j < pool; ++j) {
            const std::size_t idx = (oy * pool + i) * n + ox * pool + j;
            if (plane[idx] > plane[best]) best = idx;
          }
        }
        const std::size_t o = (pl * ho + oy) * wo + ox;
        out[o] = plane[best];
        (*argmax)[o] = pl * m * n + best;
      }
    }
  });

  return make_result({batch, c, ho, wo}, std::move(out), {x}, [argmax](Node& self) {
    auto& pg = self.parents[0]->grad_buffer();
    for (std::size_t o = 0; o < self.grad.size(); ++o) pg[(*argmax)[o]] += self.grad[o];
  });
}

Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state, Mode mode) {
  if (x.rank() != 2 && x.rank() != 4) fail(ErrorCode::ShapeMismatch, "batchnorm expects rank 2 or 4, got " + to_string(x.shape()));
  const std::size_t batch = x.dim(0), c = x.dim(1);
  const std::size_t spatial = x.rank() == 4 ? x.dim(2) * x.dim(3) : 1;
  if (gamma.numel() != c || beta.numel() != c || state.running_mean.size() != c || state.running_var.size() != c) {
    fail(ErrorCode::ShapeMismatch, "batchnorm parameters do not match " + std::to_string(c) + " channels");
  }
  const std::size_t count = batch * spatial;
  if (mode == Mode::train && batch < 2) fail(ErrorCode::BatchTooSmall, "batchnorm in train mode needs batch >= 2");

  const auto xd = x.data();
  auto at = [&](std::size_t b, std::size_t ch, std::size_t s) { return (b * c + ch) * spatial + s; };

  std::vector<double> mean(c), inv_std(c);
  if (mode == Mode::train) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      double sum = 0.0;
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t s = 0; s < spatial; ++s) sum += xd[at(b, ch, s)];
      const double mu = sum / static_cast<double>(count);
      double ss = 0.0;
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t s = 0; s < spatial; ++s) ss += (xd[at(b, ch, s)] - mu) * (xd[at(b, ch, s)] - mu);
      const double var = ss / static_cast<double>(count);
      mean[ch] = mu;
      inv_std[ch] = 1.0 / std::sqrt(var + state.eps);
      const double unbiased = count > 1 ? ss / static_cast<double>(count - 1) : var;
      state.running_mean[ch] = state.momentum * state.running_mean[ch] + (1.0 - state.momentum) * mu;
      state.running_var[ch] = state.momentum * state.running_var[ch] + (1.0 - state.momentum) * unbiased;
    }
  } else {
    for (std::size_t ch = 0; ch < c; ++ch) {
      mean[ch] = state.running_mean[ch];
      inv_std[ch] = 1.0 / std::sqrt(state.running_var[ch] + state.eps);
    }
  }

  auto xhat = std::make_shared<std::vector<double>>(x.numel());
  std::vector<double> out(x.numel());
  const auto g = gamma.data(), bt = beta.data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t s = 0; s < spatial; ++s) {
        const std::size_t i = at(b, ch, s);
        (*xhat)[i] = (xd[i] - mean[ch]) * inv_std[ch];
        out[i] = g[ch] * (*xhat)[i] + bt[ch];
      }
    }
  }

  const bool train = mode == Mode::train;
  return make_result(x.shape(), std::move(out), {x, gamma, beta},
                     [=, inv_std = std::move(inv_std)](Node& self) {
                       Node& xn = *self.parents[0];
                       Node& gn = *self.parents[1];
                       Node& bn = *self.parents[2];
                       auto idx = [&](std::size_t b, std::size_t ch, std::size_t s) { return (b * c + ch) * spatial + s; };
                       const double n_count = static_cast<double>(count);
                       for (std::size_t ch = 0; ch < c; ++ch) {
                         double sum_dy = 0.0, sum_dy_xhat = 0.0;
                         for (std::size_t b = 0; b < batch; ++b) {
                           for (std::size_t s = 0; s < spatial; ++s) {
                             const std::size_t i = idx(b, ch, s);
                             sum_dy += self.grad[i];
                             sum_dy_xhat += self.grad[i] * (*xhat)[i];
                           }
                         }
                         if (gn.requires_grad) gn.grad_buffer()[ch] += sum_dy_xhat;
                         if (bn.requires_grad) bn.grad_buffer()[ch] += sum_dy;
                         if (!xn.requires_grad) continue;
                         auto& dx = xn.grad_buffer();
                         const double gch = gn.data[ch];
                         for (std::size_t b = 0; b < batch; ++b) {
                           for (std::size_t s = 0; s < spatial; ++s) {
                             const std::size_t i = idx(b, ch, s);
                             if (train) {
                               dx[i] += gch * inv_std[ch] *
                                        (self.grad[i] - sum_dy / n_count - (*xhat)[i] * sum_dy_xhat / n_count);
                             } else {
                               dx[i] += gch * inv_std[ch] * self.grad[i];
                             }
                           }
                         }
                       }
                     });
}

Tensor dropout(const Tensor& x, double rate, Mode mode, Xoshiro256& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) fail(ErrorCode::InvalidArgument, "dropout rate must lie in [0, 1)");
  if (mode == Mode::infer || rate == 0.0) return x;
  const double scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(x.numel());
  std::vector<double> out(x.numel());
  const auto xd = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = rng.uniform() < rate ? 0.0 : scale;
    out[i] = xd[i] * (*mask)[i];
  }
  return make_result(x.shape(), std::move(out), {x}, [mask](Node& self) {
    auto& pg = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += self.grad[i] * (*mask)[i];
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  expect_rank(x, 2, "dense input");
  expect_rank(weight, 2, "dense weight");
  expect_rank(bias, 1, "dense bias");
  const std::size_t batch = x.dim(0), n_in = x.dim(1), n_out = weight.dim(1);
  if (weight.dim(0) != n_in || bias.dim(0) != n_out) {
    fail(ErrorCode::ShapeMismatch, "dense: input " + to_string(x.shape()) + ", weight " + to_string(weight.shape()) +
                                       ", bias " + to_string(bias.shape()));
  }
  const auto B = static_cast<Eigen::Index>(batch), I = static_cast<Eigen::Index>(n_in), O = static_cast<Eigen::Index>(n_out);
  std::vector<double> out(batch * n_out);
  MapMatrix y(out.data(), B, O);
  y.noalias() = ConstMapMatrix(x.data().data(), B, I) * ConstMapMatrix(weight.data().data(), I, O);
  y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data().data(), O);

  return make_result({batch, n_out}, std::move(out), {x, weight, bias}, [B, I, O](Node& self) {
    Node& xn = *self.parents[0];
    Node& wn = *self.parents[1];
    Node& bn = *self.parents[2];
    const ConstMapMatrix dy(self.grad.data(), B, O);
    if (xn.requires_grad) MapMatrix(xn.grad_buffer().data(), B, I).noalias() += dy * ConstMapMatrix(wn.data.data(), I, O).transpose();
    if (wn.requires_grad) MapMatrix(wn.grad_buffer().data(), I, O).noalias() += ConstMapMatrix(xn.data.data(), B, I).transpose() * dy;
    if (bn.requires_grad) {
      auto& gb = bn.grad_buffer();
      for (std::size_t r = 0; r < static_cast<std::size_t>(B); ++r)
        for (std::size_t o = 0; o < gb.size(); ++o) gb[o] += self.grad[r * gb.size() + o];
    }
  });
}

Tensor dense(const Tensor& x, const Tensor& weight, const Tensor& bias, Activation f) {
  return activate(linear(x, weight, bias), f);
}

Tensor flatten(const Tensor& x) {
  if (x.rank() < 1) fail(ErrorCode::ShapeMismatch, "flatten of a rank-0 tensor");
  return x.reshape({x.dim(0), x.numel() / x.dim(0)});
}

Tensor concat(const Tensor& a, const Tensor& b) {
  expect_rank(a, 2, "concat");
  expect_rank(b, 2, "concat");
  if (a.dim(0) != b.dim(0)) fail(ErrorCode::ShapeMismatch, "concat: batch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  const std::size_t batch = a.dim(0), fa = a.dim(1), fb = b.dim(1);
  std::vector<double> out(batch * (fa + fb));
  for (std::size_t r = 0; r < batch; ++r) {
    std::copy_n(a.data().data() + r * fa, fa, out.data() + r * (fa + fb));
    std::copy_n(b.data().data() + r * fb, fb, out.data() + r * (fa + fb) + fa);
  }
  return make_result({batch, fa + fb}, std::move(out), {a, b}, [batch, fa, fb](Node& self) {
    Node& an = *self.parents[0];
    Node& bn = *self.parents[1];
    for (std::size_t r = 0; r < batch; ++r) {
      const double* g = self.grad.data() + r * (fa + fb);
      if (an.requires_grad) {
        double* ga = an.grad_buffer().data() + r * fa;
        for (std::size_t i = 0; i < fa; ++i) ga[i] += g[i];
      }
      if (bn.requires_grad) {
        double* gb = bn.grad_buffer().data() + r * fb;
        for (std::size_t i = 0; i < fb; ++i) gb[i] += g[fa + i];
      }
    }
  });
}

Tensor cross_entropy_loss(const Tensor& probs, std::span<const int> labels) {
  expect_rank(probs, 2, "cross_entropy_loss");
  const std::size_t batch = probs.dim(0), j = probs.dim(1);
  check_labels(labels, batch, j, "cross_entropy_loss");
  if (batch == 0) fail(ErrorCode::ShapeMismatch, "cross_entropy_loss on an empty batch");
  const auto p = probs.data();
  double total = 0.0;
  for (std::size_t r = 0; r < batch; ++r) total -= std::log(std::max(p[r * j + labels[r]], kProbabilityFloor));
  std::vector<int> y(labels.begin(), labels.end());
  return make_result({1}, {total / static_cast<double>(batch)}, {probs}, [batch, j, y = std::move(y)](Node& self) {
    Node& pn = *self.parents[0];
    auto& pg = pn.grad_buffer();
    const double g = self.grad[0] / static_cast<double>(batch);
    for (std::size_t r = 0; r < batch; ++r) {
      const std::size_t i = r * j + static_cast<std::size_t>(y[r]);
      if (pn.data[i] > kProbabilityFloor) pg[i] -= g / pn.data[i];
    }
  });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  expect_rank(logits, 2, "softmax_cross_entropy");
  const std::size_t batch = logits.dim(0), j = logits.dim(1);
  check_labels(labels, batch, j, "softmax_cross_entropy");
  if (batch == 0) fail(ErrorCode::ShapeMismatch, "softmax_cross_entropy on an empty batch");
  const auto z = logits.data();
  auto probs = std::make_shared<std::vector<double>>(logits.numel());
  double total = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    const double* row = z.data() + r * j;
    double* p = probs->data() + r * j;
    const double mx = *std::max_element(row, row + j);
    double sum = 0.0;
    for (std::size_t i = 0; i < j; ++i) sum += (p[i] = std::exp(row[i] - mx));
    for (std::size_t i = 0; i < j; ++i) p[i] /= sum;
    total += std::log(sum) - (row[labels[r]] - mx);
  }
  std::vector<int> y(labels.begin(), labels.end());
  return make_result({1}, {total / static_cast<double>(batch)}, {logits}, [batch, j, probs, y = std::move(y)](Node& self) {
    auto& pg = self.parents[0]->grad_buffer();
    const double g = self.grad[0] / static_cast<double>(batch);
    for (std::size_t r = 0; r < batch; ++r) {
      for (std::size_t i = 0; i < j; ++i) {
        const double onehot = static_cast<std::size_t>(y[r]) == i ? 1.0 : 0.0;
        pg[r * j + i] += g * ((*probs)[r * j + i] - onehot);
      }
    }
  });
}

Tensor sum(const Tensor& x) {
  const auto d = x.data();
  double total = 0.0;
  for (double v : d) total += v;
  return make_result({1}, {total}, {x}, [](Node& self) {
    auto& pg = self.parents[0]->grad_buffer();
    for (double& g : pg) g += self.grad[0];
  });
}

Tensor weighted_sum(const Tensor& x, std::span<const double> weights) {
  if (weights.size() != x.numel()) fail(ErrorCode::ShapeMismatch, "weighted_sum: weight count differs from tensor size");
  const auto d = x.data();
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) total += d[i] * weights[i];
  std::vector<double> w(weights.begin(), weights.end());
  return make_result({1}, {total}, {x}, [w = std::move(w)](Node& self) {
    auto& pg = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += self.grad[0] * w[i];
  });
}

}  // namespace temviro::nn
