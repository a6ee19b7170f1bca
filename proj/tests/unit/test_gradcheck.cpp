#include <gtest/gtest.h>

#include <set>

#include "temviro/gradcheck.hpp"
#include "temviro/ops.hpp"
#include "test_support.hpp"

using namespace temviro;
using namespace temviro::nn;

TEST(GradCheck, EveryLayerPassesTwoSeeds) {
  const auto report = run_standard_gradcheck(1, 2);
  for (const auto& r : report.worst_by_name()) {
    EXPECT_TRUE(r.passed) << r.name << " max rel error " << r.max_rel_error;
    EXPECT_GT(r.checked, 0u) << r.name;
  }
  EXPECT_TRUE(report.passed());
}

TEST(GradCheck, CoversEveryLayerType) {
  std::set<std::string> names;
  for (const auto& c : layer_cases(7)) names.insert(c.name);
  for (const char* want : {"conv2d", "dense", "sigmoid", "relu", "softmax", "maxpool2d", "dropout"}) {
    bool found = false;
    for (const auto& n : names) found = found || n.find(want) != std::string::npos;
    EXPECT_TRUE(found) << want;
  }
  EXPECT_GE(names.size(), 12u);
}

TEST(GradCheck, DetectsWrongGradient) {
  // A square whose backward claims d/dx = x instead of 2x.
  auto x = Tensor::from({3}, {0.3, -0.7, 1.1}, true);
  GradCheckCase bad{"bad_square", {x}, [](const std::vector<Tensor>& in) {
                      const auto& a = in[0];
                      std::vector<double> out(a.data().begin(), a.data().end());
                      for (auto& v : out) v *= v;
                      auto y = make_result(a.shape(), std::move(out), {a}, [](Node& n) {
                        auto& px = *n.parents[0];
                        auto& g = px.grad_buffer();
                        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * px.data[i];
                      });
                      return sum(y);
                    }};
  const auto r = check_gradient(bad);
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.max_rel_error, 0.5, 1e-6);
}
