#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <iterator>

#include "temviro/checkpoint.hpp"
#include "test_support.hpp"

using namespace temviro;

namespace {

std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<char>& b) {
  std::ofstream(p, std::ios::binary).write(b.data(), static_cast<std::streamsize>(b.size()));
}

// A model whose weights and running statistics differ from their initial values.
Model perturbed_model(std::uint64_t seed) {
  Model m(default_arch_config(), seed);
  Xoshiro256 rng(seed + 100);
  for (auto& p : m.parameters())
    for (auto& v : p.value.data()) v += rng.uniform(-0.01, 0.01);
  for (auto& b : m.batchnorm_buffers()) {
    for (auto& v : b.state.running_mean) v = rng.uniform(-1.0, 1.0);
    for (auto& v : b.state.running_var) v = rng.uniform(0.5, 2.0);
  }
  return m;
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitwise) {
  testing_support::TempDir dir("ckpt");
  Model m = perturbed_model(3);
  save_checkpoint(m, dir / "a.tvck", {{"epoch", "7"}, {"classes", "x;y"}});
  auto loaded = load_checkpoint(dir / "a.tvck");
  EXPECT_EQ(loaded.meta.at("epoch"), "7");
  EXPECT_EQ(loaded.meta.at("classes"), "x;y");
  EXPECT_EQ(loaded.model.config(), m.config());
  ASSERT_EQ(loaded.model.parameters().size(), m.parameters().size());
  for (std::size_t i = 0; i < m.parameters().size(); ++i)
    EXPECT_TRUE(std::ranges::equal(loaded.model.parameters()[i].value.data(), m.parameters()[i].value.data()));
  for (std::size_t i = 0; i < m.batchnorm_buffers().size(); ++i) {
    EXPECT_EQ(loaded.model.batchnorm_buffers()[i].state.running_mean, m.batchnorm_buffers()[i].state.running_mean);
    EXPECT_EQ(loaded.model.batchnorm_buffers()[i].state.running_var, m.batchnorm_buffers()[i].state.running_var);
  }

  save_checkpoint(loaded.model, dir / "b.tvck", loaded.meta);
  EXPECT_EQ(read_bytes(dir / "a.tvck"), read_bytes(dir / "b.tvck"));

  Xoshiro256 rng(1);
  std::vector<double> v(2 * 128 * 128);
  for (auto& x : v) x = rng.uniform();
  auto x1 = nn::Tensor::from({1, 1, 128, 128}, {v.begin(), v.begin() + 128 * 128});
  auto x2 = nn::Tensor::from({1, 1, 128, 128}, {v.begin() + 128 * 128, v.end()});
  auto pa = m.forward(x1, x2, nn::Mode::infer, nullptr);
  auto pb = loaded.model.forward(x1, x2, nn::Mode::infer, nullptr);
  EXPECT_TRUE(std::ranges::equal(pa.data(), pb.data()));
}

TEST(Checkpoint, BranchOnlyModel) {
  testing_support::TempDir dir("ckpt");
  auto cfg = default_arch_config();
  cfg.mode = FusionMode::branch2_only;
  Model m(cfg, 4);
  save_checkpoint(m, dir / "b2.tvck");
  EXPECT_EQ(load_checkpoint(dir / "b2.tvck").model.parameter_count(), m.parameter_count());
}

TEST(Checkpoint, RejectsCorruption) {
  testing_support::TempDir dir("ckpt");
  save_checkpoint(Model(default_arch_config(), 1), dir / "ok.tvck");
  const auto good = read_bytes(dir / "ok.tvck");

  auto bytes = good;
  bytes[0] = 'X';
  write_bytes(dir / "magic.tvck", bytes);
  EXPECT_TEMVIRO_ERROR(load_checkpoint(dir / "magic.tvck"), ErrorCode::CorruptCheckpoint);

  bytes = good;
  bytes[4] = 9;
  write_bytes(dir / "version.tvck", bytes);
  EXPECT_TEMVIRO_ERROR(load_checkpoint(dir / "version.tvck"), ErrorCode::VersionMismatch);

  bytes = good;
  bytes.resize(bytes.size() - 5);
  write_bytes(dir / "short.tvck", bytes);
  EXPECT_TEMVIRO_ERROR(load_checkpoint(dir / "short.tvck"), ErrorCode::CorruptCheckpoint);

  bytes = good;
  bytes.push_back(0);
  write_bytes(dir / "long.tvck", bytes);
  EXPECT_TEMVIRO_ERROR(load_checkpoint(dir / "long.tvck"), ErrorCode::CorruptCheckpoint);

  bytes = {good.begin(), good.begin() + 10};
  write_bytes(dir / "header.tvck", bytes);
  EXPECT_TEMVIRO_ERROR(load_checkpoint(dir / "header.tvck"), ErrorCode::CorruptCheckpoint);

  EXPECT_TEMVIRO_ERROR(load_checkpoint(dir / "absent.tvck"), ErrorCode::Io);
}

TEST(Checkpoint, RejectsArchitectureMismatch) {
  testing_support::TempDir dir("ckpt");
  save_checkpoint(Model(default_arch_config(), 1), dir / "ok.tvck");
  auto other = default_arch_config();
  other.mode = FusionMode::branch1_only;
  EXPECT_TEMVIRO_ERROR(load_checkpoint(dir / "ok.tvck", other), ErrorCode::VersionMismatch);
  EXPECT_NO_THROW(load_checkpoint(dir / "ok.tvck", default_arch_config()));
}

TEST(Checkpoint, RejectsBadMeta) {
  testing_support::TempDir dir("ckpt");
  EXPECT_TEMVIRO_ERROR(save_checkpoint(Model(default_arch_config(), 1), dir / "m.tvck", {{"a=b", "1"}}),
                       ErrorCode::InvalidArgument);
}
