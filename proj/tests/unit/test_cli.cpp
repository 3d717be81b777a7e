#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(VORTEX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    config_ = dir_.path() / "exp.json";
    std::ofstream(config_) << R"({
      "seed": 3,
      "output_dir": ")" << (dir_.path() / "run").string() << R"(",
      "data": {"dir": ")" << (dir_.path() / "data").string() << R"(",
               "coils": 2, "height": 16, "width": 16, "slices": 2, "acceleration": 4,
               "calibration": [4, 4],
               "splits": {"train_supervised": 1, "train_unsupervised": 2, "val": 1, "test": 1}},
      "model": {"depth": 1, "base_channels": 2, "latent_taps": [1]},
      "train": {"mode": "vortex", "epochs": 1, "batch_size": 2,
                "transforms": [{"kind": "motion", "range": [0.2, 0.5]}]}
    })";
  }
  std::string cfg() const { return "--config " + config_.string(); }

  vortex::test::TempDir dir_;
  fs::path config_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("bogus"), 2);
  EXPECT_EQ(run("train"), 2);
  EXPECT_EQ(run("--version"), 0);
}

TEST_F(Cli, ConfigErrors) {
  EXPECT_EQ(run("train --config " + (dir_.path() / "missing.json").string()), 4);
  std::ofstream(dir_.path() / "bad.json") << R"({"train": {"batch_size": 3}})";
  EXPECT_EQ(run("train --config " + (dir_.path() / "bad.json").string()), 3);
  std::ofstream(dir_.path() / "neg.json") << R"({"train": {"epochs": -1}})";
  EXPECT_EQ(run("train --config " + (dir_.path() / "neg.json").string()), 3);
}

TEST_F(Cli, DryRunWritesNothing) {
  EXPECT_EQ(run("generate-data --dry-run " + cfg()), 0);
  EXPECT_EQ(run("train --dry-run " + cfg()), 0);
  EXPECT_FALSE(fs::exists(dir_.path() / "data"));
  EXPECT_FALSE(fs::exists(dir_.path() / "run"));
}

TEST_F(Cli, MissingDatasetIsAnIoError) {
  EXPECT_EQ(run("train " + cfg()), 4);
  EXPECT_EQ(run("augment-preview --scan-id 0 " + cfg()), 4);
}

TEST_F(Cli, EndToEnd) {
  ASSERT_EQ(run("generate-data " + cfg()), 0);
  EXPECT_TRUE(fs::exists(dir_.path() / "data" / "manifest.json"));
  ASSERT_EQ(run("train " + cfg()), 0);
  const fs::path r = dir_.path() / "run";
  for (const char* f : {"metrics.jsonl", "best.ckpt", "last.ckpt", "results.json", "results.txt",
                        "config.json"})
    EXPECT_TRUE(fs::exists(r / f)) << f;
  EXPECT_EQ(run("evaluate " + cfg()), 0);
  EXPECT_EQ(run("report " + r.string() + " --out " + (dir_.path() / "rep").string()), 0);
  EXPECT_TRUE(fs::exists(dir_.path() / "rep" / "report.txt"));
  EXPECT_EQ(run("evaluate " + cfg() + " --checkpoint " + (r / "nope.ckpt").string()), 4);
}

TEST_F(Cli, AugmentPreview) {
  ASSERT_EQ(run("generate-data " + cfg()), 0);
  const fs::path a = dir_.path() / "pa", b = dir_.path() / "pb", c = dir_.path() / "pc";
  ASSERT_EQ(run("augment-preview --scan-id 0 --spec none --out " + a.string() + " " + cfg()), 0);
  EXPECT_EQ(slurp(a / "clean.pgm"), slurp(a / "augmented.pgm"));
  EXPECT_EQ(slurp(a / "clean.png"), slurp(a / "augmented.png"));
  ASSERT_EQ(run("augment-preview --scan-id 0 --spec motion:0.5 --out " + b.string() + " " + cfg()), 0);
  ASSERT_EQ(run("augment-preview --scan-id 0 --spec motion:0.5 --out " + c.string() + " " + cfg()), 0);
  EXPECT_NE(slurp(b / "clean.pgm"), slurp(b / "augmented.pgm"));
  EXPECT_EQ(slurp(b / "difference.png"), slurp(c / "difference.png"));
  const std::string diff = slurp(b / "difference.pgm");
  bool nonzero = false;
  for (std::size_t i = diff.size() - 256; i < diff.size(); ++i) nonzero |= diff[i] != 0;
  EXPECT_TRUE(nonzero);
  EXPECT_EQ(run("augment-preview --scan-id 999 " + cfg()), 3);
  EXPECT_EQ(run("augment-preview --scan-id 0 --spec blur:1 " + cfg()), 3);
}
