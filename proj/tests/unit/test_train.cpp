#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include <json.hpp>

#include "test_util.hpp"
#include "vortex/error.hpp"
#include "vortex/train.hpp"

using namespace vortex;

namespace {

TrainData tiny_data() {
  const DatasetConfig cfg = test::tiny_dataset();
  TrainData d;
  for (std::uint64_t id : {0, 1})
    d.supervised.push_back(quantize_scan(generate_scan(cfg, id, ScanRole::kTrainSupervised)));
  for (std::uint64_t id : {2, 3, 4})
    d.unsupervised.push_back(quantize_scan(generate_scan(cfg, id, ScanRole::kTrainUnsupervised)));
  d.validation.push_back(quantize_scan(generate_scan(cfg, 5, ScanRole::kValidation)));
  return d;
}

TrainConfig tiny_config(TrainMode mode) {
  TrainConfig c;
  c.mode = mode;
  c.epochs = 3;
  c.batch_size = 4;
  c.seed = 11;
  c.model = ModelConfig{1, 2, {1}, 0.01};
  c.adam.learning_rate = 1e-2;
  c.transforms = {{TransformKind::kMotion, 0.2, 0.5, 1.0,
                   {CurriculumKind::kExponential, 2.0, 5.0, 0.0, 0.0}}};
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Steps, Formula) {
  EXPECT_EQ(steps_per_epoch(32, 160, 8), 40u);
  EXPECT_EQ(steps_per_epoch(32, 0, 8), 8u);
  EXPECT_EQ(steps_per_epoch(33, 0, 8), 9u);
  EXPECT_EQ(steps_per_epoch(4, 6, 4), 3u);
  EXPECT_THROW(steps_per_epoch(4, 4, 1), InvalidArgument);
}

TEST(Sampler, ConcatenatedPermutations) {
  const auto order = sampler_order(3, 0, 2, 5, 12);
  ASSERT_EQ(order.size(), 12u);
  for (std::size_t start : {0, 5}) {
    std::set<std::size_t> seen(order.begin() + start, order.begin() + start + 5);
    EXPECT_EQ(seen.size(), 5u);
    EXPECT_EQ(*seen.rbegin(), 4u);
  }
  EXPECT_EQ(sampler_order(3, 0, 2, 5, 12), order);
  EXPECT_NE(sampler_order(3, 0, 3, 5, 12), order);
  EXPECT_NE(sampler_order(3, 1, 2, 5, 12), order);
}

TEST(Train, Deterministic) {
  const TrainData d = tiny_data();
  const TrainConfig c = tiny_config(TrainMode::kVortex);
  const TrainResult a = train(c, d), b = train(c, d);
  EXPECT_EQ(a.final_params.values, b.final_params.values);
  ASSERT_EQ(a.log.size(), 3u);
  for (std::size_t e = 0; e < 3; ++e) EXPECT_EQ(a.log[e].to_json(), b.log[e].to_json());
  EXPECT_EQ(a.steps_per_epoch, 3u);
  TrainConfig w = c;
  w.workers = 3;
  EXPECT_EQ(train(w, d).final_params.values, a.final_params.values);
}

TEST(Train, LambdaZeroVortexIsSupervised) {
  const TrainData d = tiny_data();
  TrainConfig v = tiny_config(TrainMode::kVortex);
  v.loss.lambda = 0.0;
  const TrainResult a = train(v, d);
  const TrainResult b = train(tiny_config(TrainMode::kSupervised), d);
  EXPECT_EQ(a.final_params.values, b.final_params.values);
  for (std::size_t e = 0; e < a.log.size(); ++e)
    EXPECT_EQ(a.log[e].loss.supervised, b.log[e].loss.supervised);
}

TEST(Train, OneSupervisedScanNoUnsupervised) {
  TrainData d = tiny_data();
  d.supervised.resize(1);
  d.unsupervised.clear();
  const TrainResult r = train(tiny_config(TrainMode::kVortex), d);
  EXPECT_EQ(r.steps_per_epoch, 1u);
  for (const auto& e : r.log) EXPECT_EQ(e.loss.consistency, 0.0);
  EXPECT_TRUE(r.final_params.all_finite());
}

TEST(Train, AllModesImproveTheTrainingLoss) {
  const TrainData d = tiny_data();
  for (TrainMode m : {TrainMode::kSupervised, TrainMode::kAugment, TrainMode::kVortex}) {
    TrainConfig c = tiny_config(m);
    c.epochs = 6;
    const TrainResult r = train(c, d);
    EXPECT_LT(r.log.back().loss.supervised, r.log.front().loss.supervised) << to_string(m);
  }
}

TEST(Train, CurriculumIsLogged) {
  const TrainResult r = train(tiny_config(TrainMode::kVortex), tiny_data());
  EXPECT_DOUBLE_EQ(r.log[0].sigma_high.at("motion"), 0.2);
  EXPECT_DOUBLE_EQ(r.log[2].sigma_high.at("motion"), 0.5);
  EXPECT_LT(r.log[1].sigma_high.at("motion"), 0.5);
  const auto j = nlohmann::json::parse(r.log[1].to_json());
  EXPECT_EQ(j.at("epoch"), 2);
  EXPECT_TRUE(j.at("loss").contains("consistency"));
  EXPECT_TRUE(j.at("val").contains("cpsnr"));
}

TEST(Train, ResumeMatchesUninterruptedRun) {
  const TrainData d = tiny_data();
  const TrainConfig c = tiny_config(TrainMode::kVortex);
  test::TempDir full, part;
  const TrainResult a = train(c, d, {full.path(), std::nullopt, 5});
  const TrainResult stopped = train(c, d, {part.path(), 1, 5});
  EXPECT_EQ(stopped.log.size(), 1u);
  const TrainResult b = train(c, d, {part.path(), std::nullopt, 5});
  EXPECT_EQ(a.final_params.values, b.final_params.values);
  EXPECT_EQ(a.best_params.values, b.best_params.values);
  EXPECT_EQ(slurp(full.path() / "metrics.jsonl"), slurp(part.path() / "metrics.jsonl"));
  for (const char* f : {"last.ckpt", "best.ckpt", "checkpoints/epoch_0003.ckpt"})
    EXPECT_EQ(slurp(full.path() / f), slurp(part.path() / f)) << f;
  EXPECT_THROW(train(c, d, {part.path(), std::nullopt, 6}), InvalidArgument);
}

TEST(Train, LatentConsistencyLogsEveryTap) {
  TrainConfig c = tiny_config(TrainMode::kVortex);
  c.model = ModelConfig{2, 2, {1, 2}, 0.01};
  c.loss.consistency = {ConsistencyMode::kLatent, {1, 2}};
  c.epochs = 2;
  const TrainResult r = train(c, tiny_data());
  for (const auto& e : r.log) {
    ASSERT_EQ(e.loss.per_tap.size(), 2u);
    EXPECT_GT(e.loss.per_tap.at(1), 0.0);
    EXPECT_GT(e.loss.per_tap.at(2), 0.0);
  }
  const auto j = nlohmann::json::parse(r.log[0].to_json());
  EXPECT_EQ(j.at("loss").at("per_tap").size(), 2u);
}

TEST(Train, ConfigValidation) {
  TrainConfig c = tiny_config(TrainMode::kVortex);
  c.batch_size = 3;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = tiny_config(TrainMode::kVortex);
  c.loss.consistency = {ConsistencyMode::kLatent, {1}};
  c.transforms.push_back({TransformKind::kRotate, 0.0, 0.0, 0.5});
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = tiny_config(TrainMode::kVortex);
  c.loss.consistency = {ConsistencyMode::kLatent, {2}};
  EXPECT_THROW(c.validate(), InvalidArgument);
  EXPECT_EQ(parse_train_mode("aug"), TrainMode::kAugment);
  EXPECT_THROW(parse_train_mode("semi"), InvalidArgument);
}

TEST(Train, EmptyDatasetIsRejected) {
  TrainData d = tiny_data();
  d.supervised.clear();
  EXPECT_THROW(train(tiny_config(TrainMode::kVortex), d), InvalidArgument);
}
