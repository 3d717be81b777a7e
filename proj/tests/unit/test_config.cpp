#include <gtest/gtest.h>

#include <json.hpp>

#include "test_util.hpp"
#include "vortex/config.hpp"
#include "vortex/error.hpp"

using namespace vortex;

TEST(Config, DefaultsValidateAndRoundTrip) {
  const ExperimentConfig d = default_experiment_config();
  EXPECT_NO_THROW(d.validate());
  const ExperimentConfig back = parse_experiment_config(d.to_json());
  EXPECT_EQ(back.to_json(), d.to_json());
  EXPECT_EQ(back.tag(), d.tag());
}

TEST(Config, ParsesNestedSections) {
  const auto c = parse_experiment_config(R"({
    "seed": 5,
    "data": {"coils": 2, "height": 16, "width": 16, "slices": 2, "acceleration": 4,
             "calibration": [4, 4],
             "splits": {"train_supervised": 1, "train_unsupervised": 2, "val": 1, "test": 1}},
    "model": {"depth": 1, "base_channels": 4, "latent_taps": [1]},
    "train": {"mode": "vortex", "epochs": 3, "lambda": 0.5,
              "consistency": {"mode": "latent", "levels": [1]},
              "transforms": [{"kind": "motion", "range": [0.1, 0.3], "probability": 0.5,
                              "curriculum": {"kind": "linear", "epochs_to_max": 2}}]},
    "eval": {"perturbations": [{"name": "X", "kind": "noise", "level": 0.3}]}
  })");
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.data.seed, 5u);
  EXPECT_EQ(c.train.seed, 5u);
  EXPECT_EQ(c.data.geometry.coils, 2u);
  EXPECT_EQ(c.data.pad_multiple, 2u);
  EXPECT_EQ(c.train.mode, TrainMode::kVortex);
  EXPECT_EQ(c.train.loss.lambda, 0.5);
  EXPECT_EQ(c.train.loss.consistency.mode, ConsistencyMode::kLatent);
  ASSERT_EQ(c.train.transforms.size(), 1u);
  EXPECT_EQ(c.train.transforms[0].difficulty_hi, 0.3);
  EXPECT_EQ(c.train.transforms[0].curriculum.kind, CurriculumKind::kLinear);
  ASSERT_EQ(c.perturbations.size(), 1u);
  EXPECT_EQ(c.perturbations[0].seed, 5u);
}

TEST(Config, UnknownKeysAndWrongTypesNameThePath) {
  try {
    parse_experiment_config(R"({"train": {"foo": 1}})");
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("train.foo"), std::string::npos);
  }
  try {
    parse_experiment_config(R"({"train": {"epochs": "many"}})");
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("train.epochs"), std::string::npos);
  }
  EXPECT_THROW(parse_experiment_config("{"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config(R"({"train": {"epochs": -3}})"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config(R"({"train": {"epochs": 2.5}})"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config(R"({"train": {"mode": "semi"}})"), InvalidArgument);
  EXPECT_THROW(parse_experiment_config(R"({"train": {"transforms": [{"kind": "blur"}]}})"),
               InvalidArgument);
}

TEST(Config, IgnoredFieldsWarn) {
  const auto c = parse_experiment_config(R"({"train": {"mode": "supervised", "lambda": 0.3}})");
  ASSERT_FALSE(c.warnings.empty());
  EXPECT_NE(c.warnings[0].find("lambda"), std::string::npos);
}

TEST(Config, TagIgnoresPlacementButNotSubstance) {
  ExperimentConfig a = default_experiment_config();
  ExperimentConfig b = a;
  b.output_dir = "elsewhere";
  b.train.workers = 4;
  EXPECT_EQ(a.tag(), b.tag());
  b.train.loss.lambda = 0.2;
  EXPECT_NE(a.tag(), b.tag());
  ExperimentConfig c = a;
  c.set_seed(99);
  EXPECT_NE(a.tag(), c.tag());
}

TEST(Config, MissingFileIsAnIoError) {
  EXPECT_THROW(load_experiment_config("/nonexistent/config.json"), IoError);
}
