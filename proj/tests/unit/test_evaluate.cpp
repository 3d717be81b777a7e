#include <gtest/gtest.h>

#include <cmath>

#include <json.hpp>

#include "test_util.hpp"
#include "vortex/error.hpp"
#include "vortex/evaluate.hpp"
#include "vortex/metrics.hpp"

using namespace vortex;

namespace {

std::vector<ScanRecord> test_scans() {
  const DatasetConfig cfg = test::tiny_dataset();
  return {generate_scan(cfg, 0, ScanRole::kTest), generate_scan(cfg, 1, ScanRole::kTest)};
}

}  // namespace

TEST(Perturbations, StandardSet) {
  const auto specs = standard_perturbations(3);
  ASSERT_EQ(specs.size(), 5u);
  EXPECT_EQ(specs[0].name, "None");
  EXPECT_EQ(specs[2].name, "HN");
  EXPECT_EQ(specs[2].level, 0.4);
  EXPECT_EQ(specs[3].kind, PerturbationKind::kMotion);
  EXPECT_EQ(specs[3].level, 0.2);
  EXPECT_THROW((PerturbationSpec{"x", PerturbationKind::kNone, 0.1, 0}.validate()), InvalidArgument);
}

TEST(Perturbations, RepeatableAndMasked) {
  const auto scans = test_scans();
  for (const auto& spec : standard_perturbations(9)) {
    const auto a = perturb_test_scan(scans[0], spec), b = perturb_test_scan(scans[0], spec);
    EXPECT_EQ(a, b) << spec.name;
    for (std::size_t s = 0; s < a.size(); ++s)
      EXPECT_EQ(apply_mask(scans[0].mask, a[s]), a[s]) << spec.name;
  }
  const auto clean = perturb_test_scan(scans[0], standard_perturbations(9)[0]);
  EXPECT_EQ(clean[0], apply_mask(scans[0].mask, scans[0].kspace[0]));
}

TEST(Aggregate, SampleStdAndInfiniteExclusion) {
  MetricsRecord r;
  r.per_scan = {{0, 10.0, 0.5}, {1, 14.0, 0.7}, {2, kCpsnrInfinite, 0.9}};
  r.aggregate();
  EXPECT_EQ(r.cpsnr_excluded, 1u);
  EXPECT_DOUBLE_EQ(r.cpsnr_mean, 12.0);
  EXPECT_DOUBLE_EQ(r.cpsnr_std, std::sqrt(8.0));
  EXPECT_DOUBLE_EQ(r.ssim_mean, 0.7);
  EXPECT_NEAR(r.ssim_std, 0.2, 1e-15);
}

TEST(Evaluate, IdentityModelMatchesDirectScores) {
  const auto scans = test_scans();
  const IdentityReconstructor id;
  const auto specs = standard_perturbations(2);
  const EvaluationTable t = evaluate_model(id, {}, scans, specs, 1, "zf");
  ASSERT_EQ(t.rows.size(), specs.size());
  const ScanRecord& scan = scans[1];
  const auto ys = perturb_test_scan(scan, specs[4]);
  ComplexTensor pred({2, 16, 16}), ref({2, 16, 16});
  for (std::size_t s = 0; s < 2; ++s) {
    const ComplexTensor x = zero_filled_recon(scan.op(), ys[s]);
    for (std::size_t i = 0; i < 256; ++i) {
      pred[s * 256 + i] = x[i];
      ref[s * 256 + i] = scan.images[s][i];
    }
  }
  EXPECT_EQ(t.rows[4].per_scan[1].scan_id, 1u);
  EXPECT_DOUBLE_EQ(t.rows[4].per_scan[1].cpsnr_db, cpsnr(pred, ref));
  EXPECT_DOUBLE_EQ(t.rows[4].per_scan[1].ssim, ssim(magnitude(pred), magnitude(ref), 2, 16, 16));
  // Heavier corruption should not look better for a fixed model.
  EXPECT_LT(t.rows[2].cpsnr_mean, t.rows[1].cpsnr_mean);
}

TEST(Evaluate, WorkerCountDoesNotChangeResults) {
  const auto scans = test_scans();
  const UNet net(ModelConfig{});
  const ModelParameters p = net.initialize(1);
  const auto specs = standard_perturbations(4);
  const auto a = tables_to_json({evaluate_model(net, p, scans, specs, 1)});
  const auto b = tables_to_json({evaluate_model(net, p, scans, specs, 3)});
  EXPECT_EQ(a, b);
}

TEST(Evaluate, CheckpointMustMatchConfig) {
  const auto scans = test_scans();
  const UNet net(ModelConfig{});
  const Checkpoint ck{net.config(), net.layout(), net.initialize(1), {}};
  EXPECT_NO_THROW(evaluate_checkpoint(ck, ModelConfig{}, scans, standard_perturbations(1)));
  EXPECT_THROW(evaluate_checkpoint(ck, ModelConfig{2, 4, {1, 2}, 0.01}, scans, standard_perturbations(1)),
               InvalidArgument);
}

TEST(Evaluate, RejectsUnsupervisedScans) {
  const DatasetConfig cfg = test::tiny_dataset();
  const IdentityReconstructor id;
  EXPECT_THROW(evaluate_model(id, {}, {generate_scan(cfg, 0, ScanRole::kTrainUnsupervised)},
                              standard_perturbations(1)),
               InvalidArgument);
  EXPECT_THROW(evaluate_model(id, {}, {}, standard_perturbations(1)), InvalidArgument);
}

TEST(Report, JsonAndTable) {
  EvaluationTable t;
  t.model = "VORTEX(motion)";
  MetricsRecord r;
  r.perturbation = "HM";
  r.per_scan = {{0, kCpsnrInfinite, 1.0}};
  r.aggregate();
  t.rows.push_back(r);
  const auto j = nlohmann::json::parse(tables_to_json({t}));
  EXPECT_EQ(j[0]["rows"][0]["cpsnr_mean"], "inf");
  EXPECT_EQ(j[0]["rows"][0]["per_scan"][0]["cpsnr_db"], "inf");
  const std::string table = format_table({t});
  EXPECT_NE(table.find("VORTEX(motion)"), std::string::npos);
  EXPECT_NE(table.find("HM"), std::string::npos);
  EXPECT_NE(table.find("SSIM"), std::string::npos);
}

TEST(Evaluate, IdentityModelOnFullySampledData) {
  // Maps are stored as float32, so their RSS is 1 only to about 1e-7 and the
  // score is a large finite number rather than the infinite sentinel.
  std::vector<ScanRecord> scans = test_scans();
  for (auto& s : scans) s.mask = UndersamplingMask::full(16, 16);
  const IdentityReconstructor id;
  const auto t = evaluate_model(id, {}, scans, {standard_perturbations(1)[0]});
  for (const auto& m : t.rows[0].per_scan) {
    EXPECT_GT(m.cpsnr_db, 100.0);
    EXPECT_NEAR(m.ssim, 1.0, 1e-9);
  }
}
