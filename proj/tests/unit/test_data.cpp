#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "test_util.hpp"
#include "vortex/error.hpp"
#include "vortex/fft.hpp"

using namespace vortex;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace

TEST(Phantom, PropertiesOverManySeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    KeyedRng rng(seed, 17, 0);
    const Phantom ph = generate_phantom(32, 24, rng);
    ASSERT_EQ(ph.image.dim(0), 32u);
    ASSERT_EQ(ph.image.dim(1), 24u);
    double peak = 0.0;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < ph.image.size(); ++i) {
      const double m = std::abs(ph.image[i]);
      ASSERT_LE(m, 1.0);
      peak = std::max(peak, m);
      if (m > 0.0) ASSERT_TRUE(ph.support[i]) << "seed " << seed;
      inside += ph.support[i];
    }
    EXPECT_GT(peak, 0.3);
    EXPECT_LT(inside, ph.image.size());
  }
  KeyedRng rng(1);
  EXPECT_THROW(generate_phantom(8, 32, rng), InvalidArgument);
}

TEST(Phantom, MapsHaveUnitRootSumOfSquares) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    KeyedRng rng(seed);
    const SensitivityMaps maps = synthesize_maps(4, 16, 20, rng);
    for (double r : maps.rss_squared()) ASSERT_NEAR(r, 1.0, 1e-12);
  }
}

TEST(Scan, ForwardConsistencyInMemory) {
  const DatasetConfig cfg = test::tiny_dataset();
  const ScanRecord scan = generate_scan(cfg, 3, ScanRole::kTrainSupervised);
  ASSERT_TRUE(scan.fully_sampled());
  const ForwardOperator full(scan.maps, UndersamplingMask::full(16, 16));
  for (std::size_t s = 0; s < scan.slices(); ++s) {
    const KSpaceTensor y = forward_apply(full, scan.images[s]);
    EXPECT_LT(test::max_abs_diff(y, scan.kspace[s]), 1e-10);
  }
  EXPECT_EQ(scan.mask, make_poisson_disc_mask(16, 16, cfg.acceleration, cfg.calibration,
                                              scan_mask_seed(cfg.seed, 3)));
}

TEST(Scan, UnsupervisedCarriesOnlyMaskedKspace) {
  const ScanRecord scan = generate_scan(test::tiny_dataset(), 4, ScanRole::kTrainUnsupervised);
  EXPECT_FALSE(scan.fully_sampled());
  for (const auto& y : scan.kspace) EXPECT_EQ(apply_mask(scan.mask, y), y);
}

TEST(Scan, BlobRoundTripIsTheQuantizedScan) {
  for (ScanRole role : {ScanRole::kTrainSupervised, ScanRole::kTrainUnsupervised}) {
    const ScanRecord scan = generate_scan(test::tiny_dataset(), 2, role);
    const ScanRecord back = decode_scan(encode_scan(scan));
    EXPECT_EQ(back, quantize_scan(scan));
    EXPECT_EQ(encode_scan(back), encode_scan(scan));
  }
}

TEST(Scan, BlobCorruption) {
  const auto bytes = encode_scan(generate_scan(test::tiny_dataset(), 2, ScanRole::kTest));
  auto truncated = bytes;
  truncated.resize(bytes.size() - 100);
  EXPECT_THROW(decode_scan(truncated), CorruptDataset);
  auto flipped = bytes;
  flipped[200] ^= 1;
  EXPECT_THROW(decode_scan(flipped), CorruptDataset);
  EXPECT_THROW(decode_scan(std::vector<std::uint8_t>(3)), CorruptDataset);
}

TEST(Roles, KeyedPartitionWithRequestedCounts) {
  const DatasetConfig cfg = test::tiny_dataset();
  const auto roles = assign_roles(cfg);
  ASSERT_EQ(roles.size(), cfg.splits.total());
  std::map<ScanRole, std::size_t> count;
  for (ScanRole r : roles) ++count[r];
  EXPECT_EQ(count[ScanRole::kTrainSupervised], 2u);
  EXPECT_EQ(count[ScanRole::kTrainUnsupervised], 3u);
  EXPECT_EQ(count[ScanRole::kValidation], 1u);
  EXPECT_EQ(count[ScanRole::kTest], 2u);
  EXPECT_EQ(assign_roles(cfg), roles);
  for (auto name : {"train-supervised", "train-unsupervised", "val", "test"})
    EXPECT_EQ(to_string(parse_scan_role(name)), name);
  EXPECT_THROW(parse_scan_role("holdout"), CorruptDataset);
}

TEST(Build, ByteIdenticalAcrossRunsAndWorkers) {
  test::TempDir a, b;
  const DatasetConfig cfg = test::tiny_dataset();
  const DatasetManifest ma = build_dataset(cfg, a.path(), 1);
  const DatasetManifest mb = build_dataset(cfg, b.path(), 3);
  EXPECT_EQ(slurp(a.path() / "manifest.json"), slurp(b.path() / "manifest.json"));
  for (const auto& e : ma.scans) EXPECT_EQ(slurp(a.path() / e.file), slurp(b.path() / e.file));
  EXPECT_EQ(ma.scans, mb.scans);
}

TEST(Build, ManifestPartitionsIds) {
  test::TempDir dir;
  const DatasetConfig cfg = test::tiny_dataset();
  build_dataset(cfg, dir.path());
  const Dataset ds = Dataset::open(dir.path());
  std::set<std::uint64_t> all;
  std::size_t listed = 0;
  for (ScanRole r : {ScanRole::kTrainSupervised, ScanRole::kTrainUnsupervised, ScanRole::kValidation,
                     ScanRole::kTest}) {
    for (auto id : ds.manifest().ids(r)) all.insert(id);
    listed += ds.manifest().ids(r).size();
  }
  EXPECT_EQ(all.size(), listed);
  EXPECT_EQ(all.size(), cfg.splits.total());
  for (const ScanRecord& s : ds.load_role(ScanRole::kTrainUnsupervised)) {
    EXPECT_FALSE(s.fully_sampled());
    EXPECT_EQ(s.role, ScanRole::kTrainUnsupervised);
  }
  for (const ScanRecord& s : ds.load_role(ScanRole::kTest)) {
    EXPECT_TRUE(s.fully_sampled());
    EXPECT_EQ(s, quantize_scan(generate_scan(cfg, s.scan_id, ScanRole::kTest)));
  }
  EXPECT_FALSE(ds.contains(999));
  EXPECT_THROW(ds.load(999), InvalidArgument);
}

TEST(Build, StoredScansStayForwardConsistent) {
  test::TempDir dir;
  build_dataset(test::tiny_dataset(), dir.path());
  const Dataset ds = Dataset::open(dir.path());
  for (const ScanRecord& s : ds.load_role(ScanRole::kTest)) {
    const ForwardOperator full(s.maps, UndersamplingMask::full(16, 16));
    for (std::size_t k = 0; k < s.slices(); ++k) {
      const KSpaceTensor y = forward_apply(full, s.images[k]);
      EXPECT_LT(test::max_abs_diff(y, s.kspace[k]), 1e-6);
    }
  }
}

TEST(Build, DetectsDamage) {
  test::TempDir dir;
  build_dataset(test::tiny_dataset(), dir.path());
  const Dataset ds = Dataset::open(dir.path());
  const auto& entry = ds.manifest().scans[0];
  const std::string blob = slurp(dir.path() / entry.file);
  std::string bad = blob;
  bad[bad.size() / 2] ^= 4;
  spit(dir.path() / entry.file, bad);
  EXPECT_THROW(ds.load(entry.scan_id), CorruptDataset);
  spit(dir.path() / entry.file, blob.substr(0, blob.size() - 1));
  EXPECT_THROW(ds.load(entry.scan_id), CorruptDataset);
  std::filesystem::remove(dir.path() / entry.file);
  EXPECT_THROW(ds.load(entry.scan_id), IoError);
}

TEST(Manifest, Validation) {
  test::TempDir dir;
  build_dataset(test::tiny_dataset(), dir.path());
  const std::string text = slurp(dir.path() / "manifest.json");
  const DatasetManifest m = DatasetManifest::from_json(text);
  EXPECT_EQ(DatasetManifest::from_json(m.to_json()).scans, m.scans);

  auto replaced = [&](const std::string& from, const std::string& to) {
    std::string t = text;
    const auto pos = t.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return t.replace(pos, from.size(), to);
  };
  EXPECT_THROW(DatasetManifest::from_json(replaced("\"version\": 1", "\"version\": 2")), CorruptDataset);
  EXPECT_THROW(DatasetManifest::from_json(replaced("\"role\": \"test\"", "\"role\": \"holdout\"")),
               CorruptDataset);
  EXPECT_THROW(DatasetManifest::from_json(replaced("scan_0000.vtxd", "../scan_0000.vtxd")),
               CorruptDataset);
  EXPECT_THROW(DatasetManifest::from_json("{"), CorruptDataset);
  EXPECT_THROW(Dataset::open(dir.path() / "nowhere"), IoError);
}

TEST(Config, Validation) {
  DatasetConfig cfg = test::tiny_dataset();
  cfg.acceleration = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = test::tiny_dataset();
  cfg.geometry.height = 8;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = test::tiny_dataset();
  cfg.geometry.height = 18;
  EXPECT_EQ(cfg.padded().height, 20u);
}
