#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vortex/forward.hpp"

namespace vortex {

enum class ScanRole { kTrainSupervised, kTrainUnsupervised, kValidation, kTest };

std::string_view to_string(ScanRole role);
// Throws CorruptDataset on an unknown name.
ScanRole parse_scan_role(std::string_view name);

struct Geometry {
  std::size_t coils = 4;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t slices = 8;
  bool operator==(const Geometry&) const = default;
};

struct SplitCounts {
  std::size_t train_supervised = 4;
  std::size_t train_unsupervised = 20;
  std::size_t validation = 2;
  std::size_t test = 3;
  std::size_t total() const { return train_supervised + train_unsupervised + validation + test; }
  bool operator==(const SplitCounts&) const = default;
};

struct DatasetConfig {
  std::uint64_t seed = 0;
  Geometry geometry;
  double acceleration = 8.0;
  CalibrationSize calibration{6, 6};
  SplitCounts splits;
  // H and W are padded up to a multiple of this (2^depth of the model).
  std::size_t pad_multiple = 4;
  void validate() const;
  // Geometry after padding.
  Geometry padded() const;
};

// One synthetic scan. Supervised, validation and test scans carry fully
// sampled k-space and ground truth; unsupervised scans carry only k-space
// masked with the scan's own mask.
struct ScanRecord {
  std::uint64_t scan_id = 0;
  ScanRole role = ScanRole::kTest;
  SensitivityMaps maps;
  UndersamplingMask mask;
  std::vector<KSpaceTensor> kspace;   // per slice, C x H x W
  std::vector<ComplexTensor> images;  // per slice, H x W; empty when unsupervised
  std::vector<std::uint8_t> support;  // H x W, union over slices

  bool fully_sampled() const { return !images.empty(); }
  std::size_t slices() const { return kspace.size(); }
  ForwardOperator op() const { return ForwardOperator(maps, mask); }
  bool operator==(const ScanRecord&) const = default;
};

// Generates one scan in double precision. Images and maps are rounded to
// float32 first so that the stored inputs are exact; k-space is computed
// from them by the forward model.
ScanRecord generate_scan(const DatasetConfig& cfg, std::uint64_t scan_id, ScanRole role);

// Copy with every tensor rounded to float32, which is what a VTXD blob holds.
ScanRecord quantize_scan(const ScanRecord& scan);

// VTXD blob encoding (see docs/dataset_format.md).
std::vector<std::uint8_t> encode_scan(const ScanRecord& scan);
ScanRecord decode_scan(const std::vector<std::uint8_t>& bytes, const std::string& what = "scan");

struct ManifestEntry {
  std::uint64_t scan_id = 0;
  ScanRole role = ScanRole::kTest;
  std::string file;
  std::uint64_t bytes = 0;
  std::uint32_t crc32 = 0;
  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::uint32_t version = 1;
  std::uint64_t dataset_seed = 0;
  Geometry geometry;
  double acceleration = 8.0;
  CalibrationSize calibration;
  std::vector<ManifestEntry> scans;

  std::vector<std::uint64_t> ids(ScanRole role) const;
  std::string to_json() const;
  // Validates schema, version, roles and uniqueness of scan ids.
  static DatasetManifest from_json(std::string_view text);
};

// Role assignment for scan ids 0..N-1: a keyed shuffle split by counts.
std::vector<ScanRole> assign_roles(const DatasetConfig& cfg);

// Generates every scan (in parallel), writes one blob per scan and
// manifest.json into `dir`.
DatasetManifest build_dataset(const DatasetConfig& cfg, const std::filesystem::path& dir,
                              int workers = 1);

// Read-only view of a dataset directory. Scans are loaded on demand; load()
// is safe to call concurrently.
class Dataset {
 public:
  static Dataset open(const std::filesystem::path& dir);

  const DatasetManifest& manifest() const { return manifest_; }
  const std::filesystem::path& directory() const { return dir_; }
  bool contains(std::uint64_t scan_id) const;
  ScanRecord load(std::uint64_t scan_id) const;
  std::vector<ScanRecord> load_role(ScanRole role) const;

 private:
  std::filesystem::path dir_;
  DatasetManifest manifest_;
};

inline Dataset read_dataset(const std::filesystem::path& dir) { return Dataset::open(dir); }

}  // namespace vortex
