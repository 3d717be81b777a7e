#include "vortex/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <numeric>
#include <set>

#include <json.hpp>

#include "binary_io.hpp"
#include "vortex/error.hpp"
#include "vortex/parallel.hpp"
#include "vortex/phantom.hpp"
#include "vortex/rng.hpp"

namespace vortex {
namespace {

constexpr std::string_view kMagic = "VTXD";
constexpr std::uint32_t kBlobVersion = 1;
constexpr std::uint32_t kManifestVersion = 1;
constexpr std::uint32_t kHasImages = 1u << 0;
constexpr std::uint32_t kMasked = 1u << 1;

// Stream tags under the dataset seed.
constexpr std::uint64_t kMapsTag = 0x6d617073;     // "maps"
constexpr std::uint64_t kPhantomTag = 0x70686e74;  // "phnt"
constexpr std::uint64_t kRolesTag = 0x726f6c65;    // "role"

std::uint32_t role_code(ScanRole r) { return static_cast<std::uint32_t>(r); }

std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

cdouble to_f32(cdouble z) {
  return {static_cast<float>(z.real()), static_cast<float>(z.imag())};
}

void quantize(ComplexTensor& t) {
  for (cdouble& z : t.storage()) z = to_f32(z);
}

void put_complex(detail::ByteWriter& w, const ComplexTensor& t) {
  for (const cdouble& z : t.storage()) {
    w.f32(static_cast<float>(z.real()));
    w.f32(static_cast<float>(z.imag()));
  }
}

void get_complex(detail::ByteReader& r, ComplexTensor& t) {
  for (cdouble& z : t.storage()) {
    const float re = r.f32();
    const float im = r.f32();
    z = {re, im};
  }
}

// Rows of ceil(W/8) bytes, bit j%8 (LSB first) of byte j/8.
void put_bits(detail::ByteWriter& w, const std::vector<std::uint8_t>& bits, std::size_t h,
              std::size_t width) {
  const std::size_t row_bytes = (width + 7) / 8;
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t b = 0; b < row_bytes; ++b) {
      std::uint8_t byte = 0;
      for (std::size_t k = 0; k < 8; ++k) {
        const std::size_t j = b * 8 + k;
        if (j < width && bits[i * width + j]) byte |= static_cast<std::uint8_t>(1u << k);
      }
      w.u8(byte);
    }
}

std::vector<std::uint8_t> get_bits(detail::ByteReader& r, std::size_t h, std::size_t width) {
  const std::size_t row_bytes = (width + 7) / 8;
  std::vector<std::uint8_t> bits(h * width, 0);
  for (std::size_t i = 0; i < h; ++i) {
    const std::uint8_t* row = r.take(row_bytes);
    for (std::size_t j = 0; j < width; ++j) bits[i * width + j] = (row[j / 8] >> (j % 8)) & 1u;
  }
  return bits;
}

std::string blob_name(std::uint64_t scan_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scan_%04llu.vtxd", static_cast<unsigned long long>(scan_id));
  return buf;
}

}  // namespace

std::string_view to_string(ScanRole role) {
  switch (role) {
    case ScanRole::kTrainSupervised: return "train-supervised";
    case ScanRole::kTrainUnsupervised: return "train-unsupervised";
    case ScanRole::kValidation: return "val";
    case ScanRole::kTest: return "test";
  }
  return "?";
}

ScanRole parse_scan_role(std::string_view name) {
  for (ScanRole r : {ScanRole::kTrainSupervised, ScanRole::kTrainUnsupervised,
                     ScanRole::kValidation, ScanRole::kTest})
    if (to_string(r) == name) return r;
  throw CorruptDataset("unknown scan role '" + std::string(name) + "'");
}

void DatasetConfig::validate() const {
  VORTEX_REQUIRE(geometry.coils >= 1, "dataset: coils must be >= 1");
  VORTEX_REQUIRE(geometry.height >= 16 && geometry.width >= 16, "dataset: H and W must be >= 16");
  VORTEX_REQUIRE(geometry.slices >= 1, "dataset: slices must be >= 1");
  VORTEX_REQUIRE(acceleration > 1.0, "dataset: acceleration must exceed 1");
  VORTEX_REQUIRE(pad_multiple >= 1, "dataset: pad_multiple must be >= 1");
  const Geometry g = padded();
  VORTEX_REQUIRE(calibration.height <= g.height && calibration.width <= g.width,
                 "dataset: calibration block larger than the grid");
  VORTEX_REQUIRE(splits.total() >= 1, "dataset: no scans requested");
}

Geometry DatasetConfig::padded() const {
  Geometry g = geometry;
  g.height = round_up(g.height, pad_multiple);
  g.width = round_up(g.width, pad_multiple);
  return g;
}

ScanRecord generate_scan(const DatasetConfig& cfg, std::uint64_t scan_id, ScanRole role) {
  cfg.validate();
  const Geometry g = cfg.padded();
  ScanRecord scan;
  scan.scan_id = scan_id;
  scan.role = role;

  KeyedRng map_rng(hash64(cfg.seed, scan_id, kMapsTag));
  scan.maps = synthesize_maps(g.coils, g.height, g.width, map_rng);
  quantize(scan.maps.tensor());
  scan.mask = make_poisson_disc_mask(g.height, g.width, cfg.acceleration, cfg.calibration,
                                     scan_mask_seed(cfg.seed, scan_id));

  const ForwardOperator full(scan.maps, UndersamplingMask::full(g.height, g.width));
  const bool supervised = role != ScanRole::kTrainUnsupervised;
  scan.support.assign(g.height * g.width, 0);
  for (std::size_t s = 0; s < g.slices; ++s) {
    KeyedRng rng(hash64(cfg.seed, scan_id, kPhantomTag, s));
    Phantom p = generate_phantom(g.height, g.width, rng);
    quantize(p.image);
    for (std::size_t k = 0; k < p.support.size(); ++k) scan.support[k] |= p.support[k];
    KSpaceTensor y = forward_apply(full, p.image);
    if (supervised) {
      scan.kspace.push_back(std::move(y));
      scan.images.push_back(std::move(p.image));
    } else {
      scan.kspace.push_back(apply_mask(scan.mask, y));
    }
  }
  return scan;
}

ScanRecord quantize_scan(const ScanRecord& scan) {
  ScanRecord q = scan;
  quantize(q.maps.tensor());
  for (auto& y : q.kspace) quantize(y);
  for (auto& x : q.images) quantize(x);
  return q;
}

std::vector<std::uint8_t> encode_scan(const ScanRecord& scan) {
  const std::size_t c = scan.maps.coils(), h = scan.maps.height(), w = scan.maps.width();
  VORTEX_REQUIRE(!scan.kspace.empty(), "encode_scan: no slices");
  VORTEX_REQUIRE(scan.mask.height == h && scan.mask.width == w, "encode_scan: mask shape");
  VORTEX_REQUIRE(scan.support.size() == h * w, "encode_scan: support shape");
  VORTEX_REQUIRE(scan.images.empty() || scan.images.size() == scan.kspace.size(),
                 "encode_scan: image count differs from slice count");
  for (const auto& y : scan.kspace)
    VORTEX_REQUIRE(y.shape() == std::vector<std::size_t>({c, h, w}), "encode_scan: k-space shape");
  for (const auto& x : scan.images)
    VORTEX_REQUIRE(x.shape() == std::vector<std::size_t>({h, w}), "encode_scan: image shape");

  detail::ByteWriter out;
  out.raw(kMagic);
  out.u32(kBlobVersion);
  out.u32(static_cast<std::uint32_t>(c));
  out.u32(static_cast<std::uint32_t>(h));
  out.u32(static_cast<std::uint32_t>(w));
  out.u32(static_cast<std::uint32_t>(scan.kspace.size()));
  out.u32((scan.fully_sampled() ? kHasImages : 0u) | (scan.fully_sampled() ? 0u : kMasked));
  out.u64(scan.scan_id);
  out.u32(role_code(scan.role));
  out.u64(scan.mask.seed);
  out.u64(std::bit_cast<std::uint64_t>(scan.mask.acceleration));
  out.u32(static_cast<std::uint32_t>(scan.mask.calibration.height));
  out.u32(static_cast<std::uint32_t>(scan.mask.calibration.width));
  put_complex(out, scan.maps.tensor());
  put_bits(out, scan.mask.bits, h, w);
  put_bits(out, scan.support, h, w);
  for (const auto& y : scan.kspace) put_complex(out, y);
  for (const auto& x : scan.images) put_complex(out, x);
  detail::seal(out);
  return std::move(out.bytes());
}

ScanRecord decode_scan(const std::vector<std::uint8_t>& bytes, const std::string& what) {
  detail::verify_seal(bytes, what);
  detail::ByteReader r(bytes.data(), bytes.size() - 4, what);
  if (r.str(4) != kMagic) throw CorruptDataset(what + ": bad magic");
  if (r.u32() != kBlobVersion) throw CorruptDataset(what + ": unsupported version");
  const std::size_t c = r.u32(), h = r.u32(), w = r.u32(), slices = r.u32();
  const std::uint32_t flags = r.u32();
  if (c == 0 || h == 0 || w == 0 || slices == 0) throw CorruptDataset(what + ": empty geometry");
  if ((flags & ~(kHasImages | kMasked)) != 0) throw CorruptDataset(what + ": unknown flags");
  // Guard the allocations below against a forged header.
  const std::size_t per_slice = c * h * w * 8 + ((flags & kHasImages) ? h * w * 8 : 0);
  if (slices * per_slice > r.remaining()) throw CorruptDataset(what + ": truncated");

  ScanRecord scan;
  scan.scan_id = r.u64();
  const std::uint32_t role = r.u32();
  if (role > role_code(ScanRole::kTest)) throw CorruptDataset(what + ": unknown role code");
  scan.role = static_cast<ScanRole>(role);
  scan.mask.height = h;
  scan.mask.width = w;
  scan.mask.seed = r.u64();
  scan.mask.acceleration = std::bit_cast<double>(r.u64());
  scan.mask.calibration.height = r.u32();
  scan.mask.calibration.width = r.u32();

  ComplexTensor maps = ComplexTensor::coils(c, h, w);
  get_complex(r, maps);
  scan.maps = SensitivityMaps(std::move(maps));
  scan.mask.bits = get_bits(r, h, w);
  scan.support = get_bits(r, h, w);
  for (std::size_t s = 0; s < slices; ++s) {
    KSpaceTensor y = ComplexTensor::coils(c, h, w);
    get_complex(r, y);
    scan.kspace.push_back(std::move(y));
  }
  if (flags & kHasImages)
    for (std::size_t s = 0; s < slices; ++s) {
      ComplexTensor x = ComplexTensor::image(h, w);
      get_complex(r, x);
      scan.images.push_back(std::move(x));
    }
  if (r.remaining() != 0) throw CorruptDataset(what + ": trailing bytes");
  return scan;
}

std::vector<std::uint64_t> DatasetManifest::ids(ScanRole role) const {
  std::vector<std::uint64_t> out;
  for (const auto& e : scans)
    if (e.role == role) out.push_back(e.scan_id);
  return out;
}

std::string DatasetManifest::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "vortex-dataset";
  j["version"] = version;
  j["dataset_seed"] = dataset_seed;
  j["geometry"] = {{"coils", geometry.coils},
                   {"height", geometry.height},
                   {"width", geometry.width},
                   {"slices_per_scan", geometry.slices}};
  j["acceleration"] = acceleration;
  j["calibration"] = {calibration.height, calibration.width};
  auto& list = j["scans"] = nlohmann::ordered_json::array();
  for (const auto& e : scans)
    list.push_back({{"scan_id", e.scan_id},
                    {"role", to_string(e.role)},
                    {"file", e.file},
                    {"bytes", e.bytes},
                    {"crc32", e.crc32}});
  return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(std::string_view text) {
  DatasetManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "vortex-dataset")
      throw CorruptDataset("manifest: not a vortex dataset");
    m.version = j.at("version").get<std::uint32_t>();
    if (m.version != kManifestVersion)
      throw CorruptDataset("manifest: unsupported version " + std::to_string(m.version));
    m.dataset_seed = j.at("dataset_seed").get<std::uint64_t>();
    const auto& g = j.at("geometry");
    m.geometry = {g.at("coils").get<std::size_t>(), g.at("height").get<std::size_t>(),
                  g.at("width").get<std::size_t>(), g.at("slices_per_scan").get<std::size_t>()};
    m.acceleration = j.at("acceleration").get<double>();
    const auto& cal = j.at("calibration");
    m.calibration = {cal.at(0).get<std::size_t>(), cal.at(1).get<std::size_t>()};
    std::set<std::uint64_t> seen;
    for (const auto& e : j.at("scans")) {
      ManifestEntry entry;
      entry.scan_id = e.at("scan_id").get<std::uint64_t>();
      entry.role = parse_scan_role(e.at("role").get<std::string>());
      entry.file = e.at("file").get<std::string>();
      entry.bytes = e.at("bytes").get<std::uint64_t>();
      entry.crc32 = e.at("crc32").get<std::uint32_t>();
      if (!seen.insert(entry.scan_id).second)
        throw CorruptDataset("manifest: scan " + std::to_string(entry.scan_id) + " listed twice");
      if (entry.file.find('/') != std::string::npos || entry.file.find('\\') != std::string::npos)
        throw CorruptDataset("manifest: blob path must be a plain file name");
      m.scans.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptDataset(std::string("manifest: ") + e.what());
  }
  return m;
}

std::vector<ScanRole> assign_roles(const DatasetConfig& cfg) {
  const SplitCounts& s = cfg.splits;
  std::vector<ScanRole> roles;
  roles.insert(roles.end(), s.train_supervised, ScanRole::kTrainSupervised);
  roles.insert(roles.end(), s.train_unsupervised, ScanRole::kTrainUnsupervised);
  roles.insert(roles.end(), s.validation, ScanRole::kValidation);
  roles.insert(roles.end(), s.test, ScanRole::kTest);
  KeyedRng rng(hash64(cfg.seed, kRolesTag));
  for (std::size_t i = roles.size(); i > 1; --i) std::swap(roles[i - 1], roles[rng.below(i)]);
  return roles;
}

DatasetManifest build_dataset(const DatasetConfig& cfg, const std::filesystem::path& dir,
                              int workers) {
  cfg.validate();
  const auto roles = assign_roles(cfg);
  std::vector<std::vector<std::uint8_t>> blobs(roles.size());
  parallel_for(roles.size(), workers, [&](std::size_t id) {
    blobs[id] = encode_scan(generate_scan(cfg, id, roles[id]));
  });

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create dataset directory '" + dir.string() + "': " + ec.message());

  DatasetManifest m;
  m.version = kManifestVersion;
  m.dataset_seed = cfg.seed;
  m.geometry = cfg.padded();
  m.acceleration = cfg.acceleration;
  m.calibration = cfg.calibration;
  for (std::size_t id = 0; id < roles.size(); ++id) {
    ManifestEntry e{id, roles[id], blob_name(id), blobs[id].size(),
                    detail::crc32_of(blobs[id].data(), blobs[id].size())};
    detail::write_file(dir / e.file, blobs[id]);
    m.scans.push_back(std::move(e));
  }
  detail::write_text(dir / "manifest.json", m.to_json());
  return m;
}

Dataset Dataset::open(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  if (!std::filesystem::exists(path))
    throw IoError("no dataset at '" + dir.string() + "' (manifest.json missing)");
  const auto bytes = detail::read_file(path);
  Dataset d;
  d.dir_ = dir;
  d.manifest_ = DatasetManifest::from_json(std::string_view(
      reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  return d;
}

bool Dataset::contains(std::uint64_t scan_id) const {
  return std::any_of(manifest_.scans.begin(), manifest_.scans.end(),
                     [&](const ManifestEntry& e) { return e.scan_id == scan_id; });
}

ScanRecord Dataset::load(std::uint64_t scan_id) const {
  const auto it = std::find_if(manifest_.scans.begin(), manifest_.scans.end(),
                               [&](const ManifestEntry& e) { return e.scan_id == scan_id; });
  VORTEX_REQUIRE(it != manifest_.scans.end(), "dataset: unknown scan_id " + std::to_string(scan_id));
  const std::string what = "scan blob '" + it->file + "'";
  const auto bytes = detail::read_file(dir_ / it->file);
  if (bytes.size() != it->bytes) throw CorruptDataset(what + ": size differs from manifest");
  if (detail::crc32_of(bytes.data(), bytes.size()) != it->crc32)
    throw CorruptDataset(what + ": checksum differs from manifest");
  ScanRecord scan = decode_scan(bytes, what);
  const Geometry& g = manifest_.geometry;
  if (scan.scan_id != it->scan_id || scan.role != it->role)
    throw CorruptDataset(what + ": header disagrees with manifest");
  if (scan.maps.coils() != g.coils || scan.maps.height() != g.height ||
      scan.maps.width() != g.width || scan.slices() != g.slices)
    throw CorruptDataset(what + ": geometry disagrees with manifest");
  if (scan.fully_sampled() != (scan.role != ScanRole::kTrainUnsupervised))
    throw CorruptDataset(what + ": sampling does not match role");
  return scan;
}

std::vector<ScanRecord> Dataset::load_role(ScanRole role) const {
  std::vector<ScanRecord> out;
  for (std::uint64_t id : manifest_.ids(role)) out.push_back(load(id));
  return out;
}

}  // namespace vortex
