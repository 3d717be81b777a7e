#include <json.hpp>

#include "binary_io.hpp"
#include "vortex/model.hpp"

namespace vortex {
namespace {

constexpr std::string_view kMagic = "VTXC";
constexpr std::uint32_t kVersion = 1;

nlohmann::json header_json(const Checkpoint& ck) {
  nlohmann::json layout = nlohmann::json::array();
  for (const ParamBlock& b : ck.layout.blocks)
    layout.push_back({{"name", b.name},
                      {"offset", b.offset},
                      {"out_channels", b.out_channels},
                      {"in_channels", b.in_channels},
                      {"kernel", b.kernel},
                      {"bias_offset", b.bias_offset}});
  return {{"format", "vortex-checkpoint"},
          {"model",
           {{"depth", ck.config.depth},
            {"base_channels", ck.config.base_channels},
            {"latent_taps", ck.config.latent_taps},
            {"leaky_slope", ck.config.leaky_slope}}},
          {"layout", layout},
          {"total", ck.layout.total},
          {"metadata", ck.metadata}};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  VORTEX_REQUIRE(ck.params.size() == ck.layout.total, "checkpoint: parameters do not match layout");
  const std::string header = header_json(ck).dump();
  detail::ByteWriter w;
  w.raw(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(header.size()));
  w.raw(header);
  w.u64(ck.params.size());
  for (double v : ck.params.values) w.f32(static_cast<float>(v));
  detail::seal(w);
  detail::write_file(path, w.bytes());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string what = "checkpoint '" + path.string() + "'";
  const auto bytes = detail::read_file(path);
  detail::verify_seal(bytes, what);
  detail::ByteReader r(bytes.data(), bytes.size() - 4, what);
  if (r.str(4) != kMagic) throw CorruptDataset(what + ": bad magic");
  if (r.u32() != kVersion) throw CorruptDataset(what + ": unsupported version");
  const std::uint32_t header_len = r.u32();
  Checkpoint ck;
  try {
    const auto header = nlohmann::json::parse(r.str(header_len));
    const auto& m = header.at("model");
    ck.config.depth = m.at("depth").get<int>();
    ck.config.base_channels = m.at("base_channels").get<int>();
    ck.config.latent_taps = m.at("latent_taps").get<std::vector<int>>();
    ck.config.leaky_slope = m.at("leaky_slope").get<double>();
    for (const auto& b : header.at("layout")) {
      ParamBlock blk;
      blk.name = b.at("name").get<std::string>();
      blk.offset = b.at("offset").get<std::size_t>();
      blk.out_channels = b.at("out_channels").get<std::size_t>();
      blk.in_channels = b.at("in_channels").get<std::size_t>();
      blk.kernel = b.at("kernel").get<std::size_t>();
      blk.bias_offset = b.at("bias_offset").get<std::size_t>();
      ck.layout.blocks.push_back(blk);
    }
    ck.layout.total = header.at("total").get<std::size_t>();
    if (header.contains("metadata"))
      ck.metadata = header.at("metadata").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptDataset(what + ": bad header (" + e.what() + ")");
  }
  const std::uint64_t count = r.u64();
  if (count != ck.layout.total || !ck.layout.covers_exactly())
    throw CorruptDataset(what + ": layout does not match parameter count");
  ck.params.values.resize(count);
  for (auto& v : ck.params.values) v = static_cast<double>(r.f32());
  if (r.remaining() != 0) throw CorruptDataset(what + ": trailing bytes");
  return ck;
}

}  // namespace vortex
