#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vortex::cli {

// Flags shared by every subcommand.
struct CommonOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  bool dry_run = false;
};

int generate_data(const CommonOptions& opts);
int train(const CommonOptions& opts, std::optional<std::size_t> stop_after);
int evaluate(const CommonOptions& opts, std::optional<std::filesystem::path> checkpoint);
int augment_preview(const CommonOptions& opts, std::uint64_t scan_id, const std::string& spec,
                    std::size_t slice);
int report(const std::vector<std::filesystem::path>& runs,
           std::optional<std::filesystem::path> out);

// Exit codes, one per error class.
enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kUsage = 2,
  kInvalidArgument = 3,
  kIoError = 4,
  kCorruptData = 5,
  kNonFinite = 6,
};

}  // namespace vortex::cli
