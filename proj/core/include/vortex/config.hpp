#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vortex/dataset.hpp"
#include "vortex/evaluate.hpp"
#include "vortex/train.hpp"

namespace vortex {

// Whole-experiment configuration read from JSON. Unknown keys are rejected.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "runs/default";
  std::filesystem::path data_dir = "data";
  DatasetConfig data;
  TrainConfig train;
  std::vector<PerturbationSpec> perturbations;
  std::string eval_checkpoint = "best";  // "best", "last" or a path
  // Non-fatal remarks produced while parsing (e.g. ignored fields).
  std::vector<std::string> warnings;

  // Applies `seed` to every component that takes one.
  void set_seed(std::uint64_t s);
  void validate() const;
  std::string to_json() const;
  // Stable hash of the settings that affect training, used to guard resumes.
  std::uint64_t tag() const;
};

ExperimentConfig default_experiment_config();
// Missing keys take defaults; unknown keys and wrong types throw
// InvalidArgument naming the offending path.
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace vortex
