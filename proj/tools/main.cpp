#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "vortex/error.hpp"
#include "vortex/version.hpp"

namespace {

void add_common(CLI::App* cmd, vortex::cli::CommonOptions& o, bool needs_config = true) {
  auto* c = cmd->add_option("--config", o.config, "Experiment config (JSON)");
  if (needs_config) c->required();
  cmd->add_option("--seed", o.seed, "Override the config seed");
  cmd->add_option("--out", o.out, "Override the output directory");
  cmd->add_flag("--dry-run", o.dry_run, "Validate the config and exit without writing files");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace vortex::cli;
  CLI::App app{"VORTEX consistency training for multi-coil MRI on synthetic phantoms"};
  app.set_version_flag("--version", std::string(vortex::version_string()));
  app.require_subcommand(1);

  CommonOptions gen_o, train_o, eval_o, prev_o;
  std::optional<std::size_t> stop_after;
  std::optional<std::filesystem::path> checkpoint;
  std::uint64_t scan_id = 0;
  std::size_t slice = 0;
  std::string spec = "none";
  std::vector<std::filesystem::path> runs;
  std::optional<std::filesystem::path> report_out;

  auto* gen = app.add_subcommand("generate-data", "Generate the synthetic dataset");
  add_common(gen, gen_o);
  auto* tr = app.add_subcommand("train", "Train a model and evaluate its best checkpoint");
  add_common(tr, train_o);
  tr->add_option("--stop-after", stop_after, "Stop after this many completed epochs");
  auto* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint under the perturbation set");
  add_common(ev, eval_o);
  ev->add_option("--checkpoint", checkpoint, "Checkpoint file (default: from config)");
  auto* pv = app.add_subcommand("augment-preview", "Write clean/augmented/difference images");
  add_common(pv, prev_o);
  pv->add_option("--scan-id", scan_id, "Scan to preview")->required();
  pv->add_option("--slice", slice, "Slice index");
  pv->add_option("--spec", spec, "none | noise:SIGMA | motion:ALPHA | <image transform>");
  auto* rp = app.add_subcommand("report", "Combine results of several runs into one table");
  rp->add_option("runs", runs, "Run directories")->required();
  rp->add_option("--out", report_out, "Write report.json and report.txt here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return generate_data(gen_o);
    if (*tr) return train(train_o, stop_after);
    if (*ev) return evaluate(eval_o, checkpoint);
    if (*pv) return augment_preview(prev_o, scan_id, spec, slice);
    if (*rp) return report(runs, report_out);
  } catch (const vortex::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidArgument;
  } catch (const vortex::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const vortex::CorruptDataset& e) {
    std::cerr << "corrupt data: " << e.what() << "\n";
    return kCorruptData;
  } catch (const vortex::NonFiniteError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kNonFinite;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kUnexpected;
  }
  return kUsage;
}
