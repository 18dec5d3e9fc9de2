#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "btrf/config.hpp"
#include "btrf/dataset.hpp"

namespace btrf {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitRelocalizationFailure = 3,
};

struct CommandContext {
  int threads = 1;
  std::ostream* out = nullptr;  // defaults to std::cout
  std::ostream* err = nullptr;  // defaults to std::cerr
  /// Sees every dataset file load. Called from worker threads.
  std::function<void(const LoadEvent&)> load_observer;
  /// Phase markers: "estimate-begin", "estimate-end", "metrics-begin".
  std::function<void(const std::string&)> phase_observer;
};

/// Renders the synthetic benchmark into config.dataset.
int cmd_synth(const RunConfig& config, const CommandContext& ctx);

/// Trains on config.dataset, writes config.model and <model>.manifest.json.
int cmd_train(const RunConfig& config, const CommandContext& ctx);

/// Relocalizes every test frame and writes estimated poses to
/// <output_dir>/relocalized/. Never reads test poses.
int cmd_relocalize(const RunConfig& config, const CommandContext& ctx);

/// Runs the N_max sweep on the test split and writes reports and pose pairs
/// to config.output_dir.
int cmd_evaluate(const RunConfig& config, const CommandContext& ctx);

/// Prints tree statistics and the objective-per-level table.
int cmd_inspect(const std::string& model_path, const CommandContext& ctx);

/// Runs `command`, mapping exceptions to exit codes with a message on `err`.
int run_guarded(const std::function<int()>& command, std::ostream& err);

}  // namespace btrf
