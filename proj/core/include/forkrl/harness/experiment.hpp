#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "forkrl/harness/experiment_config.hpp"
#include "forkrl/harness/statistics.hpp"
#include "forkrl/trainer.hpp"

namespace forkrl::harness {

struct InstanceResult {
  std::size_t instance = 0;
  std::uint64_t seed = 0;
  std::vector<EvalRecord> evals;
  // Environment step of the first actor update with the FORK gate open.
  std::optional<std::uint64_t> gate_open_step;
  std::uint64_t episodes = 0;
};

struct ExperimentResult {
  std::filesystem::path output_dir;
  std::vector<InstanceResult> instances;
  std::vector<EvalRecord> records;
  RunSummary summary;
};

struct RunHooks {
  // Called after every training step.
  std::function<void(std::size_t instance, const StepMetrics&)> on_step;
};

/// Trains every instance in sequence and writes into the output directory:
/// config.ini, metrics.csv, evals.csv, summary.json, curve.svg and, when
/// enabled, instance_<l>.ckpt. An evaluation runs at step 0 and every
/// eval_interval steps. A failing instance aborts the run after flushing
/// what was logged so far.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunHooks& hooks = {});

// Output directory the experiment will use (FORKRL_OUTPUT_ROOT applied,
// "runs/<name>" when unset).
std::filesystem::path experiment_output_dir(const ExperimentConfig& config);

struct CalibrationResult {
  // Mean system loss over the final `tail` updates.
  double mean_loss = 0.0;
  std::vector<double> losses;
};

// Trains the first instance for `steps` steps with the gate held shut and
// reports the system-network loss reached: the typical estimation error used
// to choose the threshold.
CalibrationResult calibrate_threshold(const ExperimentConfig& config, std::size_t steps,
                                      std::size_t tail = 200);

// A finished run read back from its output directory.
struct LoadedRun {
  std::filesystem::path dir;
  std::string label;  // variant name from config.ini, else the directory name
  std::string env;
  std::vector<EvalRecord> records;
};

// Loads `dir` itself when it holds evals.csv, otherwise every immediate
// subdirectory that does (sorted by path). Throws UsageError if none found.
std::vector<LoadedRun> load_runs(const std::filesystem::path& dir);

}  // namespace forkrl::harness
