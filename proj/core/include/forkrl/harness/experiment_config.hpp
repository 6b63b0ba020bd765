#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "forkrl/agent_config.hpp"
#include "forkrl/envs/registry.hpp"
#include "forkrl/trainer.hpp"

namespace forkrl::harness {

inline constexpr const char* kOutputRootEnv = "FORKRL_OUTPUT_ROOT";

struct ExperimentConfig {
  std::string name = "experiment";
  envs::EnvConfig env;
  AgentConfig agent;
  TrainerOptions trainer;

  std::size_t total_steps = 1'000'000;
  std::size_t eval_interval = 5'000;
  std::size_t eval_episodes = 10;
  std::size_t instances = 5;
  // Empty means 0, 1, ..., instances - 1.
  std::vector<std::uint64_t> seeds;
  // Evaluation episode i of every evaluation resets with eval_seed_base + i.
  std::uint64_t eval_seed_base = 1'000'000'000;

  std::filesystem::path output_dir;
  // A training row is logged every metrics_interval steps; episode ends and
  // evaluations are always logged.
  std::size_t metrics_interval = 1;
  bool log_wall_time = false;
  bool save_checkpoints = true;
  std::size_t smoothing_window = 5;

  void validate() const;
  std::vector<std::uint64_t> resolved_seeds() const;
  // Deterministic INI rendering of every field; parse_experiment_config
  // reads it back to an equal configuration.
  std::string to_ini() const;
  // FNV-1a of to_ini(), stored in checkpoints.
  std::uint64_t hash() const;
};

ExperimentConfig parse_experiment_config(const std::string& ini_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Applies "section.key=value" on top of a parsed configuration. Call
// validate() once all overrides are in.
void apply_override(ExperimentConfig& config, const std::string& assignment);

// Relative output directories are placed under $FORKRL_OUTPUT_ROOT when it
// is set.
std::filesystem::path resolve_output_dir(const std::filesystem::path& dir);

}  // namespace forkrl::harness
