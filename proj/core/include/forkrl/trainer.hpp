#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "forkrl/agent.hpp"
#include "forkrl/envs/environment.hpp"
#include "forkrl/ratio_admission.hpp"
#include "forkrl/replay_buffer.hpp"

namespace forkrl {

struct TrainerOptions {
  bool hardcore_shaping = false;
  // Admit whole episodes through a failed:success ratio policy.
  bool ratio_buffer = false;
  std::uint32_t failed_weight = 5;
  std::uint32_t success_weight = 1;
};

struct StepMetrics {
  std::uint64_t step = 0;  // environment steps completed, this one included
  std::optional<UpdateMetrics> update;
  bool episode_done = false;
  std::uint64_t episode = 0;  // episodes completed so far
  // Unshaped return of the episode that just ended.
  std::optional<double> episode_return;
  bool fell_down = false;
  double weight = 0.0;
};

/// Drives one training instance: environment interaction, storage and one
/// agent update per step once the buffer holds a full minibatch.
class Trainer {
 public:
  Trainer(AgentConfig config, std::unique_ptr<envs::Environment> env, std::uint64_t seed,
          TrainerOptions options = {});

  StepMetrics train_iteration();

  Agent& agent() { return agent_; }
  const Agent& agent() const { return agent_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  envs::Environment& env() { return *env_; }
  const RatioAdmissionPolicy& admission() const { return admission_; }
  std::uint64_t steps() const { return steps_; }
  std::uint64_t episodes() const { return episodes_; }
  std::uint64_t seed() const { return seed_; }

  // Everything needed to continue bit-exactly. config_hash guards against
  // resuming under a different configuration.
  void save_checkpoint(const std::filesystem::path& path, std::uint64_t config_hash) const;
  void load_checkpoint(const std::filesystem::path& path, std::uint64_t config_hash);

 private:
  void begin_episode();
  void store(const Transition& t);
  void finish_episode(bool fell_down);

  std::unique_ptr<envs::Environment> env_;
  Agent agent_;
  ReplayBuffer buffer_;
  TrainerOptions options_;
  RatioAdmissionPolicy admission_;
  std::uint64_t seed_;
  std::uint64_t steps_ = 0;
  std::uint64_t episodes_ = 0;
  bool in_episode_ = false;
  Vector state_;
  double raw_return_ = 0.0;
  double shaped_return_ = 0.0;
  std::vector<Transition> pending_;
};

}  // namespace forkrl
