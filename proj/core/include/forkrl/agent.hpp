#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "forkrl/actor_loss.hpp"
#include "forkrl/adaptive_weight.hpp"
#include "forkrl/agent_config.hpp"
#include "forkrl/envs/environment.hpp"
#include "forkrl/networks.hpp"
#include "forkrl/observation_bounds.hpp"
#include "forkrl/replay_buffer.hpp"

namespace forkrl {

enum class Phase { Warmup, Train, Eval };

// Warmup: uniform in the action box. Train: A(s) + N(0, sigma) clipped to
// the box. Eval: A(s). sigma is an absolute standard deviation.
Vector select_action(const ActorNet& actor, const Vector& state, double sigma, std::mt19937_64& rng,
                     Phase phase, const envs::EnvSpec& spec);

struct CriticUpdateSettings {
  double gamma = 0.99;
  // Absolute std and clip of the target-policy smoothing noise.
  double target_noise = 0.0;
  double noise_clip = 0.0;
  Vector action_low;
  Vector action_high;
  // DDPG: one critic, target y = r + g Q1'(s', A'(s')), no smoothing.
  bool twin = true;
};

struct CriticUpdateResult {
  double loss = 0.0;
  Vector targets;
};

/// y = r + g * not_terminal * min_j Q'_j(s', a~) with
/// a~ = clip(A'(s') + clip(N(0, target_noise), +-noise_clip), bounds), then
/// one Adam step per critic on (1/N) sum_j sum_i (y - Q_j)^2. Returns that
/// loss measured before the step.
CriticUpdateResult td3_critic_update(CriticPair& critic, nn::AdamState& q1_optimizer,
                                     nn::AdamState* q2_optimizer, const TargetSet& targets,
                                     const TransitionBatch& batch,
                                     const CriticUpdateSettings& settings, std::mt19937_64& rng);

struct UpdateMetrics {
  double critic_loss = 0.0;
  std::optional<double> system_loss;
  std::optional<double> reward_loss;
  bool actor_updated = false;
  std::optional<double> actor_loss;
  bool gate_open = false;
  // Weight actually applied to the FORK terms on this update (0 when the
  // gate is closed or no actor step happened).
  double applied_weight = 0.0;
};

struct AgentSeeds {
  std::uint64_t actor_init;
  std::uint64_t critic_init;
  std::uint64_t system_init;
  std::uint64_t reward_init;
  std::uint64_t exploration;
  std::uint64_t target_noise;
  std::uint64_t sampling;

  static AgentSeeds from(std::uint64_t run_seed);
};

/// Networks, optimizers and learning state of one training instance.
///
/// update() performs one iteration of the learning loop on a minibatch:
/// critic step, system and reward steps, and, every policy_delay-th call,
/// an actor step followed by soft target updates. Updates are counted
/// globally, not per episode.
class Agent {
 public:
  Agent(AgentConfig config, const envs::EnvSpec& spec, std::uint64_t seed);
  Agent(AgentConfig config, const envs::EnvSpec& spec, const AgentSeeds& seeds);

  Vector select_action(const Vector& state, Phase phase);
  UpdateMetrics update(const ReplayBuffer& buffer);
  void observe_state(const Vector& state) { bounds_.observe(state); }
  // Folds an episode return into the adaptive weight.
  void end_episode(double episode_return);

  const AgentConfig& config() const { return config_; }
  const envs::EnvSpec& spec() const { return spec_; }
  const ActorNet& actor() const { return actor_; }
  const CriticPair& critic() const { return critic_; }
  const TargetSet& targets() const { return targets_; }
  const SystemNet& system() const { return system_; }
  const RewardNet& reward() const { return reward_; }
  const ObservationBounds& bounds() const { return bounds_; }
  const AdaptiveWeightState& weight_state() const { return weight_; }
  double weight() const { return weight_.weight; }
  double last_system_loss() const { return last_system_loss_; }
  std::uint64_t update_count() const { return updates_; }
  std::uint64_t actor_update_count() const { return actor_updates_; }
  // Update index at which the gate first opened for an actor step.
  std::optional<std::uint64_t> gate_open_update() const { return gate_open_update_; }

  // Mutable access for tests and tools that seed networks directly.
  ActorNet& mutable_actor() { return actor_; }
  SystemNet& mutable_system() { return system_; }

  void write(BinaryWriter& w) const;
  void read(BinaryReader& r);

 private:
  double max_action() const { return spec_.max_action(); }

  AgentConfig config_;
  envs::EnvSpec spec_;
  ActorNet actor_;
  CriticPair critic_;
  TargetSet targets_;
  SystemNet system_;
  RewardNet reward_;
  nn::AdamState actor_opt_;
  nn::AdamState q1_opt_;
  nn::AdamState q2_opt_;
  nn::AdamState system_opt_;
  nn::AdamState reward_opt_;
  ObservationBounds bounds_;
  AdaptiveWeightState weight_;
  double last_system_loss_;
  std::uint64_t updates_ = 0;
  std::uint64_t actor_updates_ = 0;
  std::optional<std::uint64_t> gate_open_update_;
  std::mt19937_64 exploration_rng_;
  std::mt19937_64 target_rng_;
  std::mt19937_64 sample_rng_;
};

}  // namespace forkrl
