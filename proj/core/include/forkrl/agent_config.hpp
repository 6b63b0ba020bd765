#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "forkrl/networks.hpp"

namespace forkrl {

enum class Variant {
  DDPG,
  DDPG_FORK,
  TD3,
  TD3_FORK,
  TD3_FORK_F,
  FORK_S,
  FORK_Q,
  FORK_DQ,
  TD3_MT,
};

// Accepts the enumerator spelling or its lowercase/dashed form ("td3-fork").
Variant parse_variant(std::string_view name);
std::string to_string(Variant v);
std::vector<Variant> all_variants();

// Variants whose actor loss carries look-ahead terms.
bool has_fork_terms(Variant v);
// Single critic, actor updated every step, no target smoothing.
bool is_ddpg_family(Variant v);

enum class ReturnAverage { RunningMean, Exponential };

struct AgentConfig {
  Variant variant = Variant::TD3_FORK;

  double gamma = 0.99;
  double tau = 5e-3;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double system_lr = 3e-4;
  double reward_lr = 3e-4;
  std::size_t batch_size = 100;
  // Noise scales are fractions of max_action.
  double exploration_noise = 0.1;
  double target_noise = 0.2;
  double noise_clip = 0.5;
  std::size_t policy_delay = 2;
  std::size_t exploration_steps = 10'000;
  std::size_t buffer_capacity = 1'000'000;

  double base_weight = 0.6;
  double base_reward = 320.0;
  double system_threshold = 0.01;
  double fixed_weight = 0.4;
  // Negative means "derive from the variant": 0.5 for FORK_DQ, 0 otherwise.
  double dq_weight = -1.0;

  ReturnAverage return_average = ReturnAverage::RunningMean;
  double return_ema_alpha = 0.05;

  bool reward_uses_next_state = true;
  // Baselines skip system/reward training unless this is set.
  bool train_models_for_baselines = false;

  NetworkSizes sizes;

  // Throws ConfigError naming the offending field.
  void validate() const;
  double effective_dq_weight() const;
  std::size_t effective_policy_delay() const;
  // True when the system and reward networks are trained at all.
  bool trains_models() const;
};

}  // namespace forkrl
