#pragma once

#include <random>
#include <vector>

#include "forkrl/nn/adam.hpp"
#include "forkrl/nn/mlp.hpp"
#include "forkrl/observation_bounds.hpp"
#include "forkrl/transition.hpp"

namespace forkrl {

/// Hidden layer widths for the five networks. Defaults are the full-scale
/// sizes; desk-scale presets override them from config.
struct NetworkSizes {
  std::vector<std::size_t> actor{256, 256};
  std::vector<std::size_t> critic{256, 256};
  std::vector<std::size_t> system{400, 300};
  std::vector<std::size_t> reward{256, 256};
};

// Deterministic policy obs -> act with outputs max_action * tanh(.).
struct ActorNet {
  nn::MlpParams params;
};

// Twin action-value networks over [s; a].
struct CriticPair {
  nn::MlpParams q1;
  nn::MlpParams q2;
};

// Predicts the absolute next state from [s; a].
struct SystemNet {
  nn::MlpParams params;
};

// Predicts the reward from [s; a; s'] (or [s; a] when uses_next_state is off).
struct RewardNet {
  nn::MlpParams params;
  bool uses_next_state = true;
};

struct TargetSet {
  ActorNet actor;
  CriticPair critic;
};

ActorNet make_actor(std::size_t obs_dim, std::size_t act_dim, const std::vector<std::size_t>& hidden,
                    double max_action, std::mt19937_64& rng);
CriticPair make_critic_pair(std::size_t obs_dim, std::size_t act_dim,
                            const std::vector<std::size_t>& hidden, std::mt19937_64& rng);
SystemNet make_system(std::size_t obs_dim, std::size_t act_dim,
                      const std::vector<std::size_t>& hidden, std::mt19937_64& rng);
RewardNet make_reward(std::size_t obs_dim, std::size_t act_dim,
                      const std::vector<std::size_t>& hidden, bool uses_next_state,
                      std::mt19937_64& rng);
TargetSet make_targets(const ActorNet& actor, const CriticPair& critic);

RowMatrix act(const ActorNet& actor, const RowMatrix& states);
Vector act(const ActorNet& actor, const Vector& state);

// target <- tau * online + (1 - tau) * target, parameter-wise.
void soft_update(nn::MlpParams& target, const nn::MlpParams& online, double tau);
void soft_update(TargetSet& targets, const ActorNet& actor, const CriticPair& critic, double tau);

RowMatrix reward_input(const RewardNet& net, const RowMatrix& states, const RowMatrix& actions,
                       const RowMatrix& next_states);

// Smooth-L1 loss of the system network on a batch, without updating it.
double system_loss(const SystemNet& net, const TransitionBatch& batch);
double reward_loss(const RewardNet& net, const TransitionBatch& batch);

// One Adam step on the smooth-L1 prediction loss. Returns the loss measured
// before the step.
double train_system(SystemNet& net, nn::AdamState& optimizer, const TransitionBatch& batch);

// One Adam step on the reward MSE. Returns the loss measured before the step.
double train_reward(RewardNet& net, nn::AdamState& optimizer, const TransitionBatch& batch);

// clip(F(s, a), o_min, o_max) row-wise.
RowMatrix predict_next(const SystemNet& net, const RowMatrix& states, const RowMatrix& actions,
                       const ObservationBounds& bounds);
Vector predict_next(const SystemNet& net, const Vector& state, const Vector& action,
                    const ObservationBounds& bounds);

}  // namespace forkrl
