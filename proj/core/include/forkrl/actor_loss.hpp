#pragma once

#include <optional>

#include "forkrl/agent_config.hpp"
#include "forkrl/networks.hpp"
#include "forkrl/observation_bounds.hpp"

namespace forkrl {

struct ForkRollout {
  RowMatrix next;       // s~'
  RowMatrix next_next;  // s~''
};

// s~' = clip(F(s, A(s))), s~'' = clip(F(s~', A(s~'))).
ForkRollout fork_rollout(const SystemNet& system, const ActorNet& actor, const RowMatrix& states,
                         const ObservationBounds& bounds);

// Look-ahead states fed to the actor loss: predicted by the system network,
// or, for TD3_MT, two buffered successor states.
struct LookAhead {
  const RowMatrix* next = nullptr;
  const RowMatrix* next_next = nullptr;
};

struct ActorLossTerms {
  double base_q = 0.0;            // mean Q1(s, A(s))
  double reward_now = 0.0;        // mean R(s, A(s), s~')
  double reward_next = 0.0;       // mean R(s~', A(s~'), s~'')
  double value_next = 0.0;        // mean Q1(s~', A(s~'))
  double value_next_next = 0.0;   // mean Q1(s~'', A(s~''))
};

struct ActorLossResult {
  double loss = 0.0;
  nn::Gradients gradient;  // with respect to the actor parameters
  ActorLossTerms terms;
  // Smallest distance of any ReLU pre-activation to its kink over every
  // forward pass that fed the loss.
  double min_relu_margin = 0.0;
};

struct ActorLossSettings {
  Variant variant = Variant::TD3;
  double weight = 0.0;
  double gamma = 0.99;
  double dq_weight = 0.0;
};

/// Actor loss averaged over the batch, and its gradient in the actor
/// parameters only.
///
/// Base term: -Q1(s, A(s)). With weight w > 0 the variant adds
///   TD3_FORK, DDPG_FORK, TD3_FORK_F, TD3_MT:
///       -w R(s, A(s), s1) - w g R(s1, A(s1), s2) - w g^2 Q1(s2, A(s2))
///   FORK_S:  -w R(s, A(s), s1) - w g Q1(s1, A(s1))
///   FORK_Q, FORK_DQ: -w Q1(s1, A(s1)) + w w' Q1(s2, A(s2))
/// where (s1, s2) come from `ahead`. The look-ahead states are constants:
/// the gradient flows only through the actor applications. With w == 0 the
/// look-ahead is not evaluated and the result equals the base loss exactly.
ActorLossResult fork_actor_loss(const ActorLossSettings& settings, const ActorNet& actor,
                                const CriticPair& critic, const RewardNet* reward,
                                const RowMatrix& states, const LookAhead& ahead = {});

// True when the variant's FORK terms need s~'' (FORK_Q needs it only if w' != 0).
bool needs_second_state(Variant variant, double dq_weight);

}  // namespace forkrl
