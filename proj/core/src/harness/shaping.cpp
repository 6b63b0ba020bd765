#include "forkrl/harness/shaping.hpp"

namespace forkrl::harness {

double shape_reward(double reward, bool enabled) {
  if (!enabled) return reward;
  if (reward == -100.0) return -5.0;
  return 5.0 * reward;
}

envs::StepResult apply_hardcore_shaping(envs::StepResult step, bool enabled) {
  step.reward = shape_reward(step.reward, enabled);
  return step;
}

}  // namespace forkrl::harness
