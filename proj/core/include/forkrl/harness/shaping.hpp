#pragma once

#include "forkrl/envs/environment.hpp"

namespace forkrl::harness {

// Reward map used for the hardcore walker: exactly -100 becomes -5, every
// other reward is scaled by 5. Identity when disabled. Flags and state pass
// through untouched.
double shape_reward(double reward, bool enabled = true);
envs::StepResult apply_hardcore_shaping(envs::StepResult step, bool enabled = true);

}  // namespace forkrl::harness
