#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "forkrl/envs/environment.hpp"
#include "forkrl/networks.hpp"

namespace forkrl::harness {

using Policy = std::function<Vector(const Vector&)>;

struct EvalResult {
  double mean_return = 0.0;
  std::vector<double> episode_returns;
};

// Runs `episodes` noise-free episodes; episode i resets with seed_base + i.
// Returns are undiscounted and unshaped.
EvalResult evaluate_policy(const Policy& policy, envs::Environment& env, std::size_t episodes,
                           std::uint64_t seed_base);
EvalResult evaluate_policy(const ActorNet& actor, envs::Environment& env, std::size_t episodes,
                           std::uint64_t seed_base);

// a = clip(-K s) for a linear feedback gain.
Policy linear_policy(const RowMatrix& gain, const envs::EnvSpec& spec);

}  // namespace forkrl::harness
