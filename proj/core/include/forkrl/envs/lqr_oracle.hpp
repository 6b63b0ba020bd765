#pragma once

#include <cstdint>
#include <vector>

#include "forkrl/envs/lqr.hpp"

namespace forkrl::envs {

struct LqrOracleResult {
  // Optimal feedback a = -gain * s (act_dim x obs_dim).
  RowMatrix gain;
  // Fixed point of the discounted Riccati recursion.
  RowMatrix cost_to_go;
  std::size_t iterations = 0;
  // Mean undiscounted return of the clipped gain policy over the episodes.
  double expected_return = 0.0;
  std::vector<double> episode_returns;
};

struct LqrOracleOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 1'000'000;
  std::size_t episodes = 100;
  // Episode i is reset with seed_base + i.
  std::uint64_t seed_base = 0;
};

// Throws ConvergenceError when the recursion diverges or stalls.
LqrOracleResult lqr_oracle(const LqrEnvParams& params, double gamma, std::size_t horizon,
                           const LqrOracleOptions& options = {});

}  // namespace forkrl::envs
