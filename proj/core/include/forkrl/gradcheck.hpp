#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace forkrl {

struct GradCheckOptions {
  std::size_t trials = 100;
  double tolerance = 1e-4;
  double step = 1e-5;
  std::uint64_t seed = 1;
  // Trials whose ReLU pre-activations (or smooth-L1 residuals) sit closer
  // than this to a kink are redrawn: finite differences are meaningless there.
  double min_kink_distance = 1e-3;
};

struct GradCheckCase {
  std::string name;
  std::size_t trials = 0;
  std::size_t redrawn = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckCase> cases;
  double seconds = 0.0;
  bool passed() const;
};

/// Analytic vs central finite-difference gradients on small random networks:
/// actor, critic, system and reward networks, and the actor loss of every
/// FORK variant (look-ahead states held fixed).
GradCheckReport run_gradcheck(const GradCheckOptions& options = {});

}  // namespace forkrl
