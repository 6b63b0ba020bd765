#pragma once

#include "forkrl/envs/environment.hpp"

namespace forkrl::envs {

// Planar double integrator steered toward a goal.
struct PointMassParams {
  double dt = 0.1;
  double action_bound = 1.0;
  Vector goal = Vector::Zero(2);
  // Initial position is uniform in [-init_range, init_range]^2, velocity 0.
  double init_range = 1.0;
  // Leaving |p_i| <= arena ends the episode as a failure.
  double arena = 2.0;
  double out_of_arena_penalty = 10.0;
  double control_cost = 0.01;
  std::size_t max_episode_steps = 100;

  void validate() const;
};

/// State (px, py, vx, vy), action = acceleration. Semi-implicit Euler:
/// v' = v + dt a, p' = p + dt v'. Reward 1 - |p' - goal| - c |a|^2.
class PointMassEnv final : public Environment {
 public:
  explicit PointMassEnv(PointMassParams params = {});

  std::string name() const override { return "pointmass"; }
  const PointMassParams& params() const { return params_; }
  const Vector& state() const { return state_; }
  Vector set_state(const Vector& state);

 protected:
  Vector do_reset(std::uint64_t seed) override;
  StepResult do_step(const Vector& action) override;
  void save_dynamics(BinaryWriter& w) const override;
  void load_dynamics(BinaryReader& r) override;

 private:
  PointMassParams params_;
  Vector state_ = Vector::Zero(4);
  std::mt19937_64 rng_;
};

}  // namespace forkrl::envs
