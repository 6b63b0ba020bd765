#pragma once

#include "forkrl/envs/environment.hpp"

namespace forkrl::envs {

// Classic torque-limited pendulum swing-up. Angle 0 is upright.
struct PendulumParams {
  double gravity = 10.0;
  double mass = 1.0;
  double length = 1.0;
  double dt = 0.05;
  double max_speed = 8.0;
  double max_torque = 2.0;
  std::size_t max_episode_steps = 200;

  void validate() const;
};

/// Observation (cos theta, sin theta, theta_dot); reward
/// -(theta^2 + 0.1 theta_dot^2 + 0.001 u^2) with theta wrapped to [-pi, pi).
/// An episode counts as fallen when it ends with the pole below horizontal.
class PendulumEnv final : public Environment {
 public:
  explicit PendulumEnv(PendulumParams params = {});

  std::string name() const override { return "pendulum"; }
  const PendulumParams& params() const { return params_; }
  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }
  // Places the pendulum in a given state within the current episode.
  Vector set_state(double theta, double theta_dot);

 protected:
  Vector do_reset(std::uint64_t seed) override;
  StepResult do_step(const Vector& action) override;
  void save_dynamics(BinaryWriter& w) const override;
  void load_dynamics(BinaryReader& r) override;

 private:
  Vector observe() const;

  PendulumParams params_;
  double theta_ = 0.0;
  double theta_dot_ = 0.0;
  std::mt19937_64 rng_;
};

double wrap_angle(double theta);

}  // namespace forkrl::envs
