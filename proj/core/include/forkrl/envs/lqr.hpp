#pragma once

#include "forkrl/envs/environment.hpp"

namespace forkrl::envs {

/// Linear dynamics s' = A s + B a + noise_std * N(0, I) with reward
/// -(s'Qs + a'Ra) evaluated at the pre-transition state. No failure states.
struct LqrEnvParams {
  RowMatrix A;
  RowMatrix B;
  RowMatrix Q;
  RowMatrix R;
  double noise_std = 0.0;
  Vector init_low;
  Vector init_high;
  double action_bound = 1.0;
  std::size_t max_episode_steps = 100;

  // Default desk-scale instance: a lightly damped 2-dim double integrator.
  static LqrEnvParams desk_default();

  std::size_t state_dim() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t action_dim() const { return static_cast<std::size_t>(B.cols()); }
  // Throws ShapeError on inconsistent dims, ConfigError on a non-PD R.
  void validate() const;
};

class LqrEnv final : public Environment {
 public:
  explicit LqrEnv(LqrEnvParams params);

  std::string name() const override { return "lqr"; }
  const LqrEnvParams& params() const { return params_; }
  const Vector& state() const { return state_; }

 protected:
  Vector do_reset(std::uint64_t seed) override;
  StepResult do_step(const Vector& action) override;
  void save_dynamics(BinaryWriter& w) const override;
  void load_dynamics(BinaryReader& r) override;

 private:
  LqrEnvParams params_;
  Vector state_;
  std::mt19937_64 rng_;
};

}  // namespace forkrl::envs
