#include "forkrl/envs/point_mass.hpp"

#include "forkrl/errors.hpp"

namespace forkrl::envs {

namespace {

EnvSpec point_mass_spec(const PointMassParams& p) {
  p.validate();
  EnvSpec s;
  s.obs_dim = 4;
  s.act_dim = 2;
  s.action_low = Vector::Constant(2, -p.action_bound);
  s.action_high = Vector::Constant(2, p.action_bound);
  s.max_episode_steps = p.max_episode_steps;
  return s;
}

}  // namespace

void PointMassParams::validate() const {
  if (goal.size() != 2) throw ShapeError("PointMassParams: goal must be 2-dim");
  if (!(dt > 0.0) || !(action_bound > 0.0) || !(arena > 0.0)) {
    throw ConfigError("PointMassParams: dt, action_bound and arena must be positive");
  }
  if (!(init_range >= 0.0) || init_range >= arena) {
    throw ConfigError("PointMassParams: init_range must lie inside the arena");
  }
  if (!(out_of_arena_penalty >= 0.0) || !(control_cost >= 0.0)) {
    throw ConfigError("PointMassParams: penalty and control cost must be >= 0");
  }
  if (max_episode_steps == 0) throw ConfigError("PointMassParams: max_episode_steps must be > 0");
}

PointMassEnv::PointMassEnv(PointMassParams params)
    : Environment(point_mass_spec(params)), params_(std::move(params)) {}

Vector PointMassEnv::set_state(const Vector& state) {
  if (state.size() != 4) throw ShapeError("PointMassEnv::set_state: expected 4 entries");
  state_ = state;
  return state_;
}

Vector PointMassEnv::do_reset(std::uint64_t seed) {
  rng_.seed(seed);
  state_.setZero();
  if (params_.init_range > 0.0) {
    std::uniform_real_distribution<double> pos(-params_.init_range, params_.init_range);
    state_[0] = pos(rng_);
    state_[1] = pos(rng_);
  }
  return state_;
}

StepResult PointMassEnv::do_step(const Vector& a) {
  const double dt = params_.dt;
  state_.segment<2>(2) += dt * a;
  state_.segment<2>(0) += dt * state_.segment<2>(2);
  StepResult r;
  const Vector pos = state_.segment<2>(0);
  r.reward = 1.0 - (pos - params_.goal).norm() - params_.control_cost * a.squaredNorm();
  const bool outside = pos.cwiseAbs().maxCoeff() > params_.arena;
  if (outside) {
    r.reward -= params_.out_of_arena_penalty;
    r.done = true;
  }
  r.info["fell_down"] = outside;
  r.next_state = state_;
  return r;
}

void PointMassEnv::save_dynamics(BinaryWriter& w) const {
  write_vector(w, state_);
  write_rng(w, rng_);
}

void PointMassEnv::load_dynamics(BinaryReader& r) {
  state_ = read_vector(r, 4);
  read_rng(r, rng_);
}

}  // namespace forkrl::envs
