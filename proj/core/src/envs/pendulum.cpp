#include "forkrl/envs/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "forkrl/errors.hpp"

namespace forkrl::envs {

namespace {

EnvSpec pendulum_spec(const PendulumParams& p) {
  p.validate();
  EnvSpec s;
  s.obs_dim = 3;
  s.act_dim = 1;
  s.action_low = Vector::Constant(1, -p.max_torque);
  s.action_high = Vector::Constant(1, p.max_torque);
  s.obs_low = Vector(3);
  *s.obs_low << -1.0, -1.0, -p.max_speed;
  s.obs_high = Vector(3);
  *s.obs_high << 1.0, 1.0, p.max_speed;
  s.max_episode_steps = p.max_episode_steps;
  return s;
}

}  // namespace

double wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  return std::fmod(std::fmod(theta + pi, 2 * pi) + 2 * pi, 2 * pi) - pi;
}

void PendulumParams::validate() const {
  if (!(gravity >= 0.0) || !(mass > 0.0) || !(length > 0.0) || !(dt > 0.0) ||
      !(max_speed > 0.0) || !(max_torque > 0.0)) {
    throw ConfigError("PendulumParams: physical constants must be positive");
  }
  if (max_episode_steps == 0) throw ConfigError("PendulumParams: max_episode_steps must be > 0");
}

PendulumEnv::PendulumEnv(PendulumParams params)
    : Environment(pendulum_spec(params)), params_(params) {}

Vector PendulumEnv::observe() const {
  Vector o(3);
  o << std::cos(theta_), std::sin(theta_), theta_dot_;
  return o;
}

Vector PendulumEnv::set_state(double theta, double theta_dot) {
  theta_ = theta;
  theta_dot_ = std::clamp(theta_dot, -params_.max_speed, params_.max_speed);
  return observe();
}

Vector PendulumEnv::do_reset(std::uint64_t seed) {
  rng_.seed(seed);
  theta_ = std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng_);
  theta_dot_ = std::uniform_real_distribution<double>(-1.0, 1.0)(rng_);
  return observe();
}

StepResult PendulumEnv::do_step(const Vector& action) {
  const auto& p = params_;
  const double u = action[0];
  const double th = wrap_angle(theta_);
  StepResult r;
  r.reward = -(th * th + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u);
  const double accel = 3.0 * p.gravity / (2.0 * p.length) * std::sin(theta_) +
                       3.0 / (p.mass * p.length * p.length) * u;
  theta_dot_ = std::clamp(theta_dot_ + accel * p.dt, -p.max_speed, p.max_speed);
  theta_ += theta_dot_ * p.dt;
  r.next_state = observe();
  // Only the final state decides the failure tag; the base class has not
  // counted this step yet.
  const bool last = elapsed_steps() + 1 >= spec().max_episode_steps;
  r.info["fell_down"] = last && std::abs(wrap_angle(theta_)) > std::numbers::pi / 2;
  return r;
}

void PendulumEnv::save_dynamics(BinaryWriter& w) const {
  w.f64(theta_);
  w.f64(theta_dot_);
  write_rng(w, rng_);
}

void PendulumEnv::load_dynamics(BinaryReader& r) {
  theta_ = r.f64();
  theta_dot_ = r.f64();
  read_rng(r, rng_);
}

}  // namespace forkrl::envs
