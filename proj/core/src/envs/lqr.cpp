#include "forkrl/envs/lqr.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "forkrl/errors.hpp"

namespace forkrl::envs {

namespace {

EnvSpec lqr_spec(const LqrEnvParams& p) {
  p.validate();
  EnvSpec s;
  s.obs_dim = p.state_dim();
  s.act_dim = p.action_dim();
  s.action_low = Vector::Constant(static_cast<Eigen::Index>(s.act_dim), -p.action_bound);
  s.action_high = Vector::Constant(static_cast<Eigen::Index>(s.act_dim), p.action_bound);
  s.max_episode_steps = p.max_episode_steps;
  return s;
}

}  // namespace

LqrEnvParams LqrEnvParams::desk_default() {
  LqrEnvParams p;
  p.A.resize(2, 2);
  p.A << 0.95, 0.1, 0.0, 0.95;
  p.B.resize(2, 1);
  p.B << 0.0, 0.1;
  p.Q = RowMatrix::Identity(2, 2);
  p.R = RowMatrix::Identity(1, 1) * 0.1;
  p.noise_std = 0.0;
  p.init_low = Vector::Constant(2, -1.0);
  p.init_high = Vector::Constant(2, 1.0);
  p.action_bound = 2.0;
  p.max_episode_steps = 100;
  return p;
}

void LqrEnvParams::validate() const {
  const auto n = A.rows();
  if (n == 0 || A.cols() != n) throw ShapeError("LqrEnvParams: A must be square and non-empty");
  if (B.rows() != n || B.cols() == 0) throw ShapeError("LqrEnvParams: B must be n x m");
  if (Q.rows() != n || Q.cols() != n) throw ShapeError("LqrEnvParams: Q must be n x n");
  const auto m = B.cols();
  if (R.rows() != m || R.cols() != m) throw ShapeError("LqrEnvParams: R must be m x m");
  if (init_low.size() != n || init_high.size() != n) {
    throw ShapeError("LqrEnvParams: initial-state bounds must have n entries");
  }
  if (!(init_low.array() <= init_high.array()).all()) {
    throw ConfigError("LqrEnvParams: init_low must be <= init_high");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("LqrEnvParams: noise_std must be >= 0");
  if (!(action_bound > 0.0)) throw ConfigError("LqrEnvParams: action_bound must be > 0");
  if (!Q.isApprox(Q.transpose()) || !R.isApprox(R.transpose())) {
    throw ConfigError("LqrEnvParams: Q and R must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success) throw ConfigError("LqrEnvParams: R must be positive definite");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eq(Q);
  if (eq.eigenvalues().minCoeff() < -1e-12) throw ConfigError("LqrEnvParams: Q must be PSD");
}

LqrEnv::LqrEnv(LqrEnvParams params)
    : Environment(lqr_spec(params)), params_(std::move(params)),
      state_(Vector::Zero(static_cast<Eigen::Index>(params_.state_dim()))) {}

Vector LqrEnv::do_reset(std::uint64_t seed) {
  rng_.seed(seed);
  const auto n = static_cast<Eigen::Index>(params_.state_dim());
  state_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lo = params_.init_low[i];
    const double hi = params_.init_high[i];
    if (lo == hi) {
      state_[i] = lo;
    } else {
      state_[i] = std::uniform_real_distribution<double>(lo, hi)(rng_);
    }
  }
  return state_;
}

StepResult LqrEnv::do_step(const Vector& a) {
  StepResult r;
  r.reward = -(state_.dot(params_.Q * state_) + a.dot(params_.R * a));
  Vector next = params_.A * state_ + params_.B * a;
  if (params_.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, params_.noise_std);
    for (Eigen::Index i = 0; i < next.size(); ++i) next[i] += noise(rng_);
  }
  state_ = next;
  r.next_state = next;
  r.info["fell_down"] = false;
  return r;
}

void LqrEnv::save_dynamics(BinaryWriter& w) const {
  write_vector(w, state_);
  write_rng(w, rng_);
}

void LqrEnv::load_dynamics(BinaryReader& r) {
  state_ = read_vector(r, params_.state_dim());
  read_rng(r, rng_);
}

}  // namespace forkrl::envs
