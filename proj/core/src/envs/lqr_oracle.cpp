#include "forkrl/envs/lqr_oracle.hpp"

#include <numeric>
#include <string>

#include "forkrl/errors.hpp"

namespace forkrl::envs {

LqrOracleResult lqr_oracle(const LqrEnvParams& params, double gamma, std::size_t horizon,
                           const LqrOracleOptions& options) {
  params.validate();
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("lqr_oracle: gamma must be in (0, 1]");
  if (horizon == 0) throw ConfigError("lqr_oracle: horizon must be > 0");
  if (options.episodes == 0) throw ConfigError("lqr_oracle: episodes must be > 0");

  const Eigen::MatrixXd A = params.A;
  const Eigen::MatrixXd B = params.B;
  const Eigen::MatrixXd Q = params.Q;
  const Eigen::MatrixXd R = params.R;

  Eigen::MatrixXd P = Q;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(B.cols(), A.rows());
  LqrOracleResult out;
  double delta = 0.0;
  bool converged = false;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    const Eigen::MatrixXd S = R + gamma * B.transpose() * P * B;
    K = gamma * S.ldlt().solve(B.transpose() * P * A);
    const Eigen::MatrixXd closed = A - B * K;
    Eigen::MatrixXd next = Q + K.transpose() * R * K + gamma * closed.transpose() * P * closed;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite()) {
      throw ConvergenceError("lqr_oracle: Riccati recursion diverged after " +
                             std::to_string(it) + " iterations");
    }
    delta = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (delta <= options.tolerance * std::max(1.0, P.cwiseAbs().maxCoeff())) {
      out.iterations = it;
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("lqr_oracle: Riccati recursion did not reach tolerance " +
                           std::to_string(options.tolerance) + " in " +
                           std::to_string(options.max_iterations) +
                           " iterations (last change " + std::to_string(delta) + ")");
  }
  // Gain consistent with the converged cost-to-go.
  K = gamma * (R + gamma * B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
  out.gain = K;
  out.cost_to_go = P;

  LqrEnvParams rollout = params;
  rollout.max_episode_steps = horizon;
  LqrEnv env(rollout);
  out.episode_returns.reserve(options.episodes);
  for (std::size_t e = 0; e < options.episodes; ++e) {
    Vector s = env.reset(options.seed_base + e);
    double total = 0.0;
    for (;;) {
      Vector a = -(out.gain * s);
      a = a.cwiseMax(env.spec().action_low).cwiseMin(env.spec().action_high);
      auto r = env.step(a);
      total += r.reward;
      s = r.next_state;
      if (r.done) break;
    }
    out.episode_returns.push_back(total);
  }
  out.expected_return =
      std::accumulate(out.episode_returns.begin(), out.episode_returns.end(), 0.0) /
      static_cast<double>(out.episode_returns.size());
  return out;
}

}  // namespace forkrl::envs
