#include "forkrl/harness/evaluation.hpp"

#include <numeric>

#include "forkrl/errors.hpp"

namespace forkrl::harness {

EvalResult evaluate_policy(const Policy& policy, envs::Environment& env, std::size_t episodes,
                           std::uint64_t seed_base) {
  if (episodes == 0) throw UsageError("evaluate_policy: episodes must be >= 1");
  EvalResult out;
  out.episode_returns.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    Vector s = env.reset(seed_base + e);
    double total = 0.0;
    for (;;) {
      const auto r = env.step(policy(s));
      total += r.reward;
      s = r.next_state;
      if (r.done) break;
    }
    out.episode_returns.push_back(total);
  }
  out.mean_return = std::accumulate(out.episode_returns.begin(), out.episode_returns.end(), 0.0) /
                    static_cast<double>(episodes);
  return out;
}

EvalResult evaluate_policy(const ActorNet& actor, envs::Environment& env, std::size_t episodes,
                           std::uint64_t seed_base) {
  return evaluate_policy([&actor](const Vector& s) { return act(actor, s); }, env, episodes,
                         seed_base);
}

Policy linear_policy(const RowMatrix& gain, const envs::EnvSpec& spec) {
  if (static_cast<std::size_t>(gain.rows()) != spec.act_dim ||
      static_cast<std::size_t>(gain.cols()) != spec.obs_dim) {
    throw ShapeError("linear_policy: gain must be act_dim x obs_dim");
  }
  return [gain, low = spec.action_low, high = spec.action_high](const Vector& s) {
    Vector a = -(gain * s);
    return Vector(a.cwiseMax(low).cwiseMin(high));
  };
}

}  // namespace forkrl::harness
