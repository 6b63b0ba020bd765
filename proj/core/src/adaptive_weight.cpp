#include "forkrl/adaptive_weight.hpp"

#include <algorithm>
#include <cmath>

#include "forkrl/errors.hpp"

namespace forkrl {

void AdaptiveWeightState::write(BinaryWriter& w) const {
  w.f64(mean_return);
  w.u64(episodes);
  w.f64(weight);
}

void AdaptiveWeightState::read(BinaryReader& r) {
  mean_return = r.f64();
  episodes = r.u64();
  weight = r.f64();
}

double adaptive_weight(double mean_return, double w0, double r0) {
  if (!(r0 > 0.0)) throw ConfigError("adaptive weight: base reward r0 must be > 0");
  return w0 * std::clamp(1.0 - mean_return / r0, 0.0, 1.0);
}

void fold_episode_return(AdaptiveWeightState& state, double episode_return, ReturnAverage mode,
                         double ema_alpha) {
  ++state.episodes;
  if (mode == ReturnAverage::RunningMean || state.episodes == 1) {
    const auto e = static_cast<double>(state.episodes);
    state.mean_return = ((e - 1.0) * state.mean_return + episode_return) / e;
  } else {
    state.mean_return = (1.0 - ema_alpha) * state.mean_return + ema_alpha * episode_return;
  }
}

double update_adaptive_weight(AdaptiveWeightState& state, double episode_return, double w0,
                              double r0, ReturnAverage mode, double ema_alpha) {
  if (!(r0 > 0.0)) throw ConfigError("adaptive weight: base reward r0 must be > 0");
  fold_episode_return(state, episode_return, mode, ema_alpha);
  state.weight = adaptive_weight(state.mean_return, w0, r0);
  return state.weight;
}

bool threshold_gate(double system_loss, double threshold) {
  return !std::isnan(system_loss) && system_loss <= threshold;
}

AdaptiveWeightState initial_weight_state(const AgentConfig& config) {
  AdaptiveWeightState s;
  switch (config.variant) {
    case Variant::DDPG:
    case Variant::TD3: s.weight = 0.0; break;
    case Variant::DDPG_FORK: s.weight = 1.0; break;
    case Variant::TD3_FORK_F: s.weight = config.fixed_weight; break;
    default: s.weight = adaptive_weight(0.0, config.base_weight, config.base_reward); break;
  }
  return s;
}

}  // namespace forkrl
