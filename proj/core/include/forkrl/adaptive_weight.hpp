#pragma once

#include <cstdint>

#include "forkrl/agent_config.hpp"
#include "forkrl/binary_io.hpp"

namespace forkrl {

struct AdaptiveWeightState {
  double mean_return = 0.0;
  std::uint64_t episodes = 0;
  double weight = 0.0;

  void write(BinaryWriter& w) const;
  void read(BinaryReader& r);
  friend bool operator==(const AdaptiveWeightState&, const AdaptiveWeightState&) = default;
};

// w0 * clamp(1 - mean_return / r0, 0, 1).
double adaptive_weight(double mean_return, double w0, double r0);

// Folds one episode return into the average without touching the weight.
void fold_episode_return(AdaptiveWeightState& state, double episode_return,
                         ReturnAverage mode = ReturnAverage::RunningMean, double ema_alpha = 0.05);

// Folds one episode return into the average and recomputes the weight.
// Throws ConfigError unless r0 > 0.
double update_adaptive_weight(AdaptiveWeightState& state, double episode_return, double w0,
                              double r0, ReturnAverage mode = ReturnAverage::RunningMean,
                              double ema_alpha = 0.05);

// FORK terms are active iff the latest system loss is at most the threshold.
bool threshold_gate(double system_loss, double threshold);

// Initial weight state for a variant (fixed variants never change it).
AdaptiveWeightState initial_weight_state(const AgentConfig& config);

}  // namespace forkrl
