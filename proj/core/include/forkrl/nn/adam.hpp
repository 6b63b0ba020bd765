#pragma once

#include <cstdint>

#include "forkrl/nn/mlp.hpp"

namespace forkrl::nn {

struct AdamHyper {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates for one MlpParams, shaped like it.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const MlpParams& params, AdamHyper hyper);

  const AdamHyper& hyper() const { return hyper_; }
  std::uint64_t step_count() const { return step_count_; }
  const Gradients& first_moment() const { return m_; }
  const Gradients& second_moment() const { return v_; }

 private:
  friend void adam_step(MlpParams&, const Gradients&, AdamState&);
  friend class AdamStateAccess;

  AdamHyper hyper_;
  Gradients m_;
  Gradients v_;
  std::uint64_t step_count_ = 0;
};

// Bias-corrected Adam update in place; increments step_count.
void adam_step(MlpParams& params, const Gradients& grads, AdamState& state);

// Serialization hook used by snapshots and checkpoints.
class AdamStateAccess {
 public:
  static Gradients& first(AdamState& s) { return s.m_; }
  static Gradients& second(AdamState& s) { return s.v_; }
  static std::uint64_t& steps(AdamState& s) { return s.step_count_; }
  static AdamHyper& hyper(AdamState& s) { return s.hyper_; }
};

}  // namespace forkrl::nn
