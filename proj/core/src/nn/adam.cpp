#include "forkrl/nn/adam.hpp"

#include <cmath>

#include "forkrl/errors.hpp"

namespace forkrl::nn {

AdamState::AdamState(const MlpParams& params, AdamHyper hyper)
    : hyper_(hyper), m_(Gradients::zeros_like(params)), v_(Gradients::zeros_like(params)) {
  if (!(hyper.learning_rate > 0.0)) throw ConfigError("Adam learning rate must be > 0");
}

void adam_step(MlpParams& params, const Gradients& grads, AdamState& state) {
  if (!grads.matches(params)) throw ShapeError("adam_step: gradient shape mismatch");
  if (!state.m_.matches(params)) throw ShapeError("adam_step: optimizer state shape mismatch");

  const auto& h = state.hyper_;
  state.step_count_ += 1;
  const double t = static_cast<double>(state.step_count_);
  const double bias1 = 1.0 - std::pow(h.beta1, t);
  const double bias2 = 1.0 - std::pow(h.beta2, t);
  const double step_size = h.learning_rate / bias1;
  const double sqrt_bias2 = std::sqrt(bias2);

  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = h.beta1 * m + (1.0 - h.beta1) * g;
    v = h.beta2 * v + (1.0 - h.beta2) * g.cwiseProduct(g);
    p.array() -= step_size * m.array() / (v.array().sqrt() / sqrt_bias2 + h.epsilon);
  };

  auto& layers = params.mutable_layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weight.eigen(), grads.layers[i].weight, state.m_.layers[i].weight,
           state.v_.layers[i].weight);
    update(layers[i].bias, grads.layers[i].bias, state.m_.layers[i].bias, state.v_.layers[i].bias);
  }
}

}  // namespace forkrl::nn
