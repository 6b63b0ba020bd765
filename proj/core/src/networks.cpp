#include "forkrl/networks.hpp"

#include "forkrl/errors.hpp"
#include "forkrl/nn/loss.hpp"

namespace forkrl {

namespace {

std::vector<std::size_t> chain(std::size_t in, const std::vector<std::size_t>& hidden,
                               std::size_t out) {
  std::vector<std::size_t> dims;
  dims.reserve(hidden.size() + 2);
  dims.push_back(in);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

void require_batch(const TransitionBatch& batch, const char* what) {
  if (batch.empty()) throw UsageError(std::string(what) + ": empty batch");
}

}  // namespace

ActorNet make_actor(std::size_t obs_dim, std::size_t act_dim, const std::vector<std::size_t>& hidden,
                    double max_action, std::mt19937_64& rng) {
  const auto dims = chain(obs_dim, hidden, act_dim);
  return {nn::MlpParams::uniform_init(dims, nn::OutputActivation::tanh_scaled(max_action), rng)};
}

CriticPair make_critic_pair(std::size_t obs_dim, std::size_t act_dim,
                            const std::vector<std::size_t>& hidden, std::mt19937_64& rng) {
  const auto dims = chain(obs_dim + act_dim, hidden, 1);
  auto q1 = nn::MlpParams::uniform_init(dims, nn::OutputActivation::identity(), rng);
  auto q2 = nn::MlpParams::uniform_init(dims, nn::OutputActivation::identity(), rng);
  return {std::move(q1), std::move(q2)};
}

SystemNet make_system(std::size_t obs_dim, std::size_t act_dim,
                      const std::vector<std::size_t>& hidden, std::mt19937_64& rng) {
  const auto dims = chain(obs_dim + act_dim, hidden, obs_dim);
  return {nn::MlpParams::uniform_init(dims, nn::OutputActivation::identity(), rng)};
}

RewardNet make_reward(std::size_t obs_dim, std::size_t act_dim,
                      const std::vector<std::size_t>& hidden, bool uses_next_state,
                      std::mt19937_64& rng) {
  const std::size_t in = obs_dim + act_dim + (uses_next_state ? obs_dim : 0);
  const auto dims = chain(in, hidden, 1);
  return {nn::MlpParams::uniform_init(dims, nn::OutputActivation::identity(), rng), uses_next_state};
}

TargetSet make_targets(const ActorNet& actor, const CriticPair& critic) {
  return {ActorNet{actor.params}, CriticPair{critic.q1, critic.q2}};
}

RowMatrix act(const ActorNet& actor, const RowMatrix& states) {
  return nn::mlp_predict(actor.params, states);
}

Vector act(const ActorNet& actor, const Vector& state) { return nn::mlp_predict(actor.params, state); }

void soft_update(nn::MlpParams& target, const nn::MlpParams& online, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw UsageError("soft_update: tau must lie in [0, 1]");
  if (!target.same_shape(online)) throw ShapeError("soft_update: shape mismatch");
  auto& dst = target.mutable_layers();
  const auto& src = online.layers();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i].weight.eigen() = tau * src[i].weight.eigen() + (1.0 - tau) * dst[i].weight.eigen();
    dst[i].bias = tau * src[i].bias + (1.0 - tau) * dst[i].bias;
  }
}

void soft_update(TargetSet& targets, const ActorNet& actor, const CriticPair& critic, double tau) {
  soft_update(targets.actor.params, actor.params, tau);
  soft_update(targets.critic.q1, critic.q1, tau);
  soft_update(targets.critic.q2, critic.q2, tau);
}

RowMatrix reward_input(const RewardNet& net, const RowMatrix& states, const RowMatrix& actions,
                       const RowMatrix& next_states) {
  if (net.uses_next_state) return hstack({&states, &actions, &next_states});
  return hstack({&states, &actions});
}

double system_loss(const SystemNet& net, const TransitionBatch& batch) {
  require_batch(batch, "system_loss");
  const RowMatrix pred = nn::mlp_predict(net.params, hstack({&batch.states, &batch.actions}));
  return nn::smooth_l1(pred, batch.next_states).value;
}

double reward_loss(const RewardNet& net, const TransitionBatch& batch) {
  require_batch(batch, "reward_loss");
  const RowMatrix pred =
      nn::mlp_predict(net.params, reward_input(net, batch.states, batch.actions, batch.next_states));
  return nn::mse(pred, RowMatrix(batch.rewards)).value;
}

double train_system(SystemNet& net, nn::AdamState& optimizer, const TransitionBatch& batch) {
  require_batch(batch, "train_system");
  auto fwd = nn::mlp_forward(net.params, hstack({&batch.states, &batch.actions}));
  const auto loss = nn::smooth_l1(fwd.output, batch.next_states);
  auto grads = nn::mlp_backward(net.params, fwd.cache, loss.gradient, {true, false});
  nn::adam_step(net.params, grads, optimizer);
  return loss.value;
}

double train_reward(RewardNet& net, nn::AdamState& optimizer, const TransitionBatch& batch) {
  require_batch(batch, "train_reward");
  auto fwd = nn::mlp_forward(net.params,
                             reward_input(net, batch.states, batch.actions, batch.next_states));
  const auto loss = nn::mse(fwd.output, RowMatrix(batch.rewards));
  auto grads = nn::mlp_backward(net.params, fwd.cache, loss.gradient, {true, false});
  nn::adam_step(net.params, grads, optimizer);
  return loss.value;
}

RowMatrix predict_next(const SystemNet& net, const RowMatrix& states, const RowMatrix& actions,
                       const ObservationBounds& bounds) {
  RowMatrix next = nn::mlp_predict(net.params, hstack({&states, &actions}));
  bounds.clip(next);
  return next;
}

Vector predict_next(const SystemNet& net, const Vector& state, const Vector& action,
                    const ObservationBounds& bounds) {
  RowMatrix s = state.transpose();
  RowMatrix a = action.transpose();
  return predict_next(net, s, a, bounds).row(0).transpose();
}

}  // namespace forkrl
