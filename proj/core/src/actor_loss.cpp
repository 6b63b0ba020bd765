#include "forkrl/actor_loss.hpp"

#include <algorithm>
#include <limits>

#include "forkrl/errors.hpp"

namespace forkrl {

namespace {

// Accumulates dL/da for every distinct state batch the actor is applied to.
struct ActorApplication {
  nn::ForwardResult fwd;
  RowMatrix action_grad;
};

ActorApplication apply_actor(const ActorNet& actor, const RowMatrix& states) {
  ActorApplication app{nn::mlp_forward(actor.params, states), {}};
  app.action_grad = RowMatrix::Zero(app.fwd.output.rows(), app.fwd.output.cols());
  return app;
}

// Adds coefficient * mean(net(input)) to the loss and the action slice of
// its input gradient to `action_grad`. Returns the batch mean.
double scalar_head(const nn::MlpParams& net, const RowMatrix& input, Eigen::Index action_offset,
                   double coefficient, RowMatrix& action_grad, double& loss, double& margin) {
  auto fwd = nn::mlp_forward(net, input);
  margin = std::min(margin, fwd.cache.min_relu_margin());
  const auto n = static_cast<double>(input.rows());
  const double mean = fwd.output.col(0).mean();
  loss += coefficient * mean;
  const RowMatrix upstream = RowMatrix::Constant(input.rows(), 1, coefficient / n);
  auto g = nn::mlp_backward(net, fwd.cache, upstream, {false, true});
  action_grad += g.input_gradient->middleCols(action_offset, action_grad.cols());
  return mean;
}

double q_term(const CriticPair& critic, const RowMatrix& states, ActorApplication& app,
              double coefficient, double& loss, double& margin) {
  const RowMatrix in = hstack({&states, &app.fwd.output});
  return scalar_head(critic.q1, in, states.cols(), coefficient, app.action_grad, loss, margin);
}

double r_term(const RewardNet& reward, const RowMatrix& states, ActorApplication& app,
              const RowMatrix& next, double coefficient, double& loss, double& margin) {
  const RowMatrix in = reward_input(reward, states, app.fwd.output, next);
  return scalar_head(reward.params, in, states.cols(), coefficient, app.action_grad, loss, margin);
}

void require_state(const RowMatrix* m, const RowMatrix& like, const char* what) {
  if (m == nullptr) throw UsageError(std::string("fork_actor_loss: missing ") + what);
  if (m->rows() != like.rows() || m->cols() != like.cols()) {
    throw ShapeError(std::string("fork_actor_loss: ") + what + " shape differs from states");
  }
}

}  // namespace

ForkRollout fork_rollout(const SystemNet& system, const ActorNet& actor, const RowMatrix& states,
                         const ObservationBounds& bounds) {
  ForkRollout out;
  out.next = predict_next(system, states, act(actor, states), bounds);
  out.next_next = predict_next(system, out.next, act(actor, out.next), bounds);
  return out;
}

bool needs_second_state(Variant variant, double dq_weight) {
  switch (variant) {
    case Variant::DDPG:
    case Variant::TD3:
    case Variant::FORK_S: return false;
    case Variant::FORK_Q:
    case Variant::FORK_DQ: return dq_weight != 0.0;
    default: return true;
  }
}

ActorLossResult fork_actor_loss(const ActorLossSettings& settings, const ActorNet& actor,
                                const CriticPair& critic, const RewardNet* reward,
                                const RowMatrix& states, const LookAhead& ahead) {
  if (states.rows() == 0) throw UsageError("fork_actor_loss: empty batch");
  if (settings.weight < 0.0) throw UsageError("fork_actor_loss: weight must be >= 0");

  ActorLossResult out;
  double margin = std::numeric_limits<double>::infinity();
  double loss = 0.0;

  ActorApplication a0 = apply_actor(actor, states);
  margin = std::min(margin, a0.fwd.cache.min_relu_margin());
  out.terms.base_q = q_term(critic, states, a0, -1.0, loss, margin);

  const double w = settings.weight;
  const double g = settings.gamma;
  const Variant v = settings.variant;
  std::optional<ActorApplication> a1;
  std::optional<ActorApplication> a2;

  if (w > 0.0 && has_fork_terms(v)) {
    const bool uses_reward = v != Variant::FORK_Q && v != Variant::FORK_DQ;
    if (uses_reward && reward == nullptr) {
      throw UsageError("fork_actor_loss: variant " + to_string(v) + " needs a reward network");
    }
    require_state(ahead.next, states, "first look-ahead state");
    const RowMatrix& s1 = *ahead.next;
    const bool second = needs_second_state(v, settings.dq_weight);
    if (second) require_state(ahead.next_next, states, "second look-ahead state");

    a1.emplace(apply_actor(actor, s1));
    margin = std::min(margin, a1->fwd.cache.min_relu_margin());
    if (second) {
      a2.emplace(apply_actor(actor, *ahead.next_next));
      margin = std::min(margin, a2->fwd.cache.min_relu_margin());
    }

    switch (v) {
      case Variant::FORK_S:
        out.terms.reward_now = r_term(*reward, states, a0, s1, -w, loss, margin);
        out.terms.value_next = q_term(critic, s1, *a1, -w * g, loss, margin);
        break;
      case Variant::FORK_Q:
      case Variant::FORK_DQ:
        out.terms.value_next = q_term(critic, s1, *a1, -w, loss, margin);
        if (second) {
          out.terms.value_next_next =
              q_term(critic, *ahead.next_next, *a2, w * settings.dq_weight, loss, margin);
        }
        break;
      default: {
        const RowMatrix& s2 = *ahead.next_next;
        out.terms.reward_now = r_term(*reward, states, a0, s1, -w, loss, margin);
        out.terms.reward_next = r_term(*reward, s1, *a1, s2, -w * g, loss, margin);
        out.terms.value_next_next = q_term(critic, s2, *a2, -w * g * g, loss, margin);
        break;
      }
    }
  }

  out.gradient = nn::mlp_backward(actor.params, a0.fwd.cache, a0.action_grad, {true, false});
  if (a1) out.gradient += nn::mlp_backward(actor.params, a1->fwd.cache, a1->action_grad, {true, false});
  if (a2) out.gradient += nn::mlp_backward(actor.params, a2->fwd.cache, a2->action_grad, {true, false});
  out.loss = loss;
  out.min_relu_margin = margin;
  return out;
}

}  // namespace forkrl
