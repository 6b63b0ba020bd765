#include "forkrl/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <random>

#include "forkrl/actor_loss.hpp"
#include "forkrl/errors.hpp"
#include "forkrl/nn/finite_diff.hpp"
#include "forkrl/nn/loss.hpp"
#include "forkrl/observation_bounds.hpp"

namespace forkrl {

namespace {

constexpr std::size_t kObs = 3;
constexpr std::size_t kAct = 2;
constexpr Eigen::Index kBatch = 4;
constexpr double kMaxAction = 1.5;
constexpr int kMaxRedraws = 1000;
const std::vector<std::size_t> kHidden{8, 6};

RowMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, scale);
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double max_error(const Vector& analytic, const Vector& numeric, double floor) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, nn::relative_error(analytic[i], numeric[i], floor));
  }
  return worst;
}

// One trial: returns the max relative error, or nullopt to request a redraw.
using Trial = std::function<std::optional<double>(std::mt19937_64&)>;

// Finite differences of `loss` over the flattened parameters of `net`.
Vector fd_params(nn::MlpParams& net, const std::function<double()>& loss, double h) {
  const Vector x0 = to_vector(net.flatten());
  auto f = [&](const Vector& x) {
    net.assign_flat(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    return loss();
  };
  Vector g = nn::finite_diff_grad(f, x0, h);
  net.assign_flat(std::span<const double>(x0.data(), static_cast<std::size_t>(x0.size())));
  return g;
}

// Scalar head loss sum_ij c_ij * out_ij, checked in parameters and inputs.
Trial network_trial(std::function<nn::MlpParams(std::mt19937_64&)> make, std::size_t in_dim,
                    const GradCheckOptions& o) {
  return [=](std::mt19937_64& rng) -> std::optional<double> {
    nn::MlpParams net = make(rng);
    const RowMatrix x = random_matrix(kBatch, static_cast<Eigen::Index>(in_dim), 1.0, rng);
    auto fwd = nn::mlp_forward(net, x);
    if (fwd.cache.min_relu_margin() < o.min_kink_distance) return std::nullopt;
    const RowMatrix c = random_matrix(fwd.output.rows(), fwd.output.cols(), 1.0, rng);
    auto g = nn::mlp_backward(net, fwd.cache, c);
    auto loss_at = [&](const RowMatrix& input) {
      return nn::mlp_predict(net, input).cwiseProduct(c).sum();
    };
    const Vector num_p = fd_params(net, [&] { return loss_at(x); }, o.step);
    double err = max_error(to_vector(g.flatten()), num_p, 1e-4);
    const Vector x_flat = Eigen::Map<const Vector>(x.data(), x.size());
    auto f_in = [&](const Vector& v) {
      return loss_at(Eigen::Map<const RowMatrix>(v.data(), x.rows(), x.cols()));
    };
    const Vector num_x = nn::finite_diff_grad(f_in, x_flat, o.step);
    const Vector ana_x = Eigen::Map<const Vector>(g.input_gradient->data(), g.input_gradient->size());
    return std::max(err, max_error(ana_x, num_x, 1e-4));
  };
}

// Supervised loss of a network against random targets, in its parameters.
Trial regression_trial(bool smooth, std::function<nn::MlpParams(std::mt19937_64&)> make,
                       std::size_t in_dim, const GradCheckOptions& o) {
  return [=](std::mt19937_64& rng) -> std::optional<double> {
    nn::MlpParams net = make(rng);
    const RowMatrix x = random_matrix(kBatch, static_cast<Eigen::Index>(in_dim), 1.0, rng);
    auto fwd = nn::mlp_forward(net, x);
    if (fwd.cache.min_relu_margin() < o.min_kink_distance) return std::nullopt;
    const RowMatrix y = fwd.output + random_matrix(fwd.output.rows(), fwd.output.cols(), 1.5, rng);
    if (smooth) {
      const RowMatrix d = (fwd.output - y).cwiseAbs();
      if (((d.array() - 1.0).abs() < o.min_kink_distance).any()) return std::nullopt;
    }
    auto loss_fn = [&](const RowMatrix& pred) {
      return smooth ? nn::smooth_l1(pred, y) : nn::mse(pred, y);
    };
    auto g = nn::mlp_backward(net, fwd.cache, loss_fn(fwd.output).gradient, {true, false});
    const Vector num = fd_params(net, [&] { return loss_fn(nn::mlp_predict(net, x)).value; }, o.step);
    return max_error(to_vector(g.flatten()), num, 1e-4);
  };
}

// Twin-critic TD loss (1/N) sum_j sum_i (y - Q_j)^2 in both critics' parameters.
Trial critic_trial(const GradCheckOptions& o) {
  return [=](std::mt19937_64& rng) -> std::optional<double> {
    CriticPair critic = make_critic_pair(kObs, kAct, kHidden, rng);
    const RowMatrix x = random_matrix(kBatch, kObs + kAct, 1.0, rng);
    const RowMatrix y = random_matrix(kBatch, 1, 1.0, rng);
    const double n = static_cast<double>(kBatch);
    auto f1 = nn::mlp_forward(critic.q1, x);
    auto f2 = nn::mlp_forward(critic.q2, x);
    if (std::min(f1.cache.min_relu_margin(), f2.cache.min_relu_margin()) < o.min_kink_distance) {
      return std::nullopt;
    }
    auto loss = [&] {
      return ((nn::mlp_predict(critic.q1, x) - y).squaredNorm() +
              (nn::mlp_predict(critic.q2, x) - y).squaredNorm()) / n;
    };
    auto g1 = nn::mlp_backward(critic.q1, f1.cache, (2.0 / n) * (f1.output - y), {true, false});
    auto g2 = nn::mlp_backward(critic.q2, f2.cache, (2.0 / n) * (f2.output - y), {true, false});
    const double e1 = max_error(to_vector(g1.flatten()), fd_params(critic.q1, loss, o.step), 1e-4);
    const double e2 = max_error(to_vector(g2.flatten()), fd_params(critic.q2, loss, o.step), 1e-4);
    return std::max(e1, e2);
  };
}

Trial actor_loss_trial(Variant variant, const GradCheckOptions& o) {
  return [=](std::mt19937_64& rng) -> std::optional<double> {
    ActorNet actor = make_actor(kObs, kAct, kHidden, kMaxAction, rng);
    CriticPair critic = make_critic_pair(kObs, kAct, kHidden, rng);
    SystemNet system = make_system(kObs, kAct, kHidden, rng);
    RewardNet reward = make_reward(kObs, kAct, kHidden, true, rng);
    const RowMatrix s = random_matrix(kBatch, kObs, 1.0, rng);
    ActorLossSettings settings;
    settings.variant = variant;
    settings.weight = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    settings.gamma = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
    settings.dq_weight = variant == Variant::FORK_DQ ? 0.5 : 0.0;

    RowMatrix s1;
    RowMatrix s2;
    if (variant == Variant::TD3_MT) {
      s1 = random_matrix(kBatch, kObs, 1.0, rng);
      s2 = random_matrix(kBatch, kObs, 1.0, rng);
    } else {
      ObservationBounds bounds(kObs, Vector::Constant(kObs, -3.0), Vector::Constant(kObs, 3.0));
      auto roll = fork_rollout(system, actor, s, bounds);
      s1 = std::move(roll.next);
      s2 = std::move(roll.next_next);
    }
    const LookAhead ahead{&s1, &s2};
    const auto result = fork_actor_loss(settings, actor, critic, &reward, s, ahead);
    if (result.min_relu_margin < o.min_kink_distance) return std::nullopt;
    const Vector num = fd_params(
        actor.params,
        [&] { return fork_actor_loss(settings, actor, critic, &reward, s, ahead).loss; }, o.step);
    return max_error(to_vector(result.gradient.flatten()), num, 1e-4);
  };
}

GradCheckCase run_case(const std::string& name, const Trial& trial, const GradCheckOptions& o,
                       std::mt19937_64& rng) {
  GradCheckCase c;
  c.name = name;
  while (c.trials < o.trials) {
    auto err = trial(rng);
    if (!err) {
      if (++c.redrawn > static_cast<std::size_t>(kMaxRedraws) * o.trials) {
        throw ConvergenceError("gradcheck: could not draw kink-free networks for " + name);
      }
      continue;
    }
    c.max_relative_error = std::max(c.max_relative_error, *err);
    ++c.trials;
  }
  c.passed = c.max_relative_error < o.tolerance;
  return c;
}

}  // namespace

bool GradCheckReport::passed() const {
  return !cases.empty() &&
         std::all_of(cases.begin(), cases.end(), [](const GradCheckCase& c) { return c.passed; });
}

GradCheckReport run_gradcheck(const GradCheckOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(o.seed);
  GradCheckReport report;

  auto actor_net = [](std::mt19937_64& r) {
    return make_actor(kObs, kAct, kHidden, kMaxAction, r).params;
  };
  auto critic_net = [](std::mt19937_64& r) { return make_critic_pair(kObs, kAct, kHidden, r).q1; };
  auto system_net = [](std::mt19937_64& r) { return make_system(kObs, kAct, kHidden, r).params; };
  auto reward_net = [](std::mt19937_64& r) {
    return make_reward(kObs, kAct, kHidden, true, r).params;
  };

  report.cases.push_back(run_case("actor network", network_trial(actor_net, kObs, o), o, rng));
  report.cases.push_back(
      run_case("critic network", network_trial(critic_net, kObs + kAct, o), o, rng));
  report.cases.push_back(
      run_case("system network", network_trial(system_net, kObs + kAct, o), o, rng));
  report.cases.push_back(
      run_case("reward network", network_trial(reward_net, 2 * kObs + kAct, o), o, rng));
  report.cases.push_back(run_case("critic twin TD loss", critic_trial(o), o, rng));
  report.cases.push_back(
      run_case("system smooth-L1 loss", regression_trial(true, system_net, kObs + kAct, o), o, rng));
  report.cases.push_back(
      run_case("reward MSE loss", regression_trial(false, reward_net, 2 * kObs + kAct, o), o, rng));
  for (Variant v : {Variant::TD3, Variant::TD3_FORK, Variant::FORK_S, Variant::FORK_Q,
                    Variant::FORK_DQ, Variant::TD3_MT}) {
    report.cases.push_back(run_case("actor loss " + to_string(v), actor_loss_trial(v, o), o, rng));
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace forkrl
