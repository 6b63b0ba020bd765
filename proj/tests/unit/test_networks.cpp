#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "forkrl/actor_loss.hpp"
#include "forkrl/errors.hpp"
#include "forkrl/networks.hpp"
#include "forkrl/observation_bounds.hpp"

using namespace forkrl;

namespace {

// Exact linear map y = M x through one ReLU layer: x = relu(x) - relu(-x).
nn::MlpParams linear_through_relu(const RowMatrix& M) {
  const auto in = M.cols();
  const auto out = M.rows();
  RowMatrix w1(2 * in, in);
  w1 << RowMatrix::Identity(in, in), -RowMatrix::Identity(in, in);
  RowMatrix w2(out, 2 * in);
  w2 << M, -M;
  std::vector<nn::Layer> layers(2);
  layers[0].weight = nn::Matrix(w1);
  layers[0].bias = Vector::Zero(2 * in);
  layers[1].weight = nn::Matrix(w2);
  layers[1].bias = Vector::Zero(out);
  return nn::MlpParams(std::move(layers), nn::OutputActivation::identity());
}

RowMatrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  RowMatrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace

TEST(Networks, ActorOutputsRespectMaxAction) {
  std::mt19937_64 rng(1);
  const ActorNet actor = make_actor(3, 2, {32, 32}, 0.75, rng);
  const RowMatrix s = random_matrix(200, 3, rng, 50.0);
  const RowMatrix a = act(actor, s);
  EXPECT_EQ(a.cols(), 2);
  EXPECT_LE(a.cwiseAbs().maxCoeff(), 0.75);
}

TEST(Networks, ShapesFollowDimensions) {
  std::mt19937_64 rng(2);
  const CriticPair c = make_critic_pair(4, 2, {8}, rng);
  EXPECT_EQ(c.q1.input_dim(), 6u);
  EXPECT_EQ(c.q2.output_dim(), 1u);
  EXPECT_FALSE(c.q1 == c.q2);
  const SystemNet f = make_system(4, 2, {8}, rng);
  EXPECT_EQ(f.params.output_dim(), 4u);
  EXPECT_EQ(make_reward(4, 2, {8}, true, rng).params.input_dim(), 10u);
  EXPECT_EQ(make_reward(4, 2, {8}, false, rng).params.input_dim(), 6u);
}

TEST(Networks, SoftUpdateArithmetic) {
  std::mt19937_64 rng(3);
  nn::MlpParams online = make_system(2, 1, {4}, rng).params;
  nn::MlpParams target = make_system(2, 1, {4}, rng).params;
  const auto a = online.flatten();
  const auto b = target.flatten();

  nn::MlpParams t0 = target;
  soft_update(t0, online, 0.0);
  EXPECT_EQ(t0.flatten(), b);

  nn::MlpParams t1 = target;
  soft_update(t1, online, 1.0);
  EXPECT_EQ(t1.flatten(), a);

  nn::MlpParams tq = target;
  soft_update(tq, online, 0.25);
  const auto q = tq.flatten();
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_NEAR(q[i], 0.25 * a[i] + 0.75 * b[i], 1e-15);

  const nn::MlpParams other = make_system(3, 1, {4}, rng).params;
  EXPECT_THROW(soft_update(tq, other, 0.5), ShapeError);
}

TEST(ObservationBounds, DeclaredBoundsWinOverObserved) {
  Vector lo(2), hi(2);
  lo << -1.0, -std::numeric_limits<double>::infinity();
  hi << 1.0, std::numeric_limits<double>::infinity();
  ObservationBounds b(2, lo, hi);
  Vector s(2);
  s << 0.2, 3.0;
  // Nothing observed yet: the second dimension is unbounded.
  Vector far(2);
  far << 5.0, 100.0;
  EXPECT_EQ(b.clip(far)[0], 1.0);
  EXPECT_EQ(b.clip(far)[1], 100.0);
  b.observe(s);
  s << -0.4, -2.0;
  b.observe(s);
  const Vector c = b.clip(far);
  EXPECT_EQ(c[0], 1.0);
  EXPECT_EQ(c[1], 3.0);
  far << -5.0, -100.0;
  EXPECT_EQ(b.clip(far)[1], -2.0);
}

TEST(Networks, UntrainedSystemPredictionsStayInBounds) {
  std::mt19937_64 rng(4);
  const SystemNet f = make_system(3, 1, {16}, rng);
  ObservationBounds b(3);
  const RowMatrix seen = random_matrix(20, 3, rng);
  b.observe_rows(seen);
  const RowMatrix s = random_matrix(50, 3, rng, 30.0);
  const RowMatrix a = random_matrix(50, 1, rng, 30.0);
  const RowMatrix next = predict_next(f, s, a, b);
  for (Eigen::Index i = 0; i < next.rows(); ++i) {
    for (Eigen::Index k = 0; k < 3; ++k) {
      EXPECT_GE(next(i, k), b.low()[k]);
      EXPECT_LE(next(i, k), b.high()[k]);
    }
  }
}

TEST(Networks, RolloutSecondStateComesFromPredictedFirstState) {
  std::mt19937_64 rng(5);
  RowMatrix M(2, 3);
  M << 0.9, 0.1, 0.0, -0.2, 0.8, 0.5;  // s' = [A B][s; a]
  SystemNet f{linear_through_relu(M)};
  const ActorNet actor = make_actor(2, 1, {8}, 1.0, rng);
  ObservationBounds b(2);
  const RowMatrix s = random_matrix(6, 2, rng);

  const ForkRollout r = fork_rollout(f, actor, s, b);
  const RowMatrix a0 = act(actor, s);
  RowMatrix x0(6, 3);
  x0 << s, a0;
  const RowMatrix s1 = x0 * M.transpose();
  const RowMatrix a1 = act(actor, s1);
  RowMatrix x1(6, 3);
  x1 << s1, a1;
  const RowMatrix s2 = x1 * M.transpose();
  EXPECT_LT((r.next - s1).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((r.next_next - s2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Networks, SystemLearnsLinearDynamics) {
  std::mt19937_64 rng(6);
  RowMatrix M(2, 3);
  M << 0.95, 0.1, 0.0, 0.0, 0.95, 0.1;
  SystemNet f = make_system(2, 1, {64, 64}, rng);
  nn::AdamState opt(f.params, {1e-3, 0.9, 0.999, 1e-8});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto draw = [&](std::size_t n) {
    TransitionBatch b;
    b.states.resize(static_cast<Eigen::Index>(n), 2);
    b.actions.resize(static_cast<Eigen::Index>(n), 1);
    for (Eigen::Index i = 0; i < b.states.size(); ++i) b.states.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < b.actions.size(); ++i) b.actions.data()[i] = 2.0 * u(rng);
    RowMatrix x(static_cast<Eigen::Index>(n), 3);
    x << b.states, b.actions;
    b.next_states = x * M.transpose();
    b.rewards = Vector::Zero(static_cast<Eigen::Index>(n));
    b.not_terminal = Vector::Ones(static_cast<Eigen::Index>(n));
    return b;
  };
  const double before = system_loss(f, draw(500));
  for (int i = 0; i < 3000; ++i) train_system(f, opt, draw(100));
  const auto test = draw(500);
  EXPECT_LT(system_loss(f, test), before / 100.0);
  ObservationBounds unbounded(2);
  const RowMatrix pred = predict_next(f, test.states, test.actions, unbounded);
  EXPECT_LT((pred - test.next_states).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Networks, RewardInputLayout) {
  std::mt19937_64 rng(7);
  const RewardNet with = make_reward(2, 1, {4}, true, rng);
  const RewardNet without = make_reward(2, 1, {4}, false, rng);
  RowMatrix s(1, 2), a(1, 1), n(1, 2);
  s << 1, 2;
  a << 3;
  n << 4, 5;
  const RowMatrix x = reward_input(with, s, a, n);
  ASSERT_EQ(x.cols(), 5);
  EXPECT_EQ(x(0, 0), 1);
  EXPECT_EQ(x(0, 2), 3);
  EXPECT_EQ(x(0, 4), 5);
  EXPECT_EQ(reward_input(without, s, a, n).cols(), 3);
}
