#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "forkrl/actor_loss.hpp"
#include "forkrl/adaptive_weight.hpp"
#include "forkrl/agent.hpp"
#include "forkrl/envs/lqr.hpp"
#include "forkrl/errors.hpp"
#include "forkrl/nn/snapshot.hpp"

using namespace forkrl;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RowMatrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  RowMatrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

AgentConfig small_config(Variant v) {
  AgentConfig c;
  c.variant = v;
  c.batch_size = 16;
  c.sizes.actor = {16, 16};
  c.sizes.critic = {16, 16};
  c.sizes.system = {16, 16};
  c.sizes.reward = {16, 16};
  c.base_reward = 10.0;
  c.system_threshold = 1e9;
  return c;
}

// Fills a buffer with a random-action LQR rollout.
ReplayBuffer lqr_buffer(std::size_t steps, std::uint64_t seed) {
  envs::LqrEnv env(envs::LqrEnvParams::desk_default());
  ReplayBuffer buf(steps, env.spec().obs_dim, env.spec().act_dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Vector s = env.reset(seed);
  for (std::size_t t = 0; t < steps; ++t) {
    Vector a = Vector::Constant(1, u(rng));
    const auto r = env.step(a);
    buf.push({s, a, r.reward, r.next_state, r.done, r.done_is_timeout});
    s = r.done ? env.reset(seed + t) : r.next_state;
  }
  return buf;
}

envs::EnvSpec lqr_spec() { return envs::LqrEnv(envs::LqrEnvParams::desk_default()).spec(); }

}  // namespace

TEST(AdaptiveWeight, ClosedFormCases) {
  EXPECT_EQ(adaptive_weight(0.0, 0.6, 320.0), 0.6);
  EXPECT_EQ(adaptive_weight(-50.0, 0.6, 320.0), 0.6);
  EXPECT_EQ(adaptive_weight(320.0, 0.6, 320.0), 0.0);
  EXPECT_EQ(adaptive_weight(160.0, 0.6, 320.0), 0.3);
  EXPECT_EQ(adaptive_weight(1000.0, 0.6, 320.0), 0.0);
}

TEST(AdaptiveWeight, RandomizedLaw) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> r0d(1e-3, 1e4), w0d(0.0, 2.0), rd(-2e4, 2e4);
  for (int i = 0; i < 10000; ++i) {
    const double r0 = r0d(rng), w0 = w0d(rng), rbar = rd(rng);
    const double expected = w0 * std::min(1.0, std::max(0.0, 1.0 - rbar / r0));
    EXPECT_DOUBLE_EQ(adaptive_weight(rbar, w0, r0), expected);
  }
}

TEST(AdaptiveWeight, RunningMeanAndEma) {
  AdaptiveWeightState s;
  update_adaptive_weight(s, 100.0, 0.6, 400.0);
  update_adaptive_weight(s, 300.0, 0.6, 400.0);
  EXPECT_DOUBLE_EQ(s.mean_return, 200.0);
  EXPECT_EQ(s.episodes, 2u);
  EXPECT_DOUBLE_EQ(s.weight, 0.3);

  AdaptiveWeightState e;
  update_adaptive_weight(e, 100.0, 0.6, 400.0, ReturnAverage::Exponential, 0.5);
  update_adaptive_weight(e, 300.0, 0.6, 400.0, ReturnAverage::Exponential, 0.5);
  // First return seeds the average, then 0.5 * 100 + 0.5 * 300.
  EXPECT_DOUBLE_EQ(e.mean_return, 200.0);
  EXPECT_THROW(update_adaptive_weight(e, 1.0, 0.6, 0.0), ConfigError);
}

TEST(AdaptiveWeight, InitialWeightsPerVariant) {
  AgentConfig c;
  c.variant = Variant::TD3;
  EXPECT_EQ(initial_weight_state(c).weight, 0.0);
  c.variant = Variant::TD3_FORK;
  EXPECT_EQ(initial_weight_state(c).weight, c.base_weight);
  c.variant = Variant::TD3_FORK_F;
  EXPECT_EQ(initial_weight_state(c).weight, 0.4);
  c.variant = Variant::DDPG_FORK;
  EXPECT_EQ(initial_weight_state(c).weight, 1.0);
}

TEST(ThresholdGate, Boundaries) {
  EXPECT_TRUE(threshold_gate(0.01, 0.01));
  EXPECT_TRUE(threshold_gate(0.0, 0.01));
  EXPECT_FALSE(threshold_gate(std::nextafter(0.01, 1.0), 0.01));
  EXPECT_FALSE(threshold_gate(kInf, 0.01));
  EXPECT_FALSE(threshold_gate(std::nan(""), 0.01));
}

TEST(AgentConfig, VariantNames) {
  EXPECT_EQ(parse_variant("td3-fork"), Variant::TD3_FORK);
  EXPECT_EQ(parse_variant("TD3_FORK_DQ"), Variant::FORK_DQ);
  EXPECT_EQ(parse_variant("fork-s"), Variant::FORK_S);
  EXPECT_THROW(parse_variant("sac"), ConfigError);
  for (Variant v : all_variants()) EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_FALSE(has_fork_terms(Variant::TD3));
  EXPECT_TRUE(has_fork_terms(Variant::TD3_MT));
  AgentConfig c;
  c.variant = Variant::FORK_DQ;
  EXPECT_EQ(c.effective_dq_weight(), 0.5);
  c.variant = Variant::FORK_Q;
  EXPECT_EQ(c.effective_dq_weight(), 0.0);
  c.variant = Variant::DDPG;
  EXPECT_EQ(c.effective_policy_delay(), 1u);
  c.gamma = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ActorLoss, ZeroWeightIsExactlyBase) {
  std::mt19937_64 rng(2);
  const ActorNet actor = make_actor(2, 1, {8}, 2.0, rng);
  const CriticPair critic = make_critic_pair(2, 1, {8}, rng);
  const RewardNet reward = make_reward(2, 1, {8}, true, rng);
  const RowMatrix s = random_matrix(10, 2, rng);
  const RowMatrix s1 = random_matrix(10, 2, rng);
  const RowMatrix s2 = random_matrix(10, 2, rng);
  const auto base = fork_actor_loss({Variant::TD3, 0.0, 0.99, 0.0}, actor, critic, &reward, s);
  for (Variant v : {Variant::TD3_FORK, Variant::FORK_S, Variant::FORK_DQ, Variant::TD3_MT}) {
    const auto off = fork_actor_loss({v, 0.0, 0.99, 0.5}, actor, critic, &reward, s, {&s1, &s2});
    EXPECT_EQ(off.loss, base.loss);
    EXPECT_EQ(off.gradient.flatten(), base.gradient.flatten());
  }
}

TEST(ActorLoss, TermsComposeAsDocumented) {
  std::mt19937_64 rng(3);
  const ActorNet actor = make_actor(2, 1, {8}, 2.0, rng);
  const CriticPair critic = make_critic_pair(2, 1, {8}, rng);
  const RewardNet reward = make_reward(2, 1, {8}, true, rng);
  const RowMatrix s = random_matrix(10, 2, rng);
  const RowMatrix s1 = random_matrix(10, 2, rng);
  const RowMatrix s2 = random_matrix(10, 2, rng);

  auto q1 = [&](const RowMatrix& x) {
    const RowMatrix a = act(actor, x);
    RowMatrix in(x.rows(), 3);
    in << x, a;
    return nn::mlp_predict(critic.q1, in).mean();
  };
  auto r = [&](const RowMatrix& x, const RowMatrix& nx) {
    return nn::mlp_predict(reward.params, reward_input(reward, x, act(actor, x), nx)).mean();
  };
  const double w = 0.7, g = 0.9;
  const auto fork = fork_actor_loss({Variant::TD3_FORK, w, g, 0.0}, actor, critic, &reward, s, {&s1, &s2});
  EXPECT_NEAR(fork.loss, -q1(s) - w * r(s, s1) - w * g * r(s1, s2) - w * g * g * q1(s2), 1e-12);

  const auto fs = fork_actor_loss({Variant::FORK_S, w, g, 0.0}, actor, critic, &reward, s, {&s1, nullptr});
  EXPECT_NEAR(fs.loss, -q1(s) - w * r(s, s1) - w * g * q1(s1), 1e-12);

  const auto fq = fork_actor_loss({Variant::FORK_Q, w, g, 0.0}, actor, critic, nullptr, s, {&s1, nullptr});
  EXPECT_NEAR(fq.loss, -q1(s) - w * q1(s1), 1e-12);

  const auto fdq = fork_actor_loss({Variant::FORK_DQ, w, g, 0.5}, actor, critic, nullptr, s, {&s1, &s2});
  EXPECT_NEAR(fdq.loss, -q1(s) - w * q1(s1) + w * 0.5 * q1(s2), 1e-12);
}

TEST(ActorLoss, MissingInputsAreUsageErrors) {
  std::mt19937_64 rng(4);
  const ActorNet actor = make_actor(2, 1, {8}, 2.0, rng);
  const CriticPair critic = make_critic_pair(2, 1, {8}, rng);
  const RowMatrix s = random_matrix(4, 2, rng);
  EXPECT_THROW(fork_actor_loss({Variant::TD3_FORK, 0.5, 0.99, 0.0}, actor, critic, nullptr, s, {&s, &s}),
               UsageError);
  const RewardNet reward = make_reward(2, 1, {8}, true, rng);
  EXPECT_THROW(fork_actor_loss({Variant::TD3_FORK, 0.5, 0.99, 0.0}, actor, critic, &reward, s),
               UsageError);
}

TEST(SelectAction, PhasesRespectBounds) {
  std::mt19937_64 rng(5);
  const auto spec = lqr_spec();
  const ActorNet actor = make_actor(2, 1, {8}, spec.max_action(), rng);
  Vector s(2);
  s << 0.3, -0.2;
  const Vector det = act(actor, s);
  EXPECT_EQ(select_action(actor, s, 0.5, rng, Phase::Eval, spec), det);
  bool saw_different = false;
  for (int i = 0; i < 200; ++i) {
    const Vector w = select_action(actor, s, 0.5, rng, Phase::Warmup, spec);
    const Vector t = select_action(actor, s, 5.0, rng, Phase::Train, spec);
    EXPECT_LE(std::abs(w[0]), spec.action_high[0]);
    EXPECT_LE(std::abs(t[0]), spec.action_high[0]);
    saw_different = saw_different || t[0] != det[0];
  }
  EXPECT_TRUE(saw_different);
}

TEST(CriticUpdate, TargetsMatchHandComputation) {
  std::mt19937_64 rng(6);
  const auto spec = lqr_spec();
  const ActorNet actor = make_actor(2, 1, {8}, spec.max_action(), rng);
  CriticPair critic = make_critic_pair(2, 1, {8}, rng);
  const TargetSet targets{make_actor(2, 1, {8}, spec.max_action(), rng), make_critic_pair(2, 1, {8}, rng)};
  (void)actor;
  TransitionBatch b;
  b.states = random_matrix(5, 2, rng);
  b.actions = random_matrix(5, 1, rng);
  b.next_states = random_matrix(5, 2, rng);
  b.rewards = Vector::LinSpaced(5, -1.0, 1.0);
  b.not_terminal = Vector::Ones(5);
  b.not_terminal[2] = 0.0;

  CriticUpdateSettings cs;
  cs.gamma = 0.9;
  cs.action_low = spec.action_low;
  cs.action_high = spec.action_high;
  nn::AdamState o1(critic.q1, {}), o2(critic.q2, {});
  const auto res = td3_critic_update(critic, o1, &o2, targets, b, cs, rng);

  const RowMatrix na = act(targets.actor, b.next_states);
  RowMatrix in(5, 3);
  in << b.next_states, na;
  const RowMatrix t1 = nn::mlp_predict(targets.critic.q1, in);
  const RowMatrix t2 = nn::mlp_predict(targets.critic.q2, in);
  for (Eigen::Index i = 0; i < 5; ++i) {
    const double y = b.rewards[i] + 0.9 * b.not_terminal[i] * std::min(t1(i, 0), t2(i, 0));
    EXPECT_NEAR(res.targets[i], y, 1e-14);
  }
  EXPECT_EQ(res.targets[2], b.rewards[2]);
}

TEST(Agent, PolicyDelayCountsActorUpdates) {
  const auto buf = lqr_buffer(300, 1);
  Agent td3(small_config(Variant::TD3), lqr_spec(), 7);
  for (int i = 0; i < 11; ++i) td3.update(buf);
  EXPECT_EQ(td3.update_count(), 11u);
  EXPECT_EQ(td3.actor_update_count(), 5u);

  Agent ddpg(small_config(Variant::DDPG), lqr_spec(), 7);
  for (int i = 0; i < 11; ++i) ddpg.update(buf);
  EXPECT_EQ(ddpg.actor_update_count(), 11u);
}

TEST(Agent, BaselineNeverTrainsModelsByDefault) {
  const auto buf = lqr_buffer(300, 2);
  Agent a(small_config(Variant::TD3), lqr_spec(), 8);
  const auto before = nn::checksum(a.system().params);
  for (int i = 0; i < 10; ++i) {
    const auto m = a.update(buf);
    EXPECT_FALSE(m.system_loss.has_value());
    EXPECT_FALSE(m.gate_open);
  }
  EXPECT_EQ(nn::checksum(a.system().params), before);
}

TEST(Agent, TrainedModelsNeverReachBaselineActor) {
  const auto buf = lqr_buffer(300, 3);
  AgentConfig with = small_config(Variant::TD3);
  with.train_models_for_baselines = true;
  Agent a(small_config(Variant::TD3), lqr_spec(), 9);
  Agent b(with, lqr_spec(), 9);
  for (int i = 0; i < 20; ++i) {
    a.update(buf);
    const auto m = b.update(buf);
    EXPECT_TRUE(m.system_loss.has_value());
    EXPECT_EQ(nn::checksum(a.actor().params), nn::checksum(b.actor().params));
  }
  EXPECT_NE(nn::checksum(b.system().params), nn::checksum(a.system().params));
}

TEST(Agent, ForkWithZeroBaseWeightMatchesTd3) {
  const auto buf = lqr_buffer(500, 4);
  AgentConfig off = small_config(Variant::TD3_FORK);
  off.base_weight = 0.0;
  Agent a(small_config(Variant::TD3), lqr_spec(), 10);
  Agent b(off, lqr_spec(), 10);
  for (int i = 0; i < 40; ++i) {
    a.update(buf);
    b.update(buf);
    ASSERT_EQ(nn::checksum(a.actor().params), nn::checksum(b.actor().params)) << i;
    ASSERT_EQ(nn::checksum(a.critic().q1), nn::checksum(b.critic().q1)) << i;
  }
}

TEST(Agent, GateFollowsSystemLoss) {
  const auto buf = lqr_buffer(300, 5);
  AgentConfig open = small_config(Variant::TD3_FORK);
  Agent a(open, lqr_spec(), 11);
  EXPECT_EQ(a.last_system_loss(), kInf);
  a.update(buf);
  const auto m = a.update(buf);
  EXPECT_TRUE(m.actor_updated);
  EXPECT_TRUE(m.gate_open);
  EXPECT_EQ(m.applied_weight, open.base_weight);
  EXPECT_EQ(a.gate_open_update(), std::optional<std::uint64_t>(2));

  AgentConfig shut = open;
  shut.system_threshold = 1e-300;
  Agent b(shut, lqr_spec(), 11);
  for (int i = 0; i < 6; ++i) {
    const auto mb = b.update(buf);
    EXPECT_FALSE(mb.gate_open);
    EXPECT_EQ(mb.applied_weight, 0.0);
  }
  EXPECT_FALSE(b.gate_open_update().has_value());
}

TEST(Agent, EveryVariantUpdates) {
  const auto buf = lqr_buffer(400, 6);
  for (Variant v : all_variants()) {
    Agent a(small_config(v), lqr_spec(), 12);
    for (int i = 0; i < 4; ++i) {
      const auto m = a.update(buf);
      EXPECT_TRUE(std::isfinite(m.critic_loss)) << to_string(v);
    }
    EXPECT_GT(a.actor_update_count(), 0u) << to_string(v);
  }
}

TEST(Agent, SerializationContinuesIdentically) {
  const auto buf = lqr_buffer(300, 7);
  Agent a(small_config(Variant::TD3_FORK), lqr_spec(), 13);
  for (int i = 0; i < 5; ++i) a.update(buf);
  a.end_episode(3.0);
  std::stringstream bytes;
  BinaryWriter w(bytes);
  a.write(w);

  Agent b(small_config(Variant::TD3_FORK), lqr_spec(), 99);
  BinaryReader r(bytes);
  b.read(r);
  EXPECT_EQ(b.weight_state(), a.weight_state());
  for (int i = 0; i < 5; ++i) {
    a.update(buf);
    b.update(buf);
  }
  EXPECT_EQ(nn::checksum(a.actor().params), nn::checksum(b.actor().params));
  EXPECT_EQ(nn::checksum(a.system().params), nn::checksum(b.system().params));
  Vector s(2);
  s << 0.1, 0.2;
  EXPECT_EQ(a.select_action(s, Phase::Train), b.select_action(s, Phase::Train));
}

TEST(Agent, FixedWeightVariantKeepsWeight) {
  Agent a(small_config(Variant::TD3_FORK_F), lqr_spec(), 14);
  a.end_episode(5.0);
  a.end_episode(9.0);
  EXPECT_EQ(a.weight(), 0.4);
  EXPECT_EQ(a.weight_state().mean_return, 7.0);
}
