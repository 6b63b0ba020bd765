#include <memory>
#include <random>

#include <benchmark/benchmark.h>

#include "forkrl/actor_loss.hpp"
#include "forkrl/envs/lqr.hpp"
#include "forkrl/networks.hpp"
#include "forkrl/replay_buffer.hpp"
#include "forkrl/trainer.hpp"

using namespace forkrl;

namespace {

RowMatrix gaussian(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  RowMatrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// Critic-shaped network [s; a] -> Q, batch of 100.
void BM_MlpForward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto width = static_cast<std::size_t>(state.range(0));
  const CriticPair c = make_critic_pair(24, 4, {width, width}, rng);
  const RowMatrix x = gaussian(100, 28, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nn::mlp_forward(c.q1, x));
}
BENCHMARK(BM_MlpForward)->Arg(64)->Arg(256);

void BM_MlpBackward(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto width = static_cast<std::size_t>(state.range(0));
  const CriticPair c = make_critic_pair(24, 4, {width, width}, rng);
  const RowMatrix x = gaussian(100, 28, rng);
  const auto fwd = nn::mlp_forward(c.q1, x);
  const RowMatrix up = RowMatrix::Constant(100, 1, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(nn::mlp_backward(c.q1, fwd.cache, up));
}
BENCHMARK(BM_MlpBackward)->Arg(64)->Arg(256);

void BM_ForkActorLoss(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const ActorNet actor = make_actor(24, 4, {256, 256}, 1.0, rng);
  const CriticPair critic = make_critic_pair(24, 4, {256, 256}, rng);
  const RewardNet reward = make_reward(24, 4, {256, 256}, true, rng);
  const RowMatrix s = gaussian(100, 24, rng);
  const RowMatrix s1 = gaussian(100, 24, rng);
  const RowMatrix s2 = gaussian(100, 24, rng);
  const ActorLossSettings settings{Variant::TD3_FORK, 0.6, 0.99, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fork_actor_loss(settings, actor, critic, &reward, s, {&s1, &s2}));
  }
}
BENCHMARK(BM_ForkActorLoss);

void BM_ReplaySample(benchmark::State& state) {
  std::mt19937_64 rng(4);
  ReplayBuffer buf(100'000, 24, 4);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100'000; ++i) {
    Transition t;
    t.state = Vector::NullaryExpr(24, [&] { return n(rng); });
    t.action = Vector::Zero(4);
    t.next_state = t.state;
    t.done = i % 1000 == 999;
    buf.push(t);
  }
  for (auto _ : state) benchmark::DoNotOptimize(buf.sample_uniform(100, rng));
}
BENCHMARK(BM_ReplaySample);

// One environment step plus one full agent update on the LQR.
void BM_TrainIteration(benchmark::State& state) {
  AgentConfig cfg;
  cfg.variant = state.range(0) == 0 ? Variant::TD3 : Variant::TD3_FORK;
  cfg.exploration_steps = 0;
  cfg.sizes.actor = cfg.sizes.critic = cfg.sizes.system = cfg.sizes.reward = {128, 128};
  Trainer t(cfg, std::make_unique<envs::LqrEnv>(envs::LqrEnvParams::desk_default()), 1);
  for (int i = 0; i < 200; ++i) t.train_iteration();
  for (auto _ : state) benchmark::DoNotOptimize(t.train_iteration());
}
BENCHMARK(BM_TrainIteration)->Arg(0)->Arg(1)->ArgNames({"fork"});

}  // namespace

BENCHMARK_MAIN();
