#include "forkrl/agent.hpp"

#include <limits>
#include <sstream>

#include "forkrl/errors.hpp"
#include "forkrl/nn/snapshot.hpp"
#include "forkrl/seeding.hpp"

namespace forkrl {

namespace {

constexpr std::string_view kMagic = "FORKAGT";
constexpr std::uint32_t kVersion = 1;

void write_rng(BinaryWriter& w, const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  w.str(os.str());
}

void read_rng(BinaryReader& r, std::mt19937_64& rng) {
  std::istringstream is(r.str());
  is >> rng;
  if (!is) throw FormatError("agent: corrupted random engine state");
}

RowMatrix column(const Vector& v) { return RowMatrix(v); }

}  // namespace

Vector select_action(const ActorNet& actor, const Vector& state, double sigma, std::mt19937_64& rng,
                     Phase phase, const envs::EnvSpec& spec) {
  const auto m = static_cast<Eigen::Index>(spec.act_dim);
  if (phase == Phase::Warmup) {
    Vector a(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      a[i] = std::uniform_real_distribution<double>(spec.action_low[i], spec.action_high[i])(rng);
    }
    return a;
  }
  Vector a = act(actor, state);
  if (phase == Phase::Train && sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (Eigen::Index i = 0; i < m; ++i) a[i] += noise(rng);
  }
  return a.cwiseMax(spec.action_low).cwiseMin(spec.action_high);
}

CriticUpdateResult td3_critic_update(CriticPair& critic, nn::AdamState& q1_optimizer,
                                     nn::AdamState* q2_optimizer, const TargetSet& targets,
                                     const TransitionBatch& batch,
                                     const CriticUpdateSettings& settings, std::mt19937_64& rng) {
  if (batch.empty()) throw UsageError("td3_critic_update: empty batch");
  if (settings.twin && q2_optimizer == nullptr) {
    throw UsageError("td3_critic_update: twin critics need two optimizers");
  }
  const auto n = batch.states.rows();

  RowMatrix next_actions = act(targets.actor, batch.next_states);
  if (settings.target_noise > 0.0) {
    std::normal_distribution<double> noise(0.0, settings.target_noise);
    for (Eigen::Index i = 0; i < next_actions.rows(); ++i) {
      for (Eigen::Index j = 0; j < next_actions.cols(); ++j) {
        next_actions(i, j) += std::clamp(noise(rng), -settings.noise_clip, settings.noise_clip);
      }
    }
  }
  for (Eigen::Index i = 0; i < next_actions.rows(); ++i) {
    next_actions.row(i) = next_actions.row(i)
                              .cwiseMax(settings.action_low.transpose())
                              .cwiseMin(settings.action_high.transpose());
  }

  const RowMatrix next_in = hstack({&batch.next_states, &next_actions});
  Vector next_q = nn::mlp_predict(targets.critic.q1, next_in).col(0);
  if (settings.twin) next_q = next_q.cwiseMin(Vector(nn::mlp_predict(targets.critic.q2, next_in).col(0)));

  CriticUpdateResult out;
  out.targets = batch.rewards + settings.gamma * batch.not_terminal.cwiseProduct(next_q);

  const RowMatrix in = hstack({&batch.states, &batch.actions});
  const RowMatrix y = column(out.targets);
  const double scale = 2.0 / static_cast<double>(n);

  auto step = [&](nn::MlpParams& q, nn::AdamState& opt) {
    auto fwd = nn::mlp_forward(q, in);
    const RowMatrix diff = fwd.output - y;
    out.loss += diff.squaredNorm() / static_cast<double>(n);
    auto g = nn::mlp_backward(q, fwd.cache, scale * diff, {true, false});
    nn::adam_step(q, g, opt);
  };
  step(critic.q1, q1_optimizer);
  if (settings.twin) step(critic.q2, *q2_optimizer);
  return out;
}

AgentSeeds AgentSeeds::from(std::uint64_t run_seed) {
  return {derive_seed(run_seed, "actor-init"),  derive_seed(run_seed, "critic-init"),
          derive_seed(run_seed, "system-init"), derive_seed(run_seed, "reward-init"),
          derive_seed(run_seed, "exploration"), derive_seed(run_seed, "target-noise"),
          derive_seed(run_seed, "sampling")};
}

Agent::Agent(AgentConfig config, const envs::EnvSpec& spec, std::uint64_t seed)
    : Agent(std::move(config), spec, AgentSeeds::from(seed)) {}

Agent::Agent(AgentConfig config, const envs::EnvSpec& spec, const AgentSeeds& seeds)
    : config_(std::move(config)), spec_(spec),
      last_system_loss_(std::numeric_limits<double>::infinity()),
      exploration_rng_(seeds.exploration), target_rng_(seeds.target_noise),
      sample_rng_(seeds.sampling) {
  config_.validate();
  spec_.validate();
  const auto& sz = config_.sizes;
  std::mt19937_64 actor_rng(seeds.actor_init);
  std::mt19937_64 critic_rng(seeds.critic_init);
  std::mt19937_64 system_rng(seeds.system_init);
  std::mt19937_64 reward_rng(seeds.reward_init);
  actor_ = make_actor(spec_.obs_dim, spec_.act_dim, sz.actor, max_action(), actor_rng);
  critic_ = make_critic_pair(spec_.obs_dim, spec_.act_dim, sz.critic, critic_rng);
  targets_ = make_targets(actor_, critic_);
  system_ = make_system(spec_.obs_dim, spec_.act_dim, sz.system, system_rng);
  reward_ = make_reward(spec_.obs_dim, spec_.act_dim, sz.reward, config_.reward_uses_next_state,
                        reward_rng);
  actor_opt_ = nn::AdamState(actor_.params, {config_.actor_lr});
  q1_opt_ = nn::AdamState(critic_.q1, {config_.critic_lr});
  q2_opt_ = nn::AdamState(critic_.q2, {config_.critic_lr});
  system_opt_ = nn::AdamState(system_.params, {config_.system_lr});
  reward_opt_ = nn::AdamState(reward_.params, {config_.reward_lr});
  bounds_ = ObservationBounds(spec_.obs_dim, spec_.obs_low, spec_.obs_high);
  weight_ = initial_weight_state(config_);
}

Vector Agent::select_action(const Vector& state, Phase phase) {
  return forkrl::select_action(actor_, state, config_.exploration_noise * max_action(),
                               exploration_rng_, phase, spec_);
}

void Agent::end_episode(double episode_return) {
  switch (config_.variant) {
    case Variant::DDPG:
    case Variant::TD3:
    case Variant::DDPG_FORK:
    case Variant::TD3_FORK_F:
      fold_episode_return(weight_, episode_return, config_.return_average,
                          config_.return_ema_alpha);
      break;
    default:
      update_adaptive_weight(weight_, episode_return, config_.base_weight, config_.base_reward,
                             config_.return_average, config_.return_ema_alpha);
  }
}

UpdateMetrics Agent::update(const ReplayBuffer& buffer) {
  const auto n = config_.batch_size;
  const bool ddpg = is_ddpg_family(config_.variant);
  const double ma = max_action();
  UpdateMetrics m;

  const TransitionBatch batch = buffer.sample_uniform(n, sample_rng_);

  CriticUpdateSettings cs;
  cs.gamma = config_.gamma;
  cs.twin = !ddpg;
  cs.target_noise = ddpg ? 0.0 : config_.target_noise * ma;
  cs.noise_clip = config_.noise_clip * ma;
  cs.action_low = spec_.action_low;
  cs.action_high = spec_.action_high;
  m.critic_loss =
      td3_critic_update(critic_, q1_opt_, ddpg ? nullptr : &q2_opt_, targets_, batch, cs, target_rng_)
          .loss;

  if (config_.trains_models()) {
    last_system_loss_ = train_system(system_, system_opt_, batch);
    m.system_loss = last_system_loss_;
    m.reward_loss = train_reward(reward_, reward_opt_, batch);
  }

  ++updates_;
  if (updates_ % config_.effective_policy_delay() != 0) return m;

  const Variant v = config_.variant;
  m.gate_open = has_fork_terms(v) && threshold_gate(last_system_loss_, config_.system_threshold);
  if (m.gate_open && !gate_open_update_) gate_open_update_ = updates_;
  m.applied_weight = m.gate_open ? weight_.weight : 0.0;

  ActorLossSettings ls{v, m.applied_weight, config_.gamma, config_.effective_dq_weight()};
  ActorLossResult result;
  if (m.applied_weight > 0.0) {
    if (v == Variant::TD3_MT) {
      const auto windows = buffer.sample_consecutive(n, sample_rng_, 2);
      const RowMatrix& s0 = windows[0].states;
      const RowMatrix& s1 = windows[0].next_states;
      const RowMatrix& s2 = windows[1].next_states;
      result = fork_actor_loss(ls, actor_, critic_, &reward_, s0, {&s1, &s2});
    } else {
      const auto roll = fork_rollout(system_, actor_, batch.states, bounds_);
      result = fork_actor_loss(ls, actor_, critic_, &reward_, batch.states,
                               {&roll.next, &roll.next_next});
    }
  } else {
    result = fork_actor_loss(ls, actor_, critic_, &reward_, batch.states);
  }
  nn::adam_step(actor_.params, result.gradient, actor_opt_);
  ++actor_updates_;
  m.actor_updated = true;
  m.actor_loss = result.loss;

  soft_update(targets_.actor.params, actor_.params, config_.tau);
  soft_update(targets_.critic.q1, critic_.q1, config_.tau);
  if (!ddpg) soft_update(targets_.critic.q2, critic_.q2, config_.tau);
  return m;
}

void Agent::write(BinaryWriter& w) const {
  w.magic(kMagic);
  w.u32(kVersion);
  for (const auto* p : {&actor_.params, &critic_.q1, &critic_.q2, &targets_.actor.params,
                        &targets_.critic.q1, &targets_.critic.q2, &system_.params, &reward_.params}) {
    nn::write_params(w, *p);
  }
  for (const auto* o : {&actor_opt_, &q1_opt_, &q2_opt_, &system_opt_, &reward_opt_}) {
    nn::write_adam(w, *o);
  }
  bounds_.write(w);
  weight_.write(w);
  w.f64(last_system_loss_);
  w.u64(updates_);
  w.u64(actor_updates_);
  w.boolean(gate_open_update_.has_value());
  w.u64(gate_open_update_.value_or(0));
  write_rng(w, exploration_rng_);
  write_rng(w, target_rng_);
  write_rng(w, sample_rng_);
}

void Agent::read(BinaryReader& r) {
  r.expect_magic(kMagic);
  if (r.u32() != kVersion) throw FormatError("agent: unsupported version");
  auto load = [&](nn::MlpParams& dst) {
    auto p = nn::read_params(r);
    if (!p.same_shape(dst)) throw FormatError("agent: network shape differs from the config");
    dst = std::move(p);
  };
  load(actor_.params);
  load(critic_.q1);
  load(critic_.q2);
  load(targets_.actor.params);
  load(targets_.critic.q1);
  load(targets_.critic.q2);
  load(system_.params);
  load(reward_.params);
  actor_opt_ = nn::read_adam(r, actor_.params);
  q1_opt_ = nn::read_adam(r, critic_.q1);
  q2_opt_ = nn::read_adam(r, critic_.q2);
  system_opt_ = nn::read_adam(r, system_.params);
  reward_opt_ = nn::read_adam(r, reward_.params);
  bounds_.read(r);
  weight_.read(r);
  last_system_loss_ = r.f64();
  updates_ = r.u64();
  actor_updates_ = r.u64();
  const bool has_gate = r.boolean();
  const auto gate = r.u64();
  gate_open_update_ = has_gate ? std::optional<std::uint64_t>(gate) : std::nullopt;
  read_rng(r, exploration_rng_);
  read_rng(r, target_rng_);
  read_rng(r, sample_rng_);
}

}  // namespace forkrl
