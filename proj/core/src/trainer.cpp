#include "forkrl/trainer.hpp"

#include <fstream>

#include "forkrl/errors.hpp"
#include "forkrl/harness/shaping.hpp"
#include "forkrl/seeding.hpp"

namespace forkrl {

namespace {

constexpr std::string_view kMagic = "FORKCKP";
constexpr std::uint32_t kVersion = 1;

void write_vector(BinaryWriter& w, const Vector& v) {
  w.f64s(v.data(), static_cast<std::size_t>(v.size()));
}

Vector read_vector(BinaryReader& r) {
  const auto v = r.f64s();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_transition(BinaryWriter& w, const Transition& t) {
  write_vector(w, t.state);
  write_vector(w, t.action);
  w.f64(t.reward);
  write_vector(w, t.next_state);
  w.boolean(t.done);
  w.boolean(t.done_is_timeout);
}

Transition read_transition(BinaryReader& r) {
  Transition t;
  t.state = read_vector(r);
  t.action = read_vector(r);
  t.reward = r.f64();
  t.next_state = read_vector(r);
  t.done = r.boolean();
  t.done_is_timeout = r.boolean();
  return t;
}

}  // namespace

Trainer::Trainer(AgentConfig config, std::unique_ptr<envs::Environment> env, std::uint64_t seed,
                 TrainerOptions options)
    : env_(std::move(env)),
      agent_(std::move(config), env_ ? env_->spec() : throw UsageError("Trainer: null environment"),
             seed),
      buffer_(agent_.config().buffer_capacity, env_->spec().obs_dim, env_->spec().act_dim),
      options_(options),
      admission_(options.failed_weight, options.success_weight),
      seed_(seed) {}

void Trainer::begin_episode() {
  state_ = env_->reset(derive_seed(seed_, "env-reset", episodes_));
  agent_.observe_state(state_);
  raw_return_ = 0.0;
  shaped_return_ = 0.0;
  pending_.clear();
  in_episode_ = true;
}

void Trainer::store(const Transition& t) {
  if (options_.ratio_buffer) {
    pending_.push_back(t);
  } else {
    buffer_.push(t);
  }
}

void Trainer::finish_episode(bool fell_down) {
  if (options_.ratio_buffer) {
    admit_episode(admission_, buffer_, pending_,
                  fell_down ? EpisodeOutcome::Failed : EpisodeOutcome::Success);
    pending_.clear();
  }
  ++episodes_;
  agent_.end_episode(options_.hardcore_shaping ? shaped_return_ : raw_return_);
  in_episode_ = false;
}

StepMetrics Trainer::train_iteration() {
  if (!in_episode_) begin_episode();
  const auto& cfg = agent_.config();
  const Phase phase = steps_ < cfg.exploration_steps ? Phase::Warmup : Phase::Train;
  const Vector action = agent_.select_action(state_, phase);
  auto raw = env_->step(action);
  const auto step = harness::apply_hardcore_shaping(raw, options_.hardcore_shaping);
  agent_.observe_state(step.next_state);
  raw_return_ += raw.reward;
  shaped_return_ += step.reward;

  Transition t{state_, action, step.reward, step.next_state, step.done, step.done_is_timeout};
  store(t);
  state_ = step.next_state;
  ++steps_;

  StepMetrics m;
  m.step = steps_;
  if (buffer_.size() >= cfg.batch_size) m.update = agent_.update(buffer_);
  if (step.done) {
    m.episode_done = true;
    m.episode_return = raw_return_;
    m.fell_down = step.fell_down();
    finish_episode(m.fell_down);
  }
  m.episode = episodes_;
  m.weight = agent_.weight();
  return m;
}

void Trainer::save_checkpoint(const std::filesystem::path& path, std::uint64_t config_hash) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open checkpoint for writing: " + path.string());
  BinaryWriter w(out);
  w.magic(kMagic);
  w.u32(kVersion);
  w.u64(config_hash);
  w.u64(seed_);
  w.u64(steps_);
  w.u64(episodes_);
  const bool snapshot = env_->supports_snapshot();
  // Without an env snapshot the run resumes at an episode boundary.
  const bool keep_episode = in_episode_ && snapshot;
  w.boolean(keep_episode);
  write_vector(w, keep_episode ? state_ : Vector());
  w.f64(raw_return_);
  w.f64(shaped_return_);
  w.u64(keep_episode ? pending_.size() : 0);
  if (keep_episode) {
    for (const auto& t : pending_) write_transition(w, t);
  }
  agent_.write(w);
  buffer_.write(w);
  admission_.write(w);
  w.boolean(snapshot);
  if (snapshot) env_->save_state(w);
  out.flush();
  if (!out) throw FormatError("failed writing checkpoint: " + path.string());
}

void Trainer::load_checkpoint(const std::filesystem::path& path, std::uint64_t config_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint: " + path.string());
  BinaryReader r(in);
  r.expect_magic(kMagic);
  if (r.u32() != kVersion) throw FormatError("checkpoint: unsupported version");
  if (r.u64() != config_hash) {
    throw ConfigError("checkpoint was written under a different configuration");
  }
  seed_ = r.u64();
  steps_ = r.u64();
  episodes_ = r.u64();
  in_episode_ = r.boolean();
  state_ = read_vector(r);
  raw_return_ = r.f64();
  shaped_return_ = r.f64();
  const auto n_pending = r.u64();
  pending_.clear();
  for (std::uint64_t i = 0; i < n_pending; ++i) pending_.push_back(read_transition(r));
  agent_.read(r);
  auto buffer = ReplayBuffer::read(r);
  if (buffer.obs_dim() != buffer_.obs_dim() || buffer.act_dim() != buffer_.act_dim()) {
    throw FormatError("checkpoint: buffer dimensions differ from the environment");
  }
  buffer_ = std::move(buffer);
  admission_.read(r);
  const bool snapshot = r.boolean();
  if (snapshot) {
    env_->load_state(r);
  }
  if (!in_episode_) {
    raw_return_ = 0.0;
    shaped_return_ = 0.0;
  }
}

}  // namespace forkrl
