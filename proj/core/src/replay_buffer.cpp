#include "forkrl/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "forkrl/errors.hpp"

namespace forkrl {

namespace {

constexpr std::string_view kMagic = "FORKBUF";
constexpr std::uint32_t kVersion = 1;
constexpr int kRejectionAttempts = 256;

void copy_in(std::vector<double>& dst, std::size_t slot, std::size_t dim, const Vector& v) {
  const std::size_t offset = slot * dim;
  if (dst.size() < offset + dim) dst.resize(offset + dim);
  std::copy(v.data(), v.data() + dim, dst.begin() + static_cast<std::ptrdiff_t>(offset));
}

Vector copy_out(const std::vector<double>& src, std::size_t slot, std::size_t dim) {
  return Eigen::Map<const Vector>(src.data() + slot * dim, static_cast<Eigen::Index>(dim));
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t act_dim)
    : capacity_(capacity), obs_dim_(obs_dim), act_dim_(act_dim) {
  if (capacity == 0) throw ConfigError("ReplayBuffer: capacity must be > 0");
  if (obs_dim == 0 || act_dim == 0) throw ShapeError("ReplayBuffer: zero dimension");
}

void ReplayBuffer::push(const Transition& t) {
  if (static_cast<std::size_t>(t.state.size()) != obs_dim_ ||
      static_cast<std::size_t>(t.next_state.size()) != obs_dim_ ||
      static_cast<std::size_t>(t.action.size()) != act_dim_) {
    throw ShapeError("ReplayBuffer::push: transition dims do not match the buffer");
  }
  if (!std::isfinite(t.reward)) throw ShapeError("ReplayBuffer::push: non-finite reward");

  std::size_t slot;
  if (size_ < capacity_) {
    slot = size_;
    ++size_;
  } else {
    slot = start_;
    start_ = (start_ + 1) % capacity_;
  }
  copy_in(states_, slot, obs_dim_, t.state);
  copy_in(actions_, slot, act_dim_, t.action);
  copy_in(next_states_, slot, obs_dim_, t.next_state);
  if (rewards_.size() <= slot) {
    rewards_.resize(slot + 1);
    done_.resize(slot + 1);
    timeout_.resize(slot + 1);
    episode_.resize(slot + 1);
  }
  rewards_[slot] = t.reward;
  done_[slot] = t.done ? 1 : 0;
  timeout_[slot] = t.done_is_timeout ? 1 : 0;
  episode_[slot] = current_episode_;
  if (t.done) ++current_episode_;
}

Transition ReplayBuffer::at(std::size_t logical) const {
  if (logical >= size_) throw UsageError("ReplayBuffer::at: index out of range");
  const auto p = physical(logical);
  Transition t;
  t.state = copy_out(states_, p, obs_dim_);
  t.action = copy_out(actions_, p, act_dim_);
  t.reward = rewards_[p];
  t.next_state = copy_out(next_states_, p, obs_dim_);
  t.done = done_[p] != 0;
  t.done_is_timeout = timeout_[p] != 0;
  return t;
}

std::uint64_t ReplayBuffer::episode_id(std::size_t logical) const {
  if (logical >= size_) throw UsageError("ReplayBuffer::episode_id: index out of range");
  return episode_[physical(logical)];
}

TransitionBatch ReplayBuffer::gather(const std::vector<std::size_t>& logical) const {
  const auto n = static_cast<Eigen::Index>(logical.size());
  const auto od = static_cast<Eigen::Index>(obs_dim_);
  const auto ad = static_cast<Eigen::Index>(act_dim_);
  TransitionBatch b;
  b.states.resize(n, od);
  b.actions.resize(n, ad);
  b.rewards.resize(n);
  b.next_states.resize(n, od);
  b.not_terminal.resize(n);
  b.indices = logical;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto p = physical(logical[static_cast<std::size_t>(i)]);
    b.states.row(i) = Eigen::Map<const Eigen::RowVectorXd>(states_.data() + p * obs_dim_, od);
    b.actions.row(i) = Eigen::Map<const Eigen::RowVectorXd>(actions_.data() + p * act_dim_, ad);
    b.next_states.row(i) =
        Eigen::Map<const Eigen::RowVectorXd>(next_states_.data() + p * obs_dim_, od);
    b.rewards[i] = rewards_[p];
    const bool terminal = done_[p] != 0 && timeout_[p] == 0;
    b.not_terminal[i] = terminal ? 0.0 : 1.0;
  }
  return b;
}

TransitionBatch ReplayBuffer::sample_uniform(std::size_t n, std::mt19937_64& rng) const {
  if (size_ == 0) throw UnavailableError("sample_uniform: buffer is empty");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return gather(idx);
}

bool ReplayBuffer::window_in_one_episode(std::size_t start, std::size_t length) const {
  if (length == 0 || start + length > size_) return false;
  // Episode ids never decrease in logical order.
  return episode_id(start) == episode_id(start + length - 1);
}

std::vector<TransitionBatch> ReplayBuffer::sample_consecutive(std::size_t n, std::mt19937_64& rng,
                                                              std::size_t length) const {
  if (length == 0) throw UsageError("sample_consecutive: length must be > 0");
  if (size_ < length) {
    throw UnavailableError("sample_consecutive: no episode segment of length " +
                           std::to_string(length));
  }
  const std::size_t last_start = size_ - length;
  std::uniform_int_distribution<std::size_t> pick(0, last_start);
  std::vector<std::size_t> eligible;  // filled only if rejection sampling stalls
  std::vector<std::size_t> starts;
  starts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t chosen = size_;
    if (eligible.empty()) {
      for (int attempt = 0; attempt < kRejectionAttempts; ++attempt) {
        const auto s = pick(rng);
        if (window_in_one_episode(s, length)) {
          chosen = s;
          break;
        }
      }
    }
    if (chosen == size_) {
      if (eligible.empty()) {
        for (std::size_t s = 0; s <= last_start; ++s) {
          if (window_in_one_episode(s, length)) eligible.push_back(s);
        }
        if (eligible.empty()) {
          throw UnavailableError("sample_consecutive: no episode segment of length " +
                                 std::to_string(length));
        }
      }
      std::uniform_int_distribution<std::size_t> pick_eligible(0, eligible.size() - 1);
      chosen = eligible[pick_eligible(rng)];
    }
    starts.push_back(chosen);
  }
  std::vector<TransitionBatch> out;
  out.reserve(length);
  std::vector<std::size_t> idx(n);
  for (std::size_t step = 0; step < length; ++step) {
    for (std::size_t k = 0; k < n; ++k) idx[k] = starts[k] + step;
    out.push_back(gather(idx));
  }
  return out;
}

void ReplayBuffer::write(BinaryWriter& w) const {
  w.magic(kMagic);
  w.u32(kVersion);
  w.u64(capacity_);
  w.u64(obs_dim_);
  w.u64(act_dim_);
  w.u64(current_episode_);
  w.u64(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    const auto p = physical(i);
    for (std::size_t k = 0; k < obs_dim_; ++k) w.f64(states_[p * obs_dim_ + k]);
    for (std::size_t k = 0; k < act_dim_; ++k) w.f64(actions_[p * act_dim_ + k]);
    w.f64(rewards_[p]);
    for (std::size_t k = 0; k < obs_dim_; ++k) w.f64(next_states_[p * obs_dim_ + k]);
    w.u8(done_[p]);
    w.u8(timeout_[p]);
    w.u64(episode_[p]);
  }
}

ReplayBuffer ReplayBuffer::read(BinaryReader& r) {
  r.expect_magic(kMagic);
  if (r.u32() != kVersion) throw FormatError("replay buffer: unsupported version");
  const auto capacity = r.u64();
  const auto obs = r.u64();
  const auto act = r.u64();
  ReplayBuffer buf(capacity, obs, act);
  buf.current_episode_ = r.u64();
  const auto size = r.u64();
  if (size > capacity) throw FormatError("replay buffer: size exceeds capacity");
  buf.size_ = size;
  buf.states_.resize(size * obs);
  buf.actions_.resize(size * act);
  buf.next_states_.resize(size * obs);
  buf.rewards_.resize(size);
  buf.done_.resize(size);
  buf.timeout_.resize(size);
  buf.episode_.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t k = 0; k < obs; ++k) buf.states_[i * obs + k] = r.f64();
    for (std::size_t k = 0; k < act; ++k) buf.actions_[i * act + k] = r.f64();
    buf.rewards_[i] = r.f64();
    for (std::size_t k = 0; k < obs; ++k) buf.next_states_[i * obs + k] = r.f64();
    buf.done_[i] = r.u8();
    buf.timeout_[i] = r.u8();
    buf.episode_[i] = r.u64();
  }
  return buf;
}

void ReplayBuffer::dump_ndjson(std::ostream& out) const {
  auto to_array = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  for (std::size_t i = 0; i < size_; ++i) {
    const auto t = at(i);
    nlohmann::json j = {{"state", to_array(t.state)},
                        {"action", to_array(t.action)},
                        {"reward", t.reward},
                        {"next_state", to_array(t.next_state)},
                        {"done", t.done},
                        {"timeout", t.done_is_timeout},
                        {"episode", episode_id(i)}};
    out << j.dump() << '\n';
  }
}

bool operator==(const ReplayBuffer& a, const ReplayBuffer& b) {
  if (a.capacity_ != b.capacity_ || a.obs_dim_ != b.obs_dim_ || a.act_dim_ != b.act_dim_ ||
      a.size_ != b.size_ || a.current_episode_ != b.current_episode_) {
    return false;
  }
  for (std::size_t i = 0; i < a.size_; ++i) {
    const auto pa = a.physical(i);
    const auto pb = b.physical(i);
    if (!std::equal(a.states_.begin() + pa * a.obs_dim_, a.states_.begin() + (pa + 1) * a.obs_dim_,
                    b.states_.begin() + pb * b.obs_dim_) ||
        !std::equal(a.actions_.begin() + pa * a.act_dim_,
                    a.actions_.begin() + (pa + 1) * a.act_dim_, b.actions_.begin() + pb * b.act_dim_) ||
        !std::equal(a.next_states_.begin() + pa * a.obs_dim_,
                    a.next_states_.begin() + (pa + 1) * a.obs_dim_,
                    b.next_states_.begin() + pb * b.obs_dim_) ||
        a.rewards_[pa] != b.rewards_[pb] || a.done_[pa] != b.done_[pb] ||
        a.timeout_[pa] != b.timeout_[pb] || a.episode_[pa] != b.episode_[pb]) {
      return false;
    }
  }
  return true;
}

}  // namespace forkrl
