#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "forkrl/binary_io.hpp"
#include "forkrl/transition.hpp"

namespace forkrl {

/// Fixed-capacity FIFO experience store with uniform sampling.
///
/// Transitions are addressed by logical index, 0 being the oldest stored
/// item. Each stored transition carries the id of the episode it came from;
/// an episode ends at a transition with done set, so consecutive sampling
/// can stay inside one episode.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t act_dim);

  void push(const Transition& t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }
  bool empty() const { return size_ == 0; }

  Transition at(std::size_t logical) const;
  std::uint64_t episode_id(std::size_t logical) const;

  // n independent uniform draws with replacement.
  TransitionBatch sample_uniform(std::size_t n, std::mt19937_64& rng) const;

  // n windows of `length` consecutive transitions from one episode each.
  // Element k of the result holds step k of every window. Throws
  // UnavailableError when no window fits inside a single episode.
  std::vector<TransitionBatch> sample_consecutive(std::size_t n, std::mt19937_64& rng,
                                                  std::size_t length = 3) const;

  // True when the window of `length` items starting at logical `start` lies
  // within one episode.
  bool window_in_one_episode(std::size_t start, std::size_t length) const;

  void write(BinaryWriter& w) const;
  static ReplayBuffer read(BinaryReader& r);

  // One JSON object per line, oldest first.
  void dump_ndjson(std::ostream& out) const;

  friend bool operator==(const ReplayBuffer& a, const ReplayBuffer& b);

 private:
  std::size_t physical(std::size_t logical) const { return (start_ + logical) % capacity_; }
  TransitionBatch gather(const std::vector<std::size_t>& logical) const;

  std::size_t capacity_;
  std::size_t obs_dim_;
  std::size_t act_dim_;
  std::size_t size_ = 0;
  std::size_t start_ = 0;
  std::uint64_t current_episode_ = 0;

  std::vector<double> states_;
  std::vector<double> actions_;
  std::vector<double> rewards_;
  std::vector<double> next_states_;
  std::vector<std::uint8_t> done_;
  std::vector<std::uint8_t> timeout_;
  std::vector<std::uint64_t> episode_;
};

}  // namespace forkrl
