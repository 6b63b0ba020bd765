#pragma once

#include <cstdint>
#include <span>

#include "forkrl/binary_io.hpp"
#include "forkrl/replay_buffer.hpp"

namespace forkrl {

enum class EpisodeOutcome { Failed, Success };

/// Admits whole episodes so that failed and successful episodes enter the
/// buffer at failed_weight : success_weight.
///
/// Failed episodes are always admitted and each one earns success_weight
/// credit units. A successful episode is admitted only when failed_weight
/// units are banked. The bank holds at most max_banked successes worth of
/// credit, so a long run of failures releases a bounded burst later.
class RatioAdmissionPolicy {
 public:
  explicit RatioAdmissionPolicy(std::uint32_t failed_weight = 5, std::uint32_t success_weight = 1,
                                std::uint32_t max_banked = 10);

  bool decide(EpisodeOutcome outcome);

  std::uint64_t admitted_failed() const { return admitted_failed_; }
  std::uint64_t admitted_success() const { return admitted_success_; }
  std::uint64_t rejected_success() const { return rejected_success_; }
  std::uint32_t failed_weight() const { return failed_weight_; }
  std::uint32_t success_weight() const { return success_weight_; }
  std::uint32_t max_banked() const { return max_banked_; }

  void write(BinaryWriter& w) const;
  void read(BinaryReader& r);

 private:
  std::uint32_t failed_weight_;
  std::uint32_t success_weight_;
  std::uint32_t max_banked_;
  std::uint64_t credit_ = 0;
  std::uint64_t admitted_failed_ = 0;
  std::uint64_t admitted_success_ = 0;
  std::uint64_t rejected_success_ = 0;
};

// Pushes the episode transition by transition when the policy admits it.
bool admit_episode(RatioAdmissionPolicy& policy, ReplayBuffer& buffer,
                   std::span<const Transition> episode, EpisodeOutcome outcome);

}  // namespace forkrl
