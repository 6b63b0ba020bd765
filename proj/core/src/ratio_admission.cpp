#include "forkrl/ratio_admission.hpp"

#include <algorithm>

#include "forkrl/errors.hpp"

namespace forkrl {

RatioAdmissionPolicy::RatioAdmissionPolicy(std::uint32_t failed_weight, std::uint32_t success_weight,
                                           std::uint32_t max_banked)
    : failed_weight_(failed_weight), success_weight_(success_weight), max_banked_(max_banked) {
  if (failed_weight == 0 || success_weight == 0 || max_banked == 0) {
    throw ConfigError("RatioAdmissionPolicy: weights and bank size must be positive");
  }
}

bool RatioAdmissionPolicy::decide(EpisodeOutcome outcome) {
  if (outcome == EpisodeOutcome::Failed) {
    ++admitted_failed_;
    credit_ = std::min<std::uint64_t>(credit_ + success_weight_,
                                      std::uint64_t{failed_weight_} * max_banked_);
    return true;
  }
  if (credit_ >= failed_weight_) {
    credit_ -= failed_weight_;
    ++admitted_success_;
    return true;
  }
  ++rejected_success_;
  return false;
}

void RatioAdmissionPolicy::write(BinaryWriter& w) const {
  w.u32(failed_weight_);
  w.u32(success_weight_);
  w.u32(max_banked_);
  w.u64(credit_);
  w.u64(admitted_failed_);
  w.u64(admitted_success_);
  w.u64(rejected_success_);
}

void RatioAdmissionPolicy::read(BinaryReader& r) {
  failed_weight_ = r.u32();
  success_weight_ = r.u32();
  max_banked_ = r.u32();
  credit_ = r.u64();
  admitted_failed_ = r.u64();
  admitted_success_ = r.u64();
  rejected_success_ = r.u64();
}

bool admit_episode(RatioAdmissionPolicy& policy, ReplayBuffer& buffer,
                   std::span<const Transition> episode, EpisodeOutcome outcome) {
  if (!policy.decide(outcome)) return false;
  for (const auto& t : episode) buffer.push(t);
  return true;
}

}  // namespace forkrl
