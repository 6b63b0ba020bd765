#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>

#include "forkrl/binary_io.hpp"
#include "forkrl/nn/matrix.hpp"

namespace forkrl::envs {

struct EnvSpec {
  std::size_t obs_dim = 0;
  std::size_t act_dim = 0;
  Vector action_low;
  Vector action_high;
  std::optional<Vector> obs_low;
  std::optional<Vector> obs_high;
  std::size_t max_episode_steps = 0;

  // Throws ShapeError on inconsistent dims or low >= high.
  void validate() const;
  // Largest |bound| over action dimensions; the actor's output scale.
  double max_action() const;

  friend bool operator==(const EnvSpec&, const EnvSpec&);
};

struct StepResult {
  Vector next_state;
  double reward = 0.0;
  bool done = false;
  bool done_is_timeout = false;
  std::map<std::string, bool> info;

  bool fell_down() const;
};

/// Episodic continuous-control environment.
///
/// The base class owns the episode bookkeeping: actions outside the declared
/// bounds are clipped (with a one-time warning), the episode is cut at
/// max_episode_steps with done_is_timeout set, and stepping a finished
/// episode is a UsageError. Built-in environments are deterministic
/// functions of the reset seed and the action sequence.
class Environment {
 public:
  virtual ~Environment() = default;
  Environment(const Environment&) = delete;
  Environment& operator=(const Environment&) = delete;

  const EnvSpec& spec() const { return spec_; }
  virtual std::string name() const = 0;

  Vector reset(std::uint64_t seed);
  StepResult step(const Vector& action);

  std::size_t elapsed_steps() const { return steps_; }
  bool needs_reset() const { return needs_reset_; }

  // Remote environments cannot capture their state.
  virtual bool supports_snapshot() const { return true; }
  void save_state(BinaryWriter& w) const;
  void load_state(BinaryReader& r);

 protected:
  explicit Environment(EnvSpec spec);
  void set_spec(EnvSpec spec);

  virtual Vector do_reset(std::uint64_t seed) = 0;
  virtual StepResult do_step(const Vector& action) = 0;
  virtual void save_dynamics(BinaryWriter&) const {}
  virtual void load_dynamics(BinaryReader&) {}

  static void write_rng(BinaryWriter& w, const std::mt19937_64& rng);
  static void read_rng(BinaryReader& r, std::mt19937_64& rng);
  static void write_vector(BinaryWriter& w, const Vector& v);
  static Vector read_vector(BinaryReader& r, std::size_t expected_dim);

 private:
  EnvSpec spec_;
  std::size_t steps_ = 0;
  bool needs_reset_ = true;
  bool warned_clip_ = false;
};

}  // namespace forkrl::envs
