#include "forkrl/envs/environment.hpp"

#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "forkrl/errors.hpp"

namespace forkrl::envs {

void EnvSpec::validate() const {
  const auto od = static_cast<Eigen::Index>(obs_dim);
  const auto ad = static_cast<Eigen::Index>(act_dim);
  if (obs_dim == 0 || act_dim == 0) throw ShapeError("EnvSpec: zero dimension");
  if (action_low.size() != ad || action_high.size() != ad) {
    throw ShapeError("EnvSpec: action bounds do not match act_dim");
  }
  if (!(action_low.array() < action_high.array()).all()) {
    throw ShapeError("EnvSpec: action_low must be < action_high");
  }
  if (!action_low.allFinite() || !action_high.allFinite()) {
    throw ShapeError("EnvSpec: action bounds must be finite");
  }
  if (obs_low.has_value() != obs_high.has_value()) {
    throw ShapeError("EnvSpec: obs_low and obs_high come together");
  }
  if (obs_low) {
    if (obs_low->size() != od || obs_high->size() != od) {
      throw ShapeError("EnvSpec: observation bounds do not match obs_dim");
    }
    if (!(obs_low->array() < obs_high->array()).all()) {
      throw ShapeError("EnvSpec: obs_low must be < obs_high");
    }
  }
  if (max_episode_steps == 0) throw ShapeError("EnvSpec: max_episode_steps must be > 0");
}

double EnvSpec::max_action() const {
  return std::max(action_low.cwiseAbs().maxCoeff(), action_high.cwiseAbs().maxCoeff());
}

bool operator==(const EnvSpec& a, const EnvSpec& b) {
  auto same_opt = [](const std::optional<Vector>& x, const std::optional<Vector>& y) {
    if (x.has_value() != y.has_value()) return false;
    return !x || (x->size() == y->size() && *x == *y);
  };
  return a.obs_dim == b.obs_dim && a.act_dim == b.act_dim &&
         a.action_low.size() == b.action_low.size() && a.action_low == b.action_low &&
         a.action_high.size() == b.action_high.size() && a.action_high == b.action_high &&
         same_opt(a.obs_low, b.obs_low) && same_opt(a.obs_high, b.obs_high) &&
         a.max_episode_steps == b.max_episode_steps;
}

bool StepResult::fell_down() const {
  auto it = info.find("fell_down");
  return it != info.end() && it->second;
}

Environment::Environment(EnvSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

void Environment::set_spec(EnvSpec spec) {
  spec.validate();
  spec_ = std::move(spec);
}

Vector Environment::reset(std::uint64_t seed) {
  Vector s = do_reset(seed);
  if (static_cast<std::size_t>(s.size()) != spec_.obs_dim) {
    throw ShapeError(name() + ": reset returned a state of the wrong dimension");
  }
  steps_ = 0;
  needs_reset_ = false;
  return s;
}

StepResult Environment::step(const Vector& action) {
  if (needs_reset_) throw UsageError(name() + ": step called before reset or after done");
  if (static_cast<std::size_t>(action.size()) != spec_.act_dim) {
    throw ShapeError(name() + ": action has dimension " + std::to_string(action.size()) +
                     ", expected " + std::to_string(spec_.act_dim));
  }
  if (!action.allFinite()) throw ShapeError(name() + ": non-finite action");
  Vector clipped = action.cwiseMax(spec_.action_low).cwiseMin(spec_.action_high);
  if (!warned_clip_ && clipped != action) {
    spdlog::warn("{}: action outside bounds was clipped", name());
    warned_clip_ = true;
  }
  StepResult r = do_step(clipped);
  if (static_cast<std::size_t>(r.next_state.size()) != spec_.obs_dim) {
    throw ShapeError(name() + ": step returned a state of the wrong dimension");
  }
  if (!std::isfinite(r.reward)) throw ShapeError(name() + ": non-finite reward");
  ++steps_;
  if (!r.done && steps_ >= spec_.max_episode_steps) {
    r.done = true;
    r.done_is_timeout = true;
  }
  needs_reset_ = r.done;
  return r;
}

void Environment::save_state(BinaryWriter& w) const {
  if (!supports_snapshot()) throw UsageError(name() + ": state cannot be captured");
  w.u64(steps_);
  w.boolean(needs_reset_);
  w.boolean(warned_clip_);
  save_dynamics(w);
}

void Environment::load_state(BinaryReader& r) {
  if (!supports_snapshot()) throw UsageError(name() + ": state cannot be restored");
  steps_ = r.u64();
  needs_reset_ = r.boolean();
  warned_clip_ = r.boolean();
  load_dynamics(r);
}

void Environment::write_rng(BinaryWriter& w, const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  w.str(os.str());
}

void Environment::read_rng(BinaryReader& r, std::mt19937_64& rng) {
  std::istringstream is(r.str());
  is >> rng;
  if (!is) throw FormatError("environment: corrupted random engine state");
}

void Environment::write_vector(BinaryWriter& w, const Vector& v) {
  w.f64s(v.data(), static_cast<std::size_t>(v.size()));
}

Vector Environment::read_vector(BinaryReader& r, std::size_t expected_dim) {
  const auto v = r.f64s();
  if (v.size() != expected_dim) throw FormatError("environment: state dimension mismatch");
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace forkrl::envs
