#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "forkrl/envs/bridge.hpp"
#include "forkrl/envs/lqr.hpp"
#include "forkrl/envs/pendulum.hpp"
#include "forkrl/envs/point_mass.hpp"

namespace forkrl::envs {

enum class EnvKind { Lqr, Pendulum, PointMass, Bridge };

struct EnvConfig {
  EnvKind kind = EnvKind::Lqr;
  LqrEnvParams lqr = LqrEnvParams::desk_default();
  PendulumParams pendulum;
  PointMassParams point_mass;
  std::string bridge_address;
  BridgeOptions bridge;
};

// Accepts "lqr", "pendulum", "pointmass", "bridge"; ConfigError otherwise.
EnvKind parse_env_kind(std::string_view name);
std::string to_string(EnvKind kind);

std::unique_ptr<Environment> make_environment(const EnvConfig& config);

}  // namespace forkrl::envs
