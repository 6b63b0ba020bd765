#include "forkrl/envs/registry.hpp"

#include "forkrl/errors.hpp"

namespace forkrl::envs {

EnvKind parse_env_kind(std::string_view name) {
  if (name == "lqr") return EnvKind::Lqr;
  if (name == "pendulum") return EnvKind::Pendulum;
  if (name == "pointmass") return EnvKind::PointMass;
  if (name == "bridge") return EnvKind::Bridge;
  throw ConfigError("unknown environment '" + std::string(name) +
                    "' (expected lqr, pendulum, pointmass or bridge)");
}

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::Lqr: return "lqr";
    case EnvKind::Pendulum: return "pendulum";
    case EnvKind::PointMass: return "pointmass";
    case EnvKind::Bridge: return "bridge";
  }
  return "unknown";
}

std::unique_ptr<Environment> make_environment(const EnvConfig& config) {
  switch (config.kind) {
    case EnvKind::Lqr: return std::make_unique<LqrEnv>(config.lqr);
    case EnvKind::Pendulum: return std::make_unique<PendulumEnv>(config.pendulum);
    case EnvKind::PointMass: return std::make_unique<PointMassEnv>(config.point_mass);
    case EnvKind::Bridge: return std::make_unique<BridgeEnv>(config.bridge_address, config.bridge);
  }
  throw ConfigError("unknown environment kind");
}

}  // namespace forkrl::envs
