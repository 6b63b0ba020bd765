#include "forkrl/agent_config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "forkrl/errors.hpp"

namespace forkrl {

namespace {

struct VariantName {
  Variant variant;
  const char* name;
};

constexpr VariantName kNames[] = {
    {Variant::DDPG, "DDPG"},           {Variant::DDPG_FORK, "DDPG_FORK"},
    {Variant::TD3, "TD3"},             {Variant::TD3_FORK, "TD3_FORK"},
    {Variant::TD3_FORK_F, "TD3_FORK_F"}, {Variant::FORK_S, "FORK_S"},
    {Variant::FORK_Q, "FORK_Q"},       {Variant::FORK_DQ, "FORK_DQ"},
    {Variant::TD3_MT, "TD3_MT"},
};

std::string canonical(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '-') c = '_';
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  // "TD3_FORK_S" style aliases for the shorter enumerators.
  for (const char* alias : {"TD3_FORK_S", "TD3_FORK_Q", "TD3_FORK_DQ"}) {
    if (out == alias) return out.substr(4);
  }
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("AgentConfig: " + message);
}

void require_sizes(const std::vector<std::size_t>& hidden, const char* which) {
  require(!hidden.empty(), std::string(which) + " hidden sizes must not be empty");
  for (auto h : hidden) require(h > 0, std::string(which) + " hidden sizes must be > 0");
}

}  // namespace

Variant parse_variant(std::string_view name) {
  const auto key = canonical(name);
  for (const auto& n : kNames) {
    if (key == n.name) return n.variant;
  }
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

std::string to_string(Variant v) {
  for (const auto& n : kNames) {
    if (n.variant == v) return n.name;
  }
  return "UNKNOWN";
}

std::vector<Variant> all_variants() {
  std::vector<Variant> out;
  for (const auto& n : kNames) out.push_back(n.variant);
  return out;
}

bool has_fork_terms(Variant v) { return v != Variant::DDPG && v != Variant::TD3; }

bool is_ddpg_family(Variant v) { return v == Variant::DDPG || v == Variant::DDPG_FORK; }

void AgentConfig::validate() const {
  require(gamma > 0.0 && gamma <= 1.0, "gamma must be in (0, 1]");
  require(tau > 0.0 && tau <= 1.0, "tau must be in (0, 1]");
  require(actor_lr > 0.0 && critic_lr > 0.0 && system_lr > 0.0 && reward_lr > 0.0,
          "learning rates must be > 0");
  require(batch_size > 0, "batch_size must be > 0");
  require(exploration_noise >= 0.0 && target_noise >= 0.0 && noise_clip >= 0.0,
          "noise scales must be >= 0");
  require(policy_delay >= 1, "policy_delay must be >= 1");
  require(buffer_capacity > 0, "buffer_capacity must be > 0");
  require(base_weight >= 0.0 && std::isfinite(base_weight), "base_weight must be >= 0");
  require(base_reward > 0.0 && std::isfinite(base_reward), "base_reward must be > 0");
  require(system_threshold > 0.0, "system_threshold must be > 0");
  require(fixed_weight >= 0.0, "fixed_weight must be >= 0");
  require(return_ema_alpha > 0.0 && return_ema_alpha <= 1.0, "return_ema_alpha must be in (0, 1]");
  require_sizes(sizes.actor, "actor");
  require_sizes(sizes.critic, "critic");
  require_sizes(sizes.system, "system");
  require_sizes(sizes.reward, "reward");
}

double AgentConfig::effective_dq_weight() const {
  if (dq_weight >= 0.0) return dq_weight;
  return variant == Variant::FORK_DQ ? 0.5 : 0.0;
}

std::size_t AgentConfig::effective_policy_delay() const {
  return is_ddpg_family(variant) ? 1 : policy_delay;
}

bool AgentConfig::trains_models() const {
  return has_fork_terms(variant) || train_models_for_baselines;
}

}  // namespace forkrl
