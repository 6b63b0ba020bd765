#include "forkrl/harness/experiment_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "forkrl/errors.hpp"
#include "forkrl/seeding.hpp"

namespace forkrl::harness {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw ConfigError("cannot format number");
  return std::string(buf, end);
}

double parse_double(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  double v = 0.0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty()) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty()) {
    // Accept integral scientific notation such as 1e6.
    const double d = parse_double(t, key);
    if (d < 0 || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
      throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" +
                        text + "'");
    }
    return static_cast<std::uint64_t>(d);
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Entries separated by spaces and/or commas.
std::vector<std::string> list_items(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\t') c = ' ';
  }
  return split(text, ' ');
}

std::vector<double> parse_numbers(const std::string& text, const std::string& key) {
  std::vector<double> out;
  for (const auto& tok : list_items(text)) out.push_back(parse_double(tok, key));
  return out;
}

Vector parse_vector(const std::string& text, const std::string& key) {
  const auto v = parse_numbers(text, key);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string fmt_vector(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt_double(v[i]);
  }
  return out;
}

// Rows separated by ';', entries by spaces or commas.
RowMatrix parse_matrix(const std::string& text, const std::string& key) {
  std::vector<std::vector<double>> rows;
  for (const auto& row : split(text, ';')) rows.push_back(parse_numbers(row, key));
  if (rows.empty()) throw ConfigError("config key '" + key + "': empty matrix");
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw ConfigError("config key '" + key + "': ragged matrix rows");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

std::string fmt_matrix(const RowMatrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) out += "; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += " ";
      out += fmt_double(m(i, j));
    }
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text, const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& tok : list_items(text)) out.push_back(parse_u64(tok, key));
  return out;
}

template <typename T>
std::string fmt_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out;
}

struct Field {
  std::string path;  // "section.key"
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

// Every configurable field, in file order.
std::vector<Field> fields(ExperimentConfig& c) {
  std::vector<Field> f;
  auto num = [&f](std::string path, double& ref) {
    f.push_back({path, [&ref] { return fmt_double(ref); },
                 [&ref, path](const std::string& v) { ref = parse_double(v, path); }});
  };
  auto count = [&f](std::string path, std::size_t& ref) {
    f.push_back({path, [&ref] { return std::to_string(ref); },
                 [&ref, path](const std::string& v) { ref = parse_u64(v, path); }});
  };
  auto u64 = [&f](std::string path, std::uint64_t& ref) {
    f.push_back({path, [&ref] { return std::to_string(ref); },
                 [&ref, path](const std::string& v) { ref = parse_u64(v, path); }});
  };
  auto u32 = [&f](std::string path, std::uint32_t& ref) {
    f.push_back({path, [&ref] { return std::to_string(ref); },
                 [&ref, path](const std::string& v) {
                   ref = static_cast<std::uint32_t>(parse_u64(v, path));
                 }});
  };
  auto flag = [&f](std::string path, bool& ref) {
    f.push_back({path, [&ref] { return std::string(ref ? "true" : "false"); },
                 [&ref, path](const std::string& v) { ref = parse_bool(v, path); }});
  };
  auto text = [&f](std::string path, std::string& ref) {
    f.push_back({path, [&ref] { return ref; }, [&ref](const std::string& v) { ref = trim(v); }});
  };
  auto vec = [&f](std::string path, Vector& ref) {
    f.push_back({path, [&ref] { return fmt_vector(ref); },
                 [&ref, path](const std::string& v) { ref = parse_vector(v, path); }});
  };
  auto mat = [&f](std::string path, RowMatrix& ref) {
    f.push_back({path, [&ref] { return fmt_matrix(ref); },
                 [&ref, path](const std::string& v) { ref = parse_matrix(v, path); }});
  };
  auto sizes = [&f](std::string path, std::vector<std::size_t>& ref) {
    f.push_back({path, [&ref] { return fmt_list(ref); },
                 [&ref, path](const std::string& v) { ref = parse_sizes(v, path); }});
  };

  text("experiment.name", c.name);
  count("experiment.total_steps", c.total_steps);
  count("experiment.eval_interval", c.eval_interval);
  count("experiment.eval_episodes", c.eval_episodes);
  count("experiment.instances", c.instances);
  f.push_back({"experiment.seeds", [&c] { return fmt_list(c.seeds); },
               [&c](const std::string& v) {
                 c.seeds.clear();
                 for (const auto& tok : list_items(v)) c.seeds.push_back(parse_u64(tok, "experiment.seeds"));
               }});
  u64("experiment.eval_seed_base", c.eval_seed_base);
  f.push_back({"experiment.output_dir", [&c] { return c.output_dir.string(); },
               [&c](const std::string& v) { c.output_dir = trim(v); }});
  count("experiment.metrics_interval", c.metrics_interval);
  flag("experiment.log_wall_time", c.log_wall_time);
  flag("experiment.save_checkpoints", c.save_checkpoints);
  count("experiment.smoothing_window", c.smoothing_window);

  f.push_back({"env.name", [&c] { return envs::to_string(c.env.kind); },
               [&c](const std::string& v) { c.env.kind = envs::parse_env_kind(trim(v)); }});

  auto& l = c.env.lqr;
  mat("lqr.A", l.A);
  mat("lqr.B", l.B);
  mat("lqr.Q", l.Q);
  mat("lqr.R", l.R);
  num("lqr.noise_std", l.noise_std);
  vec("lqr.init_low", l.init_low);
  vec("lqr.init_high", l.init_high);
  num("lqr.action_bound", l.action_bound);
  count("lqr.max_episode_steps", l.max_episode_steps);

  auto& p = c.env.pendulum;
  num("pendulum.gravity", p.gravity);
  num("pendulum.mass", p.mass);
  num("pendulum.length", p.length);
  num("pendulum.dt", p.dt);
  num("pendulum.max_speed", p.max_speed);
  num("pendulum.max_torque", p.max_torque);
  count("pendulum.max_episode_steps", p.max_episode_steps);

  auto& m = c.env.point_mass;
  num("pointmass.dt", m.dt);
  num("pointmass.action_bound", m.action_bound);
  vec("pointmass.goal", m.goal);
  num("pointmass.init_range", m.init_range);
  num("pointmass.arena", m.arena);
  num("pointmass.out_of_arena_penalty", m.out_of_arena_penalty);
  num("pointmass.control_cost", m.control_cost);
  count("pointmass.max_episode_steps", m.max_episode_steps);

  text("bridge.address", c.env.bridge_address);
  f.push_back({"bridge.timeout_ms", [&c] { return std::to_string(c.env.bridge.timeout.count()); },
               [&c](const std::string& v) {
                 c.env.bridge.timeout =
                     std::chrono::milliseconds(parse_u64(v, "bridge.timeout_ms"));
               }});

  auto& a = c.agent;
  f.push_back({"agent.variant", [&a] { return to_string(a.variant); },
               [&a](const std::string& v) { a.variant = parse_variant(trim(v)); }});
  num("agent.gamma", a.gamma);
  num("agent.tau", a.tau);
  num("agent.actor_lr", a.actor_lr);
  num("agent.critic_lr", a.critic_lr);
  num("agent.system_lr", a.system_lr);
  num("agent.reward_lr", a.reward_lr);
  count("agent.batch_size", a.batch_size);
  num("agent.exploration_noise", a.exploration_noise);
  num("agent.target_noise", a.target_noise);
  num("agent.noise_clip", a.noise_clip);
  count("agent.policy_delay", a.policy_delay);
  count("agent.exploration_steps", a.exploration_steps);
  count("agent.buffer_capacity", a.buffer_capacity);
  num("agent.base_weight", a.base_weight);
  num("agent.base_reward", a.base_reward);
  num("agent.system_threshold", a.system_threshold);
  num("agent.fixed_weight", a.fixed_weight);
  num("agent.dq_weight", a.dq_weight);
  f.push_back({"agent.return_average",
               [&a] {
                 return std::string(a.return_average == ReturnAverage::RunningMean ? "running_mean"
                                                                                   : "ema");
               },
               [&a](const std::string& v) {
                 const auto t = trim(v);
                 if (t == "running_mean") {
                   a.return_average = ReturnAverage::RunningMean;
                 } else if (t == "ema") {
                   a.return_average = ReturnAverage::Exponential;
                 } else {
                   throw ConfigError("agent.return_average must be running_mean or ema");
                 }
               }});
  num("agent.return_ema_alpha", a.return_ema_alpha);
  flag("agent.reward_uses_next_state", a.reward_uses_next_state);
  flag("agent.train_models_for_baselines", a.train_models_for_baselines);
  sizes("agent.actor_hidden", a.sizes.actor);
  sizes("agent.critic_hidden", a.sizes.critic);
  sizes("agent.system_hidden", a.sizes.system);
  sizes("agent.reward_hidden", a.sizes.reward);

  flag("shaping.hardcore", c.trainer.hardcore_shaping);
  flag("shaping.ratio_buffer", c.trainer.ratio_buffer);
  u32("shaping.failed_weight", c.trainer.failed_weight);
  u32("shaping.success_weight", c.trainer.success_weight);
  return f;
}

void apply_tree(ExperimentConfig& c, const pt::ptree& tree) {
  auto all = fields(c);
  std::set<std::string> known;
  for (const auto& f : all) known.insert(f.path);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config key '" + section + "' must live inside a [section]");
    }
    for (const auto& [key, value] : body) {
      const std::string path = section + "." + key;
      if (!known.count(path)) throw ConfigError("unknown config key '" + path + "'");
    }
  }
  for (auto& f : all) {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(f.path, '.'))) f.set(*v);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  agent.validate();
  if (eval_interval == 0) throw ConfigError("experiment.eval_interval must be > 0");
  if (total_steps % eval_interval != 0) {
    throw ConfigError("experiment.eval_interval must divide experiment.total_steps");
  }
  if (eval_episodes == 0) throw ConfigError("experiment.eval_episodes must be > 0");
  if (instances == 0) throw ConfigError("experiment.instances must be > 0");
  if (!seeds.empty() && seeds.size() != instances) {
    throw ConfigError("experiment.seeds must list exactly experiment.instances seeds");
  }
  if (metrics_interval == 0) throw ConfigError("experiment.metrics_interval must be > 0");
  if (smoothing_window == 0) throw ConfigError("experiment.smoothing_window must be > 0");
  switch (env.kind) {
    case envs::EnvKind::Lqr: env.lqr.validate(); break;
    case envs::EnvKind::Pendulum: env.pendulum.validate(); break;
    case envs::EnvKind::PointMass: env.point_mass.validate(); break;
    case envs::EnvKind::Bridge: envs::parse_bridge_address(env.bridge_address); break;
  }
  if (trainer.failed_weight == 0 || trainer.success_weight == 0) {
    throw ConfigError("shaping weights must be > 0");
  }
}

std::vector<std::uint64_t> ExperimentConfig::resolved_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out(instances);
  for (std::size_t i = 0; i < instances; ++i) out[i] = i;
  return out;
}

std::string ExperimentConfig::to_ini() const {
  auto& self = const_cast<ExperimentConfig&>(*this);  // getters only read
  std::string out;
  std::string section;
  for (const auto& f : fields(self)) {
    const auto dot = f.path.find('.');
    const auto s = f.path.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out += "\n";
      out += "[" + s + "]\n";
      section = s;
    }
    out += f.path.substr(dot + 1) + " = " + f.get() + "\n";
  }
  return out;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(to_ini()); }

ExperimentConfig parse_experiment_config(const std::string& ini_text) {
  std::istringstream in(ini_text);
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  ExperimentConfig c;
  apply_tree(c, tree);
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must be section.key=value");
  const std::string path = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  for (auto& f : fields(config)) {
    if (f.path == path) {
      f.set(value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + path + "'");
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& dir) {
  if (dir.is_absolute()) return dir;
  if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') {
    return std::filesystem::path(root) / dir;
  }
  return dir;
}

}  // namespace forkrl::harness
