#include "forkrl/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "forkrl/errors.hpp"
#include "forkrl/harness/evaluation.hpp"
#include "forkrl/harness/metrics_log.hpp"
#include "forkrl/harness/plots.hpp"

namespace forkrl::harness {

namespace {

EvalRecord evaluate(const Agent& agent, envs::Environment& env, const ExperimentConfig& config,
                    std::size_t instance, std::uint64_t step) {
  const auto r = evaluate_policy(agent.actor(), env, config.eval_episodes, config.eval_seed_base);
  return {instance, step, r.mean_return, r.episode_returns};
}

InstanceResult run_instance(const ExperimentConfig& config, std::size_t instance,
                            std::uint64_t seed, MetricsWriter& metrics, EvalWriter& evals,
                            const std::filesystem::path& dir, const RunHooks& hooks) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto wall = [&]() -> std::optional<double> {
    if (!config.log_wall_time) return std::nullopt;
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  Trainer trainer(config.agent, envs::make_environment(config.env), seed, config.trainer);
  auto eval_env = envs::make_environment(config.env);
  InstanceResult result;
  result.instance = instance;
  result.seed = seed;

  auto record_eval = [&](std::uint64_t step, MetricsRow& row) {
    auto rec = evaluate(trainer.agent(), *eval_env, config, instance, step);
    evals.write(rec);
    row.eval_mean = rec.mean_return;
    result.evals.push_back(std::move(rec));
  };

  {
    MetricsRow row;
    row.instance = instance;
    row.wall_ms = wall();
    row.w = trainer.agent().weight();
    record_eval(0, row);
    metrics.write(row);
  }

  for (std::uint64_t t = 1; t <= config.total_steps; ++t) {
    const StepMetrics m = trainer.train_iteration();
    if (hooks.on_step) hooks.on_step(instance, m);
    if (m.update && m.update->actor_updated && m.update->gate_open && !result.gate_open_step) {
      result.gate_open_step = t;
      spdlog::info("instance {}: FORK gate opened at step {} (system loss {:.6g})", instance, t,
                   *m.update->system_loss);
    }
    const bool eval_now = t % config.eval_interval == 0;
    const bool periodic = t % config.metrics_interval == 0;
    if (!(eval_now || periodic || m.episode_done)) continue;

    MetricsRow row;
    row.instance = instance;
    row.step = t;
    row.wall_ms = wall();
    if (m.episode_done) {
      row.episode = m.episode;
      row.ep_return = m.episode_return;
    }
    if (m.update) {
      row.critic_loss = m.update->critic_loss;
      row.system_loss = m.update->system_loss;
      row.reward_loss = m.update->reward_loss;
      if (m.update->actor_updated) row.gate = m.update->gate_open;
    }
    row.w = m.weight;
    if (eval_now) record_eval(t, row);
    metrics.write(row);
  }
  result.episodes = trainer.episodes();
  if (config.save_checkpoints) {
    trainer.save_checkpoint(dir / ("instance_" + std::to_string(instance) + ".ckpt"), config.hash());
  }
  return result;
}

nlohmann::json summary_json(const ExperimentConfig& config, const ExperimentResult& r) {
  nlohmann::json j;
  j["name"] = config.name;
  j["env"] = envs::to_string(config.env.kind);
  j["variant"] = to_string(config.agent.variant);
  j["total_steps"] = config.total_steps;
  j["eval_interval"] = config.eval_interval;
  j["eval_episodes"] = config.eval_episodes;
  j["best_average"] = r.summary.best_average;
  j["best_step"] = r.summary.best_step;
  j["std_at_best"] = r.summary.std_at_best;
  j["best_instance"] = r.summary.best_instance;
  j["instances"] = nlohmann::json::array();
  for (const auto& inst : r.instances) {
    nlohmann::json e;
    e["instance"] = inst.instance;
    e["seed"] = inst.seed;
    e["episodes"] = inst.episodes;
    e["final_eval"] = inst.evals.empty() ? 0.0 : inst.evals.back().mean_return;
    e["gate_open_step"] = inst.gate_open_step ? nlohmann::json(*inst.gate_open_step) : nlohmann::json();
    j["instances"].push_back(e);
  }
  return j;
}

}  // namespace

std::filesystem::path experiment_output_dir(const ExperimentConfig& config) {
  if (!config.output_dir.empty()) return resolve_output_dir(config.output_dir);
  return resolve_output_dir(std::filesystem::path("runs") / config.name);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunHooks& hooks) {
  config.validate();
  ExperimentResult result;
  result.output_dir = experiment_output_dir(config);
  std::filesystem::create_directories(result.output_dir);
  {
    std::ofstream ini(result.output_dir / "config.ini", std::ios::trunc);
    ini << config.to_ini();
  }
  MetricsWriter metrics(result.output_dir / "metrics.csv");
  EvalWriter evals(result.output_dir / "evals.csv");

  const auto seeds = config.resolved_seeds();
  for (std::size_t l = 0; l < seeds.size(); ++l) {
    spdlog::info("{}: instance {} ({} {} seed {})", config.name, l, to_string(config.agent.variant),
                 envs::to_string(config.env.kind), seeds[l]);
    try {
      result.instances.push_back(
          run_instance(config, l, seeds[l], metrics, evals, result.output_dir, hooks));
    } catch (...) {
      metrics.flush();
      evals.flush();
      throw;
    }
    metrics.flush();
    evals.flush();
  }
  for (const auto& inst : result.instances) {
    result.records.insert(result.records.end(), inst.evals.begin(), inst.evals.end());
  }
  result.summary = summarize(result.records);

  std::ofstream(result.output_dir / "summary.json", std::ios::trunc)
      << summary_json(config, result).dump(2) << '\n';
  PlotStyle style;
  style.title = config.name;
  style.window = config.smoothing_window;
  emit_learning_curves({{to_string(config.agent.variant), tabulate(result.records)}}, style,
                       result.output_dir / "curve.svg");
  return result;
}

CalibrationResult calibrate_threshold(const ExperimentConfig& config, std::size_t steps,
                                      std::size_t tail) {
  if (steps == 0 || tail == 0) throw UsageError("calibrate_threshold: steps and tail must be > 0");
  AgentConfig agent = config.agent;
  agent.train_models_for_baselines = true;
  // The gate compares loss <= threshold; the smallest positive double keeps it shut.
  agent.system_threshold = std::numeric_limits<double>::denorm_min();
  Trainer trainer(agent, envs::make_environment(config.env), config.resolved_seeds().front(),
                  config.trainer);
  CalibrationResult out;
  for (std::size_t t = 0; t < steps; ++t) {
    const auto m = trainer.train_iteration();
    if (m.update && m.update->system_loss) out.losses.push_back(*m.update->system_loss);
  }
  if (out.losses.empty()) throw UnavailableError("calibrate_threshold: no system updates happened");
  const std::size_t n = std::min(tail, out.losses.size());
  out.mean_loss = std::accumulate(out.losses.end() - static_cast<std::ptrdiff_t>(n), out.losses.end(), 0.0) /
                  static_cast<double>(n);
  return out;
}

namespace {

std::optional<LoadedRun> load_run(const std::filesystem::path& dir) {
  const auto evals = dir / "evals.csv";
  if (!std::filesystem::exists(evals)) return std::nullopt;
  LoadedRun run;
  run.dir = dir;
  run.label = dir.filename().string();
  if (std::filesystem::exists(dir / "config.ini")) {
    const auto cfg = load_experiment_config(dir / "config.ini");
    run.label = to_string(cfg.agent.variant);
    run.env = envs::to_string(cfg.env.kind);
  }
  run.records = read_evals_csv(evals);
  return run;
}

}  // namespace

std::vector<LoadedRun> load_runs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  std::vector<LoadedRun> runs;
  if (auto one = load_run(dir)) {
    runs.push_back(std::move(*one));
    return runs;
  }
  std::vector<std::filesystem::path> subdirs;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_directory()) subdirs.push_back(e.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& d : subdirs) {
    if (auto r = load_run(d)) runs.push_back(std::move(*r));
  }
  if (runs.empty()) throw UsageError("no evals.csv under " + dir.string());
  return runs;
}

}  // namespace forkrl::harness
