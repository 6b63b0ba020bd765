// forkrl: train, evaluate and summarize FORK / TD3 / DDPG experiments.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "forkrl/envs/lqr_oracle.hpp"
#include "forkrl/errors.hpp"
#include "forkrl/gradcheck.hpp"
#include "forkrl/harness/evaluation.hpp"
#include "forkrl/harness/experiment.hpp"
#include "forkrl/harness/experiment_config.hpp"
#include "forkrl/harness/plots.hpp"
#include "forkrl/harness/statistics.hpp"
#include "forkrl/trainer.hpp"

namespace fs = std::filesystem;
using namespace forkrl;
using namespace forkrl::harness;

namespace {

std::string opt_steps(const std::optional<double>& v) {
  return v ? fmt::format("{:.0f}", *v) : "never";
}

ExperimentConfig load_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
  ExperimentConfig cfg = load_experiment_config(path);
  for (const auto& s : sets) apply_override(cfg, s);
  return cfg;
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              std::optional<std::size_t> instances, const std::string& out,
              const std::string& variant, const std::vector<std::string>& sets) {
  ExperimentConfig cfg = load_with_overrides(config_path, sets);
  if (!variant.empty()) cfg.agent.variant = parse_variant(variant);
  if (instances) cfg.instances = *instances;
  if (seed) {
    cfg.seeds.clear();
    for (std::size_t l = 0; l < cfg.instances; ++l) cfg.seeds.push_back(*seed + l);
  } else if (instances) {
    cfg.seeds.clear();
  }
  if (!out.empty()) cfg.output_dir = out;
  cfg.validate();

  const auto result = run_experiment(cfg);
  std::cout << fmt::format("{}: best average {:.4f} at step {} (std {:.4f}), best instance {:.4f}\n",
                           cfg.name, result.summary.best_average, result.summary.best_step,
                           result.summary.std_at_best, result.summary.best_instance);
  for (const auto& inst : result.instances) {
    std::cout << fmt::format("  instance {} seed {}: gate opened at {}\n", inst.instance, inst.seed,
                             inst.gate_open_step ? std::to_string(*inst.gate_open_step) : "never");
  }
  std::cout << "output: " << result.output_dir.string() << '\n';
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& config_path, std::size_t episodes,
             std::optional<std::uint64_t> seed_base) {
  const fs::path ckpt(checkpoint);
  const fs::path cfg_path = config_path.empty() ? ckpt.parent_path() / "config.ini" : fs::path(config_path);
  const ExperimentConfig cfg = load_experiment_config(cfg_path);
  Trainer trainer(cfg.agent, envs::make_environment(cfg.env), 0, cfg.trainer);
  trainer.load_checkpoint(ckpt, cfg.hash());
  auto env = envs::make_environment(cfg.env);
  const auto r = evaluate_policy(trainer.agent().actor(), *env, episodes,
                                 seed_base.value_or(cfg.eval_seed_base));
  std::cout << fmt::format("checkpoint {} (step {}): mean return {:.6g} over {} episodes\n",
                           ckpt.string(), trainer.steps(), r.mean_return, episodes);
  for (std::size_t i = 0; i < r.episode_returns.size(); ++i) {
    std::cout << fmt::format("  episode {}: {:.6g}\n", i, r.episode_returns[i]);
  }
  return 0;
}

int cmd_stats(const std::string& runs_dir, const std::string& baseline, double tolerance) {
  const auto runs = load_runs(runs_dir);
  nlohmann::json report = nlohmann::json::array();

  std::cout << fmt::format("{:<28} {:<10} {:<11} {:>12} {:>10} {:>10} {:>12}\n", "run", "env",
                           "variant", "best_avg", "step", "std", "best_inst");
  for (const auto& run : runs) {
    const auto s = summarize(run.records);
    std::cout << fmt::format("{:<28} {:<10} {:<11} {:>12.4f} {:>10} {:>10.4f} {:>12.4f}\n",
                             run.dir.filename().string(), run.env, run.label, s.best_average,
                             s.best_step, s.std_at_best, s.best_instance);
    report.push_back({{"run", run.dir.filename().string()},
                      {"env", run.env},
                      {"variant", run.label},
                      {"best_average", s.best_average},
                      {"best_step", s.best_step},
                      {"std_at_best", s.std_at_best},
                      {"best_instance", s.best_instance}});
  }

  // Sample efficiency of every run against the baseline variant on the same env.
  std::map<std::string, const LoadedRun*> base_by_env;
  for (const auto& run : runs) {
    if (run.label == baseline) base_by_env.emplace(run.env, &run);
  }
  nlohmann::json efficiency = nlohmann::json::array();
  bool any = false;
  bool all_pass = true;
  for (const auto& run : runs) {
    auto it = base_by_env.find(run.env);
    if (run.label == baseline || it == base_by_env.end()) continue;
    if (!any) {
      std::cout << fmt::format("\nsample efficiency vs {} (tolerance {:.0f}%)\n", baseline,
                               tolerance * 100.0);
      std::cout << fmt::format("{:<10} {:<11} {:>12} {:>12} {:>14} {:>8} {:>6}\n", "env",
                               "variant", "reference", "base_steps", "median_steps", "ratio",
                               "pass");
      any = true;
    }
    const auto se = compare_sample_efficiency(tabulate(it->second->records), tabulate(run.records),
                                              tolerance);
    all_pass = all_pass && se.pass;
    std::cout << fmt::format("{:<10} {:<11} {:>12.4f} {:>12} {:>14} {:>8} {:>6}\n", run.env,
                             run.label, se.reference, se.baseline_steps,
                             opt_steps(se.candidate_median_steps),
                             se.ratio ? fmt::format("{:.3f}", *se.ratio) : "-",
                             se.pass ? "yes" : "no");
    nlohmann::json per = nlohmann::json::array();
    for (const auto& v : se.candidate_instance_steps) per.push_back(v ? nlohmann::json(*v) : nlohmann::json());
    efficiency.push_back({{"env", run.env},
                          {"variant", run.label},
                          {"baseline", baseline},
                          {"reference", se.reference},
                          {"baseline_steps", se.baseline_steps},
                          {"candidate_instance_steps", per},
                          {"candidate_median_steps", se.candidate_median_steps
                                                         ? nlohmann::json(*se.candidate_median_steps)
                                                         : nlohmann::json()},
                          {"ratio", se.ratio ? nlohmann::json(*se.ratio) : nlohmann::json()},
                          {"pass", se.pass}});
  }
  std::ofstream(fs::path(runs_dir) / "stats.json", std::ios::trunc)
      << nlohmann::json{{"runs", report}, {"sample_efficiency", efficiency}}.dump(2) << '\n';
  if (any) std::cout << (all_pass ? "all candidates within tolerance\n" : "some candidates regressed\n");
  return 0;
}

int cmd_plot(const std::string& runs_dir, std::size_t window, const std::string& out_dir) {
  const auto runs = load_runs(runs_dir);
  std::map<std::string, std::vector<CurveSeries>> by_env;
  for (const auto& run : runs) by_env[run.env].push_back({run.label, tabulate(run.records)});
  const fs::path out = out_dir.empty() ? fs::path(runs_dir) : fs::path(out_dir);
  fs::create_directories(out);
  for (const auto& [env, series] : by_env) {
    PlotStyle style;
    style.title = env.empty() ? "learning curves" : env;
    style.window = window;
    const auto file = out / fmt::format("curves_{}.svg", env.empty() ? "runs" : env);
    if (emit_learning_curves(series, style, file)) std::cout << "wrote " << file.string() << '\n';
  }
  return 0;
}

int cmd_gradcheck(std::size_t trials, std::uint64_t seed) {
  GradCheckOptions opt;
  opt.trials = trials;
  opt.seed = seed;
  const auto report = run_gradcheck(opt);
  for (const auto& c : report.cases) {
    std::cout << fmt::format("{:<28} trials {:>4} redrawn {:>3} max rel err {:.3e} {}\n", c.name,
                             c.trials, c.redrawn, c.max_relative_error, c.passed ? "ok" : "FAIL");
  }
  std::cout << fmt::format("{} in {:.2f}s\n", report.passed() ? "passed" : "FAILED", report.seconds);
  return report.passed() ? 0 : 1;
}

int cmd_calibrate(const std::string& config_path, const std::vector<std::string>& sets,
                  std::size_t steps, std::size_t tail) {
  const ExperimentConfig cfg = load_with_overrides(config_path, sets);
  cfg.validate();
  const auto r = calibrate_threshold(cfg, steps, tail);
  std::cout << fmt::format("system loss after {} steps: mean of last {} updates {:.6g}\n", steps,
                           std::min(tail, r.losses.size()), r.mean_loss);
  return 0;
}

int cmd_oracle(const std::string& config_path, const std::vector<std::string>& sets,
               std::size_t episodes) {
  const ExperimentConfig cfg = load_with_overrides(config_path, sets);
  cfg.validate();
  if (cfg.env.kind != envs::EnvKind::Lqr) throw UsageError("oracle: the config must use env lqr");
  envs::LqrOracleOptions opt;
  opt.episodes = episodes;
  opt.seed_base = cfg.eval_seed_base;
  const auto r = envs::lqr_oracle(cfg.env.lqr, cfg.agent.gamma, cfg.env.lqr.max_episode_steps, opt);
  std::string gain;
  for (Eigen::Index i = 0; i < r.gain.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.gain.cols(); ++j) gain += fmt::format(" {:.6g}", r.gain(i, j));
    if (i + 1 < r.gain.rows()) gain += ";";
  }
  std::cout << fmt::format("gain K =[{} ] after {} iterations\n", gain, r.iterations);
  std::cout << fmt::format("expected return {:.6g} over {} episodes (seeds from {})\n",
                           r.expected_return, episodes, cfg.eval_seed_base);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Minibatch temporaries exceed the default mmap threshold; keep them on the heap.
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
  CLI::App app{"FORK actor-critic experiments"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  std::string config, out, variant, checkpoint, runs, baseline = "TD3", plot_out;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed, seed_base;
  std::optional<std::size_t> instances;
  std::size_t episodes = 10, window = 5, trials = 100, steps = 20000, tail = 200;
  std::uint64_t gc_seed = 1;
  double tolerance = 0.10;

  auto* train = app.add_subcommand("train", "train every instance of an experiment");
  train->add_option("--config", config, "experiment .ini")->required()->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "first seed; instance l uses seed + l");
  train->add_option("--instances", instances, "number of instances");
  train->add_option("--out", out, "output directory");
  train->add_option("--variant", variant, "agent variant override");
  train->add_option("--set", sets, "section.key=value override")->take_all();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint without exploration noise");
  eval->add_option("--checkpoint", checkpoint, "instance_<l>.ckpt")->required()->check(CLI::ExistingFile);
  eval->add_option("--config", config, "config.ini (default: next to the checkpoint)");
  eval->add_option("--episodes", episodes, "evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed-base", seed_base, "seed of the first evaluation episode");

  auto* stats = app.add_subcommand("stats", "best average, std and sample-efficiency tables");
  stats->add_option("--runs", runs, "run directory or a directory of runs")->required();
  stats->add_option("--baseline", baseline, "baseline variant for sample efficiency");
  stats->add_option("--tolerance", tolerance, "allowed sample-efficiency regression");

  auto* plot = app.add_subcommand("plot", "learning curves, one SVG per environment");
  plot->add_option("--runs", runs, "run directory or a directory of runs")->required();
  plot->add_option("--window", window, "moving-average window in evaluations")->check(CLI::PositiveNumber);
  plot->add_option("--out", plot_out, "output directory (default: --runs)");

  auto* grad = app.add_subcommand("gradcheck", "analytic vs finite-difference gradients");
  grad->add_option("--trials", trials, "random trials per case")->check(CLI::PositiveNumber);
  grad->add_option("--seed", gc_seed, "seed");

  auto* calib = app.add_subcommand("calibrate", "system-network loss reached with the gate shut");
  calib->add_option("--config", config, "experiment .ini")->required()->check(CLI::ExistingFile);
  calib->add_option("--steps", steps, "training steps")->check(CLI::PositiveNumber);
  calib->add_option("--tail", tail, "updates averaged at the end")->check(CLI::PositiveNumber);
  calib->add_option("--set", sets, "section.key=value override")->take_all();

  auto* oracle = app.add_subcommand("oracle", "Riccati-optimal gain and return for an LQR config");
  oracle->add_option("--config", config, "experiment .ini")->required()->check(CLI::ExistingFile);
  oracle->add_option("--episodes", episodes, "evaluation episodes")->check(CLI::PositiveNumber);
  oracle->add_option("--set", sets, "section.key=value override")->take_all();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*train) return cmd_train(config, seed, instances, out, variant, sets);
    if (*eval) return cmd_eval(checkpoint, config, episodes, seed_base);
    if (*stats) return cmd_stats(runs, baseline, tolerance);
    if (*plot) return cmd_plot(runs, window, plot_out);
    if (*grad) return cmd_gradcheck(trials, gc_seed);
    if (*oracle) return cmd_oracle(config, sets, episodes);
    if (*calib) return cmd_calibrate(config, sets, steps, tail);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 2;
}
