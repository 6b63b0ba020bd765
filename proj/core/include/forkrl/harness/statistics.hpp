#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace forkrl::harness {

// Mean return of one evaluation of one instance.
struct EvalRecord {
  std::size_t instance = 0;
  std::uint64_t step = 0;
  double mean_return = 0.0;
  std::vector<double> episode_returns;
};

// Evaluations of every instance at the same steps: table[l][tau].
struct EvalTable {
  std::vector<std::size_t> instances;
  std::vector<std::uint64_t> steps;
  std::vector<std::vector<double>> values;

  std::size_t num_instances() const { return instances.size(); }
  std::size_t num_evals() const { return steps.size(); }
  // Cross-instance mean at evaluation tau.
  double mean_at(std::size_t tau) const;
};

// Groups records by instance (sorted by instance id, then step). Throws
// ShapeError when instances were evaluated at different steps, and
// UsageError when there are no records.
EvalTable tabulate(std::span<const EvalRecord> records);

struct BestAverage {
  double value = 0.0;
  std::size_t eval_index = 0;  // first maximizing evaluation
  std::uint64_t step = 0;
};

// max_tau (1/L) sum_l X[l][tau].
BestAverage best_average(const EvalTable& table);
// Population standard deviation across instances at evaluation tau.
double std_at(const EvalTable& table, std::size_t tau);
// max_l max_tau X[l][tau].
double best_instance(const EvalTable& table);
// Step of the first evaluation whose cross-instance mean reaches ref.
std::optional<std::uint64_t> steps_to_reference(const EvalTable& table, double ref);
// Per instance: step of its first evaluation reaching ref.
std::vector<std::optional<std::uint64_t>> instance_steps_to_reference(const EvalTable& table,
                                                                      double ref);

struct RunSummary {
  double best_average = 0.0;
  std::uint64_t best_step = 0;
  double std_at_best = 0.0;
  double best_instance = 0.0;
  std::vector<std::pair<double, std::optional<std::uint64_t>>> steps_to_reference;
};

RunSummary summarize(std::span<const EvalRecord> records, std::span<const double> references = {});

/// Sample-efficiency comparison of a candidate against a baseline: the
/// reference is the baseline's best average, the baseline's cost is the step
/// at which it attains it, and the candidate's cost is the median over its
/// instances of the first step reaching the reference (instances that never
/// reach it count as never).
struct SampleEfficiency {
  double reference = 0.0;
  std::uint64_t baseline_steps = 0;
  std::vector<std::optional<std::uint64_t>> candidate_instance_steps;
  std::optional<double> candidate_median_steps;
  // candidate_median / baseline_steps; nullopt when the median never reaches.
  std::optional<double> ratio;
  // Passes when ratio <= 1 + tolerance.
  bool pass = false;
};

SampleEfficiency compare_sample_efficiency(const EvalTable& baseline, const EvalTable& candidate,
                                           double tolerance = 0.10);

// Median of steps with "never" ordered after every finite value; nullopt if
// the median position falls on a "never".
std::optional<double> median_steps(std::vector<std::optional<std::uint64_t>> steps);

}  // namespace forkrl::harness
