#include "forkrl/harness/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "forkrl/errors.hpp"

namespace forkrl::harness {

double EvalTable::mean_at(std::size_t tau) const {
  double sum = 0.0;
  for (const auto& row : values) sum += row.at(tau);
  return sum / static_cast<double>(values.size());
}

EvalTable tabulate(std::span<const EvalRecord> records) {
  if (records.empty()) throw UsageError("statistics: no evaluation records");
  std::map<std::size_t, std::map<std::uint64_t, double>> grouped;
  for (const auto& r : records) {
    auto [it, inserted] = grouped[r.instance].emplace(r.step, r.mean_return);
    if (!inserted) {
      throw ShapeError("statistics: instance " + std::to_string(r.instance) +
                       " has two evaluations at step " + std::to_string(r.step));
    }
  }
  EvalTable t;
  for (const auto& [instance, by_step] : grouped) {
    std::vector<std::uint64_t> steps;
    std::vector<double> row;
    for (const auto& [step, value] : by_step) {
      steps.push_back(step);
      row.push_back(value);
    }
    if (t.instances.empty()) {
      t.steps = steps;
    } else if (steps != t.steps) {
      throw ShapeError("statistics: ragged records, instance " + std::to_string(instance) +
                       " was evaluated at different steps than instance " +
                       std::to_string(t.instances.front()));
    }
    t.instances.push_back(instance);
    t.values.push_back(std::move(row));
  }
  return t;
}

BestAverage best_average(const EvalTable& table) {
  BestAverage best;
  for (std::size_t tau = 0; tau < table.num_evals(); ++tau) {
    const double m = table.mean_at(tau);
    if (tau == 0 || m > best.value) best = {m, tau, table.steps[tau]};
  }
  return best;
}

double std_at(const EvalTable& table, std::size_t tau) {
  if (tau >= table.num_evals()) throw UsageError("std_at: evaluation index out of range");
  const double mean = table.mean_at(tau);
  double ss = 0.0;
  for (const auto& row : table.values) ss += (row[tau] - mean) * (row[tau] - mean);
  return std::sqrt(ss / static_cast<double>(table.num_instances()));
}

double best_instance(const EvalTable& table) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& row : table.values) best = std::max(best, *std::max_element(row.begin(), row.end()));
  return best;
}

std::optional<std::uint64_t> steps_to_reference(const EvalTable& table, double ref) {
  for (std::size_t tau = 0; tau < table.num_evals(); ++tau) {
    if (table.mean_at(tau) >= ref) return table.steps[tau];
  }
  return std::nullopt;
}

std::vector<std::optional<std::uint64_t>> instance_steps_to_reference(const EvalTable& table,
                                                                      double ref) {
  std::vector<std::optional<std::uint64_t>> out;
  for (const auto& row : table.values) {
    std::optional<std::uint64_t> hit;
    for (std::size_t tau = 0; tau < row.size(); ++tau) {
      if (row[tau] >= ref) {
        hit = table.steps[tau];
        break;
      }
    }
    out.push_back(hit);
  }
  return out;
}

RunSummary summarize(std::span<const EvalRecord> records, std::span<const double> references) {
  const auto table = tabulate(records);
  const auto best = best_average(table);
  RunSummary s;
  s.best_average = best.value;
  s.best_step = best.step;
  s.std_at_best = std_at(table, best.eval_index);
  s.best_instance = best_instance(table);
  for (double ref : references) s.steps_to_reference.emplace_back(ref, steps_to_reference(table, ref));
  return s;
}

std::optional<double> median_steps(std::vector<std::optional<std::uint64_t>> steps) {
  if (steps.empty()) return std::nullopt;
  std::sort(steps.begin(), steps.end(), [](const auto& a, const auto& b) {
    if (!a) return false;
    if (!b) return true;
    return *a < *b;
  });
  const auto n = steps.size();
  if (n % 2 == 1) {
    const auto& mid = steps[n / 2];
    return mid ? std::optional<double>(static_cast<double>(*mid)) : std::nullopt;
  }
  const auto& lo = steps[n / 2 - 1];
  const auto& hi = steps[n / 2];
  if (!lo || !hi) return std::nullopt;
  return 0.5 * (static_cast<double>(*lo) + static_cast<double>(*hi));
}

SampleEfficiency compare_sample_efficiency(const EvalTable& baseline, const EvalTable& candidate,
                                           double tolerance) {
  SampleEfficiency out;
  const auto best = best_average(baseline);
  out.reference = best.value;
  out.baseline_steps = best.step;
  out.candidate_instance_steps = instance_steps_to_reference(candidate, out.reference);
  out.candidate_median_steps = median_steps(out.candidate_instance_steps);
  if (out.candidate_median_steps) {
    if (out.baseline_steps == 0) {
      out.ratio = *out.candidate_median_steps == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    } else {
      out.ratio = *out.candidate_median_steps / static_cast<double>(out.baseline_steps);
    }
    out.pass = *out.ratio <= 1.0 + tolerance;
  }
  return out;
}

}  // namespace forkrl::harness
