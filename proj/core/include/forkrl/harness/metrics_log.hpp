#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forkrl/harness/statistics.hpp"

namespace forkrl::harness {

// One line of metrics.csv. Empty optionals become empty cells.
struct MetricsRow {
  std::size_t instance = 0;
  std::uint64_t step = 0;
  std::optional<double> wall_ms;
  std::optional<std::uint64_t> episode;
  std::optional<double> ep_return;
  std::optional<double> eval_mean;
  std::optional<double> critic_loss;
  std::optional<double> system_loss;
  std::optional<double> reward_loss;
  std::optional<double> w;
  std::optional<bool> gate;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr const char* kMetricsHeader =
    "instance,step,wall_ms,episode,ep_return,eval_mean,critic_loss,system_loss,reward_loss,w,gate";
inline constexpr const char* kEvalsHeader = "instance,step,mean_return,episode_returns";

// Shortest text that parses back to the same double.
std::string format_number(double v);

class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path);
  void write(const MetricsRow& row);
  void flush();

 private:
  std::ofstream out_;
};

class EvalWriter {
 public:
  explicit EvalWriter(const std::filesystem::path& path);
  void write(const EvalRecord& record);
  void flush();

 private:
  std::ofstream out_;
};

// Throws FormatError on a wrong header or malformed line.
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);
std::vector<EvalRecord> read_evals_csv(const std::filesystem::path& path);

}  // namespace forkrl::harness
