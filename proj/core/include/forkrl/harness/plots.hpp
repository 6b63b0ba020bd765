#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "forkrl/harness/statistics.hpp"

namespace forkrl::harness {

struct CurveSeries {
  std::string label;
  EvalTable table;
};

struct PlotStyle {
  std::string title;
  std::string x_label = "environment steps";
  std::string y_label = "average return";
  // Trailing uniform moving average over this many evaluation points.
  std::size_t window = 5;
  int width = 760;
  int height = 460;
};

// Trailing mean over the last min(window, i + 1) points; window 1 is the
// identity.
std::vector<double> moving_average(std::span<const double> values, std::size_t window);

// Learning curves: cross-instance mean as a line with a +-std band per
// series. Writes nothing and returns false when no series has data.
bool emit_learning_curves(const std::vector<CurveSeries>& series, const PlotStyle& style,
                          const std::filesystem::path& path);

}  // namespace forkrl::harness
