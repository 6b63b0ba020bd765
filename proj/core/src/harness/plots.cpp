#include "forkrl/harness/plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "forkrl/errors.hpp"
#include "forkrl/harness/metrics_log.hpp"

namespace forkrl::harness {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Smoothed {
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std;
};

Smoothed smooth(const EvalTable& t, std::size_t window) {
  Smoothed s;
  std::vector<double> m;
  std::vector<double> sd;
  for (std::size_t tau = 0; tau < t.num_evals(); ++tau) {
    s.x.push_back(static_cast<double>(t.steps[tau]));
    m.push_back(t.mean_at(tau));
    sd.push_back(std_at(t, tau));
  }
  s.mean = moving_average(m, window);
  s.std = moving_average(sd, window);
  return s;
}

// Round-ish tick spacing covering [lo, hi] with about n ticks.
double tick_step(double lo, double hi, int n) {
  const double raw = (hi - lo) / n;
  if (!(raw > 0)) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= f * mag) return f * mag;
  }
  return 10.0 * mag;
}

}  // namespace

std::vector<double> moving_average(std::span<const double> values, std::size_t window) {
  if (window == 0) throw UsageError("moving_average: window must be >= 1");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t n = std::min(window, i + 1);
    double sum = 0.0;
    for (std::size_t k = i + 1 - n; k <= i; ++k) sum += values[k];
    out[i] = sum / static_cast<double>(n);
  }
  return out;
}

bool emit_learning_curves(const std::vector<CurveSeries>& series, const PlotStyle& style,
                          const std::filesystem::path& path) {
  std::vector<std::pair<std::string, Smoothed>> curves;
  for (const auto& s : series) {
    if (s.table.num_evals() == 0 || s.table.num_instances() == 0) continue;
    curves.emplace_back(s.label, smooth(s.table, style.window));
  }
  if (curves.empty()) return false;

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const auto& [label, c] : curves) {
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      x0 = std::min(x0, c.x[i]);
      x1 = std::max(x1, c.x[i]);
      y0 = std::min(y0, c.mean[i] - c.std[i]);
      y1 = std::max(y1, c.mean[i] + c.std[i]);
    }
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) {
    y0 -= 1.0;
    y1 += 1.0;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double left = 80, right = 170, top = 40, bottom = 60;
  const double pw = style.width - left - right;
  const double ph = style.height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\""
      << style.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<metadata>{\"smoothing\": \"trailing moving average\", \"smoothing_window\": "
      << style.window << ", \"band\": \"mean +- population std across instances\"}</metadata>\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!style.title.empty()) {
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << escape(style.title) << "</text>\n";
  }
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#333\"/>\n";

  const double xs = tick_step(x0, x1, 6);
  for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
    svg << "<line x1=\"" << px(t) << "\" y1=\"" << top + ph << "\" x2=\"" << px(t) << "\" y2=\""
        << top + ph + 5 << "\" stroke=\"#333\"/><text x=\"" << px(t) << "\" y=\"" << top + ph + 18
        << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
  }
  const double ys = tick_step(y0, y1, 6);
  for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left + pw
        << "\" y2=\"" << py(t) << "\" stroke=\"#ddd\"/><text x=\"" << left - 8 << "\" y=\""
        << py(t) + 4 << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << style.height - 15
      << "\" text-anchor=\"middle\">" << escape(style.x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << top + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(style.y_label) << "</text>\n";

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& [label, c] = curves[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::ostringstream band;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      band << (i ? " " : "") << px(c.x[i]) << "," << py(c.mean[i] + c.std[i]);
    }
    for (std::size_t i = c.x.size(); i-- > 0;) {
      band << " " << px(c.x[i]) << "," << py(c.mean[i] - c.std[i]);
    }
    svg << "<polygon points=\"" << band.str() << "\" fill=\"" << color
        << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      svg << (i ? " " : "") << px(c.x[i]) << "," << py(c.mean[i]);
    }
    svg << "\"><title>" << escape(label) << "</title></polyline>\n";
    const double ly = top + 16 + 20.0 * static_cast<double>(k);
    svg << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"3\"/><text x=\""
        << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << escape(label) << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write plot " + path.string());
  out << svg.str();
  return static_cast<bool>(out);
}

}  // namespace forkrl::harness
