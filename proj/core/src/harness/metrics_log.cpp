#include "forkrl/harness/metrics_log.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "forkrl/errors.hpp"

namespace forkrl::harness {

namespace {

std::vector<std::string> split_csv(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw FormatError("bad number in CSV: " + s);
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw FormatError("bad integer in CSV: " + s);
  return v;
}

std::optional<double> opt_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return to_double(s);
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::ifstream open_csv(const std::filesystem::path& path, const char* header) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string first;
  std::getline(in, first);
  if (first != header) throw FormatError(path.string() + ": unexpected header '" + first + "'");
  return in;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw FormatError("cannot format number");
  return std::string(buf, end);
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw FormatError("cannot write " + path.string());
  out_ << kMetricsHeader << '\n';
}

void MetricsWriter::write(const MetricsRow& r) {
  out_ << r.instance << ',' << r.step << ',' << cell(r.wall_ms) << ','
       << (r.episode ? std::to_string(*r.episode) : std::string()) << ',' << cell(r.ep_return)
       << ',' << cell(r.eval_mean) << ',' << cell(r.critic_loss) << ',' << cell(r.system_loss)
       << ',' << cell(r.reward_loss) << ',' << cell(r.w) << ','
       << (r.gate ? (*r.gate ? "1" : "0") : "") << '\n';
}

void MetricsWriter::flush() { out_.flush(); }

EvalWriter::EvalWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw FormatError("cannot write " + path.string());
  out_ << kEvalsHeader << '\n';
}

void EvalWriter::write(const EvalRecord& r) {
  out_ << r.instance << ',' << r.step << ',' << format_number(r.mean_return) << ',';
  for (std::size_t i = 0; i < r.episode_returns.size(); ++i) {
    if (i) out_ << ';';
    out_ << format_number(r.episode_returns[i]);
  }
  out_ << '\n';
}

void EvalWriter::flush() { out_.flush(); }

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  auto in = open_csv(path, kMetricsHeader);
  std::vector<MetricsRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 11) throw FormatError(path.string() + ": expected 11 cells in '" + line + "'");
    MetricsRow r;
    r.instance = to_u64(c[0]);
    r.step = to_u64(c[1]);
    r.wall_ms = opt_double(c[2]);
    if (!c[3].empty()) r.episode = to_u64(c[3]);
    r.ep_return = opt_double(c[4]);
    r.eval_mean = opt_double(c[5]);
    r.critic_loss = opt_double(c[6]);
    r.system_loss = opt_double(c[7]);
    r.reward_loss = opt_double(c[8]);
    r.w = opt_double(c[9]);
    if (!c[10].empty()) r.gate = c[10] == "1";
    rows.push_back(r);
  }
  return rows;
}

std::vector<EvalRecord> read_evals_csv(const std::filesystem::path& path) {
  auto in = open_csv(path, kEvalsHeader);
  std::vector<EvalRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 4) throw FormatError(path.string() + ": expected 4 cells in '" + line + "'");
    EvalRecord r;
    r.instance = to_u64(c[0]);
    r.step = to_u64(c[1]);
    r.mean_return = to_double(c[2]);
    for (const auto& v : split_csv(c[3], ';')) {
      if (!v.empty()) r.episode_returns.push_back(to_double(v));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace forkrl::harness
