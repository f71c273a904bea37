#include <azoom/trajectory_io.hpp>

#include <charconv>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace azoom {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  return in;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view s) {
  // strtod is locale-bound but round-trips %.17g output exactly.
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size() || tmp.empty()) throw std::runtime_error(fmt::format("bad number '{}'", s));
  return v;
}

std::uint64_t parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw std::runtime_error(fmt::format("bad integer '{}'", s));
  return v;
}

}  // namespace

std::vector<Trial> summary_checkpoints(Trial horizon) {
  std::vector<Trial> out;
  for (Trial p = 1; p <= 100; ++p) {
    const Trial t = std::max<Trial>(1, (p * horizon + 99) / 100);
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  return out;
}

SummaryAccumulator::SummaryAccumulator(Trial horizon) : checkpoints_(summary_checkpoints(horizon)) {}

void SummaryAccumulator::add(const TrialRecord& rec) {
  ++n_;
  cum_regret_ += rec.f_star - rec.f_arm;
  reward_ += rec.payoff;
  if (next_ < checkpoints_.size() && checkpoints_[next_] == n_) {
    rows_.push_back({n_, cum_regret_, reward_ / static_cast<double>(n_)});
    ++next_;
  }
}

std::vector<SummaryRow> summarize(std::span<const TrialRecord> log, Trial horizon) {
  SummaryAccumulator acc(horizon);
  for (const auto& r : log) acc.add(r);
  return acc.rows();
}

TrajectoryWriter::TrajectoryWriter(std::ostream& out) : out_(out) {
  out_ << kTrajectoryHeader << '\n';
}

void TrajectoryWriter::write(const TrialRecord& r) {
  out_ << fmt::format("{},{:.17g},{},{},{},{:.17g},{:.17g},{:.17g}\n", r.t, r.x, r.ball, to_string(r.phase), r.arm,
                      r.payoff, r.f_star, r.f_arm);
}

void write_trajectory_csv(std::ostream& out, std::span<const TrialRecord> log) {
  TrajectoryWriter w(out);
  for (const auto& r : log) w.write(r);
}

void write_trajectory_csv(const std::filesystem::path& path, std::span<const TrialRecord> log) {
  auto out = open_out(path);
  write_trajectory_csv(out, log);
  if (!out) throw std::runtime_error(fmt::format("write failed: {}", path.string()));
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) out << fmt::format("{},{:.17g},{:.17g}\n", r.t, r.cum_regret, r.avg_cum_reward);
}

void write_summary_csv(const std::filesystem::path& path, std::span<const SummaryRow> rows) {
  auto out = open_out(path);
  write_summary_csv(out, rows);
  if (!out) throw std::runtime_error(fmt::format("write failed: {}", path.string()));
}

void write_frequency_csv(std::ostream& out, const ArmFrequency& freq) {
  out << kFrequencyHeader << '\n';
  for (std::size_t q = 0; q < freq.quarters(); ++q) {
    for (ArmId a = 0; a < freq.num_arms(); ++a) {
      for (std::size_t b = 0; b < freq.bins(); ++b) {
        if (const auto c = freq.at(q, a, b)) out << q << ',' << a << ',' << b << ',' << c << '\n';
      }
    }
  }
}

TrajectoryLog read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw std::runtime_error("trajectory CSV: missing or wrong header");
  }
  TrajectoryLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 8) throw std::runtime_error(fmt::format("trajectory CSV: expected 8 fields in '{}'", line));
    TrialRecord r;
    r.t = parse_uint(f[0]);
    r.x = parse_double(f[1]);
    r.ball = parse_uint(f[2]);
    if (f[3] == "flagged") {
      r.phase = Phase::Flagged;
    } else if (f[3] == "ucb") {
      r.phase = Phase::Ucb;
    } else {
      throw std::runtime_error(fmt::format("trajectory CSV: unknown phase '{}'", f[3]));
    }
    r.arm = parse_uint(f[4]);
    r.payoff = parse_double(f[5]);
    r.f_star = parse_double(f[6]);
    r.f_arm = parse_double(f[7]);
    log.push_back(r);
  }
  return log;
}

TrajectoryLog read_trajectory_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_trajectory_csv(in);
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != kSummaryHeader) throw std::runtime_error("summary CSV: wrong header");
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 3) throw std::runtime_error("summary CSV: expected 3 fields");
    rows.push_back({parse_uint(f[0]), parse_double(f[1]), parse_double(f[2])});
  }
  return rows;
}

}  // namespace azoom
