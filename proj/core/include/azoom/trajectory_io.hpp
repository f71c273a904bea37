#pragma once

#include <azoom/metrics.hpp>
#include <azoom/policy.hpp>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace azoom {

inline constexpr std::string_view kTrajectoryHeader = "t,x,ball_id,phase,arm,payoff,f_star,f_arm";
inline constexpr std::string_view kSummaryHeader = "t,cum_regret,avg_cum_reward";
inline constexpr std::string_view kFrequencyHeader = "quarter,arm,bin,count";

struct SummaryRow {
  Trial t = 0;
  double cum_regret = 0.0;
  double avg_cum_reward = 0.0;
};

/// Checkpoints ceil(p T / 100) for p = 1..100, deduplicated for T < 100.
std::vector<Trial> summary_checkpoints(Trial horizon);

/// Summary rows at the checkpoints from a complete log.
std::vector<SummaryRow> summarize(std::span<const TrialRecord> log, Trial horizon);

/// Streams trajectory rows; doubles use 17 significant digits so parsing round-trips.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(std::ostream& out);
  void write(const TrialRecord& rec);

 private:
  std::ostream& out_;
};

/// Accumulates regret / reward and emits the checkpoint rows as trials stream by.
class SummaryAccumulator {
 public:
  explicit SummaryAccumulator(Trial horizon);
  void add(const TrialRecord& rec);
  [[nodiscard]] const std::vector<SummaryRow>& rows() const { return rows_; }
  [[nodiscard]] double cum_regret() const { return cum_regret_; }
  [[nodiscard]] double avg_cum_reward() const { return n_ ? reward_ / static_cast<double>(n_) : 0.0; }

 private:
  std::vector<Trial> checkpoints_;
  std::size_t next_ = 0;
  std::vector<SummaryRow> rows_;
  double cum_regret_ = 0.0;
  double reward_ = 0.0;
  Trial n_ = 0;
};

void write_trajectory_csv(std::ostream& out, std::span<const TrialRecord> log);
void write_trajectory_csv(const std::filesystem::path& path, std::span<const TrialRecord> log);
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);
void write_summary_csv(const std::filesystem::path& path, std::span<const SummaryRow> rows);
void write_frequency_csv(std::ostream& out, const ArmFrequency& freq);

TrajectoryLog read_trajectory_csv(std::istream& in);
TrajectoryLog read_trajectory_csv(const std::filesystem::path& path);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

}  // namespace azoom
