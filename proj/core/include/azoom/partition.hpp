#pragma once

#include <azoom/estimator.hpp>
#include <azoom/types.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace azoom {

enum class BallState { Active, Flagged, Retired };
enum class Phase { Flagged, Ucb };

std::string_view to_string(BallState s);
std::string_view to_string(Phase p);

/// A dyadic context interval crossed with a set of arms, plus its play statistics.
struct Ball {
  BallId id = 0;
  std::optional<BallId> parent;
  unsigned depth = 0;        // width is 2^-depth
  std::uint64_t cell = 0;    // interval is [cell, cell + 1) * 2^-depth
  Interval interval{};
  std::vector<ArmId> arms;   // ascending
  BallState state = BallState::Active;

  std::uint64_t n = 0;       // plays in any phase
  double payoff_sum = 0.0;
  std::uint64_t ucb_plays = 0;
  std::size_t rr_cursor = 0;

  std::optional<Trial> flag_time;
  std::optional<Trial> cluster_time;
  std::size_t suff_k = 0;        // per-bucket requirement fixed when flagged
  std::size_t suff_cursor = 0;   // arms before this index are known sufficient
  SampleSet flagged_samples;

  [[nodiscard]] double width() const { return interval.width(); }
  [[nodiscard]] double mean() const { return payoff_sum / static_cast<double>(n); }
  [[nodiscard]] bool contains(double x) const { return interval.contains(x); }
  [[nodiscard]] bool contains(double x, ArmId a) const;
};

/// Active set P and flagged set P*, which jointly partition [0,1] x [K].
class PartitionState {
 public:
  explicit PartitionState(std::size_t num_arms);

  [[nodiscard]] std::size_t num_arms() const { return num_arms_; }
  [[nodiscard]] const Ball& ball(BallId id) const;
  [[nodiscard]] Ball& ball(BallId id);
  [[nodiscard]] const std::vector<Ball>& balls() const { return balls_; }
  [[nodiscard]] const std::set<BallId>& active() const { return active_; }
  [[nodiscard]] const std::set<BallId>& flagged() const { return flagged_; }
  [[nodiscard]] Trial trial() const { return trial_; }
  void set_trial(Trial t) { trial_ = t; }

  /// Non-retired balls whose interval contains x, in ascending id order.
  [[nodiscard]] std::vector<BallId> covering(double x) const;

  /// Number of non-retired balls containing (x, a); 1 in a valid partition.
  [[nodiscard]] std::size_t coverage_count(double x, ArmId a) const;

  BallId add_ball(unsigned depth, std::uint64_t cell, std::vector<ArmId> arms, BallState state,
                  std::optional<BallId> parent);

  /// Moves an Active ball to P* and opens its flagged-phase sample store.
  void flag(BallId id, Trial t, std::size_t suff_k);

  /// Drops a ball from P / P* for good.
  void retire(BallId id, Trial t);

 private:
  static std::uint64_t cell_key(unsigned depth, std::uint64_t cell);
  void unlink(BallId id);

  std::size_t num_arms_;
  std::vector<Ball> balls_;
  std::set<BallId> active_;
  std::set<BallId> flagged_;
  std::unordered_map<std::uint64_t, std::vector<BallId>> cells_;
  std::vector<std::size_t> live_per_depth_;
  Trial trial_ = 0;
};

/// Single flagged root ball [0,1] x [K].
PartitionState init_partition(std::size_t num_arms);

/// K active width-1 singleton balls (the no-similarity start).
PartitionState init_singleton_partition(std::size_t num_arms);

struct UcbParams {
  double lipschitz = 1.0;
  double noise_var = 1.0;
  double log_horizon = 1.0;
  double constant = 6.0;  // numerator of the confidence radius
};

/// mu + 2 L width + sqrt(c sigma^2 ln T / n); +inf for an unplayed ball.
double ucb(const Ball& ball, const UcbParams& p);

struct Selection {
  BallId ball = 0;
  Phase phase = Phase::Ucb;
};

/// Widest flagged ball containing x if any, else the active ball with the
/// highest UCB. Ties go to the smaller id.
Selection select_ball(const PartitionState& state, double x, const UcbParams& p);

/// Ucb: next arm in round robin. Flagged: smallest arm still short of k samples
/// in some bucket.
ArmId select_arm(Ball& ball, Phase phase, std::size_t k);

void record_play(PartitionState& state, BallId id, ArmId arm, double x, double payoff, Trial t);

/// Flag once n reaches constant / width^2; balls at or below min_width never flag.
struct FlagRule {
  double constant = 0.0;
  bool inclusive = false;  // n >= threshold instead of n > threshold
  double min_width = 0.0;

  /// 6 sigma^2 ln T / L^2, strict.
  static FlagRule theory(double lipschitz, double noise_var, double log_horizon, double min_width,
                         double ucb_constant = 6.0);
  /// 4 ln T, inclusive.
  static FlagRule simulation(double log_horizon, double min_width);

  [[nodiscard]] double threshold(double width) const { return constant / (width * width); }
};

bool should_flag(const Ball& ball, const FlagRule& rule);

struct SuffDataStatus {
  std::vector<bool> per_arm;
  bool all = false;
};

SuffDataStatus suffdata(const Ball& ball, std::size_t k);

/// Retires a flagged ball and activates one child per cluster on each half.
/// Each cluster list must partition the ball's arms.
std::vector<BallId> apply_subpartition(PartitionState& state, BallId id,
                                       const std::vector<std::vector<ArmId>>& clusters_left,
                                       const std::vector<std::vector<ArmId>>& clusters_right, Trial t);

/// Throws InvariantViolation on any structural breakage. Coverage is probed
/// at the supplied contexts for every arm.
void check_invariants(const PartitionState& state, std::span<const double> probe_contexts = {});

/// One line per ball: id,parent,c0,c1,state,n,mu,arms (arms separated by ';').
void write_snapshot(std::ostream& out, const PartitionState& state, bool include_retired = true);

}  // namespace azoom
