#pragma once

#include <azoom/cluster.hpp>
#include <azoom/env.hpp>
#include <azoom/partition.hpp>
#include <azoom/types.hpp>

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace azoom {

enum class Variant { Learned, OracleTrue, OracleMetric, NoSimilarity };
enum class FlagMode { Theory, Simulation };

std::string_view to_string(Variant v);
std::string_view to_string(FlagMode m);
Variant parse_variant(std::string_view s);
FlagMode parse_flag_mode(std::string_view s);

struct PolicyConfig {
  Variant variant = Variant::Learned;
  double lipschitz = 1.0;
  double noise_var = 1.0;
  Trial horizon = 1;
  double ucb_constant = 6.0;
  FlagMode flag_mode = FlagMode::Theory;
  std::optional<std::size_t> fixed_k;  // nullopt: k from the sample-size formula
  double k_constant = 5431.0;
  double delta_min = 0x1.0p-20;
  bool singleton_skip = true;  // singleton flagged balls split without sampling
  bool audit = false;          // check partition invariants after every trial

  void validate() const;
};

/// ceil(c sigma^2 ln(T |A|) / (L^2 width^2)), at least 1.
std::size_t sample_size_formula(const PolicyConfig& cfg, std::size_t num_arms, double width);

struct TrialRecord {
  Trial t = 0;
  double x = 0.0;
  BallId ball = 0;
  Phase phase = Phase::Ucb;
  ArmId arm = 0;
  double payoff = 0.0;
  double f_star = 0.0;
  double f_arm = 0.0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

using TrajectoryLog = std::vector<TrialRecord>;

/// The adaptive context-arm partitioning bandit and its oracle / naive variants.
class ApproxZooming {
 public:
  ApproxZooming(PolicyConfig cfg, const RewardModel& model);

  /// Plays one trial at context x against env.
  TrialRecord step(Environment& env, double x);

  [[nodiscard]] const PartitionState& state() const { return state_; }
  [[nodiscard]] const PolicyConfig& config() const { return cfg_; }
  [[nodiscard]] const FlagRule& flag_rule() const { return flag_rule_; }
  [[nodiscard]] const UcbParams& ucb_params() const { return ucb_; }
  [[nodiscard]] Trial trials() const { return t_; }
  [[nodiscard]] std::size_t subpartitions() const { return subpartitions_; }

  /// Per-bucket sample requirement for a ball under the configured k rule.
  [[nodiscard]] std::size_t k_for(const Ball& ball) const;

 private:
  void flag_ball(BallId id, Trial t);
  void split(BallId id, Trial t, DistanceSource& dist);
  [[nodiscard]] bool splits_at_flag_time(const Ball& ball) const;

  PolicyConfig cfg_;
  const RewardModel& model_;
  PartitionState state_;
  FlagRule flag_rule_;
  UcbParams ucb_;
  Trial t_ = 0;
  std::size_t subpartitions_ = 0;
  std::vector<double> rewards_;
};

using TrialSink = std::function<void(const TrialRecord&)>;

/// Runs env.horizon() trials, handing each record to sink. Returns the final policy.
ApproxZooming run_streaming(Environment& env, const PolicyConfig& cfg, const TrialSink& sink);

/// Runs the full horizon and keeps every record.
TrajectoryLog run(Environment& env, const PolicyConfig& cfg);

}  // namespace azoom
