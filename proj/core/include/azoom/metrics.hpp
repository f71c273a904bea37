#pragma once

#include <azoom/env.hpp>
#include <azoom/policy.hpp>
#include <azoom/types.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace azoom {

struct RegretSummary {
  std::vector<double> instantaneous;   // f*(x_t) - f_{a_t}(x_t)
  std::vector<double> cumulative;      // R(t)
  std::vector<double> avg_cum_reward;  // (1/t) sum_{s<=t} payoff_s
};

RegretSummary regret(std::span<const TrialRecord> log);

/// Selection counts per (quarter of the horizon, arm, context bin).
class ArmFrequency {
 public:
  ArmFrequency(std::size_t quarters, std::size_t num_arms, std::size_t bins);

  [[nodiscard]] std::size_t quarters() const { return quarters_; }
  [[nodiscard]] std::size_t num_arms() const { return num_arms_; }
  [[nodiscard]] std::size_t bins() const { return bins_; }

  [[nodiscard]] std::uint64_t at(std::size_t q, ArmId a, std::size_t bin) const;
  std::uint64_t& at(std::size_t q, ArmId a, std::size_t bin);
  [[nodiscard]] std::uint64_t quarter_total(std::size_t q) const;
  [[nodiscard]] std::uint64_t column_total(std::size_t q, std::size_t bin) const;

  /// Arm with the most selections in (q, bin); smallest arm on ties.
  [[nodiscard]] ArmId mode(std::size_t q, std::size_t bin) const;

 private:
  std::size_t quarters_, num_arms_, bins_;
  std::vector<std::uint64_t> counts_;
};

/// Trial t (1-based) of horizon T falls in quarter floor((t - 1) * quarters / T).
ArmFrequency arm_frequency(std::span<const TrialRecord> log, std::size_t num_arms, Trial horizon,
                           std::size_t context_bins, std::size_t quarters = 4);

std::size_t context_bin(double x, std::size_t bins);

/// f*(x) - max_a f_a(x) 1{f_a(x) != f*(x)}; equals f*(x) when every arm is optimal.
double kappa(const RewardModel& model, double x);

/// min over the ball of f*(x) - f_a(x), on `grid` evenly spaced contexts.
double gap(const RewardModel& model, Interval interval, std::span<const ArmId> arms, std::size_t grid = 1000);

/// max minus min expected reward over the ball, on `grid` evenly spaced contexts.
double diam(const RewardModel& model, Interval interval, std::span<const ArmId> arms, std::size_t grid = 1000);

/// Largest sup-norm gap between any two of the ball's arms over the interval.
double max_pairwise_sup_difference(const RewardModel& model, Interval interval, std::span<const ArmId> arms,
                                   std::size_t grid = 1000);

/// Number of near-optimal, unresolved (dyadic interval, arm) pairs at scale 2^-i.
std::uint64_t m_i(const RewardModel& model, unsigned i, double lipschitz, std::size_t points_per_interval = 100);

/// Lebesgue measure of {x : kappa(x) <= z}, estimated on a midpoint grid.
double mu_kappa(const RewardModel& model, double z, std::size_t grid = 10000);

}  // namespace azoom
