#pragma once

#include <azoom/env.hpp>
#include <azoom/types.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace azoom {

/// Number of equal sub-buckets a flagged ball's interval is cut into for the
/// sufficient-data test.
inline constexpr std::size_t kSuffDataBuckets = 64;

/// Number of evaluation points in the arm-distance grid.
inline constexpr std::size_t kDistanceGridPoints = 200;

struct Sample {
  double context = 0.0;
  double payoff = 0.0;
  std::uint64_t seq = 0;  // insertion order, breaks distance ties
};

/// Observations of one arm, kept sorted by (context, insertion order).
class ArmSamples {
 public:
  void insert(double context, double payoff);

  [[nodiscard]] std::size_t size() const { return samples_.size(); }
  [[nodiscard]] bool empty() const { return samples_.empty(); }
  [[nodiscard]] std::span<const Sample> samples() const { return samples_; }

 private:
  std::vector<Sample> samples_;
  std::uint64_t next_seq_ = 0;
};

struct KnnResult {
  double mean = 0.0;    // average payoff of the k neighbours
  double radius = 0.0;  // largest |x_s - x| among them
};

/// k-nearest-neighbour average at x: exactly k neighbours, distance ties broken
/// by earlier insertion. Throws InsufficientData when fewer than k samples exist.
KnnResult knn_query(const ArmSamples& samples, double x, std::size_t k);
double knn_estimate(const ArmSamples& samples, double x, std::size_t k);

/// Flagged-phase observations of a ball: one ArmSamples per arm plus the
/// per-bucket counts behind the sufficient-data test.
class SampleSet {
 public:
  SampleSet() = default;
  SampleSet(Interval ball, std::vector<ArmId> arms);

  /// Records an observation; the context must lie in the ball interval.
  void add(ArmId arm, double context, double payoff);

  [[nodiscard]] const Interval& interval() const { return interval_; }
  [[nodiscard]] const std::vector<ArmId>& arms() const { return arms_; }
  [[nodiscard]] const ArmSamples& of(ArmId arm) const;
  [[nodiscard]] std::size_t total() const { return total_; }
  [[nodiscard]] bool empty() const { return total_ == 0; }

  /// Bucket index in [0, 64) of a context inside the ball interval.
  [[nodiscard]] std::size_t bucket_of(double context) const;
  [[nodiscard]] std::span<const std::uint32_t> bucket_counts(ArmId arm) const;

  /// True iff every one of the 64 buckets holds >= k samples of `arm`.
  [[nodiscard]] bool sufficient(ArmId arm, std::size_t k) const;

 private:
  [[nodiscard]] std::size_t slot(ArmId arm) const;

  Interval interval_{};
  std::vector<ArmId> arms_;
  std::vector<ArmSamples> per_arm_;
  std::vector<std::array<std::uint32_t, kSuffDataBuckets>> buckets_;
  std::size_t total_ = 0;
};

/// z_i(u, v) = (1 - i/200) u + (i/200) v for i = 1..200.
class DistanceGrid {
 public:
  explicit DistanceGrid(Interval half);

  [[nodiscard]] const std::array<double, kDistanceGridPoints>& points() const { return points_; }
  [[nodiscard]] double operator[](std::size_t i) const { return points_[i]; }

 private:
  std::array<double, kDistanceGridPoints> points_{};
};

using Curve = std::array<double, kDistanceGridPoints>;

/// Arm reward curve sampled on the distance grid.
Curve true_curve(const RewardModel& model, ArmId a, Interval half);

/// kNN estimate of an arm's curve on the distance grid.
Curve estimated_curve(const ArmSamples& samples, Interval half, std::size_t k);

/// Mean squared difference of two curves over the grid.
double mean_square_difference(const Curve& lhs, const Curve& rhs);

/// sqrt(max(0, msd - 2 sigma^2 / k)).
double debiased_distance(double mean_square, double noise_var, std::size_t k);

/// Root-mean-square difference of two arms' true rewards on the 200-point grid.
double true_distance(const RewardModel& model, ArmId a, ArmId b, Interval half);

/// Estimated arm distance on `half` from flagged-phase samples, with the 2 sigma^2 / k
/// noise-bias correction. Both arms must satisfy the sufficient-data test at k.
double est_distance(const SampleSet& samples, ArmId a, ArmId b, Interval half, std::size_t k, double noise_var);

}  // namespace azoom
