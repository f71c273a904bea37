#pragma once

#include <azoom/env.hpp>
#include <azoom/estimator.hpp>
#include <azoom/types.hpp>

#include <functional>
#include <map>
#include <tuple>
#include <memory>
#include <vector>

namespace azoom {

/// Pairwise arm distance on a context half-interval.
class DistanceSource {
 public:
  enum class Kind { Learned, OracleTrue, OracleMetric, None };

  virtual ~DistanceSource() = default;
  [[nodiscard]] virtual Kind kind() const = 0;
  [[nodiscard]] virtual double distance(ArmId a, ArmId b, Interval half) = 0;
};

/// Estimated distances from a flagged ball's samples. kNN curves are computed
/// once per (arm, half) and reused across pairs.
class LearnedDistance final : public DistanceSource {
 public:
  LearnedDistance(const SampleSet& samples, std::size_t k, double noise_var);
  [[nodiscard]] Kind kind() const override { return Kind::Learned; }
  [[nodiscard]] double distance(ArmId a, ArmId b, Interval half) override;

 private:
  const Curve& curve(ArmId a, Interval half);

  const SampleSet& samples_;
  std::size_t k_;
  double noise_var_;
  std::map<std::tuple<ArmId, double, double>, Curve> cache_;
};

/// Exact grid distance from the reward model.
class TrueDistance final : public DistanceSource {
 public:
  explicit TrueDistance(const RewardModel& model) : model_(model) {}
  [[nodiscard]] Kind kind() const override { return Kind::OracleTrue; }
  [[nodiscard]] double distance(ArmId a, ArmId b, Interval half) override;

 private:
  const RewardModel& model_;
  std::map<std::tuple<ArmId, double, double>, Curve> cache_;
};

/// |theta_a - theta_b| from the model's latent arm features.
class MetricDistance final : public DistanceSource {
 public:
  explicit MetricDistance(const RewardModel& model);
  [[nodiscard]] Kind kind() const override { return Kind::OracleMetric; }
  [[nodiscard]] double distance(ArmId a, ArmId b, Interval half) override;

 private:
  const RewardModel& model_;
};

/// No similarity at all: every arm forms its own cluster.
class NoDistance final : public DistanceSource {
 public:
  [[nodiscard]] Kind kind() const override { return Kind::None; }
  [[nodiscard]] double distance(ArmId, ArmId, Interval) override;
};

struct Clustering {
  std::vector<std::vector<ArmId>> clusters;  // clusters[i] is centred on centers[i]
  std::vector<ArmId> centers;
};

struct Subpartition {
  Clustering left;
  Clustering right;
};

/// Distance below which an arm joins an existing centre: (3/16) L (v - u).
double cluster_radius(double lipschitz, Interval half);

/// Greedy centre clustering of `arms` (visited in the given order) on one half.
Clustering cluster_half(const std::vector<ArmId>& arms, Interval half, double lipschitz, DistanceSource& dist);

/// Clusters the ball's arms separately on each half of [c0, c1]. The result is
/// checked for the partition, separation and radius properties on every call.
Subpartition subpartition(const std::vector<ArmId>& arms, Interval ball, double lipschitz, DistanceSource& dist);

}  // namespace azoom
