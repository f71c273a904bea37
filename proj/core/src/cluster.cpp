#include <azoom/cluster.hpp>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace azoom {

LearnedDistance::LearnedDistance(const SampleSet& samples, std::size_t k, double noise_var)
    : samples_(samples), k_(k), noise_var_(noise_var) {
  if (k == 0) throw std::invalid_argument("LearnedDistance: k must be positive");
}

const Curve& LearnedDistance::curve(ArmId a, Interval half) {
  auto key = std::make_tuple(a, half.lo, half.hi);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  if (!samples_.sufficient(a, k_)) {
    throw InsufficientData(fmt::format("LearnedDistance: arm {} lacks {} samples per bucket", a, k_));
  }
  return cache_.emplace(key, estimated_curve(samples_.of(a), half, k_)).first->second;
}

double LearnedDistance::distance(ArmId a, ArmId b, Interval half) {
  const Curve& ca = curve(a, half);
  const Curve& cb = curve(b, half);
  return debiased_distance(mean_square_difference(ca, cb), noise_var_, k_);
}

double TrueDistance::distance(ArmId a, ArmId b, Interval half) {
  if (a == b) return 0.0;
  auto get = [&](ArmId arm) -> const Curve& {
    auto key = std::make_tuple(arm, half.lo, half.hi);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, true_curve(model_, arm, half)).first;
    return it->second;
  };
  const Curve& ca = get(a);
  const Curve& cb = get(b);
  return std::sqrt(mean_square_difference(ca, cb));
}

MetricDistance::MetricDistance(const RewardModel& model) : model_(model) {
  if (!model.has_latent_features()) {
    throw std::invalid_argument("MetricDistance: reward model exposes no latent arm features");
  }
}

double MetricDistance::distance(ArmId a, ArmId b, Interval) {
  return std::abs(*model_.latent_feature(a) - *model_.latent_feature(b));
}

double NoDistance::distance(ArmId, ArmId, Interval) {
  return std::numeric_limits<double>::infinity();
}

double cluster_radius(double lipschitz, Interval half) {
  return 3.0 / 16.0 * lipschitz * half.width();
}

Clustering cluster_half(const std::vector<ArmId>& arms, Interval half, double lipschitz, DistanceSource& dist) {
  Clustering out;
  if (dist.kind() == DistanceSource::Kind::None) {
    for (ArmId a : arms) {
      out.centers.push_back(a);
      out.clusters.push_back({a});
    }
    return out;
  }
  const double radius = cluster_radius(lipschitz, half);
  for (ArmId a : arms) {
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < out.centers.size(); ++c) {
      const double d = dist.distance(a, out.centers[c], half);
      if (d < best) {
        best = d;
        nearest = c;
      }
    }
    if (best > radius) {
      out.centers.push_back(a);
      out.clusters.push_back({a});
    } else {
      out.clusters[nearest].push_back(a);
    }
  }
  return out;
}

namespace {

void audit(const Clustering& c, const std::vector<ArmId>& arms, Interval half, double lipschitz,
           DistanceSource& dist) {
  std::vector<ArmId> all;
  for (const auto& cl : c.clusters) all.insert(all.end(), cl.begin(), cl.end());
  std::sort(all.begin(), all.end());
  auto expected = arms;
  std::sort(expected.begin(), expected.end());
  if (all != expected) throw InvariantViolation("subpartition: clusters do not partition the arms");
  if (!arms.empty() && (c.centers.empty() || c.centers.front() != arms.front())) {
    throw InvariantViolation("subpartition: first visited arm is not a centre");
  }
  if (dist.kind() == DistanceSource::Kind::None) return;

  const double radius = cluster_radius(lipschitz, half);
  for (std::size_t i = 0; i < c.centers.size(); ++i) {
    for (std::size_t j = i + 1; j < c.centers.size(); ++j) {
      if (!(dist.distance(c.centers[i], c.centers[j], half) > radius)) {
        throw InvariantViolation(fmt::format("subpartition: centres {} and {} closer than {}", c.centers[i],
                                             c.centers[j], radius));
      }
    }
    for (ArmId m : c.clusters[i]) {
      if (dist.distance(m, c.centers[i], half) > radius) {
        throw InvariantViolation(fmt::format("subpartition: arm {} farther than {} from centre {}", m, radius,
                                             c.centers[i]));
      }
    }
  }
}

}  // namespace

Subpartition subpartition(const std::vector<ArmId>& arms, Interval ball, double lipschitz, DistanceSource& dist) {
  if (arms.empty()) throw std::invalid_argument("subpartition: no arms");
  Subpartition out;
  out.left = cluster_half(arms, ball.left_half(), lipschitz, dist);
  out.right = cluster_half(arms, ball.right_half(), lipschitz, dist);
  audit(out.left, arms, ball.left_half(), lipschitz, dist);
  audit(out.right, arms, ball.right_half(), lipschitz, dist);
  return out;
}

}  // namespace azoom
