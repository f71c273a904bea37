#include <azoom/estimator.hpp>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace azoom {

void ArmSamples::insert(double context, double payoff) {
  // New samples carry the largest seq, so they go after equal contexts.
  auto it = std::upper_bound(samples_.begin(), samples_.end(), context,
                             [](double c, const Sample& s) { return c < s.context; });
  samples_.insert(it, Sample{context, payoff, next_seq_++});
}

KnnResult knn_query(const ArmSamples& arm, double x, std::size_t k) {
  const auto s = arm.samples();
  if (k == 0) throw std::invalid_argument("knn: k must be positive");
  if (s.size() < k) {
    throw InsufficientData(fmt::format("knn: need {} samples, have {}", k, s.size()));
  }

  // Right side walks contexts >= x upward: ascending (distance, seq) already.
  // Left side walks contexts < x downward; a run of equal contexts is emitted in
  // ascending seq, i.e. from the bottom of the run.
  std::size_t right = static_cast<std::size_t>(
      std::lower_bound(s.begin(), s.end(), x, [](const Sample& a, double c) { return a.context < c; }) - s.begin());
  std::size_t left_end = right;  // unconsumed left region is [0, left_end)
  std::size_t group_pos = 0, group_end = 0;

  auto left_peek = [&]() -> const Sample* {
    if (group_pos == group_end) {
      if (left_end == 0) return nullptr;
      const double c = s[left_end - 1].context;
      std::size_t g = left_end - 1;
      while (g > 0 && s[g - 1].context == c) --g;
      group_pos = g;
      group_end = left_end;
      left_end = g;
    }
    return &s[group_pos];
  };

  double sum = 0.0;
  double radius = 0.0;
  for (std::size_t taken = 0; taken < k; ++taken) {
    const Sample* l = left_peek();
    const Sample* r = right < s.size() ? &s[right] : nullptr;
    bool take_left;
    if (!r) {
      take_left = true;
    } else if (!l) {
      take_left = false;
    } else {
      const double dl = x - l->context;
      const double dr = r->context - x;
      take_left = dl < dr || (dl == dr && l->seq < r->seq);
    }
    if (take_left) {
      sum += l->payoff;
      radius = std::max(radius, x - l->context);
      ++group_pos;
    } else {
      sum += r->payoff;
      radius = std::max(radius, r->context - x);
      ++right;
    }
  }
  return {sum / static_cast<double>(k), radius};
}

double knn_estimate(const ArmSamples& samples, double x, std::size_t k) {
  return knn_query(samples, x, k).mean;
}

SampleSet::SampleSet(Interval ball, std::vector<ArmId> arms)
    : interval_(ball), arms_(std::move(arms)), per_arm_(arms_.size()), buckets_(arms_.size()) {
  if (!(ball.hi > ball.lo)) throw std::invalid_argument("SampleSet: empty interval");
  for (auto& b : buckets_) b.fill(0);
}

std::size_t SampleSet::slot(ArmId arm) const {
  auto it = std::find(arms_.begin(), arms_.end(), arm);
  if (it == arms_.end()) throw std::out_of_range(fmt::format("SampleSet: arm {} not in ball", arm));
  return static_cast<std::size_t>(it - arms_.begin());
}

std::size_t SampleSet::bucket_of(double context) const {
  const double rel = (context - interval_.lo) / interval_.width();
  const auto b = static_cast<std::size_t>(std::floor(rel * static_cast<double>(kSuffDataBuckets)));
  return std::min(b, kSuffDataBuckets - 1);
}

void SampleSet::add(ArmId arm, double context, double payoff) {
  if (!interval_.contains(context)) {
    throw InvariantViolation(fmt::format("SampleSet: context {} outside [{}, {})", context, interval_.lo, interval_.hi));
  }
  const auto i = slot(arm);
  per_arm_[i].insert(context, payoff);
  ++buckets_[i][bucket_of(context)];
  ++total_;
}

const ArmSamples& SampleSet::of(ArmId arm) const {
  return per_arm_[slot(arm)];
}

std::span<const std::uint32_t> SampleSet::bucket_counts(ArmId arm) const {
  return buckets_[slot(arm)];
}

bool SampleSet::sufficient(ArmId arm, std::size_t k) const {
  const auto& b = buckets_[slot(arm)];
  return std::all_of(b.begin(), b.end(), [k](std::uint32_t c) { return c >= k; });
}

DistanceGrid::DistanceGrid(Interval half) {
  if (!(half.hi > half.lo)) throw std::invalid_argument("DistanceGrid: need u < v");
  for (std::size_t i = 1; i <= kDistanceGridPoints; ++i) {
    const double w = static_cast<double>(i) / static_cast<double>(kDistanceGridPoints);
    points_[i - 1] = (1.0 - w) * half.lo + w * half.hi;
  }
}

Curve true_curve(const RewardModel& model, ArmId a, Interval half) {
  const DistanceGrid grid(half);
  Curve c{};
  for (std::size_t i = 0; i < kDistanceGridPoints; ++i) c[i] = model.expected_reward(a, grid[i]);
  return c;
}

Curve estimated_curve(const ArmSamples& samples, Interval half, std::size_t k) {
  const DistanceGrid grid(half);
  Curve c{};
  for (std::size_t i = 0; i < kDistanceGridPoints; ++i) c[i] = knn_estimate(samples, grid[i], k);
  return c;
}

double mean_square_difference(const Curve& lhs, const Curve& rhs) {
  double acc = 0.0;
  for (std::size_t i = 0; i < kDistanceGridPoints; ++i) {
    const double d = lhs[i] - rhs[i];
    acc += d * d;
  }
  return acc / static_cast<double>(kDistanceGridPoints);
}

double debiased_distance(double mean_square, double noise_var, std::size_t k) {
  const double corrected = mean_square - 2.0 * noise_var / static_cast<double>(k);
  return corrected > 0.0 ? std::sqrt(corrected) : 0.0;
}

double true_distance(const RewardModel& model, ArmId a, ArmId b, Interval half) {
  if (!(half.lo >= 0.0 && half.lo < half.hi && half.hi <= 1.0)) {
    throw std::invalid_argument("true_distance: need 0 <= u < v <= 1");
  }
  if (a == b) return 0.0;
  return std::sqrt(mean_square_difference(true_curve(model, a, half), true_curve(model, b, half)));
}

double est_distance(const SampleSet& samples, ArmId a, ArmId b, Interval half, std::size_t k, double noise_var) {
  for (ArmId arm : {a, b}) {
    if (!samples.sufficient(arm, k)) {
      throw InsufficientData(fmt::format("est_distance: arm {} lacks {} samples per bucket", arm, k));
    }
  }
  const Curve ca = estimated_curve(samples.of(a), half, k);
  const Curve cb = a == b ? ca : estimated_curve(samples.of(b), half, k);
  return debiased_distance(mean_square_difference(ca, cb), noise_var, k);
}

}  // namespace azoom
