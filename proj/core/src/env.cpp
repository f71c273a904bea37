#include <azoom/env.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <fmt/format.h>

namespace azoom {

namespace {

double fold_to_peak(double theta) {
  const double d = std::min({std::abs(theta), std::abs(theta - 0.5), std::abs(theta - 1.0)});
  return 4.0 * d;
}

void check_lipschitz(double L) {
  if (!(L > 0.0) || !std::isfinite(L)) {
    throw std::invalid_argument(fmt::format("Lipschitz constant must be positive, got {}", L));
  }
}

void check_features(const std::vector<double>& theta) {
  if (theta.empty()) throw std::invalid_argument("reward model needs at least one arm");
  for (double t : theta) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw std::invalid_argument(fmt::format("latent feature {} outside [0,1]", t));
    }
  }
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

PiecewiseLinear::PiecewiseLinear(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() < 2 || knots_.size() != values_.size()) {
    throw std::invalid_argument("piecewise-linear function needs >= 2 matching knots and values");
  }
  if (knots_.front() != 0.0 || knots_.back() != 1.0) {
    throw std::invalid_argument("piecewise-linear knots must span [0,1]");
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i] > knots_[i - 1])) throw std::invalid_argument("knots must be strictly increasing");
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("piecewise-linear values must lie in [0,1]");
  }
}

double PiecewiseLinear::operator()(double x) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  if (it == knots_.begin()) return values_.front();
  if (it == knots_.end()) return values_.back();
  const auto i = static_cast<std::size_t>(it - knots_.begin());
  const double t = (x - knots_[i - 1]) / (knots_[i] - knots_[i - 1]);
  return values_[i - 1] + t * (values_[i] - values_[i - 1]);
}

double PiecewiseLinear::max_slope() const {
  double m = 0.0;
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    m = std::max(m, std::abs(values_[i] - values_[i - 1]) / (knots_[i] - knots_[i - 1]));
  }
  return m;
}

RewardModel::RewardModel(Zigzag z) : spec_(std::move(z)) {
  const auto& s = std::get<Zigzag>(spec_);
  check_lipschitz(s.lipschitz);
  if (s.lipschitz > 1.0) throw std::invalid_argument("zigzag rewards leave [0,1] for L > 1");
  check_features(s.theta);
  num_arms_ = s.theta.size();
  lipschitz_ = s.lipschitz;
  phi_.reserve(num_arms_);
  for (double t : s.theta) phi_.push_back(fold_to_peak(t));
}

RewardModel::RewardModel(FiniteTypes f) : spec_(std::move(f)) {
  const auto& s = std::get<FiniteTypes>(spec_);
  check_lipschitz(s.lipschitz);
  if (s.type_of_arm.empty()) throw std::invalid_argument("reward model needs at least one arm");
  for (auto t : s.type_of_arm) {
    if (t >= s.type_functions.size()) throw std::invalid_argument("arm type index out of range");
  }
  for (const auto& fn : s.type_functions) {
    if (fn.max_slope() > s.lipschitz + 1e-12) {
      throw std::invalid_argument(fmt::format("type function slope {} exceeds L = {}", fn.max_slope(), s.lipschitz));
    }
  }
  num_arms_ = s.type_of_arm.size();
  lipschitz_ = s.lipschitz;
}

RewardModel::RewardModel(LatentLipschitz l) : spec_(std::move(l)) {
  const auto& s = std::get<LatentLipschitz>(spec_);
  check_lipschitz(s.lipschitz);
  check_features(s.theta);
  if (!s.joint) throw std::invalid_argument("latent Lipschitz model needs a joint reward function");
  num_arms_ = s.theta.size();
  lipschitz_ = s.lipschitz;
}

RewardModel::Family RewardModel::family() const {
  return static_cast<Family>(spec_.index());
}

double RewardModel::eval(ArmId a, double x) const {
  switch (spec_.index()) {
    case 0:
      return 1.0 - lipschitz_ * std::abs(x - phi_[a]);
    case 1: {
      const auto& s = std::get<FiniteTypes>(spec_);
      return s.type_functions[s.type_of_arm[a]](x);
    }
    default: {
      const auto& s = std::get<LatentLipschitz>(spec_);
      return s.joint(x, s.theta[a]);
    }
  }
}

double RewardModel::expected_reward(ArmId a, double x) const {
  if (a >= num_arms_) {
    throw std::out_of_range(fmt::format("arm {} out of range for {} arms", a, num_arms_));
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument(fmt::format("context {} outside [0,1]", x));
  }
  return eval(a, x);
}

void RewardModel::rewards_at(double x, std::span<double> out) const {
  if (out.size() != num_arms_) throw std::invalid_argument("rewards_at: output size mismatch");
  if (spec_.index() == 0) {
    for (std::size_t a = 0; a < num_arms_; ++a) out[a] = 1.0 - lipschitz_ * std::abs(x - phi_[a]);
    return;
  }
  for (std::size_t a = 0; a < num_arms_; ++a) out[a] = eval(a, x);
}

OptimalReward RewardModel::optimal_reward(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument(fmt::format("context {} outside [0,1]", x));
  }
  OptimalReward best{-std::numeric_limits<double>::infinity(), {}};
  for (std::size_t a = 0; a < num_arms_; ++a) {
    const double f = eval(a, x);
    if (f > best.value) {
      best.value = f;
      best.argmax.assign(1, a);
    } else if (f == best.value) {
      best.argmax.push_back(a);
    }
  }
  return best;
}

std::optional<double> RewardModel::latent_feature(ArmId a) const {
  if (a >= num_arms_) throw std::out_of_range("latent_feature: arm out of range");
  if (const auto* z = std::get_if<Zigzag>(&spec_)) return z->theta[a];
  if (const auto* l = std::get_if<LatentLipschitz>(&spec_)) return l->theta[a];
  return std::nullopt;
}

bool RewardModel::has_latent_features() const {
  return spec_.index() != 1;
}

RewardModel RewardModel::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != num_arms_) throw std::invalid_argument("permutation size mismatch");
  std::vector<bool> seen(num_arms_, false);
  for (auto p : perm) {
    if (p >= num_arms_ || seen[p]) throw std::invalid_argument("not a permutation of the arms");
    seen[p] = true;
  }
  auto pick = [&](const auto& src) {
    std::remove_cvref_t<decltype(src)> out;
    out.reserve(src.size());
    for (auto p : perm) out.push_back(src[p]);
    return out;
  };
  switch (spec_.index()) {
    case 0: {
      auto z = std::get<Zigzag>(spec_);
      z.theta = pick(z.theta);
      return RewardModel(std::move(z));
    }
    case 1: {
      auto f = std::get<FiniteTypes>(spec_);
      f.type_of_arm = pick(f.type_of_arm);
      return RewardModel(std::move(f));
    }
    default: {
      auto l = std::get<LatentLipschitz>(spec_);
      l.theta = pick(l.theta);
      return RewardModel(std::move(l));
    }
  }
}

namespace presets {

RewardModel zigzag(std::size_t num_arms, double lipschitz) {
  Zigzag z{lipschitz, {}};
  for (std::size_t a = 0; a < num_arms; ++a) {
    z.theta.push_back(static_cast<double>(a + 1) / static_cast<double>(num_arms));
  }
  return RewardModel(std::move(z));
}

RewardModel finite_types(std::size_t num_arms, std::size_t num_types, double lipschitz) {
  if (num_types == 0) throw std::invalid_argument("finite_types: need at least one type");
  if (lipschitz > 1.0) throw std::invalid_argument("finite_types: tents leave [0,1] for L > 1");
  FiniteTypes f{lipschitz, {}, {}};
  for (std::size_t j = 0; j < num_types; ++j) {
    const double c = (static_cast<double>(j) + 0.5) / static_cast<double>(num_types);
    f.type_functions.emplace_back(std::vector<double>{0.0, c, 1.0},
                                  std::vector<double>{1.0 - lipschitz * c, 1.0, 1.0 - lipschitz * (1.0 - c)});
  }
  for (std::size_t a = 0; a < num_arms; ++a) f.type_of_arm.push_back(a % num_types);
  return RewardModel(std::move(f));
}

RewardModel latent_tent(std::size_t num_arms, double lipschitz) {
  if (lipschitz > 1.0) throw std::invalid_argument("latent_tent: rewards leave [0,1] for L > 1");
  LatentLipschitz l;
  l.lipschitz = lipschitz;
  l.name = "tent";
  for (std::size_t a = 0; a < num_arms; ++a) {
    l.theta.push_back(static_cast<double>(a + 1) / static_cast<double>(num_arms));
  }
  l.joint = [lipschitz](double x, double theta) { return 1.0 - lipschitz * std::abs(x - theta); };
  return RewardModel(std::move(l));
}

}  // namespace presets

double empirical_lipschitz(const RewardModel& model, std::size_t grid_points) {
  if (grid_points < 2) throw std::invalid_argument("empirical_lipschitz: need >= 2 grid points");
  const std::size_t K = model.num_arms();
  std::vector<double> prev(K), cur(K);
  model.rewards_at(0.0, prev);
  double prev_x = 0.0;
  double worst = 0.0;
  for (std::size_t i = 1; i < grid_points; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    model.rewards_at(x, cur);
    for (std::size_t a = 0; a < K; ++a) {
      worst = std::max(worst, std::abs(cur[a] - prev[a]) / (x - prev_x));
    }
    std::swap(prev, cur);
    prev_x = x;
  }
  return worst;
}

StreamSeeds StreamSeeds::derive(std::uint64_t base_seed, std::uint64_t replication) {
  std::uint64_t state = base_seed ^ (0xd1b54a32d192ed03ULL * (replication + 1));
  StreamSeeds s;
  s.context = splitmix64(state);
  s.noise = splitmix64(state);
  return s;
}

Environment::Environment(RewardModel model, double noise_std, Trial horizon, StreamSeeds seeds)
    : model_(std::move(model)),
      noise_std_(noise_std),
      horizon_(horizon),
      seeds_(seeds),
      context_rng_(seeds.context),
      noise_rng_(seeds.noise) {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw std::invalid_argument("noise standard deviation must be finite and nonnegative");
  }
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
}

Environment::Environment(RewardModel model, double noise_std, Trial horizon, std::uint64_t seed)
    : Environment(std::move(model), noise_std, horizon, StreamSeeds::derive(seed, 0)) {}

double Environment::sample_context() {
  // 53 random mantissa bits: exactly representable and strictly below 1.
  return static_cast<double>(context_rng_() >> 11) * 0x1.0p-53;
}

double Environment::observe(ArmId a, double x) {
  const double mean = model_.expected_reward(a, x);
  if (noise_std_ == 0.0) return mean;
  return mean + noise_std_ * noise_(noise_rng_);
}

}  // namespace azoom
