#pragma once

#include <azoom/types.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace azoom {

/// Continuous piecewise-linear function on [0,1] given by its knots.
class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<double> knots, std::vector<double> values);

  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] double max_slope() const;
  [[nodiscard]] const std::vector<double>& knots() const { return knots_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

/// f_a(x) = 1 - L |x - phi_a| with phi_a = 4 min_{z in {0, .5, 1}} |theta_a - z|.
struct Zigzag {
  double lipschitz = 1.0;
  std::vector<double> theta;
};

/// Arms share one of a handful of reward curves; the type of each arm is hidden.
struct FiniteTypes {
  double lipschitz = 1.0;
  std::vector<std::size_t> type_of_arm;
  std::vector<PiecewiseLinear> type_functions;
};

/// f_a(x) = g(x, theta_a) for a joint reward g that is L-Lipschitz in both arguments.
struct LatentLipschitz {
  double lipschitz = 1.0;
  std::vector<double> theta;
  std::function<double(double, double)> joint;
  std::string name = "custom";
};

struct OptimalReward {
  double value = 0.0;
  std::vector<ArmId> argmax;
};

/// Ground-truth expected-reward surface over [0,1] x [K].
class RewardModel {
 public:
  enum class Family { Zigzag, FiniteTypes, LatentLipschitz };

  explicit RewardModel(Zigzag z);
  explicit RewardModel(FiniteTypes f);
  explicit RewardModel(LatentLipschitz l);

  [[nodiscard]] Family family() const;
  [[nodiscard]] std::size_t num_arms() const { return num_arms_; }
  [[nodiscard]] double lipschitz() const { return lipschitz_; }

  /// Throws std::out_of_range for a bad arm, std::invalid_argument for x outside [0,1].
  [[nodiscard]] double expected_reward(ArmId a, double x) const;

  /// Fills out[a] = f_a(x) for every arm; out.size() must equal num_arms().
  void rewards_at(double x, std::span<double> out) const;

  [[nodiscard]] OptimalReward optimal_reward(double x) const;

  /// theta_a for families that carry a latent arm feature.
  [[nodiscard]] std::optional<double> latent_feature(ArmId a) const;
  [[nodiscard]] bool has_latent_features() const;

  /// Model whose arm i behaves like this model's arm perm[i].
  [[nodiscard]] RewardModel permuted(std::span<const std::size_t> perm) const;

  [[nodiscard]] const std::variant<Zigzag, FiniteTypes, LatentLipschitz>& spec() const { return spec_; }

 private:
  [[nodiscard]] double eval(ArmId a, double x) const;

  std::variant<Zigzag, FiniteTypes, LatentLipschitz> spec_;
  std::size_t num_arms_ = 0;
  double lipschitz_ = 1.0;
  std::vector<double> phi_;  // zigzag peak locations, cached
};

namespace presets {

/// Zigzag with theta_a = (a + 1) / K.
RewardModel zigzag(std::size_t num_arms, double lipschitz = 1.0);

/// `num_types` tent curves 1 - L|x - c_j| centred at c_j = (j + 1/2) / num_types;
/// arm a has type a mod num_types. Neighbouring tents cross with slope 2L.
RewardModel finite_types(std::size_t num_arms, std::size_t num_types, double lipschitz = 1.0);

/// g(x, theta) = 1 - L |x - theta| with theta_a = (a + 1) / K.
RewardModel latent_tent(std::size_t num_arms, double lipschitz);

}  // namespace presets

/// Largest finite-difference slope over a uniform grid, per arm, maximised.
double empirical_lipschitz(const RewardModel& model, std::size_t grid_points = 10000);

/// Seeds for the two independent streams an environment draws from.
struct StreamSeeds {
  std::uint64_t context = 0;
  std::uint64_t noise = 0;

  /// Deterministic per-replication seeds from a base seed.
  static StreamSeeds derive(std::uint64_t base_seed, std::uint64_t replication);
};

/// Uniform contexts, Gaussian payoff noise around a reward model.
class Environment {
 public:
  Environment(RewardModel model, double noise_std, Trial horizon, StreamSeeds seeds);
  Environment(RewardModel model, double noise_std, Trial horizon, std::uint64_t seed);

  [[nodiscard]] const RewardModel& model() const { return model_; }
  [[nodiscard]] std::size_t num_arms() const { return model_.num_arms(); }
  [[nodiscard]] double noise_std() const { return noise_std_; }
  [[nodiscard]] Trial horizon() const { return horizon_; }
  [[nodiscard]] const StreamSeeds& seeds() const { return seeds_; }

  /// Uniform draw on [0,1).
  double sample_context();

  /// f_a(x) + N(0, sigma^2); not clipped.
  double observe(ArmId a, double x);

 private:
  RewardModel model_;
  double noise_std_;
  Trial horizon_;
  StreamSeeds seeds_;
  std::mt19937_64 context_rng_;
  std::mt19937_64 noise_rng_;
  std::normal_distribution<double> noise_;
};

}  // namespace azoom
