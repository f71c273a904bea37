#pragma once

#include <azoom/env.hpp>
#include <azoom/policy.hpp>
#include <azoom/trajectory_io.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace azoom {

/// Environment variable consulted when a config names no output directory.
inline constexpr const char* kOutputDirEnv = "AZOOM_OUTPUT_DIR";

struct EnvironmentSpec {
  std::string family = "zigzag";  // zigzag | finite_types | latent_tent
  std::size_t num_arms = 50;
  double lipschitz = 1.0;
  double noise_std = 0.01;
  Trial horizon = 20000;
  std::uint64_t seed = 1;
  std::size_t num_types = 4;                   // finite_types only
  std::optional<std::uint64_t> permute_seed;  // relabel arms with a seeded shuffle
};

struct VariantSpec {
  std::string label;
  PolicyConfig policy;
};

struct ExperimentConfig {
  EnvironmentSpec environment;
  std::vector<VariantSpec> variants;
  std::size_t replications = 1;
  std::filesystem::path output_dir;
  bool write_trajectories = true;
  std::size_t context_bins = 20;
  std::size_t threads = 1;

  void validate() const;
};

/// Parses the JSON experiment config. Unknown keys are rejected. Throws ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// K = 200 zigzag, sigma = 1e-2, T = 100000, flag at 4 ln T / width^2, k = 26 for the
/// learned variant, all four variants.
ExperimentConfig zigzag200_preset();

/// The four variants with shared environment-derived settings.
std::vector<VariantSpec> default_variants(const EnvironmentSpec& env, FlagMode mode, std::optional<std::size_t> fixed_k);

RewardModel build_model(const EnvironmentSpec& spec);

/// PolicyConfig with lipschitz / noise / horizon taken from the environment.
PolicyConfig policy_for(const EnvironmentSpec& env, Variant variant);

struct RunArtifacts {
  std::string label;
  Variant variant = Variant::Learned;
  std::size_t replication = 0;
  std::filesystem::path trajectory;  // empty when trajectories are disabled
  std::filesystem::path summary;
  std::filesystem::path arm_frequency;
  double final_cum_regret = 0.0;
  double final_avg_cum_reward = 0.0;
  std::vector<SummaryRow> summary_rows;
};

struct ExperimentResult {
  std::filesystem::path manifest;
  std::vector<RunArtifacts> runs;  // ordered by (variant, replication)
};

/// Runs every (variant, replication) pair. Replication r uses StreamSeeds::derive(seed, r)
/// for all variants, so their contexts and noise draws are paired.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes model-only diagnostics (kappa, mu_kappa, M_i, gap/diam, argmax map) as CSVs.
struct DiagnoseOptions {
  std::size_t kappa_grid = 1000;
  std::size_t mu_grid = 10000;
  unsigned max_scale = 10;
  std::size_t points_per_interval = 100;
  unsigned gap_depth = 3;
  std::size_t gap_grid = 1000;
  std::size_t argmax_bins = 100;
};
std::vector<std::filesystem::path> write_diagnostics(const EnvironmentSpec& spec, const std::filesystem::path& dir,
                                                     const DiagnoseOptions& opts = {});

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Invariant suites: model audits, audited runs of each variant, estimator metric
/// properties and cluster guarantees.
std::vector<VerifyCheck> verify_invariants(const ExperimentConfig& cfg, Trial max_trials = 5000);

}  // namespace azoom
