// azoom: run experiments, dump model diagnostics, and check invariants.
//
//   azoom run <config.json> [--output-dir DIR] [--threads N]
//   azoom diagnose <config.json> [--output-dir DIR] [--max-scale I]
//   azoom verify <config.json> [--max-trials T]
//
// Exit codes: 0 success, 1 configuration error, 2 invariant violation.

#include <azoom/harness.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <cstdlib>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;

azoom::ExperimentConfig load(const std::string& path, const std::string& output_dir) {
  auto cfg = azoom::load_config(path);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  return cfg;
}

int cmd_run(const std::string& path, const std::string& output_dir, std::size_t threads) {
  auto cfg = load(path, output_dir);
  if (threads > 0) cfg.threads = threads;
  const auto res = azoom::run_experiment(cfg);
  for (const auto& r : res.runs) {
    fmt::print("{:<16} rep {:>3}  R(T) = {:>12.4f}  avg reward = {:.6f}\n", r.label, r.replication,
               r.final_cum_regret, r.final_avg_cum_reward);
  }
  fmt::print("manifest: {}\n", res.manifest.string());
  return kExitOk;
}

int cmd_diagnose(const std::string& path, const std::string& output_dir, unsigned max_scale) {
  auto cfg = load(path, output_dir);
  azoom::DiagnoseOptions opts;
  opts.max_scale = max_scale;
  const auto dir = cfg.output_dir / "diagnostics";
  for (const auto& f : azoom::write_diagnostics(cfg.environment, dir, opts)) fmt::print("{}\n", f.string());
  return kExitOk;
}

int cmd_verify(const std::string& path, azoom::Trial max_trials) {
  const auto cfg = load(path, "");
  const auto checks = azoom::verify_invariants(cfg, max_trials);
  bool ok = true;
  for (const auto& c : checks) {
    fmt::print("[{}] {:<28} {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
    ok = ok && c.passed;
  }
  return ok ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive context-arm partitioning bandit simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::size_t threads = 0;
  unsigned max_scale = 10;
  azoom::Trial max_trials = 5000;

  auto* run = app.add_subcommand("run", "Run every variant and replication of an experiment config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", output_dir,
                  fmt::format("Output directory (default: config, then ${}, then ./azoom_out)", azoom::kOutputDirEnv));
  run->add_option("--threads", threads, "Worker threads");

  auto* diag = app.add_subcommand("diagnose", "Write model-only diagnostics (kappa, mu_kappa, M_i, gap/diam)");
  diag->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  diag->add_option("--output-dir", output_dir, "Output directory");
  diag->add_option("--max-scale", max_scale, "Largest scale index i for M_i and mu_kappa")->check(CLI::Range(1, 20));

  auto* verify = app.add_subcommand("verify", "Run the invariant suites against a config");
  verify->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  verify->add_option("--max-trials", max_trials, "Trial cap for audited runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, output_dir, threads);
    if (*diag) return cmd_diagnose(config_path, output_dir, max_scale);
    return cmd_verify(config_path, max_trials);
  } catch (const azoom::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const azoom::InvariantViolation& e) {
    fmt::print(stderr, "invariant violation: {}\n", e.what());
    return kExitInvariant;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitConfig;
  }
}
