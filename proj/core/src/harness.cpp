#include <azoom/harness.hpp>

#include <azoom/cluster.hpp>
#include <azoom/estimator.hpp>
#include <azoom/metrics.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace azoom {

using nlohmann::json;

namespace {

template <typename T>
T take(const json& obj, std::string_view key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->template get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
  }
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

std::optional<std::size_t> parse_k(const json& obj, std::optional<std::size_t> fallback) {
  auto it = obj.find("k");
  if (it == obj.end()) return fallback;
  if (it->is_string()) {
    if (it->get<std::string>() == "formula") return std::nullopt;
    throw ConfigError(fmt::format("k must be a positive integer or \"formula\", got {}", it->dump()));
  }
  if (!it->is_number_integer() || it->get<long long>() < 1) {
    throw ConfigError(fmt::format("k must be a positive integer or \"formula\", got {}", it->dump()));
  }
  return static_cast<std::size_t>(it->get<long long>());
}

EnvironmentSpec parse_environment(const json& j, EnvironmentSpec spec) {
  if (!j.is_object()) throw ConfigError("'environment' must be an object");
  reject_unknown(j, {"family", "num_arms", "lipschitz", "noise_std", "horizon", "seed", "num_types", "permute_seed"},
                 "environment");
  spec.family = take(j, "family", spec.family);
  spec.num_arms = take(j, "num_arms", spec.num_arms);
  spec.lipschitz = take(j, "lipschitz", spec.lipschitz);
  spec.noise_std = take(j, "noise_std", spec.noise_std);
  spec.horizon = take(j, "horizon", spec.horizon);
  spec.seed = take(j, "seed", spec.seed);
  spec.num_types = take(j, "num_types", spec.num_types);
  if (j.contains("permute_seed")) spec.permute_seed = take<std::uint64_t>(j, "permute_seed", 0);
  return spec;
}

json to_json(const EnvironmentSpec& e) {
  json j{{"family", e.family},       {"num_arms", e.num_arms}, {"lipschitz", e.lipschitz},
         {"noise_std", e.noise_std}, {"horizon", e.horizon},   {"seed", e.seed}};
  if (e.family == "finite_types") j["num_types"] = e.num_types;
  if (e.permute_seed) j["permute_seed"] = *e.permute_seed;
  return j;
}

json to_json(const VariantSpec& v) {
  const auto& p = v.policy;
  json j{{"label", v.label},
         {"variant", std::string(to_string(p.variant))},
         {"flag_mode", std::string(to_string(p.flag_mode))},
         {"lipschitz", p.lipschitz},
         {"noise_var", p.noise_var},
         {"ucb_constant", p.ucb_constant},
         {"k_constant", p.k_constant},
         {"delta_min", p.delta_min},
         {"singleton_skip", p.singleton_skip}};
  if (p.fixed_k) {
    j["k"] = *p.fixed_k;
  } else {
    j["k"] = "formula";
  }
  return j;
}

json to_json(const ExperimentConfig& c) {
  json vars = json::array();
  for (const auto& v : c.variants) vars.push_back(to_json(v));
  return json{{"environment", to_json(c.environment)},
              {"variants", vars},
              {"replications", c.replications},
              {"write_trajectories", c.write_trajectories},
              {"context_bins", c.context_bins}};
}

std::string file_stem(const std::string& label, std::size_t rep) {
  return fmt::format("{}_r{:03}", label, rep);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (variants.empty()) throw ConfigError("at least one variant is required");
  if (context_bins < 1) throw ConfigError("context_bins must be >= 1");
  if (environment.num_arms < 1) throw ConfigError("num_arms must be >= 1");
  if (environment.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(environment.noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  std::set<std::string> labels;
  for (const auto& v : variants) {
    if (v.label.empty()) throw ConfigError("variant label must be non-empty");
    if (v.label.find_first_of("/\\,. ") != std::string::npos) {
      throw ConfigError(fmt::format("variant label '{}' must be a plain file-name token", v.label));
    }
    if (!labels.insert(v.label).second) throw ConfigError(fmt::format("duplicate variant label '{}'", v.label));
    if (v.policy.horizon != environment.horizon) throw ConfigError("variant horizon differs from environment");
    v.policy.validate();
  }
}

PolicyConfig policy_for(const EnvironmentSpec& env, Variant variant) {
  PolicyConfig p;
  p.variant = variant;
  p.lipschitz = env.lipschitz;
  p.noise_var = env.noise_std * env.noise_std;
  p.horizon = env.horizon;
  return p;
}

std::vector<VariantSpec> default_variants(const EnvironmentSpec& env, FlagMode mode,
                                          std::optional<std::size_t> fixed_k) {
  std::vector<VariantSpec> out;
  for (auto v : {Variant::Learned, Variant::OracleTrue, Variant::OracleMetric, Variant::NoSimilarity}) {
    PolicyConfig p = policy_for(env, v);
    p.flag_mode = mode;
    if (v == Variant::Learned) p.fixed_k = fixed_k;
    out.push_back({std::string(to_string(v)), p});
  }
  return out;
}

ExperimentConfig zigzag200_preset() {
  ExperimentConfig c;
  c.environment = EnvironmentSpec{"zigzag", 200, 1.0, 1e-2, 100000, 1, 4, std::nullopt};
  c.variants = default_variants(c.environment, FlagMode::Simulation, 26);
  c.replications = 1;
  return c;
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(root,
                 {"preset", "environment", "variants", "replications", "output_dir", "write_trajectories",
                  "context_bins", "threads", "flag_mode", "k"},
                 "config");

  ExperimentConfig cfg;
  const std::string preset = take<std::string>(root, "preset", "");
  if (preset == "zigzag200") {
    cfg = zigzag200_preset();
  } else if (!preset.empty()) {
    throw ConfigError(fmt::format("unknown preset '{}'", preset));
  }
  if (root.contains("environment")) cfg.environment = parse_environment(root["environment"], cfg.environment);

  const FlagMode default_mode =
      parse_flag_mode(take<std::string>(root, "flag_mode", preset == "zigzag200" ? "simulation" : "theory"));
  const auto default_k = parse_k(root, preset == "zigzag200" ? std::optional<std::size_t>{26} : std::nullopt);

  if (root.contains("variants")) {
    const auto& vars = root["variants"];
    if (!vars.is_array()) throw ConfigError("'variants' must be an array");
    cfg.variants.clear();
    for (const auto& v : vars) {
      if (!v.is_object()) throw ConfigError("each variant must be an object");
      reject_unknown(v,
                     {"label", "variant", "flag_mode", "k", "ucb_constant", "k_constant", "delta_min",
                      "singleton_skip", "lipschitz", "noise_var", "audit"},
                     "variant");
      const Variant kind = parse_variant(take<std::string>(v, "variant", "learned"));
      PolicyConfig p = policy_for(cfg.environment, kind);
      p.flag_mode = v.contains("flag_mode") ? parse_flag_mode(v["flag_mode"].get<std::string>()) : default_mode;
      p.fixed_k = parse_k(v, default_k);
      p.ucb_constant = take(v, "ucb_constant", p.ucb_constant);
      p.k_constant = take(v, "k_constant", p.k_constant);
      p.delta_min = take(v, "delta_min", p.delta_min);
      p.singleton_skip = take(v, "singleton_skip", p.singleton_skip);
      p.lipschitz = take(v, "lipschitz", p.lipschitz);
      p.noise_var = take(v, "noise_var", p.noise_var);
      p.audit = take(v, "audit", p.audit);
      cfg.variants.push_back({take<std::string>(v, "label", std::string(to_string(kind))), p});
    }
  } else {
    cfg.variants = default_variants(cfg.environment, default_mode, default_k);
  }

  cfg.replications = take(root, "replications", cfg.replications);
  cfg.context_bins = take(root, "context_bins", cfg.context_bins);
  cfg.threads = std::max<std::size_t>(1, take(root, "threads", cfg.threads));
  cfg.write_trajectories = take(root, "write_trajectories", cfg.environment.horizon <= 100000);

  if (root.contains("output_dir")) {
    cfg.output_dir = take<std::string>(root, "output_dir", "");
  } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    cfg.output_dir = env;
  } else {
    cfg.output_dir = "azoom_out";
  }

  // Keep variants consistent with an environment that may have been overridden after the preset.
  for (auto& v : cfg.variants) v.policy.horizon = cfg.environment.horizon;
  try {
    cfg.validate();
    (void)build_model(cfg.environment);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

RewardModel build_model(const EnvironmentSpec& spec) {
  auto model = [&]() -> RewardModel {
    if (spec.family == "zigzag") return presets::zigzag(spec.num_arms, spec.lipschitz);
    if (spec.family == "finite_types") return presets::finite_types(spec.num_arms, spec.num_types, spec.lipschitz);
    if (spec.family == "latent_tent") return presets::latent_tent(spec.num_arms, spec.lipschitz);
    throw ConfigError(fmt::format("unknown model family '{}'", spec.family));
  }();
  if (!spec.permute_seed) return model;
  std::vector<std::size_t> perm(spec.num_arms);
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::mt19937_64 rng(*spec.permute_seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return model.permuted(perm);
}

namespace {

RunArtifacts run_one(const ExperimentConfig& cfg, const RewardModel& model, const VariantSpec& variant,
                     std::size_t rep) {
  RunArtifacts art;
  art.label = variant.label;
  art.variant = variant.policy.variant;
  art.replication = rep;
  const auto stem = file_stem(variant.label, rep);
  art.summary = cfg.output_dir / (stem + "_summary.csv");
  art.arm_frequency = cfg.output_dir / (stem + "_arm_frequency.csv");

  Environment env(model, cfg.environment.noise_std, cfg.environment.horizon,
                  StreamSeeds::derive(cfg.environment.seed, rep));
  SummaryAccumulator summary(cfg.environment.horizon);
  ArmFrequency freq(4, model.num_arms(), cfg.context_bins);
  const Trial horizon = cfg.environment.horizon;

  std::ofstream traj_out;
  std::optional<TrajectoryWriter> writer;
  if (cfg.write_trajectories) {
    art.trajectory = cfg.output_dir / (stem + "_trajectory.csv");
    traj_out.open(art.trajectory, std::ios::binary | std::ios::trunc);
    if (!traj_out) throw std::runtime_error(fmt::format("cannot open {}", art.trajectory.string()));
    writer.emplace(traj_out);
  }

  run_streaming(env, variant.policy, [&](const TrialRecord& r) {
    if (writer) writer->write(r);
    summary.add(r);
    ++freq.at(static_cast<std::size_t>((r.t - 1) * 4 / horizon), r.arm, context_bin(r.x, cfg.context_bins));
  });
  if (writer) {
    traj_out.flush();
    if (!traj_out) throw std::runtime_error(fmt::format("write failed: {}", art.trajectory.string()));
  }

  write_summary_csv(art.summary, summary.rows());
  std::ofstream fout(art.arm_frequency, std::ios::binary | std::ios::trunc);
  if (!fout) throw std::runtime_error(fmt::format("cannot open {}", art.arm_frequency.string()));
  write_frequency_csv(fout, freq);
  if (!fout) throw std::runtime_error(fmt::format("write failed: {}", art.arm_frequency.string()));

  art.final_cum_regret = summary.cum_regret();
  art.final_avg_cum_reward = summary.avg_cum_reward();
  art.summary_rows = summary.rows();
  return art;
}

void write_manifest(const ExperimentConfig& cfg, const std::vector<std::optional<RunArtifacts>>& runs,
                    const std::string& error, const std::filesystem::path& path) {
  json jr = json::array();
  for (const auto& r : runs) {
    if (!r) continue;
    json e{{"label", r->label},
           {"variant", std::string(to_string(r->variant))},
           {"replication", r->replication},
           {"summary", r->summary.filename().string()},
           {"arm_frequency", r->arm_frequency.filename().string()},
           {"final_cum_regret", r->final_cum_regret},
           {"final_avg_cum_reward", r->final_avg_cum_reward}};
    e["trajectory"] = r->trajectory.empty() ? json(nullptr) : json(r->trajectory.filename().string());
    jr.push_back(std::move(e));
  }
  json m{{"status", error.empty() ? "complete" : "partial"}, {"config", to_json(cfg)}, {"runs", jr}};
  if (!error.empty()) m["error"] = error;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << m.dump(2) << '\n';
  if (!out) throw std::runtime_error(fmt::format("cannot write manifest {}", path.string()));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", cfg.output_dir.string(), ec.message()));

  const RewardModel model = build_model(cfg.environment);
  const std::size_t jobs = cfg.variants.size() * cfg.replications;
  std::vector<std::optional<RunArtifacts>> results(jobs);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::string first_error;

  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const auto& variant = cfg.variants[j / cfg.replications];
      const std::size_t rep = j % cfg.replications;
      try {
        results[j] = run_one(cfg, model, variant, rep);
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mu);
        if (first_error.empty()) first_error = fmt::format("{} replication {}: {}", variant.label, rep, e.what());
      }
    }
  };
  const std::size_t nthreads = std::min(cfg.threads, jobs);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  }

  ExperimentResult res;
  res.manifest = cfg.output_dir / "manifest.json";
  write_manifest(cfg, results, first_error, res.manifest);
  if (!first_error.empty()) throw std::runtime_error(first_error);
  for (auto& r : results) res.runs.push_back(std::move(*r));
  return res;
}

std::vector<std::filesystem::path> write_diagnostics(const EnvironmentSpec& spec, const std::filesystem::path& dir,
                                                     const DiagnoseOptions& opts) {
  std::filesystem::create_directories(dir);
  const RewardModel model = build_model(spec);
  const double L = spec.lipschitz;
  std::vector<std::filesystem::path> written;
  auto open = [&](const char* name) {
    written.push_back(dir / name);
    std::ofstream out(written.back(), std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open {}", written.back().string()));
    return out;
  };

  {
    auto out = open("kappa.csv");
    out << "x,f_star,kappa\n";
    for (std::size_t i = 0; i < opts.kappa_grid; ++i) {
      const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(opts.kappa_grid);
      out << fmt::format("{:.17g},{:.17g},{:.17g}\n", x, model.optimal_reward(x).value, kappa(model, x));
    }
  }
  {
    auto out = open("mu_kappa.csv");
    out << "i,z,mu_kappa\n";
    for (unsigned i = 1; i <= opts.max_scale; ++i) {
      const double z = 22.0 * L * std::ldexp(1.0, -static_cast<int>(i));
      out << fmt::format("{},{:.17g},{:.17g}\n", i, z, mu_kappa(model, z, opts.mu_grid));
    }
  }
  {
    auto out = open("m_i.csv");
    out << "i,m_i,saturated_bound\n";
    for (unsigned i = 1; i <= opts.max_scale; ++i) {
      out << fmt::format("{},{},{}\n", i, m_i(model, i, L, opts.points_per_interval),
                         (std::uint64_t{1} << i) * model.num_arms());
    }
  }
  {
    auto out = open("gap_diam.csv");
    out << "depth,cell,c0,c1,arm,gap,diam\n";
    for (unsigned d = 0; d <= opts.gap_depth; ++d) {
      const std::uint64_t cells = std::uint64_t{1} << d;
      for (std::uint64_t c = 0; c < cells; ++c) {
        const double w = std::ldexp(1.0, -static_cast<int>(d));
        const Interval iv{static_cast<double>(c) * w, static_cast<double>(c + 1) * w};
        for (ArmId a = 0; a < model.num_arms(); ++a) {
          const ArmId arms[] = {a};
          out << fmt::format("{},{},{:.17g},{:.17g},{},{:.17g},{:.17g}\n", d, c, iv.lo, iv.hi, a,
                             gap(model, iv, arms, opts.gap_grid), diam(model, iv, arms, opts.gap_grid));
        }
      }
    }
  }
  {
    auto out = open("argmax.csv");
    out << "bin,x,argmax,f_star\n";
    for (std::size_t b = 0; b < opts.argmax_bins; ++b) {
      const double x = (static_cast<double>(b) + 0.5) / static_cast<double>(opts.argmax_bins);
      const auto opt = model.optimal_reward(x);
      out << fmt::format("{},{:.17g},{},{:.17g}\n", b, x, opt.argmax.front(), opt.value);
    }
  }
  return written;
}

std::vector<VerifyCheck> verify_invariants(const ExperimentConfig& cfg, Trial max_trials) {
  std::vector<VerifyCheck> checks;
  const RewardModel model = build_model(cfg.environment);
  const double L = cfg.environment.lipschitz;

  {
    const double slope = empirical_lipschitz(model, 10000);
    checks.push_back({"model.lipschitz", slope <= L + 1e-9, fmt::format("max grid slope {:.6g}, L = {}", slope, L)});
  }
  {
    std::vector<double> f(model.num_arms());
    bool ok = true;
    for (std::size_t i = 0; i < 10000 && ok; ++i) {
      model.rewards_at(static_cast<double>(i) / 9999.0, f);
      ok = std::all_of(f.begin(), f.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
    }
    checks.push_back({"model.range", ok, "expected rewards within [0,1] on a 10^4 grid"});
  }

  const Trial horizon = std::min(cfg.environment.horizon, max_trials);
  std::mt19937_64 probe_rng(cfg.environment.seed ^ 0x5eedULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& v : cfg.variants) {
    VerifyCheck c{fmt::format("run.{}", v.label), true, ""};
    try {
      PolicyConfig p = v.policy;
      p.horizon = horizon;
      p.audit = true;
      Environment env(model, cfg.environment.noise_std, horizon, StreamSeeds::derive(cfg.environment.seed, 0));
      auto policy = run_streaming(env, p, {});
      std::vector<double> probes(1000);
      for (auto& x : probes) x = unit(probe_rng);
      check_invariants(policy.state(), probes);
      std::size_t worst_excess = 0;
      if (p.flag_mode == FlagMode::Theory) {
        for (const Ball& b : policy.state().balls()) {
          const double ceiling = policy.flag_rule().threshold(b.width()) + 2.0;
          if (static_cast<double>(b.ucb_plays) > ceiling) ++worst_excess;
        }
      }
      c.passed = worst_excess == 0;
      c.detail = fmt::format("{} trials, {} balls, {} subpartitions{}", horizon, policy.state().balls().size(),
                             policy.subpartitions(),
                             worst_excess ? fmt::format(", {} balls over the UCB play ceiling", worst_excess) : "");
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = e.what();
    }
    checks.push_back(std::move(c));
  }

  {
    VerifyCheck c{"estimator.metric", true, "symmetry and triangle inequality of the grid distance"};
    std::uniform_int_distribution<std::size_t> arm(0, model.num_arms() - 1);
    for (int trial = 0; trial < 500 && c.passed; ++trial) {
      const unsigned depth = static_cast<unsigned>(trial % 6);
      const auto cells = std::uint64_t{1} << depth;
      const auto cell = std::uniform_int_distribution<std::uint64_t>(0, cells - 1)(probe_rng);
      const double w = std::ldexp(1.0, -static_cast<int>(depth));
      const Interval half{static_cast<double>(cell) * w, static_cast<double>(cell + 1) * w};
      const ArmId a = arm(probe_rng), b = arm(probe_rng), d = arm(probe_rng);
      const double ab = true_distance(model, a, b, half), ba = true_distance(model, b, a, half);
      const double ad = true_distance(model, a, d, half), db = true_distance(model, d, b, half);
      if (ab != ba || ab > ad + db + 1e-12) {
        c.passed = false;
        c.detail = fmt::format("violated for arms ({}, {}, {}) on [{}, {})", a, b, d, half.lo, half.hi);
      }
    }
    checks.push_back(std::move(c));
  }

  {
    VerifyCheck c{"cluster.oracle_diameter", true, ""};
    TrueDistance dist(model);
    std::vector<ArmId> arms(model.num_arms());
    for (std::size_t a = 0; a < arms.size(); ++a) arms[a] = a;
    std::size_t balls = 0;
    for (unsigned depth = 0; depth < 4 && c.passed; ++depth) {
      const double w = std::ldexp(1.0, -static_cast<int>(depth));
      for (std::uint64_t cell = 0; cell < (std::uint64_t{1} << depth) && c.passed; ++cell) {
        const Interval iv{static_cast<double>(cell) * w, static_cast<double>(cell + 1) * w};
        const auto sp = subpartition(arms, iv, L, dist);
        for (const auto* side : {&sp.left, &sp.right}) {
          const Interval half = side == &sp.left ? iv.left_half() : iv.right_half();
          for (const auto& cl : side->clusters) {
            ++balls;
            const double dm = diam(model, half, cl, 400);
            if (dm > 2.0 * L * half.width() + 1e-12) {
              c.passed = false;
              c.detail = fmt::format("diam {} > 2 L width on [{}, {})", dm, half.lo, half.hi);
            }
          }
        }
      }
    }
    if (c.passed) c.detail = fmt::format("{} oracle-clustered balls within 2 L width", balls);
    checks.push_back(std::move(c));
  }
  return checks;
}

}  // namespace azoom
