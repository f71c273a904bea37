#include <azoom/policy.hpp>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace azoom {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Learned: return "learned";
    case Variant::OracleTrue: return "oracle_true";
    case Variant::OracleMetric: return "oracle_metric";
    case Variant::NoSimilarity: return "no_similarity";
  }
  return "?";
}

std::string_view to_string(FlagMode m) {
  return m == FlagMode::Theory ? "theory" : "simulation";
}

Variant parse_variant(std::string_view s) {
  for (auto v : {Variant::Learned, Variant::OracleTrue, Variant::OracleMetric, Variant::NoSimilarity}) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError(fmt::format("unknown variant '{}'", s));
}

FlagMode parse_flag_mode(std::string_view s) {
  if (s == "theory") return FlagMode::Theory;
  if (s == "simulation") return FlagMode::Simulation;
  throw ConfigError(fmt::format("unknown flag mode '{}'", s));
}

void PolicyConfig::validate() const {
  if (!(lipschitz > 0.0)) throw ConfigError("lipschitz must be positive");
  if (!(noise_var >= 0.0)) throw ConfigError("noise variance must be nonnegative");
  if (horizon == 0) throw ConfigError("horizon must be positive");
  if (!(ucb_constant > 0.0)) throw ConfigError("ucb constant must be positive");
  if (fixed_k && *fixed_k == 0) throw ConfigError("fixed k must be >= 1");
  if (!(k_constant > 0.0)) throw ConfigError("k constant must be positive");
  if (!(delta_min > 0.0 && delta_min <= 1.0)) throw ConfigError("delta_min must lie in (0, 1]");
}

std::size_t sample_size_formula(const PolicyConfig& cfg, std::size_t num_arms, double width) {
  const double raw = cfg.k_constant * cfg.noise_var *
                     std::log(static_cast<double>(cfg.horizon) * static_cast<double>(num_arms)) /
                     (cfg.lipschitz * cfg.lipschitz * width * width);
  // Far beyond any reachable sample count; keeps the conversion defined.
  constexpr double cap = 0x1.0p40;
  return static_cast<std::size_t>(std::clamp(std::ceil(raw), 1.0, cap));
}

ApproxZooming::ApproxZooming(PolicyConfig cfg, const RewardModel& model)
    : cfg_(std::move(cfg)),
      model_(model),
      state_(model.num_arms()),
      rewards_(model.num_arms()) {
  cfg_.validate();
  if (cfg_.variant == Variant::OracleMetric && !model.has_latent_features()) {
    throw ConfigError("oracle_metric needs a reward model with latent arm features");
  }
  const double log_t = std::log(static_cast<double>(cfg_.horizon));
  ucb_ = UcbParams{cfg_.lipschitz, cfg_.noise_var, log_t, cfg_.ucb_constant};
  flag_rule_ = cfg_.flag_mode == FlagMode::Theory
                   ? FlagRule::theory(cfg_.lipschitz, cfg_.noise_var, log_t, cfg_.delta_min, cfg_.ucb_constant)
                   : FlagRule::simulation(log_t, cfg_.delta_min);

  if (cfg_.variant == Variant::NoSimilarity) {
    state_ = init_singleton_partition(model.num_arms());
    return;
  }
  state_ = init_partition(model.num_arms());
  Ball& root = state_.ball(0);
  root.suff_k = k_for(root);
  if (splits_at_flag_time(root)) {
    flag_ball(0, 0);  // already flagged; splits immediately
  }
}

std::size_t ApproxZooming::k_for(const Ball& ball) const {
  if (cfg_.fixed_k) return *cfg_.fixed_k;
  return sample_size_formula(cfg_, ball.arms.size(), ball.width());
}

bool ApproxZooming::splits_at_flag_time(const Ball& ball) const {
  if (cfg_.variant != Variant::Learned) return true;
  return cfg_.singleton_skip && ball.arms.size() == 1;
}

void ApproxZooming::flag_ball(BallId id, Trial t) {
  Ball& b = state_.ball(id);
  if (b.state == BallState::Active) state_.flag(id, t, k_for(b));
  if (!splits_at_flag_time(state_.ball(id))) return;

  switch (cfg_.variant) {
    case Variant::OracleTrue: {
      TrueDistance d(model_);
      split(id, t, d);
      break;
    }
    case Variant::OracleMetric: {
      MetricDistance d(model_);
      split(id, t, d);
      break;
    }
    default: {
      // No-similarity balls and singleton learned balls.
      NoDistance d;
      split(id, t, d);
      break;
    }
  }
}

void ApproxZooming::split(BallId id, Trial t, DistanceSource& dist) {
  const Ball& b = state_.ball(id);
  const Subpartition sp = subpartition(b.arms, b.interval, cfg_.lipschitz, dist);
  apply_subpartition(state_, id, sp.left.clusters, sp.right.clusters, t);
  ++subpartitions_;
}

TrialRecord ApproxZooming::step(Environment& env, double x) {
  if (!(x >= 0.0 && x < 1.0)) throw std::invalid_argument(fmt::format("step: context {} outside [0,1)", x));
  const Trial t = ++t_;
  const Selection sel = select_ball(state_, x, ucb_);
  Ball& ball = state_.ball(sel.ball);

  const std::size_t k = sel.phase == Phase::Flagged ? ball.suff_k : 0;
  const ArmId arm = select_arm(ball, sel.phase, k);
  const double payoff = env.observe(arm, x);
  record_play(state_, sel.ball, arm, x, payoff, t);

  model_.rewards_at(x, rewards_);
  TrialRecord rec{t, x, sel.ball, sel.phase, arm, payoff, *std::max_element(rewards_.begin(), rewards_.end()),
                  rewards_[arm]};

  if (sel.phase == Phase::Flagged) {
    const Ball& b = state_.ball(sel.ball);
    if (b.flagged_samples.sufficient(arm, b.suff_k) && suffdata(b, b.suff_k).all) {
      LearnedDistance d(b.flagged_samples, b.suff_k, cfg_.noise_var);
      split(sel.ball, t, d);
    }
  } else if (should_flag(state_.ball(sel.ball), flag_rule_)) {
    flag_ball(sel.ball, t);
  }

  if (cfg_.audit) {
    const double probes[] = {x};
    check_invariants(state_, probes);
  }
  return rec;
}

ApproxZooming run_streaming(Environment& env, const PolicyConfig& cfg, const TrialSink& sink) {
  if (env.horizon() != cfg.horizon) {
    throw std::invalid_argument(fmt::format("environment horizon {} != policy horizon {}", env.horizon(), cfg.horizon));
  }
  ApproxZooming policy(cfg, env.model());
  for (Trial i = 0; i < cfg.horizon; ++i) {
    const double x = env.sample_context();
    const TrialRecord rec = policy.step(env, x);
    if (sink) sink(rec);
  }
  return policy;
}

TrajectoryLog run(Environment& env, const PolicyConfig& cfg) {
  TrajectoryLog log;
  log.reserve(cfg.horizon);
  run_streaming(env, cfg, [&log](const TrialRecord& r) { log.push_back(r); });
  return log;
}

}  // namespace azoom
