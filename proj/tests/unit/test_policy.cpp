#include <azoom/policy.hpp>

#include <doctest.h>

#include <array>
#include <cmath>

using namespace azoom;

namespace {

PolicyConfig config(Variant v, const Environment& env) {
  PolicyConfig c;
  c.variant = v;
  c.lipschitz = env.model().lipschitz();
  c.noise_var = env.noise_std() * env.noise_std();
  c.horizon = env.horizon();
  c.audit = true;
  return c;
}

RewardModel constant_arms(double a, double b) {
  LatentLipschitz m;
  m.theta = {0.0, 1.0};
  m.joint = [a, b](double, double th) { return th == 0.0 ? a : b; };
  return RewardModel(m);
}

constexpr std::array kVariants = {Variant::Learned, Variant::OracleTrue, Variant::OracleMetric,
                                  Variant::NoSimilarity};

}  // namespace

TEST_CASE("config parsing and validation") {
  CHECK(parse_variant("oracle_true") == Variant::OracleTrue);
  CHECK(to_string(Variant::NoSimilarity) == "no_similarity");
  CHECK(parse_flag_mode("simulation") == FlagMode::Simulation);
  CHECK_THROWS_AS(parse_variant("bogus"), ConfigError);
  PolicyConfig c;
  c.horizon = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("sample size formula") {
  PolicyConfig c;
  c.noise_var = 1e-4;
  c.horizon = 10000;
  // 5431 * 1e-4 * ln(40000) / 0.25 = 23.02...
  CHECK(sample_size_formula(c, 4, 0.5) == 24);
  c.noise_var = 0.0;
  CHECK(sample_size_formula(c, 4, 0.5) == 1);
}

TEST_CASE("a single arm has zero regret") {
  for (const auto v : kVariants) {
    Environment env(RewardModel(Zigzag{1.0, {0.3}}), 0.0, 500, 4);
    for (const auto& r : run(env, config(v, env))) REQUIRE(r.f_star == r.f_arm);
  }
}

TEST_CASE("runs are deterministic and complete") {
  for (const auto v : kVariants) {
    Environment a(presets::zigzag(6), 0.05, 3000, 99);
    Environment b(presets::zigzag(6), 0.05, 3000, 99);
    const auto la = run(a, config(v, a));
    const auto lb = run(b, config(v, b));
    CHECK(la.size() == 3000);
    CHECK(la == lb);
    for (std::size_t i = 0; i < la.size(); ++i) REQUIRE(la[i].t == i + 1);
  }
}

TEST_CASE("first step plays the flagged root") {
  const auto m = presets::zigzag(4);
  Environment env(m, 0.01, 100, 1);
  ApproxZooming pol(config(Variant::Learned, env), m);
  const auto r = pol.step(env, 0.4);
  CHECK(r.phase == Phase::Flagged);
  CHECK(r.ball == 0);
  CHECK(r.arm == 0);

  Environment env2(m, 0.01, 100, 1);
  ApproxZooming ns(config(Variant::NoSimilarity, env2), m);
  CHECK(ns.state().active().size() == 4);
  CHECK(ns.step(env2, 0.4).phase == Phase::Ucb);
}

TEST_CASE("oracle variants split the root at time zero") {
  const auto m = presets::zigzag(8);
  Environment env(m, 0.01, 100, 1);
  ApproxZooming pol(config(Variant::OracleTrue, env), m);
  CHECK(pol.state().flagged().empty());
  CHECK(pol.state().ball(0).state == BallState::Retired);
  CHECK(pol.state().ball(0).cluster_time == Trial{0});
}

TEST_CASE("flagging moves a ball into the flagged set") {
  const auto m = presets::zigzag(4);
  Environment env(m, 0.01, 20000, 3);
  auto cfg = config(Variant::Learned, env);
  cfg.fixed_k = 1;
  ApproxZooming pol(cfg, m);
  bool seen = false;
  for (Trial t = 1; t <= 20000 && !seen; ++t) {
    const double x = env.sample_context();
    const auto before = pol.state().flagged();
    pol.step(env, x);
    for (const auto id : pol.state().flagged()) {
      if (before.count(id) == 0 && pol.state().ball(id).flag_time == t) seen = true;
    }
  }
  CHECK(seen);
}

TEST_CASE("learned subpartition fires once every arm has sufficient data") {
  const auto m = presets::zigzag(3);
  Environment env(m, 0.0, 5000, 8);
  auto cfg = config(Variant::Learned, env);
  cfg.fixed_k = 1;
  ApproxZooming pol(cfg, m);
  Trial split_at = 0;
  for (Trial t = 1; t <= 5000 && split_at == 0; ++t) {
    pol.step(env, env.sample_context());
    if (pol.state().ball(0).state == BallState::Retired) split_at = t;
  }
  REQUIRE(split_at > 0);
  const auto& root = pol.state().ball(0);
  CHECK(root.cluster_time == split_at);
  CHECK(root.flagged_samples.total() == split_at);
  for (const auto a : root.arms) CHECK(root.flagged_samples.sufficient(a, 1));
}

TEST_CASE("the better constant arm dominates play") {
  const auto m = constant_arms(1.0, 0.0);
  Environment env(m, 0.0, 20000, 12);
  auto cfg = config(Variant::Learned, env);
  cfg.noise_var = 1e-4;
  const auto log = run(env, cfg);
  std::size_t bad_ucb = 0;
  for (const auto& r : log) bad_ucb += (r.phase == Phase::Ucb && r.arm == 1);
  CHECK(bad_ucb < 200);
}

TEST_CASE("flagged samples are uniform over their ball") {
  const auto m = presets::zigzag(10);
  Environment env(m, 0.01, 20000, 5);
  auto cfg = config(Variant::Learned, env);
  cfg.audit = false;
  cfg.fixed_k = 2;
  ApproxZooming pol(cfg, m);
  for (Trial t = 1; t <= 20000; ++t) pol.step(env, env.sample_context());
  std::size_t checked = 0;
  for (const auto& b : pol.state().balls()) {
    const auto& s = b.flagged_samples;
    if (s.total() < 1000) continue;
    std::array<double, 10> bins{};
    for (const auto a : s.arms()) {
      for (const auto& smp : s.of(a).samples()) {
        bins[std::min<std::size_t>(9, static_cast<std::size_t>((smp.context - b.interval.lo) / b.width() * 10))] += 1;
      }
    }
    const double expect = s.total() / 10.0;
    for (const double c : bins) CHECK(std::abs(c - expect) <= 5 * std::sqrt(expect));
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("payoff bookkeeping matches recorded payoffs") {
  const auto m = presets::zigzag(5);
  Environment env(m, 0.05, 4000, 2);
  auto cfg = config(Variant::NoSimilarity, env);
  ApproxZooming pol(cfg, m);
  std::vector<double> sums(1000, 0.0);
  for (Trial t = 1; t <= 4000; ++t) {
    const auto r = pol.step(env, env.sample_context());
    if (r.ball < sums.size()) sums[r.ball] += r.payoff;
  }
  for (const auto& b : pol.state().balls()) {
    if (b.id < sums.size() && b.n > 0) CHECK(b.payoff_sum == doctest::Approx(sums[b.id]).epsilon(1e-12));
  }
}
