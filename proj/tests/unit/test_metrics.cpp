#include <azoom/metrics.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace azoom;

namespace {

RewardModel crossing() {
  LatentLipschitz m;
  m.theta = {0.0, 1.0};
  m.joint = [](double x, double th) { return th == 0.0 ? x : 1.0 - x; };
  return RewardModel(m);
}

// Definition of M_i written out directly, independent of the library loop.
std::uint64_t m_i_oracle(const RewardModel& m, unsigned i, double lipschitz) {
  const double w = std::ldexp(1.0, -static_cast<int>(i));
  std::uint64_t total = 0;
  for (std::uint64_t l = 1; l <= (std::uint64_t{1} << i); ++l) {
    double kmin = 1e300;
    for (int j = 0; j < 100; ++j) kmin = std::min(kmin, kappa(m, (1 - j / 99.0) * (l - 1) * w + j / 99.0 * l * w));
    if (kmin > 20 * lipschitz * w) continue;
    const double x = std::min(1.0, l * w);
    double fstar = 0.0;
    for (ArmId a = 0; a < m.num_arms(); ++a) fstar = std::max(fstar, m.expected_reward(a, x));
    for (ArmId a = 0; a < m.num_arms(); ++a) total += (fstar - m.expected_reward(a, x) <= 22 * lipschitz * w);
  }
  return total;
}

}  // namespace

TEST_CASE("regret and average reward") {
  TrajectoryLog log = {{1, 0.1, 0, Phase::Ucb, 0, 0.5, 1.0, 0.5}, {2, 0.2, 0, Phase::Ucb, 1, 1.0, 1.0, 1.0}};
  const auto r = regret(log);
  CHECK(r.instantaneous == std::vector<double>{0.5, 0.0});
  CHECK(r.cumulative == std::vector<double>{0.5, 0.5});
  CHECK(r.avg_cum_reward[1] == doctest::Approx(0.75));
}

TEST_CASE("arm frequency conserves counts per quarter") {
  std::mt19937_64 rng(2);
  TrajectoryLog log;
  for (Trial t = 1; t <= 1003; ++t) {
    log.push_back({t, (rng() >> 11) * 0x1.0p-53, 0, Phase::Ucb, static_cast<ArmId>(rng() % 3), 0, 0, 0});
  }
  const auto f = arm_frequency(log, 3, 1003, 10);
  std::uint64_t total = 0;
  for (std::size_t q = 0; q < 4; ++q) {
    CHECK(std::abs(static_cast<double>(f.quarter_total(q)) - 1003 / 4.0) <= 1.0);
    total += f.quarter_total(q);
    for (std::size_t b = 0; b < 10; ++b) {
      std::uint64_t col = 0;
      for (ArmId a = 0; a < 3; ++a) col += f.at(q, a, b);
      CHECK(col == f.column_total(q, b));
    }
  }
  CHECK(total == 1003);

  TrajectoryLog single = {{1, 0.5, 0, Phase::Ucb, 0, 0, 0, 0}};
  const auto g = arm_frequency(single, 1, 1, 4);
  CHECK(g.at(0, 0, 2) == 1);
  CHECK(context_bin(1.0, 4) == 3);
}

TEST_CASE("kappa") {
  const auto m = crossing();
  CHECK(kappa(m, 0.75) == doctest::Approx(0.5));
  const RewardModel same(Zigzag{1.0, {0.2, 0.2}});
  CHECK(kappa(same, 0.3) == doctest::Approx(same.expected_reward(0, 0.3)));

  LatentLipschitz three;
  three.theta = {0.0, 0.5, 1.0};
  three.joint = [](double, double th) { return th == 0.5 ? 0.9 : (th == 0.0 ? 0.6 : 0.2); };
  CHECK(kappa(RewardModel(three), 0.4) == doctest::Approx(0.3));
}

TEST_CASE("gap and diam") {
  const auto m = crossing();
  const std::vector<ArmId> both{0, 1};
  const std::vector<ArmId> second{1};
  CHECK(gap(m, {0.0, 1.0}, both) == doctest::Approx(0.0));
  CHECK(gap(m, {0.0, 0.5}, second) == doctest::Approx(0.0));
  CHECK(gap(m, {0.75, 1.0}, second) == doctest::Approx(0.5));
  const RewardModel flat(LatentLipschitz{1.0, {0.5}, [](double, double) { return 0.4; }, "flat"});
  const std::vector<ArmId> only{0};
  CHECK(diam(flat, {0.0, 1.0}, only) == 0.0);
}

TEST_CASE("diam is bounded by width plus the arm spread") {
  const auto m = presets::zigzag(30);
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    const unsigned depth = 1 + rep % 4;
    const double w = std::ldexp(1.0, -static_cast<int>(depth));
    const double lo = w * (rng() % (1u << depth));
    std::vector<ArmId> arms;
    for (ArmId a = 0; a < 30; ++a) {
      if (rng() % 4 == 0) arms.push_back(a);
    }
    if (arms.empty()) arms.push_back(0);
    const Interval iv{lo, lo + w};
    CHECK(diam(m, iv, arms) <= m.lipschitz() * w + max_pairwise_sup_difference(m, iv, arms) + 1e-9);
  }
}

TEST_CASE("M_i") {
  const auto m = crossing();
  CHECK(m_i(m, 1, 1.0) == 4);
  const auto z = presets::zigzag(20);
  CHECK(m_i(z, 1, 1.0) == 2 * 20);
  CHECK(m_i(z, 2, 1.0) == 4 * 20);
  const auto tent = presets::latent_tent(30, 1.0);
  for (unsigned i = 1; i <= 8; ++i) CHECK(m_i(tent, i, 1.0) == m_i_oracle(tent, i, 1.0));
}

TEST_CASE("mu kappa") {
  const auto m = crossing();
  CHECK(mu_kappa(m, 1.0) == 1.0);
  CHECK(mu_kappa(m, 0.0) <= 2e-4);
  double prev = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double v = mu_kappa(m, i / 20.0);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("diagnostics are pure") {
  const auto m = presets::finite_types(12, 3, 1.0);
  CHECK(kappa(m, 0.37) == kappa(m, 0.37));
  CHECK(m_i(m, 5, 1.0) == m_i(m, 5, 1.0));
}
