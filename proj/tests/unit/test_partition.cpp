#include <azoom/partition.hpp>

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

using namespace azoom;

namespace {

void play(PartitionState& st, BallId id, double mu, std::uint64_t n) {
  auto& b = st.ball(id);
  b.n = n;
  b.payoff_sum = mu * static_cast<double>(n);
}

}  // namespace

TEST_CASE("init partition is a single flagged root") {
  const auto st = init_partition(3);
  REQUIRE(st.balls().size() == 1);
  const auto& root = st.ball(0);
  CHECK(root.interval == Interval{0.0, 1.0});
  CHECK(root.arms == std::vector<ArmId>{0, 1, 2});
  CHECK(root.state == BallState::Flagged);
  CHECK(st.active().empty());
  CHECK(st.flagged().size() == 1);
  CHECK(init_partition(1).ball(0).arms.size() == 1);
  CHECK_THROWS_AS(init_partition(0), std::invalid_argument);
  const std::vector<double> probes = {0.0, 0.3, 0.999, 1.0};
  CHECK_NOTHROW(check_invariants(st, probes));

  const auto ns = init_singleton_partition(4);
  CHECK(ns.active().size() == 4);
  CHECK(ns.flagged().empty());
  CHECK_NOTHROW(check_invariants(ns, probes));
}

TEST_CASE("ucb formula") {
  auto st = init_singleton_partition(1);
  play(st, 0, 0.5, 36);
  Ball b = st.ball(0);
  b.interval = {0.0, 0.25};
  CHECK(ucb(b, {1.0, 1.0, 6.0, 6.0}) == doctest::Approx(2.0));
  CHECK(ucb(b, {1.0, 0.0, 6.0, 6.0}) == doctest::Approx(0.5 + 0.5));
  b.n = 0;
  CHECK(ucb(b, {1.0, 1.0, 6.0, 6.0}) == std::numeric_limits<double>::infinity());
}

TEST_CASE("ball selection") {
  auto st = init_partition(2);
  // Split the root into per-arm children so both halves hold two active balls.
  apply_subpartition(st, 0, {{0}, {1}}, {{0, 1}}, 1);
  CHECK(st.ball(0).state == BallState::Retired);
  CHECK(st.active().size() == 3);
  const UcbParams p{1.0, 0.0, 1.0, 6.0};

  play(st, 1, 0.7, 5);  // [0, .5) x {0}
  play(st, 2, 0.4, 5);  // [0, .5) x {1}
  play(st, 3, 0.1, 5);  // [.5, 1] x {0,1}
  auto sel = select_ball(st, 0.2, p);
  CHECK(sel.ball == 1);
  CHECK(sel.phase == Phase::Ucb);

  // equal UCBs: smaller id wins
  play(st, 2, 0.7, 5);
  CHECK(select_ball(st, 0.2, p).ball == 1);

  // a flagged ball beats any UCB
  st.flag(2, 2, 1);
  sel = select_ball(st, 0.2, p);
  CHECK(sel.ball == 2);
  CHECK(sel.phase == Phase::Flagged);
  CHECK(select_ball(st, 0.7, p).ball == 3);
}

TEST_CASE("wider flagged ball wins") {
  auto st = init_partition(2);
  apply_subpartition(st, 0, {{0}, {1}}, {{0}, {1}}, 1);  // ids 1..4, width 1/2
  st.flag(1, 2, 1);
  apply_subpartition(st, 1, {{0}}, {{0}}, 3);  // ids 5, 6, width 1/4
  st.flag(5, 4, 1);
  st.flag(2, 5, 1);
  const auto sel = select_ball(st, 0.1, {1.0, 1.0, 1.0, 6.0});
  CHECK(sel.ball == 2);
  CHECK(sel.phase == Phase::Flagged);
}

TEST_CASE("arm selection") {
  auto st = init_singleton_partition(10);
  const BallId id = st.add_ball(1, 0, {2, 5, 9}, BallState::Active, std::nullopt);
  auto& b = st.ball(id);
  CHECK(select_arm(b, Phase::Ucb, 1) == 2);
  CHECK(select_arm(b, Phase::Ucb, 1) == 5);
  CHECK(select_arm(b, Phase::Ucb, 1) == 9);
  CHECK(select_arm(b, Phase::Ucb, 1) == 2);

  st.flag(id, 1, 1);
  auto& f = st.ball(id);
  for (std::size_t i = 0; i < kSuffDataBuckets; ++i) f.flagged_samples.add(2, (i + 0.5) / 128, 0.0);
  CHECK(select_arm(f, Phase::Flagged, 1) == 5);

  auto& single = st.ball(0);
  for (int i = 0; i < 3; ++i) CHECK(select_arm(single, Phase::Ucb, 1) == 0);
}

TEST_CASE("record play") {
  auto st = init_singleton_partition(2);
  record_play(st, 0, 0, 0.5, 0.6, 1);
  CHECK(st.ball(0).n == 1);
  CHECK(st.ball(0).mean() == doctest::Approx(0.6));
  record_play(st, 0, 0, 0.5, 0.8, 2);
  CHECK(st.ball(0).mean() == doctest::Approx(0.7));
  CHECK(st.ball(0).flagged_samples.empty());
  CHECK_THROWS_AS(record_play(st, 0, 1, 0.5, 0.8, 3), InvariantViolation);

  auto fl = init_partition(2);
  record_play(fl, 0, 1, 0.5, 0.3, 1);
  CHECK(fl.ball(0).flagged_samples.total() == 1);
  CHECK(fl.ball(0).ucb_plays == 0);
}

TEST_CASE("flag rules") {
  Ball b;
  b.interval = {0.0, 0.5};
  const auto theory = FlagRule::theory(1.0, 1.0, 6.0, 0x1.0p-20);
  CHECK(theory.threshold(0.5) == doctest::Approx(144.0));
  b.n = 144;
  CHECK_FALSE(should_flag(b, theory));
  b.n = 145;
  CHECK(should_flag(b, theory));

  const auto sim = FlagRule::simulation(std::log(100000.0), 0x1.0p-20);
  b.interval = {0.0, 1.0};
  CHECK(sim.threshold(1.0) == doctest::Approx(46.05).epsilon(1e-3));
  b.n = 47;
  CHECK(should_flag(b, sim));
  b.n = 46;
  CHECK_FALSE(should_flag(b, sim));

  // the threshold grows without bound as the width shrinks
  b.n = 1000000;
  b.interval = {0.0, std::ldexp(1.0, -12)};
  CHECK_FALSE(should_flag(b, theory));
  // the width floor never flags
  const auto floor = FlagRule::simulation(1.0, 0.25);
  b.n = 1u << 30;
  b.interval = {0.0, 0.25};
  CHECK_FALSE(should_flag(b, floor));
}

TEST_CASE("suffdata") {
  auto st = init_partition(2);
  auto& b = st.ball(0);
  for (std::size_t i = 0; i < kSuffDataBuckets; ++i) b.flagged_samples.add(0, (i + 0.5) / 64, 0.0);
  auto s = suffdata(b, 1);
  CHECK(s.per_arm[0]);
  CHECK_FALSE(s.per_arm[1]);
  CHECK_FALSE(s.all);
  for (std::size_t i = 0; i < kSuffDataBuckets - 1; ++i) b.flagged_samples.add(1, (i + 0.5) / 64, 0.0);
  CHECK_FALSE(suffdata(b, 1).all);
  b.flagged_samples.add(1, 63.5 / 64, 0.0);
  CHECK(suffdata(b, 1).all);
  CHECK_FALSE(suffdata(b, 26).all);
}

TEST_CASE("subpartition application") {
  auto st = init_partition(3);
  const auto kids = apply_subpartition(st, 0, {{0, 1}, {2}}, {{0, 1, 2}}, 7);
  REQUIRE(kids.size() == 3);
  for (const auto id : kids) {
    CHECK(st.ball(id).width() == 0.5);
    CHECK(st.ball(id).state == BallState::Active);
    CHECK(st.ball(id).n == 0);
  }
  CHECK(st.ball(0).cluster_time == Trial{7});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> probes(1000);
  for (auto& x : probes) x = u(rng);
  CHECK_NOTHROW(check_invariants(st, probes));

  auto bad = init_partition(3);
  CHECK_THROWS_AS(apply_subpartition(bad, 0, {{0, 1}}, {{0, 1, 2}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(apply_subpartition(bad, 0, {{0, 1}, {1, 2}}, {{0, 1, 2}}, 1), std::invalid_argument);

  auto singles = init_partition(3);
  CHECK(apply_subpartition(singles, 0, {{0}, {1}, {2}}, {{0}, {1}, {2}}, 1).size() == 6);
}

TEST_CASE("coverage survives random refinement") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto st = init_partition(6);
  std::vector<double> probes(1000);
  for (auto& x : probes) x = u(rng);
  for (int step = 0; step < 40; ++step) {
    // flag one random active ball if none is flagged, then split a flagged ball
    if (st.flagged().empty()) {
      std::vector<BallId> act(st.active().begin(), st.active().end());
      const auto id = act[rng() % act.size()];
      if (st.ball(id).depth >= 10) continue;
      st.flag(id, step, 1);
    }
    const BallId id = *st.flagged().begin();
    auto arms = st.ball(id).arms;
    std::shuffle(arms.begin(), arms.end(), rng);
    const std::size_t cut = 1 + rng() % arms.size();
    std::vector<ArmId> a(arms.begin(), arms.begin() + cut), b(arms.begin() + cut, arms.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::vector<ArmId>> left{a};
    if (!b.empty()) left.push_back(b);
    apply_subpartition(st, id, left, {st.ball(id).arms}, step);
    REQUIRE_NOTHROW(check_invariants(st, probes));
  }
}

TEST_CASE("snapshot lists every ball") {
  auto st = init_partition(3);
  apply_subpartition(st, 0, {{0, 1}, {2}}, {{0, 1, 2}}, 7);
  std::ostringstream out;
  write_snapshot(out, st);
  const auto text = out.str();
  CHECK(text.rfind("id,parent,c0,c1,state,n,mu,arms\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  CHECK(text.find("0;1") != std::string::npos);
}
