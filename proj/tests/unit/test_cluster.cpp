#include <azoom/cluster.hpp>
#include <azoom/metrics.hpp>

#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <vector>

using namespace azoom;

namespace {

class TableDistance final : public DistanceSource {
 public:
  explicit TableDistance(std::map<std::pair<ArmId, ArmId>, double> d) : d_(std::move(d)) {}
  [[nodiscard]] Kind kind() const override { return Kind::OracleTrue; }
  double distance(ArmId a, ArmId b, Interval) override {
    if (a == b) return 0.0;
    return d_.at({std::min(a, b), std::max(a, b)});
  }

 private:
  std::map<std::pair<ArmId, ArmId>, double> d_;
};

class ZeroDistance final : public DistanceSource {
 public:
  [[nodiscard]] Kind kind() const override { return Kind::OracleTrue; }
  double distance(ArmId, ArmId, Interval) override { return 0.0; }
};

void check_clustering(const Clustering& c, std::vector<ArmId> arms, double radius, DistanceSource& d, Interval half) {
  std::vector<ArmId> seen;
  for (const auto& cl : c.clusters) seen.insert(seen.end(), cl.begin(), cl.end());
  std::sort(seen.begin(), seen.end());
  std::sort(arms.begin(), arms.end());
  CHECK(seen == arms);
  for (std::size_t i = 0; i < c.centers.size(); ++i) {
    for (std::size_t j = i + 1; j < c.centers.size(); ++j) CHECK(d.distance(c.centers[i], c.centers[j], half) > radius);
    for (const auto a : c.clusters[i]) CHECK(d.distance(a, c.centers[i], half) <= radius);
  }
}

}  // namespace

TEST_CASE("greedy clustering by hand") {
  TableDistance d({{{1, 2}, 0.05}, {{1, 3}, 0.5}, {{2, 3}, 0.45}});
  const Interval half{0.0, 1.0};
  CHECK(cluster_radius(1.0, half) == doctest::Approx(0.1875));
  const auto c = cluster_half({1, 2, 3}, half, 1.0, d);
  CHECK(c.centers == std::vector<ArmId>{1, 3});
  REQUIRE(c.clusters.size() == 2);
  CHECK(c.clusters[0] == std::vector<ArmId>{1, 2});
  CHECK(c.clusters[1] == std::vector<ArmId>{3});
}

TEST_CASE("degenerate distance sources") {
  ZeroDistance zero;
  const auto one = subpartition({0, 1, 2, 3}, {0.0, 1.0}, 1.0, zero);
  CHECK(one.left.clusters.size() == 1);
  CHECK(one.right.clusters.size() == 1);
  CHECK(one.left.clusters[0].size() == 4);

  NoDistance none;
  const auto singles = subpartition({0, 1, 2, 3}, {0.0, 1.0}, 1.0, none);
  CHECK(singles.left.clusters.size() == 4);
  CHECK(singles.right.clusters.size() == 4);
}

TEST_CASE("clustering guarantees hold for any visit order") {
  const auto model = presets::zigzag(24);
  TrueDistance d(model);
  std::mt19937_64 rng(8);
  std::vector<ArmId> arms(24);
  std::iota(arms.begin(), arms.end(), 0);
  for (int rep = 0; rep < 30; ++rep) {
    std::shuffle(arms.begin(), arms.end(), rng);
    const unsigned depth = rep % 3;
    const double w = std::ldexp(1.0, -static_cast<int>(depth));
    const Interval half{0.0, w};
    const auto c = cluster_half(arms, half, 1.0, d);
    CHECK(c.centers.front() == arms.front());
    check_clustering(c, arms, cluster_radius(1.0, half), d, half);
  }
}

TEST_CASE("metric distance uses latent features") {
  const auto model = presets::latent_tent(10, 1.0);
  MetricDistance d(model);
  CHECK(d.distance(2, 5, {0.0, 1.0}) == doctest::Approx(std::abs(*model.latent_feature(2) - *model.latent_feature(5))));
  const RewardModel types = presets::finite_types(8, 2, 1.0);
  CHECK_FALSE(types.has_latent_features());
  CHECK_THROWS_AS(MetricDistance{types}, std::invalid_argument);
}

TEST_CASE("learned distance needs sufficient data") {
  SampleSet s(Interval{0.0, 1.0}, {0, 1});
  LearnedDistance d(s, 1, 0.0);
  CHECK_THROWS_AS((void)d.distance(0, 1, {0.0, 0.5}), InsufficientData);
}

TEST_CASE("oracle clusters have small diameter") {
  const auto model = presets::zigzag(40);
  TrueDistance d(model);
  std::vector<ArmId> arms(40);
  std::iota(arms.begin(), arms.end(), 0);
  const Interval ball{0.0, 1.0};
  const auto sp = subpartition(arms, ball, 1.0, d);
  for (const auto* side : {&sp.left, &sp.right}) {
    const Interval half = side == &sp.left ? ball.left_half() : ball.right_half();
    for (const auto& cl : side->clusters) CHECK(diam(model, half, cl) <= 2 * model.lipschitz() * half.width() + 1e-9);
  }
}
