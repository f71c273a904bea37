#include <azoom/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace azoom {

RegretSummary regret(std::span<const TrialRecord> log) {
  RegretSummary s;
  s.instantaneous.reserve(log.size());
  s.cumulative.reserve(log.size());
  s.avg_cum_reward.reserve(log.size());
  double cum = 0.0;
  double reward = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const double r = log[i].f_star - log[i].f_arm;
    s.instantaneous.push_back(r);
    cum += r;
    reward += log[i].payoff;
    s.cumulative.push_back(cum);
    s.avg_cum_reward.push_back(reward / static_cast<double>(i + 1));
  }
  return s;
}

ArmFrequency::ArmFrequency(std::size_t quarters, std::size_t num_arms, std::size_t bins)
    : quarters_(quarters), num_arms_(num_arms), bins_(bins), counts_(quarters * num_arms * bins, 0) {
  if (quarters == 0 || num_arms == 0 || bins == 0) throw std::invalid_argument("ArmFrequency: empty shape");
}

std::uint64_t ArmFrequency::at(std::size_t q, ArmId a, std::size_t bin) const {
  return counts_.at((q * num_arms_ + a) * bins_ + bin);
}

std::uint64_t& ArmFrequency::at(std::size_t q, ArmId a, std::size_t bin) {
  return counts_.at((q * num_arms_ + a) * bins_ + bin);
}

std::uint64_t ArmFrequency::quarter_total(std::size_t q) const {
  std::uint64_t n = 0;
  for (std::size_t b = 0; b < bins_; ++b) n += column_total(q, b);
  return n;
}

std::uint64_t ArmFrequency::column_total(std::size_t q, std::size_t bin) const {
  std::uint64_t n = 0;
  for (ArmId a = 0; a < num_arms_; ++a) n += at(q, a, bin);
  return n;
}

ArmId ArmFrequency::mode(std::size_t q, std::size_t bin) const {
  ArmId best = 0;
  for (ArmId a = 1; a < num_arms_; ++a) {
    if (at(q, a, bin) > at(q, best, bin)) best = a;
  }
  return best;
}

std::size_t context_bin(double x, std::size_t bins) {
  const auto b = static_cast<std::size_t>(std::floor(x * static_cast<double>(bins)));
  return std::min(b, bins - 1);
}

ArmFrequency arm_frequency(std::span<const TrialRecord> log, std::size_t num_arms, Trial horizon,
                           std::size_t context_bins, std::size_t quarters) {
  if (horizon == 0) throw std::invalid_argument("arm_frequency: horizon must be positive");
  ArmFrequency freq(quarters, num_arms, context_bins);
  for (const auto& r : log) {
    if (r.t == 0 || r.t > horizon) throw std::invalid_argument(fmt::format("arm_frequency: trial {} outside horizon", r.t));
    const auto q = static_cast<std::size_t>((r.t - 1) * quarters / horizon);
    ++freq.at(q, r.arm, context_bin(r.x, context_bins));
  }
  return freq;
}

double kappa(const RewardModel& model, double x) {
  const auto opt = model.optimal_reward(x);
  double runner_up = 0.0;  // the indicator zeroes optimal arms
  for (ArmId a = 0; a < model.num_arms(); ++a) {
    const double f = model.expected_reward(a, x);
    if (f != opt.value) runner_up = std::max(runner_up, f);
  }
  return opt.value - runner_up;
}

namespace {

template <typename Fn>
void for_grid(Interval iv, std::size_t n, Fn&& fn) {
  if (n < 2) throw std::invalid_argument("grid needs at least two points");
  for (std::size_t i = 0; i < n; ++i) {
    const double w = static_cast<double>(i) / static_cast<double>(n - 1);
    fn((1.0 - w) * iv.lo + w * iv.hi);
  }
}

}  // namespace

double gap(const RewardModel& model, Interval interval, std::span<const ArmId> arms, std::size_t grid) {
  std::vector<double> f(model.num_arms());
  double best = std::numeric_limits<double>::infinity();
  for_grid(interval, grid, [&](double x) {
    model.rewards_at(x, f);
    const double fstar = *std::max_element(f.begin(), f.end());
    for (ArmId a : arms) best = std::min(best, fstar - f.at(a));
  });
  return best;
}

double diam(const RewardModel& model, Interval interval, std::span<const ArmId> arms, std::size_t grid) {
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  std::vector<double> f(model.num_arms());
  for_grid(interval, grid, [&](double x) {
    model.rewards_at(x, f);
    for (ArmId a : arms) {
      hi = std::max(hi, f.at(a));
      lo = std::min(lo, f.at(a));
    }
  });
  return hi - lo;
}

double max_pairwise_sup_difference(const RewardModel& model, Interval interval, std::span<const ArmId> arms,
                                   std::size_t grid) {
  double worst = 0.0;
  std::vector<double> f(model.num_arms());
  for_grid(interval, grid, [&](double x) {
    model.rewards_at(x, f);
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (ArmId a : arms) {
      hi = std::max(hi, f.at(a));
      lo = std::min(lo, f.at(a));
    }
    worst = std::max(worst, hi - lo);
  });
  return worst;
}

std::uint64_t m_i(const RewardModel& model, unsigned i, double lipschitz, std::size_t points_per_interval) {
  if (i == 0) throw std::invalid_argument("m_i: scale index must be >= 1");
  if (i > 30) throw std::invalid_argument("m_i: scale index too large to enumerate");
  const std::uint64_t intervals = std::uint64_t{1} << i;
  const double h = std::ldexp(1.0, -static_cast<int>(i));
  const double kappa_cut = 20.0 * lipschitz * h;
  const double gap_cut = 22.0 * lipschitz * h;
  const std::size_t K = model.num_arms();
  std::vector<double> f(K);

  auto kappa_from = [&](const std::vector<double>& vals) {
    const double fstar = *std::max_element(vals.begin(), vals.end());
    double runner_up = 0.0;
    for (double v : vals) {
      if (v != fstar) runner_up = std::max(runner_up, v);
    }
    return fstar - runner_up;
  };

  std::uint64_t total = 0;
  for (std::uint64_t ell = 1; ell <= intervals; ++ell) {
    const Interval w{static_cast<double>(ell - 1) * h, static_cast<double>(ell) * h};
    double min_kappa = std::numeric_limits<double>::infinity();
    for_grid(w, points_per_interval, [&](double x) {
      model.rewards_at(x, f);
      min_kappa = std::min(min_kappa, kappa_from(f));
    });
    if (min_kappa > kappa_cut) continue;
    model.rewards_at(w.hi, f);
    const double fstar = *std::max_element(f.begin(), f.end());
    for (double v : f) total += (fstar - v <= gap_cut) ? 1 : 0;
  }
  return total;
}

double mu_kappa(const RewardModel& model, double z, std::size_t grid) {
  if (!(z >= 0.0)) throw std::invalid_argument("mu_kappa: z must be nonnegative");
  if (grid == 0) throw std::invalid_argument("mu_kappa: empty grid");
  std::size_t hits = 0;
  for (std::size_t j = 0; j < grid; ++j) {
    const double x = (static_cast<double>(j) + 0.5) / static_cast<double>(grid);
    hits += kappa(model, x) <= z ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(grid);
}

}  // namespace azoom
