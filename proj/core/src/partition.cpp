#include <azoom/partition.hpp>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <map>
#include <ostream>

namespace azoom {

std::string_view to_string(BallState s) {
  switch (s) {
    case BallState::Active: return "active";
    case BallState::Flagged: return "flagged";
    case BallState::Retired: return "retired";
  }
  return "?";
}

std::string_view to_string(Phase p) {
  return p == Phase::Flagged ? "flagged" : "ucb";
}

bool Ball::contains(double x, ArmId a) const {
  return interval.contains(x) && std::binary_search(arms.begin(), arms.end(), a);
}

PartitionState::PartitionState(std::size_t num_arms) : num_arms_(num_arms) {
  if (num_arms == 0) throw std::invalid_argument("partition needs at least one arm");
}

const Ball& PartitionState::ball(BallId id) const {
  if (id >= balls_.size()) throw std::out_of_range(fmt::format("no ball {}", id));
  return balls_[id];
}

Ball& PartitionState::ball(BallId id) {
  if (id >= balls_.size()) throw std::out_of_range(fmt::format("no ball {}", id));
  return balls_[id];
}

std::uint64_t PartitionState::cell_key(unsigned depth, std::uint64_t cell) {
  return (static_cast<std::uint64_t>(depth) << 56) | cell;
}

BallId PartitionState::add_ball(unsigned depth, std::uint64_t cell, std::vector<ArmId> arms, BallState state,
                                std::optional<BallId> parent) {
  if (depth > 52) throw std::invalid_argument("ball depth beyond double resolution");
  if (cell >= (std::uint64_t{1} << depth)) throw std::invalid_argument("dyadic cell out of range");
  if (arms.empty()) throw std::invalid_argument("ball needs at least one arm");
  std::sort(arms.begin(), arms.end());
  if (std::adjacent_find(arms.begin(), arms.end()) != arms.end() || arms.back() >= num_arms_) {
    throw std::invalid_argument("ball arms must be distinct and in range");
  }
  if (state == BallState::Retired) throw std::invalid_argument("cannot create a retired ball");

  Ball b;
  b.id = balls_.size();
  b.parent = parent;
  b.depth = depth;
  b.cell = cell;
  const double w = std::ldexp(1.0, -static_cast<int>(depth));
  b.interval = {static_cast<double>(cell) * w, static_cast<double>(cell + 1) * w};
  b.arms = std::move(arms);
  b.state = state;
  if (state == BallState::Flagged) b.flagged_samples = SampleSet(b.interval, b.arms);

  const BallId id = b.id;
  balls_.push_back(std::move(b));
  (state == BallState::Active ? active_ : flagged_).insert(id);
  cells_[cell_key(depth, cell)].push_back(id);
  if (live_per_depth_.size() <= depth) live_per_depth_.resize(depth + 1, 0);
  ++live_per_depth_[depth];
  return id;
}

void PartitionState::unlink(BallId id) {
  Ball& b = balls_[id];
  auto& bucket = cells_[cell_key(b.depth, b.cell)];
  bucket.erase(std::remove(bucket.begin(), bucket.end(), id), bucket.end());
  if (bucket.empty()) cells_.erase(cell_key(b.depth, b.cell));
  --live_per_depth_[b.depth];
}

void PartitionState::flag(BallId id, Trial t, std::size_t suff_k) {
  Ball& b = ball(id);
  if (b.state != BallState::Active) throw InvariantViolation(fmt::format("flag: ball {} is not active", id));
  if (suff_k == 0) throw std::invalid_argument("flag: k must be positive");
  active_.erase(id);
  flagged_.insert(id);
  b.state = BallState::Flagged;
  b.flag_time = t;
  b.suff_k = suff_k;
  b.suff_cursor = 0;
  b.flagged_samples = SampleSet(b.interval, b.arms);
}

void PartitionState::retire(BallId id, Trial t) {
  Ball& b = ball(id);
  if (b.state == BallState::Retired) throw InvariantViolation(fmt::format("retire: ball {} already retired", id));
  active_.erase(id);
  flagged_.erase(id);
  unlink(id);
  b.state = BallState::Retired;
  b.cluster_time = t;
}

std::vector<BallId> PartitionState::covering(double x) const {
  std::vector<BallId> out;
  for (unsigned d = 0; d < live_per_depth_.size(); ++d) {
    if (live_per_depth_[d] == 0) continue;
    const std::uint64_t cells = std::uint64_t{1} << d;
    auto c = static_cast<std::uint64_t>(std::ldexp(x, static_cast<int>(d)));
    c = std::min(c, cells - 1);
    auto it = cells_.find(cell_key(d, c));
    if (it == cells_.end()) continue;
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t PartitionState::coverage_count(double x, ArmId a) const {
  std::size_t n = 0;
  for (BallId id : covering(x)) n += balls_[id].contains(x, a) ? 1 : 0;
  return n;
}

PartitionState init_partition(std::size_t num_arms) {
  PartitionState state(num_arms);
  std::vector<ArmId> all(num_arms);
  for (std::size_t a = 0; a < num_arms; ++a) all[a] = a;
  state.add_ball(0, 0, std::move(all), BallState::Flagged, std::nullopt);
  state.ball(0).flag_time = 0;
  return state;
}

PartitionState init_singleton_partition(std::size_t num_arms) {
  PartitionState state(num_arms);
  for (std::size_t a = 0; a < num_arms; ++a) state.add_ball(0, 0, {a}, BallState::Active, std::nullopt);
  return state;
}

double ucb(const Ball& ball, const UcbParams& p) {
  if (ball.n == 0) return std::numeric_limits<double>::infinity();
  return ball.mean() + 2.0 * p.lipschitz * ball.width() +
         std::sqrt(p.constant * p.noise_var * p.log_horizon / static_cast<double>(ball.n));
}

Selection select_ball(const PartitionState& state, double x, const UcbParams& p) {
  const auto candidates = state.covering(x);
  std::optional<BallId> best_flagged;
  for (BallId id : candidates) {
    const Ball& b = state.ball(id);
    if (b.state != BallState::Flagged) continue;
    if (!best_flagged || b.width() > state.ball(*best_flagged).width()) best_flagged = id;
  }
  if (best_flagged) return {*best_flagged, Phase::Flagged};

  std::optional<BallId> best;
  double best_ucb = -std::numeric_limits<double>::infinity();
  for (BallId id : candidates) {
    const double u = ucb(state.ball(id), p);
    if (!best || u > best_ucb) {
      best = id;
      best_ucb = u;
    }
  }
  if (!best) throw InvariantViolation(fmt::format("select_ball: no ball covers context {}", x));
  return {*best, Phase::Ucb};
}

ArmId select_arm(Ball& ball, Phase phase, std::size_t k) {
  if (ball.state == BallState::Retired) throw InvariantViolation("select_arm: ball is retired");
  if (phase == Phase::Ucb) {
    const ArmId a = ball.arms[ball.rr_cursor];
    ball.rr_cursor = (ball.rr_cursor + 1) % ball.arms.size();
    return a;
  }
  if (ball.state != BallState::Flagged) throw InvariantViolation("select_arm: flagged phase on an unflagged ball");
  // Satisfied arms stay satisfied for a fixed k, so the cursor only moves forward.
  std::size_t i = k == ball.suff_k ? ball.suff_cursor : 0;
  while (i < ball.arms.size() && ball.flagged_samples.sufficient(ball.arms[i], k)) ++i;
  if (k == ball.suff_k) ball.suff_cursor = i;
  if (i == ball.arms.size()) {
    throw std::logic_error(fmt::format("select_arm: every arm of ball {} has sufficient data; subpartition it", ball.id));
  }
  return ball.arms[i];
}

void record_play(PartitionState& state, BallId id, ArmId arm, double x, double payoff, Trial t) {
  Ball& b = state.ball(id);
  if (b.state == BallState::Retired) throw InvariantViolation(fmt::format("record_play: ball {} is retired", id));
  if (!b.contains(x, arm)) {
    throw InvariantViolation(fmt::format("record_play: ({}, {}) outside ball {}", x, arm, id));
  }
  ++b.n;
  b.payoff_sum += payoff;
  if (b.state == BallState::Flagged) {
    b.flagged_samples.add(arm, x, payoff);
  } else {
    ++b.ucb_plays;
  }
  state.set_trial(t);
}

FlagRule FlagRule::theory(double lipschitz, double noise_var, double log_horizon, double min_width,
                          double ucb_constant) {
  return {ucb_constant * noise_var * log_horizon / (lipschitz * lipschitz), false, min_width};
}

FlagRule FlagRule::simulation(double log_horizon, double min_width) {
  return {4.0 * log_horizon, true, min_width};
}

bool should_flag(const Ball& ball, const FlagRule& rule) {
  if (ball.width() <= rule.min_width) return false;
  const double thr = rule.threshold(ball.width());
  const auto n = static_cast<double>(ball.n);
  return rule.inclusive ? n >= thr : n > thr;
}

SuffDataStatus suffdata(const Ball& ball, std::size_t k) {
  SuffDataStatus s;
  s.per_arm.reserve(ball.arms.size());
  s.all = true;
  for (ArmId a : ball.arms) {
    const bool ok = ball.state == BallState::Flagged && ball.flagged_samples.sufficient(a, k);
    s.per_arm.push_back(ok);
    s.all = s.all && ok;
  }
  return s;
}

namespace {

void check_cover(const std::vector<std::vector<ArmId>>& clusters, const std::vector<ArmId>& arms,
                 std::string_view side) {
  std::vector<ArmId> seen;
  for (const auto& c : clusters) {
    if (c.empty()) throw std::invalid_argument(fmt::format("apply_subpartition: empty {} cluster", side));
    seen.insert(seen.end(), c.begin(), c.end());
  }
  std::sort(seen.begin(), seen.end());
  if (seen != arms) {
    throw std::invalid_argument(fmt::format("apply_subpartition: {} clusters do not partition the ball's arms", side));
  }
}

}  // namespace

std::vector<BallId> apply_subpartition(PartitionState& state, BallId id,
                                       const std::vector<std::vector<ArmId>>& clusters_left,
                                       const std::vector<std::vector<ArmId>>& clusters_right, Trial t) {
  const Ball& parent = state.ball(id);
  if (parent.state != BallState::Flagged) {
    throw InvariantViolation(fmt::format("apply_subpartition: ball {} is not flagged", id));
  }
  check_cover(clusters_left, parent.arms, "left");
  check_cover(clusters_right, parent.arms, "right");

  const unsigned depth = parent.depth + 1;
  const std::uint64_t left_cell = parent.cell * 2;
  state.retire(id, t);

  std::vector<BallId> children;
  children.reserve(clusters_left.size() + clusters_right.size());
  for (const auto& c : clusters_left) children.push_back(state.add_ball(depth, left_cell, c, BallState::Active, id));
  for (const auto& c : clusters_right) {
    children.push_back(state.add_ball(depth, left_cell + 1, c, BallState::Active, id));
  }
  return children;
}

void check_invariants(const PartitionState& state, std::span<const double> probe_contexts) {
  std::map<std::pair<unsigned, std::uint64_t>, std::vector<BallId>> by_cell;
  std::map<std::pair<unsigned, std::uint64_t>, std::size_t> flagged_per_cell;
  for (const Ball& b : state.balls()) {
    if (b.state == BallState::Retired) continue;
    if (b.arms.empty() || !std::is_sorted(b.arms.begin(), b.arms.end())) {
      throw InvariantViolation(fmt::format("ball {}: arm list empty or unsorted", b.id));
    }
    if (b.rr_cursor >= b.arms.size()) throw InvariantViolation(fmt::format("ball {}: round-robin cursor overflow", b.id));
    if (b.width() != std::ldexp(1.0, -static_cast<int>(b.depth))) {
      throw InvariantViolation(fmt::format("ball {}: width {} != 2^-{}", b.id, b.width(), b.depth));
    }
    if (b.parent) {
      const Ball& p = state.ball(*b.parent);
      if (p.depth + 1 != b.depth || b.cell / 2 != p.cell) {
        throw InvariantViolation(fmt::format("ball {}: not a half of parent {}", b.id, p.id));
      }
    }
    if (b.state != BallState::Flagged && !b.flagged_samples.empty()) {
      throw InvariantViolation(fmt::format("ball {}: flagged samples on a never-flagged ball", b.id));
    }
    const bool in_active = state.active().count(b.id) != 0;
    const bool in_flagged = state.flagged().count(b.id) != 0;
    if (in_active == in_flagged || in_flagged != (b.state == BallState::Flagged)) {
      throw InvariantViolation(fmt::format("ball {}: set membership disagrees with state", b.id));
    }
    by_cell[{b.depth, b.cell}].push_back(b.id);
    if (b.state == BallState::Flagged) {
      if (++flagged_per_cell[{b.depth, b.cell}] > 1) {
        throw InvariantViolation(fmt::format("two flagged balls share interval [{}, {})", b.interval.lo, b.interval.hi));
      }
    }
  }
  for (const auto& [cell, ids] : by_cell) {
    std::vector<ArmId> arms;
    for (BallId id : ids) {
      const auto& a = state.ball(id).arms;
      arms.insert(arms.end(), a.begin(), a.end());
    }
    std::sort(arms.begin(), arms.end());
    if (std::adjacent_find(arms.begin(), arms.end()) != arms.end()) {
      throw InvariantViolation(fmt::format("balls on depth {} cell {} overlap in arms", cell.first, cell.second));
    }
  }
  for (double x : probe_contexts) {
    for (ArmId a = 0; a < state.num_arms(); ++a) {
      const auto c = state.coverage_count(x, a);
      if (c != 1) throw InvariantViolation(fmt::format("({}, {}) covered {} times", x, a, c));
    }
  }
}

void write_snapshot(std::ostream& out, const PartitionState& state, bool include_retired) {
  out << "id,parent,c0,c1,state,n,mu,arms\n";
  for (const Ball& b : state.balls()) {
    if (!include_retired && b.state == BallState::Retired) continue;
    out << b.id << ',' << (b.parent ? fmt::format("{}", *b.parent) : std::string("-")) << ','
        << fmt::format("{:.17g},{:.17g}", b.interval.lo, b.interval.hi) << ',' << to_string(b.state) << ',' << b.n
        << ',' << (b.n ? fmt::format("{:.17g}", b.mean()) : std::string("nan")) << ','
        << fmt::format("{}", fmt::join(b.arms, ";")) << '\n';
  }
}

}  // namespace azoom
