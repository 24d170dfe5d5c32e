#include "spolf/safesets.hpp"

#include <algorithm>
#include <limits>

#include "spolf/errors.hpp"

namespace spolf {

ConfidenceTable::ConfidenceTable(std::size_t num_states, const StateSet& s0, double threshold)
    : lower_(num_states, -std::numeric_limits<double>::infinity()),
      upper_(num_states, std::numeric_limits<double>::infinity()),
      psi_(num_states) {
  s0.for_each([&](StateIndex s) {
    lower_[s] = threshold;
    upper_[s] = std::max(kSafetyCap, threshold);
  });
}

void ConfidenceTable::observe(std::span<const StateIndex> states) {
  for (StateIndex s : states) psi_.insert(s);
}

void ConfidenceTable::intersect(std::span<const Interval> q) {
  for (std::size_t s = 0; s < lower_.size(); ++s) {
    const Interval c = spolf::intersect(q[s], {lower_[s], upper_[s]});
    if (c.empty()) {
      lower_[s] = q[s].lo;
      upper_[s] = q[s].hi;
      ++violation_count_;
    } else {
      lower_[s] = c.lo;
      upper_[s] = c.hi;
    }
  }
}

void ConfidenceTable::set_interval(StateIndex s, Interval c) {
  lower_[s] = c.lo;
  upper_[s] = c.hi;
}

std::vector<Interval> safety_intervals(const GlmEstimator& glm_g, const StateSet& psi,
                                       const Eigen::MatrixXd& features) {
  const std::size_t n = psi.universe();
  std::vector<Interval> q(n, glm_g.interval_outside());
  if (psi.empty()) return q;
  const Eigen::VectorXd eta = features.transpose() * glm_g.theta();
  const Eigen::VectorXd norms = glm_g.weighted_norms(features);
  const double beta = glm_g.beta();
  const LinkFunction& mu = glm_g.link();
  psi.for_each([&](StateIndex s) {
    const double centre = mu.mean(eta(s));
    const double half = beta * norms(s);
    q[s] = {centre - half, centre + half};
  });
  return q;
}

void update_confidence(ConfidenceTable& table, const GlmEstimator& glm_g,
                       std::span<const StateIndex> newly_observed,
                       const Eigen::MatrixXd& features) {
  if (!glm_g.fitted()) throw NotFitted("safety GLM must be fitted before updating confidence");
  table.observe(newly_observed);
  const auto q = safety_intervals(glm_g, table.psi(), features);
  table.intersect(q);
}

std::pair<StateSet, StateSet> threshold_sets(const ConfidenceTable& table, double threshold) {
  const std::size_t n = table.num_states();
  StateSet lo(n), hi(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto si = static_cast<StateIndex>(s);
    if (table.lower(si) >= threshold) lo.insert(si);
    if (table.upper(si) >= threshold) hi.insert(si);
  }
  return {std::move(lo), std::move(hi)};
}

StateSet y_reach_one(const GridTopology& topo, const StateSet& x, const StateSet& domain) {
  StateSet out = x;
  x.for_each([&](StateIndex s) {
    for (StateIndex nb : topo.successors(s)) {
      if (domain.contains(nb)) out.insert(nb);
    }
  });
  return out;
}

StateSet y_reach_closure(const GridTopology& topo, const StateSet& x, const StateSet& domain) {
  StateSet out = x;
  std::vector<StateIndex> work = x.to_vector();
  while (!work.empty()) {
    const StateIndex s = work.back();
    work.pop_back();
    for (StateIndex nb : topo.successors(s)) {
      if (domain.contains(nb) && out.insert(nb)) work.push_back(nb);
    }
  }
  return out;
}

StateSet y_return_one(const GridTopology& topo, const StateSet& through, const StateSet& target) {
  StateSet out = target;
  through.for_each([&](StateIndex s) {
    for (StateIndex nb : topo.successors(s)) {
      if (target.contains(nb)) {
        out.insert(s);
        break;
      }
    }
  });
  return out;
}

StateSet y_return_closure(const GridTopology& topo, const StateSet& through,
                          const StateSet& target) {
  StateSet out = target;
  std::vector<StateIndex> work = target.to_vector();
  while (!work.empty()) {
    const StateIndex q = work.back();
    work.pop_back();
    // Predecessors of q coincide with its successors on this grid.
    for (StateIndex p : topo.successors(q)) {
      if (through.contains(p) && out.insert(p)) work.push_back(p);
    }
  }
  return out;
}

namespace {

/// Chebyshev dilation of a set by `radius`, separable over rows and columns.
StateSet dilate(const GridTopology& topo, const StateSet& x, int radius) {
  if (radius <= 0) return x;
  const int w = topo.width(), h = topo.height();
  std::vector<std::uint8_t> rows(topo.num_states(), 0);
  for (int y = 0; y < h; ++y) {
    // Distance to the nearest member on this row, scanning both directions.
    int last = -1000000;
    for (int xx = 0; xx < w; ++xx) {
      if (x.contains(topo.index({xx, y}))) last = xx;
      if (xx - last <= radius) rows[topo.index({xx, y})] = 1;
    }
    last = 1000000;
    for (int xx = w - 1; xx >= 0; --xx) {
      if (x.contains(topo.index({xx, y}))) last = xx;
      if (last - xx <= radius) rows[topo.index({xx, y})] = 1;
    }
  }
  StateSet out(topo.num_states());
  for (int xx = 0; xx < w; ++xx) {
    int last = -1000000;
    for (int y = 0; y < h; ++y) {
      if (rows[topo.index({xx, y})]) last = y;
      if (y - last <= radius) out.insert(topo.index({xx, y}));
    }
    last = 1000000;
    for (int y = h - 1; y >= 0; --y) {
      if (rows[topo.index({xx, y})]) last = y;
      if (last - y <= radius) out.insert(topo.index({xx, y}));
    }
  }
  return out;
}

}  // namespace

StateSet y_epsilon(const GridWorld& world, const StateSet& x, double epsilon, int fov_radius) {
  const double h = world.spec().safety_threshold;
  StateSet out = x;
  dilate(world.topology(), x, fov_radius).for_each([&](StateIndex s) {
    if (world.true_safety(s) - epsilon >= h) out.insert(s);
  });
  return out;
}

StateSet z_epsilon(const GridWorld& world, const StateSet& x, double epsilon, int fov_radius) {
  const GridTopology& topo = world.topology();
  const StateSet y = y_epsilon(world, x, epsilon, fov_radius);
  StateSet z = y;
  z &= y_reach_closure(topo, x, StateSet::all(topo.num_states()));
  z &= y_return_closure(topo, y, x);
  return z;
}

StateSet true_safe_space(const GridWorld& world, const StateSet& seed, double epsilon,
                         int fov_radius) {
  // Z(X) contains X, so the iterates grow monotonically to the fixed point.
  StateSet x = seed;
  while (true) {
    StateSet next = z_epsilon(world, x, epsilon, fov_radius);
    if (next == x) return x;
    x = std::move(next);
  }
}

StateSet true_safe_space(const GridWorld& world, const StateSet& seed, double epsilon) {
  return true_safe_space(world, seed, epsilon, world.spec().fov_radius);
}

SafeSetState SafeSetState::seeded(const StateSet& seed) {
  SafeSetState st;
  st.s_minus = seed;
  st.s_plus = seed;
  st.x_minus = seed;
  st.x_plus = seed;
  return st;
}

namespace {

StateSet safe_recursion(const StateSet& s_level, const StateSet& previous,
                        const GridTopology& topo) {
  StateSet x = s_level;
  x &= y_reach_closure(topo, previous, s_level);
  x &= y_return_closure(topo, s_level, previous);
  return x;
}

}  // namespace

void pessimistic_update(SafeSetState& state, const StateSet& s_minus, const GridTopology& topo) {
  StateSet x = safe_recursion(s_minus, state.x_minus, topo);
  if (x.empty()) throw EmptySafeSet("pessimistic safe set became empty");
  state.s_minus = s_minus;
  state.x_minus = std::move(x);
}

void optimistic_update(SafeSetState& state, const StateSet& s_plus, const GridTopology& topo) {
  StateSet x = safe_recursion(s_plus, state.x_plus, topo);
  if (x.empty()) throw EmptySafeSet("optimistic safe set became empty");
  state.s_plus = s_plus;
  state.x_plus = std::move(x);
}

}  // namespace spolf
