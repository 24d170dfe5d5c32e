#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "spolf/env.hpp"
#include "spolf/glm.hpp"
#include "spolf/grid.hpp"
#include "spolf/state_set.hpp"

namespace spolf {

/// The [h, inf) prior on s0 is stored with this finite upper end; g <= 1.
inline constexpr double kSafetyCap = 1.0;

/// Per-state safety intervals C(s), intersected over time, plus the set of
/// states whose features have been observed.
class ConfidenceTable {
 public:
  ConfidenceTable() = default;
  /// C(s) = [h, cap] on s0, unbounded elsewhere.
  ConfidenceTable(std::size_t num_states, const StateSet& s0, double threshold);

  std::size_t num_states() const { return lower_.size(); }
  double lower(StateIndex s) const { return lower_[s]; }
  double upper(StateIndex s) const { return upper_[s]; }
  Interval interval(StateIndex s) const { return {lower_[s], upper_[s]}; }
  const StateSet& psi() const { return psi_; }
  /// Times an intersection came out empty and C(s) was reset to Q(s).
  long long violation_count() const { return violation_count_; }

  /// Marks states as feature-observed (no interval change).
  void observe(std::span<const StateIndex> states);

  /// C(s) <- Q(s) ∩ C(s) for every state; an empty intersection is replaced
  /// by Q(s) and counted. `q` holds one interval per state.
  void intersect(std::span<const Interval> q);

  /// Overwrites one interval (tests).
  void set_interval(StateIndex s, Interval c);

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  StateSet psi_;
  long long violation_count_ = 0;
};

/// Q(s) for every state: inside-Psi intervals use the observed feature
/// (column s of `features`), the rest share the outside interval. Columns of
/// states outside Psi do not affect the result.
std::vector<Interval> safety_intervals(const GlmEstimator& glm_g, const StateSet& psi,
                                       const Eigen::MatrixXd& features);

/// Extends Psi by the newly observed states and intersects every C(s) with Q(s).
void update_confidence(ConfidenceTable& table, const GlmEstimator& glm_g,
                       std::span<const StateIndex> newly_observed,
                       const Eigen::MatrixXd& features);

/// (S-, S+) = ({l >= h}, {u >= h}).
std::pair<StateSet, StateSet> threshold_sets(const ConfidenceTable& table, double threshold);

/// X plus the one-step successors of X that lie in `domain`.
StateSet y_reach_one(const GridTopology& topo, const StateSet& x, const StateSet& domain);
/// Least fixed point of y_reach_one (worklist BFS).
StateSet y_reach_closure(const GridTopology& topo, const StateSet& x, const StateSet& domain);

/// target ∪ {s in through | some action leads into target}.
StateSet y_return_one(const GridTopology& topo, const StateSet& through, const StateSet& target);
/// Least fixed point of y_return_one (backward BFS).
StateSet y_return_closure(const GridTopology& topo, const StateSet& through,
                          const StateSet& target);

/// States certified safe with margin epsilon by far-sighted observation from X.
StateSet y_epsilon(const GridWorld& world, const StateSet& x, double epsilon, int fov_radius);

/// One expansion Z_eps(X) = Y_eps(X) ∩ reach(X) ∩ return(Y_eps(X), X), with the
/// reach closure taken over all states.
StateSet z_epsilon(const GridWorld& world, const StateSet& x, double epsilon, int fov_radius);

/// Fixed point of z_epsilon from `seed` with the true safety function.
StateSet true_safe_space(const GridWorld& world, const StateSet& seed, double epsilon,
                         int fov_radius);
StateSet true_safe_space(const GridWorld& world, const StateSet& seed, double epsilon);

/// Predicted safe sets and the previous iterates the recursions start from.
struct SafeSetState {
  StateSet s_minus;
  StateSet s_plus;
  StateSet x_minus;
  StateSet x_plus;

  /// X- = X+ = seed.
  static SafeSetState seeded(const StateSet& seed);
};

/// X- <- S- ∩ reach(X-; domain S-) ∩ return(S-, X-). EmptySafeSet if empty.
void pessimistic_update(SafeSetState& state, const StateSet& s_minus, const GridTopology& topo);
/// Same recursion on S+ for X+.
void optimistic_update(SafeSetState& state, const StateSet& s_plus, const GridTopology& topo);

}  // namespace spolf
