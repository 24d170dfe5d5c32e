#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "spolf/glm.hpp"
#include "spolf/grid.hpp"
#include "spolf/state_set.hpp"

namespace spolf {

/// Optimal discounted values on a planning set:
///   J(s) = max_{s' in succ(s) ∩ P} [gain(s') + gamma J(s')].
/// Gain is collected on arrival, so a self-loop with gain c is worth c / (1 - gamma).
struct ValueTable {
  std::vector<double> value;      ///< NaN outside the planning set
  std::vector<StateIndex> policy; ///< chosen successor per planning state
  StateSet planning;
  double gamma = 0.0;
  double residual = 0.0;
  int iterations = 0;

  bool defined(StateIndex s) const { return planning.contains(s); }
  double operator[](StateIndex s) const { return value[s]; }
};

enum class SolveMethod {
  /// Howard policy iteration with exact evaluation of the deterministic
  /// policy graph. Default.
  kPolicyIteration,
  /// Synchronous value iteration from zero (or a warm start).
  kValueIteration,
};

struct SolveOptions {
  /// Residual target before scaling by 1 / (1 - gamma).
  double tol = 1e-9;
  SolveMethod method = SolveMethod::kPolicyIteration;
  /// Optional previous policy used as the starting point (PI) or previous
  /// values (VI); entries that leave the planning set are ignored.
  const ValueTable* warm_start = nullptr;
  /// Records the per-sweep residuals when non-null (VI only).
  std::vector<double>* residual_trace = nullptr;
};

/// Effective stopping tolerance tol / (1 - gamma).
double scaled_tolerance(double tol, double gamma);

/// Sweep cap 10 (1 - gamma)^-1 log(1 / tol), as used by value iteration.
long long value_iteration_cap(double tol, double gamma);

/// EmptyPlanningSet if the planning set is empty; ValueIterationStalled if
/// the residual target is not met within the iteration cap.
ValueTable solve_value(const GridTopology& topo, const StateSet& planning,
                       std::span<const double> gain, double gamma, const SolveOptions& options = {});

/// max_s |J(s) - max_{s'} [gain(s') + gamma J(s')]| over the planning set.
double bellman_residual(const GridTopology& topo, const ValueTable& table,
                        std::span<const double> gain);

/// Exact discounted value of a fixed successor map (policy graph evaluation).
std::vector<double> evaluate_policy(const StateSet& planning, std::span<const StateIndex> policy,
                                    std::span<const double> gain, double gamma);

/// Upper confidence bound on reward over the planning set: the inside-Psi
/// branch uses the observed feature, the rest the feature-free bound.
/// Entries outside the planning set are 0.
std::vector<double> ofu_reward(const GlmEstimator& glm_r, const StateSet& psi,
                               const StateSet& planning, const Eigen::MatrixXd& features);

/// ||phi_s||_{W^-1} on `region` for feature-observed states, 0 otherwise.
std::vector<double> etse_gain(const GlmEstimator& glm, const StateSet& psi,
                              const StateSet& region, const Eigen::MatrixXd& features);

/// argmax of gain(s') + gamma J(s') over successors of s inside `allowed`
/// and the planning set; lowest index on ties; s itself if none qualifies.
StateIndex greedy_next(const GridTopology& topo, StateIndex s, const ValueTable& values,
                       const StateSet& allowed, std::span<const double> gain);

/// Same argmax without the safety restriction.
StateIndex eta(const GridTopology& topo, StateIndex s, const ValueTable& values,
               std::span<const double> gain);

/// argmax of J over `region` ∩ planning set (lowest index on ties).
StateIndex value_argmax(const ValueTable& values, const StateSet& region);

}  // namespace spolf
