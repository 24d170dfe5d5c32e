#include "spolf/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spolf/errors.hpp"

namespace spolf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Best successor of s in P by gain + gamma J; lowest index wins ties.
StateIndex best_successor(const GridTopology& topo, StateIndex s, const StateSet& planning,
                          std::span<const double> gain, const std::vector<double>& value,
                          double gamma, double* best_q) {
  StateIndex best = s;
  double q_best = -std::numeric_limits<double>::infinity();
  for (StateIndex nb : topo.successors(s)) {
    if (!planning.contains(nb)) continue;
    const double q = gain[nb] + gamma * value[nb];
    if (q > q_best) {
      q_best = q;
      best = nb;
    }
  }
  if (best_q) *best_q = q_best;
  return best;
}

}  // namespace

double scaled_tolerance(double tol, double gamma) { return tol / (1.0 - gamma); }

long long value_iteration_cap(double tol, double gamma) {
  return static_cast<long long>(std::ceil(10.0 / (1.0 - gamma) * std::log(1.0 / tol)));
}

std::vector<double> evaluate_policy(const StateSet& planning, std::span<const StateIndex> policy,
                                    std::span<const double> gain, double gamma) {
  const std::size_t n = planning.universe();
  std::vector<double> value(n, kNaN);
  // 0 = unvisited, 1 = on the current path, 2 = evaluated.
  std::vector<std::uint8_t> mark(n, 0);
  std::vector<StateIndex> path;
  planning.for_each([&](StateIndex root) {
    if (mark[root]) return;
    path.clear();
    StateIndex u = root;
    while (mark[u] == 0) {
      mark[u] = 1;
      path.push_back(u);
      u = policy[u];
    }
    if (mark[u] == 1) {
      // u closes a cycle c_0 = u, ..., c_{L-1} on the current path.
      const auto k = static_cast<std::size_t>(std::find(path.begin(), path.end(), u) - path.begin());
      const std::size_t len = path.size() - k;
      double acc = 0.0, disc = 1.0;
      for (std::size_t i = 0; i < len; ++i) {
        acc += disc * gain[path[k + (i + 1) % len]];
        disc *= gamma;
      }
      value[path[k]] = acc / (1.0 - disc);
      mark[path[k]] = 2;
      for (std::size_t i = len - 1; i >= 1; --i) {
        const StateIndex c = path[k + i];
        const StateIndex next = path[k + (i + 1) % len];
        value[c] = gain[next] + gamma * value[next];
        mark[c] = 2;
      }
      path.resize(k);
    }
    for (std::size_t i = path.size(); i-- > 0;) {
      const StateIndex v = path[i];
      value[v] = gain[policy[v]] + gamma * value[policy[v]];
      mark[v] = 2;
    }
  });
  return value;
}

double bellman_residual(const GridTopology& topo, const ValueTable& table,
                        std::span<const double> gain) {
  double worst = 0.0;
  table.planning.for_each([&](StateIndex s) {
    double q = 0.0;
    best_successor(topo, s, table.planning, gain, table.value, table.gamma, &q);
    worst = std::max(worst, std::abs(q - table.value[s]));
  });
  return worst;
}

namespace {

ValueTable solve_policy_iteration(const GridTopology& topo, const StateSet& planning,
                                  std::span<const double> gain, double gamma,
                                  const SolveOptions& options) {
  const std::size_t n = planning.universe();
  ValueTable out;
  out.planning = planning;
  out.gamma = gamma;
  out.policy.assign(n, 0);

  const ValueTable* warm = options.warm_start;
  planning.for_each([&](StateIndex s) {
    if (warm && warm->planning.universe() == n && warm->planning.contains(s) &&
        planning.contains(warm->policy[s])) {
      out.policy[s] = warm->policy[s];
    } else {
      // Myopic start: best immediate gain.
      StateIndex best = s;
      double g_best = -std::numeric_limits<double>::infinity();
      for (StateIndex nb : topo.successors(s)) {
        if (planning.contains(nb) && gain[nb] > g_best) {
          g_best = gain[nb];
          best = nb;
        }
      }
      out.policy[s] = best;
    }
  });

  const long long cap = static_cast<long long>(planning.size()) + 64;
  for (long long iter = 1;; ++iter) {
    out.value = evaluate_policy(planning, out.policy, gain, gamma);
    out.iterations = static_cast<int>(iter);
    bool changed = false;
    planning.for_each([&](StateIndex s) {
      const StateIndex cur = out.policy[s];
      const double q_cur = gain[cur] + gamma * out.value[cur];
      double q_best = 0.0;
      const StateIndex best = best_successor(topo, s, planning, gain, out.value, gamma, &q_best);
      // Switch only on a clear improvement so round-off cannot cycle.
      if (best != cur && q_best > q_cur + 1e-12 * (1.0 + std::abs(q_cur))) {
        out.policy[s] = best;
        changed = true;
      }
    });
    if (!changed) break;
    if (iter >= cap) throw ValueIterationStalled("policy iteration did not settle");
  }
  out.residual = bellman_residual(topo, out, gain);
  if (!(out.residual <= scaled_tolerance(options.tol, gamma))) {
    throw ValueIterationStalled("policy iteration residual " + std::to_string(out.residual));
  }
  return out;
}

ValueTable solve_value_iteration(const GridTopology& topo, const StateSet& planning,
                                 std::span<const double> gain, double gamma,
                                 const SolveOptions& options) {
  const std::size_t n = planning.universe();
  const double tol = scaled_tolerance(options.tol, gamma);
  const long long cap = value_iteration_cap(options.tol, gamma);
  ValueTable out;
  out.planning = planning;
  out.gamma = gamma;
  out.policy.assign(n, 0);
  out.value.assign(n, kNaN);
  const ValueTable* warm = options.warm_start;
  planning.for_each([&](StateIndex s) {
    out.value[s] = (warm && warm->planning.universe() == n && warm->planning.contains(s))
                       ? warm->value[s]
                       : 0.0;
  });
  const std::vector<StateIndex> members = planning.to_vector();
  std::vector<double> next = out.value;
  for (long long sweep = 1;; ++sweep) {
    double residual = 0.0;
    for (StateIndex s : members) {
      double q = 0.0;
      best_successor(topo, s, planning, gain, out.value, gamma, &q);
      next[s] = q;
      residual = std::max(residual, std::abs(q - out.value[s]));
    }
    out.value.swap(next);
    out.iterations = static_cast<int>(std::min<long long>(sweep, INT32_MAX));
    out.residual = residual;
    if (options.residual_trace) options.residual_trace->push_back(residual);
    if (residual <= tol) break;
    if (sweep >= cap) throw ValueIterationStalled("value iteration exceeded its sweep cap");
  }
  for (StateIndex s : members) {
    out.policy[s] = best_successor(topo, s, planning, gain, out.value, gamma, nullptr);
  }
  return out;
}

}  // namespace

ValueTable solve_value(const GridTopology& topo, const StateSet& planning,
                       std::span<const double> gain, double gamma, const SolveOptions& options) {
  if (planning.empty()) throw EmptyPlanningSet("planning set is empty");
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidSpec("gamma must lie in (0, 1)");
  if (options.method == SolveMethod::kValueIteration) {
    return solve_value_iteration(topo, planning, gain, gamma, options);
  }
  return solve_policy_iteration(topo, planning, gain, gamma, options);
}

std::vector<double> ofu_reward(const GlmEstimator& glm_r, const StateSet& psi,
                               const StateSet& planning, const Eigen::MatrixXd& features) {
  if (!glm_r.fitted()) throw NotFitted("reward GLM must be fitted before planning");
  const std::size_t n = planning.universe();
  std::vector<double> reward(n, 0.0);
  const double beta = glm_r.beta();
  const double outside = glm_r.link().mean(glm_r.theta().norm()) + beta * glm_r.lambda_max_inv();
  const Eigen::VectorXd eta = features.transpose() * glm_r.theta();
  const Eigen::VectorXd norms = glm_r.weighted_norms(features);
  planning.for_each([&](StateIndex s) {
    reward[s] = psi.contains(s) ? glm_r.link().mean(eta(s)) + beta * norms(s) : outside;
  });
  return reward;
}

std::vector<double> etse_gain(const GlmEstimator& glm, const StateSet& psi,
                              const StateSet& region, const Eigen::MatrixXd& features) {
  std::vector<double> gain(region.universe(), 0.0);
  const Eigen::VectorXd norms = glm.weighted_norms(features);
  region.for_each([&](StateIndex s) {
    if (psi.contains(s)) gain[s] = norms(s);
  });
  return gain;
}

StateIndex greedy_next(const GridTopology& topo, StateIndex s, const ValueTable& values,
                       const StateSet& allowed, std::span<const double> gain) {
  StateIndex best = s;
  double q_best = -std::numeric_limits<double>::infinity();
  for (StateIndex nb : topo.successors(s)) {
    if (!allowed.contains(nb) || !values.defined(nb)) continue;
    const double q = gain[nb] + values.gamma * values.value[nb];
    if (q > q_best) {
      q_best = q;
      best = nb;
    }
  }
  return best;
}

StateIndex eta(const GridTopology& topo, StateIndex s, const ValueTable& values,
               std::span<const double> gain) {
  return greedy_next(topo, s, values, values.planning, gain);
}

StateIndex value_argmax(const ValueTable& values, const StateSet& region) {
  StateIndex best = static_cast<StateIndex>(values.planning.universe());
  double v_best = -std::numeric_limits<double>::infinity();
  region.for_each([&](StateIndex s) {
    if (values.defined(s) && values.value[s] > v_best) {
      v_best = values.value[s];
      best = s;
    }
  });
  return best;
}

}  // namespace spolf
