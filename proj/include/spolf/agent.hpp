#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spolf/env.hpp"
#include "spolf/glm.hpp"
#include "spolf/planner.hpp"
#include "spolf/rng.hpp"
#include "spolf/safesets.hpp"

namespace spolf {

enum class Algorithm : std::uint8_t { kSpolf, kOracle, kUnsafeGlm, kRandom, kStepSafeGlm };

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

enum class Mode : std::uint8_t { kOfu, kEtse };
std::string_view to_string(Mode m);

struct RunConfig {
  Algorithm algorithm = Algorithm::kSpolf;
  int steps = 400;
  int fov_radius = 3;
  double gamma = 0.999;
  double delta_r = 0.05;
  double delta_g = 0.05;
  /// Safety threshold; negative means "take it from the world".
  double h = -1.0;
  int prior_safety_samples = 10;
  int prior_reward_samples = 10;
  std::uint64_t seed = 0;
  int step_safe_phase1_budget = 200;
  int step_safe_stability_k = 10;
  /// Leave exploration as soon as the constrained and unconstrained choices agree.
  bool etse_early_exit = true;
  /// Throw SafetyBreach when a move leaves the pessimistic set.
  bool assert_safe = false;
  /// Fill step_wall_nanos and the timing splits; off keeps output reproducible.
  bool record_timing = false;
};

/// Throws InvalidSpec on out-of-range fields.
void validate(const RunConfig& config);

/// One environment transition. Position and true values describe the state
/// the agent moved to; the *_obs columns are the noisy readings taken at the
/// state it left.
struct StepRecord {
  long long t = 0;
  int x = 0;
  int y = 0;
  Action action = Action::kStay;
  double reward_true = 0.0;
  double reward_obs = 0.0;
  double safety_true = 0.0;
  double safety_obs = 0.0;
  bool unsafe = false;
  Mode mode = Mode::kOfu;
  std::size_t size_x_minus = 0;
  std::size_t size_x_plus = 0;
  std::size_t size_psi = 0;
  double cum_reward = 0.0;
  int glm_fit_iters = 0;
  long long step_wall_nanos = 0;

  // Diagnostics, not written to CSV.
  StateIndex from = 0;
  StateIndex to = 0;
  /// ||phi||_{W^-1} of the near-observed feature under the safety design
  /// before it was added, with lambda_max(W^-1) and the observation count at
  /// that moment.
  double weighted_norm_before = 0.0;
  double lambda_max_inv_before = 0.0;
  long long observations_before = 0;
  long long glm_bound_nanos = 0;
  long long set_ops_nanos = 0;
  long long planning_nanos = 0;
};

inline constexpr std::string_view kStepRecordHeader =
    "t,x,y,action,reward_true,reward_obs,safety_true,safety_obs,unsafe,mode,"
    "size_x_minus,size_x_plus,size_psi,cum_reward,glm_fit_iters,step_wall_nanos";

std::string to_csv_row(const StepRecord& r);

struct AgentState {
  RunConfig config;
  StateIndex current = 0;
  GlmEstimator glm_r;
  GlmEstimator glm_g;
  ConfidenceTable confidence;
  SafeSetState sets;
  Mode mode = Mode::kOfu;
  std::optional<StateIndex> etse_target;
  long long t = 0;
  double cum_reward = 0.0;

  /// d x |S| features the agent has seen; zero columns elsewhere.
  Eigen::MatrixXd known_features;

  /// Previous solutions, used as warm starts.
  ValueTable ofu_values;
  ValueTable etse_values;

  /// Oracle: the true safe space and the plan over it.
  StateSet oracle_space;
  ValueTable oracle_values;

  /// Stepwise baseline bookkeeping.
  bool step_safe_frozen = false;
  int step_safe_stable = 0;

  long long fit_failures = 0;
  long long empty_set_events = 0;
};

/// Agent at the start state with the S0 prior and fitted prior GLMs.
/// InsufficientPrior when the safety prior has fewer than d samples for an
/// algorithm that needs it.
AgentState init(const GridWorld& world, const RunConfig& config, Rng& rng);

StepRecord spolf_step(AgentState& agent, const GridWorld& world, Rng& rng);
StepRecord oracle_step(AgentState& agent, const GridWorld& world, Rng& rng);
StepRecord unsafe_glm_step(AgentState& agent, const GridWorld& world, Rng& rng);
StepRecord random_step(AgentState& agent, const GridWorld& world, Rng& rng);
StepRecord step_safe_glm_step(AgentState& agent, const GridWorld& world, Rng& rng);

/// Dispatches on config.algorithm.
StepRecord agent_step(AgentState& agent, const GridWorld& world, Rng& rng);

struct RunResult {
  std::vector<StepRecord> records;
  long long unsafe_count = 0;
  long long violation_count = 0;
  long long fit_failures = 0;
};

/// init + config.steps steps from an rng seeded with config.seed.
RunResult run_episode(const GridWorld& world, const RunConfig& config);

std::string trajectory_csv(const std::vector<StepRecord>& records);

}  // namespace spolf
