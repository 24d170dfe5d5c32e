#include "spolf/agent.hpp"

#include <chrono>
#include <cstdio>

#include "spolf/csv.hpp"
#include "spolf/errors.hpp"

namespace spolf {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kSpolf: return "spolf";
    case Algorithm::kOracle: return "oracle";
    case Algorithm::kUnsafeGlm: return "unsafe_glm";
    case Algorithm::kRandom: return "random";
    case Algorithm::kStepSafeGlm: return "step_safe_glm";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::kSpolf, Algorithm::kOracle, Algorithm::kUnsafeGlm,
                      Algorithm::kRandom, Algorithm::kStepSafeGlm}) {
    if (name == to_string(a)) return a;
  }
  return std::nullopt;
}

std::string_view to_string(Mode m) { return m == Mode::kOfu ? "ofu" : "etse"; }

void validate(const RunConfig& c) {
  if (c.steps < 0) throw InvalidSpec("steps must be >= 0");
  if (c.fov_radius < 0) throw InvalidSpec("fov radius must be >= 0");
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) throw InvalidSpec("gamma must lie in (0, 1)");
  if (!(c.delta_r > 0.0 && c.delta_r < 1.0)) throw InvalidSpec("delta_r must lie in (0, 1)");
  if (!(c.delta_g > 0.0 && c.delta_g < 1.0)) throw InvalidSpec("delta_g must lie in (0, 1)");
  if (c.h > 1.0) throw InvalidSpec("h must be <= 1");
  if (c.prior_safety_samples < 0 || c.prior_reward_samples < 0) {
    throw InvalidSpec("prior sample counts must be >= 0");
  }
  if (c.step_safe_phase1_budget < 0 || c.step_safe_stability_k < 1) {
    throw InvalidSpec("stepwise baseline needs budget >= 0 and stability k >= 1");
  }
}

std::string to_csv_row(const StepRecord& r) {
  std::string out;
  out.reserve(256);
  auto add = [&](std::string_view cell) {
    if (!out.empty()) out += ',';
    out += cell;
  };
  add(std::to_string(r.t));
  add(std::to_string(r.x));
  add(std::to_string(r.y));
  add(to_string(r.action));
  add(format_real(r.reward_true));
  add(format_real(r.reward_obs));
  add(format_real(r.safety_true));
  add(format_real(r.safety_obs));
  add(r.unsafe ? "1" : "0");
  add(to_string(r.mode));
  add(std::to_string(r.size_x_minus));
  add(std::to_string(r.size_x_plus));
  add(std::to_string(r.size_psi));
  add(format_real(r.cum_reward));
  add(std::to_string(r.glm_fit_iters));
  add(std::to_string(r.step_wall_nanos));
  return out;
}

std::string trajectory_csv(const std::vector<StepRecord>& records) {
  std::string out(kStepRecordHeader);
  out += '\n';
  for (const auto& r : records) {
    out += to_csv_row(r);
    out += '\n';
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

long long nanos_since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
}

bool learns(Algorithm a) {
  return a == Algorithm::kSpolf || a == Algorithm::kUnsafeGlm || a == Algorithm::kStepSafeGlm;
}

bool needs_safety_prior(Algorithm a) {
  return a == Algorithm::kSpolf || a == Algorithm::kStepSafeGlm;
}

int refit(AgentState& agent, GlmEstimator& glm) {
  if (static_cast<int>(glm.num_observations()) < glm.dim()) return 0;
  try {
    return glm.fit();
  } catch (const NewtonDivergence&) {
    // Keep the previous estimate; the failure is counted per run.
    ++agent.fit_failures;
    return 0;
  }
}

/// Near and far observation at the current state. Returns the newly observed
/// states; updates and refits both GLMs when `learn` is set.
std::vector<StateIndex> sense(AgentState& agent, const GridWorld& world, Rng& rng,
                              StepRecord& rec, bool learn) {
  const Observation near = near_observe(world, agent.current, rng);
  rec.reward_obs = near.y_r;
  rec.safety_obs = near.y_g;

  std::vector<StateIndex> fresh;
  for (const auto& f : far_observe(world, agent.current, agent.config.fov_radius)) {
    if (agent.confidence.psi().contains(f.state)) continue;
    agent.known_features.col(f.state) = f.feature;
    fresh.push_back(f.state);
  }
  if (!learn) return fresh;

  rec.weighted_norm_before = agent.glm_g.weighted_norm(near.feature);
  rec.lambda_max_inv_before = agent.glm_g.lambda_max_inv();
  rec.observations_before = static_cast<long long>(agent.glm_g.num_observations());

  const auto t0 = Clock::now();
  agent.glm_g.update(near.feature, near.y_g);
  agent.glm_r.update(near.feature, near.y_r);
  rec.glm_fit_iters = refit(agent, agent.glm_g) + refit(agent, agent.glm_r);
  rec.glm_bound_nanos = nanos_since(t0);
  return fresh;
}

void update_sets(AgentState& agent, const GridWorld& world, const std::vector<StateIndex>& fresh) {
  update_confidence(agent.confidence, agent.glm_g, fresh, agent.known_features);
  auto [s_minus, s_plus] = threshold_sets(agent.confidence, agent.config.h);
  try {
    pessimistic_update(agent.sets, s_minus, world.topology());
  } catch (const EmptySafeSet&) {
    ++agent.empty_set_events;
  }
  try {
    optimistic_update(agent.sets, s_plus, world.topology());
  } catch (const EmptySafeSet&) {
    ++agent.empty_set_events;
  }
}

void finish(AgentState& agent, const GridWorld& world, StepRecord& rec, StateIndex to,
            Action action, Mode mode, Clock::time_point started) {
  const StateIndex from = agent.current;
  if (agent.config.assert_safe && to != from && learns(agent.config.algorithm) &&
      agent.config.algorithm != Algorithm::kUnsafeGlm && !agent.sets.x_minus.contains(to)) {
    throw SafetyBreach("move to state " + std::to_string(to) + " leaves the pessimistic set");
  }
  agent.current = to;
  agent.mode = mode;
  const Cell c = world.topology().cell(to);
  rec.t = agent.t;
  rec.from = from;
  rec.to = to;
  rec.x = c.x;
  rec.y = c.y;
  rec.action = action;
  rec.reward_true = world.true_reward(to);
  rec.safety_true = world.true_safety(to);
  rec.unsafe = is_unsafe(world, to);
  rec.mode = mode;
  rec.size_psi = agent.confidence.psi().size();
  agent.cum_reward += rec.reward_true;
  rec.cum_reward = agent.cum_reward;
  ++agent.t;
  if (agent.config.record_timing) rec.step_wall_nanos = nanos_since(started);
}

Action action_of(const GridTopology& topo, StateIndex from, StateIndex to) {
  return topo.action_between(from, to).value_or(Action::kStay);
}

/// One exploration move: greedy on the uncertainty objective over X-.
/// Returns the move and whether the agent already sits at the target.
std::pair<StateIndex, bool> etse_move(AgentState& agent, const GridWorld& world) {
  const auto& topo = world.topology();
  const StateSet& region = agent.sets.x_minus;
  const auto gain = etse_gain(agent.glm_g, agent.confidence.psi(), region, agent.known_features);
  SolveOptions opt;
  opt.warm_start = &agent.etse_values;
  agent.etse_values = solve_value(topo, region, gain, agent.config.gamma, opt);
  const StateIndex target = value_argmax(agent.etse_values, region);
  agent.etse_target = target;
  if (agent.current == target) return {agent.current, true};
  return {greedy_next(topo, agent.current, agent.etse_values, region, gain), false};
}

}  // namespace

AgentState init(const GridWorld& world, const RunConfig& config, Rng& rng) {
  validate(config);
  AgentState a;
  a.config = config;
  if (a.config.h < 0.0) a.config.h = world.spec().safety_threshold;
  const std::size_t n = world.num_states();
  const int d = world.dim();
  a.current = world.start();
  a.known_features = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(n));
  a.confidence = ConfidenceTable(n, world.s0_set(), a.config.h);
  a.sets = SafeSetState::seeded(world.s0_set());

  if (config.algorithm == Algorithm::kOracle) {
    a.oracle_space = true_safe_space(world, world.s0_set(), 0.0, config.fov_radius);
    a.oracle_values =
        solve_value(world.topology(), a.oracle_space, world.reward_values(), config.gamma);
    a.sets.x_minus = a.oracle_space;
    a.sets.x_plus = a.oracle_space;
  }
  if (!learns(config.algorithm)) return a;

  const GridSpec& spec = world.spec();
  a.glm_g = GlmEstimator(spec.link_safety, d, spec.noise_sigma_g, config.delta_g);
  a.glm_r = GlmEstimator(spec.link_reward, d, spec.noise_sigma_r, config.delta_r);
  if (needs_safety_prior(config.algorithm) && config.prior_safety_samples < d) {
    throw InsufficientPrior("safety prior needs at least " + std::to_string(d) + " samples, got " +
                            std::to_string(config.prior_safety_samples));
  }
  // A prior whose likelihood has no maximizer leaves the estimate at zero,
  // which still yields valid (wide) intervals.
  auto prior_fit = [&](GlmEstimator& glm) {
    try {
      glm.fit();
    } catch (const NewtonDivergence&) {
      ++a.fit_failures;
      glm.set_theta(glm.theta());
    }
  };
  std::uniform_int_distribution<StateIndex> pick(0, static_cast<StateIndex>(n - 1));
  for (int i = 0; i < config.prior_safety_samples; ++i) {
    const StateIndex s = pick(rng);
    a.glm_g.update(world.feature(s), world.true_safety(s) + spec.noise_sigma_g * standard_normal(rng));
  }
  if (config.prior_safety_samples >= d) prior_fit(a.glm_g);
  for (int i = 0; i < config.prior_reward_samples; ++i) {
    const StateIndex s = pick(rng);
    a.glm_r.update(world.feature(s), world.true_reward(s) + spec.noise_sigma_r * standard_normal(rng));
  }
  if (config.prior_reward_samples >= d) prior_fit(a.glm_r);
  return a;
}

StepRecord spolf_step(AgentState& agent, const GridWorld& world, Rng& rng) {
  const auto started = Clock::now();
  const auto& topo = world.topology();
  StepRecord rec;
  const auto fresh = sense(agent, world, rng, rec, true);

  auto t0 = Clock::now();
  update_sets(agent, world, fresh);
  rec.set_ops_nanos = nanos_since(t0);
  rec.size_x_minus = agent.sets.x_minus.size();
  rec.size_x_plus = agent.sets.x_plus.size();

  t0 = Clock::now();
  const StateIndex from = agent.current;
  StateIndex s_star = from;
  bool explore = true;
  if (agent.glm_r.fitted()) {
    const auto reward = ofu_reward(agent.glm_r, agent.confidence.psi(), agent.sets.x_plus,
                                   agent.known_features);
    SolveOptions opt;
    opt.warm_start = &agent.ofu_values;
    agent.ofu_values = solve_value(topo, agent.sets.x_plus, reward, agent.config.gamma, opt);
    s_star = greedy_next(topo, from, agent.ofu_values, agent.sets.x_minus, reward);
    const StateIndex unconstrained = eta(topo, from, agent.ofu_values, reward);
    if (s_star == unconstrained) {
      explore = agent.mode == Mode::kEtse && !agent.config.etse_early_exit;
    }
  }

  StateIndex next = s_star;
  Mode mode = Mode::kOfu;
  if (explore) {
    const auto [move, at_target] = etse_move(agent, world);
    if (at_target && agent.glm_r.fitted()) {
      agent.etse_target.reset();
    } else {
      next = move;
      mode = Mode::kEtse;
    }
  } else {
    agent.etse_target.reset();
  }
  rec.planning_nanos = nanos_since(t0);

  finish(agent, world, rec, next, action_of(topo, from, next), mode, started);
  return rec;
}

StepRecord oracle_step(AgentState& agent, const GridWorld& world, Rng& rng) {
  const auto started = Clock::now();
  StepRecord rec;
  sense(agent, world, rng, rec, false);
  rec.size_x_minus = agent.oracle_space.size();
  rec.size_x_plus = agent.oracle_space.size();
  const StateIndex from = agent.current;
  const StateIndex next = greedy_next(world.topology(), from, agent.oracle_values,
                                      agent.oracle_space, world.reward_values());
  finish(agent, world, rec, next, action_of(world.topology(), from, next), Mode::kOfu, started);
  return rec;
}

StepRecord unsafe_glm_step(AgentState& agent, const GridWorld& world, Rng& rng) {
  const auto started = Clock::now();
  const auto& topo = world.topology();
  StepRecord rec;
  const auto fresh = sense(agent, world, rng, rec, true);
  agent.confidence.observe(fresh);

  const auto t0 = Clock::now();
  const StateSet all = StateSet::all(world.num_states());
  const StateIndex from = agent.current;
  std::vector<double> gain;
  if (agent.glm_r.fitted()) {
    gain = ofu_reward(agent.glm_r, agent.confidence.psi(), all, agent.known_features);
  } else {
    gain = etse_gain(agent.glm_r, agent.confidence.psi(), all, agent.known_features);
  }
  SolveOptions opt;
  opt.warm_start = &agent.ofu_values;
  agent.ofu_values = solve_value(topo, all, gain, agent.config.gamma, opt);
  const StateIndex next = eta(topo, from, agent.ofu_values, gain);
  rec.planning_nanos = nanos_since(t0);

  finish(agent, world, rec, next, action_of(topo, from, next), Mode::kOfu, started);
  return rec;
}

StepRecord random_step(AgentState& agent, const GridWorld& world, Rng& rng) {
  const auto started = Clock::now();
  StepRecord rec;
  sense(agent, world, rng, rec, false);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(kActions.size()) - 1);
  const Action a = kActions[static_cast<std::size_t>(pick(rng))];
  const StateIndex next = step(world, agent.current, a);
  finish(agent, world, rec, next, a, Mode::kOfu, started);
  return rec;
}

StepRecord step_safe_glm_step(AgentState& agent, const GridWorld& world, Rng& rng) {
  const auto started = Clock::now();
  const auto& topo = world.topology();
  StepRecord rec;
  const auto fresh = sense(agent, world, rng, rec, true);

  auto t0 = Clock::now();
  if (agent.step_safe_frozen) {
    agent.confidence.observe(fresh);
  } else {
    const StateSet before = agent.sets.x_minus;
    update_sets(agent, world, fresh);
    agent.step_safe_stable = (agent.sets.x_minus == before) ? agent.step_safe_stable + 1 : 0;
    if (agent.step_safe_stable >= agent.config.step_safe_stability_k ||
        agent.t + 1 >= agent.config.step_safe_phase1_budget) {
      agent.step_safe_frozen = true;
    }
  }
  rec.set_ops_nanos = nanos_since(t0);
  rec.size_x_minus = agent.sets.x_minus.size();
  rec.size_x_plus = agent.sets.x_plus.size();

  t0 = Clock::now();
  const StateIndex from = agent.current;
  StateIndex next = from;
  Mode mode = Mode::kEtse;
  if (!agent.step_safe_frozen || !agent.glm_r.fitted()) {
    next = etse_move(agent, world).first;
  } else {
    mode = Mode::kOfu;
    const auto reward = ofu_reward(agent.glm_r, agent.confidence.psi(), agent.sets.x_minus,
                                   agent.known_features);
    SolveOptions opt;
    opt.warm_start = &agent.ofu_values;
    agent.ofu_values = solve_value(topo, agent.sets.x_minus, reward, agent.config.gamma, opt);
    next = greedy_next(topo, from, agent.ofu_values, agent.sets.x_minus, reward);
  }
  rec.planning_nanos = nanos_since(t0);

  finish(agent, world, rec, next, action_of(topo, from, next), mode, started);
  return rec;
}

StepRecord agent_step(AgentState& agent, const GridWorld& world, Rng& rng) {
  switch (agent.config.algorithm) {
    case Algorithm::kSpolf: return spolf_step(agent, world, rng);
    case Algorithm::kOracle: return oracle_step(agent, world, rng);
    case Algorithm::kUnsafeGlm: return unsafe_glm_step(agent, world, rng);
    case Algorithm::kRandom: return random_step(agent, world, rng);
    case Algorithm::kStepSafeGlm: return step_safe_glm_step(agent, world, rng);
  }
  throw InvalidSpec("unknown algorithm");
}

RunResult run_episode(const GridWorld& world, const RunConfig& config) {
  Rng rng(config.seed);
  AgentState agent = init(world, config, rng);
  RunResult out;
  out.records.reserve(static_cast<std::size_t>(config.steps));
  for (int i = 0; i < config.steps; ++i) {
    out.records.push_back(agent_step(agent, world, rng));
    out.unsafe_count += out.records.back().unsafe ? 1 : 0;
  }
  out.violation_count = agent.confidence.violation_count();
  out.fit_failures = agent.fit_failures;
  return out;
}

}  // namespace spolf
