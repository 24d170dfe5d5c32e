#include "spolf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <thread>
#include <tuple>

#include "spolf/csv.hpp"
#include "spolf/errors.hpp"
#include "spolf/metrics.hpp"
#include "spolf/report.hpp"
#include "spolf/scaling.hpp"

namespace spolf {

namespace {

GridSpec spec_from_json(const nlohmann::json& j) {
  GridSpec s;
  s.width = j.value("width", s.width);
  s.height = j.value("height", s.height);
  s.feature_dim = j.value("feature_dim", s.feature_dim);
  auto link = [&](const char* key, LinkKind fallback) {
    if (!j.contains(key)) return fallback;
    auto k = parse_link(j.at(key).get<std::string>());
    if (!k) throw InvalidSpec(std::string("unknown link in ") + key);
    return *k;
  };
  if (j.contains("link")) {
    s.link_reward = s.link_safety = link("link", s.link_safety);
  }
  s.link_reward = link("link_kind_reward", s.link_reward);
  s.link_safety = link("link_kind_safety", s.link_safety);
  s.noise_sigma_r = j.value("noise_sigma_r", s.noise_sigma_r);
  s.noise_sigma_g = j.value("noise_sigma_g", s.noise_sigma_g);
  s.safety_threshold = j.value("safety_threshold", s.safety_threshold);
  s.fov_radius = j.value("fov_radius", s.fov_radius);
  s.min_safe_region = j.value("min_safe_region", s.min_safe_region);
  s.seed = j.value("seed", s.seed);
  s.s0_margin = j.value("s0_margin", s.s0_margin);
  s.unsafe_fraction = j.value("unsafe_fraction", s.unsafe_fraction);
  s.reward_scale = j.value("reward_scale", s.reward_scale);
  s.reward_safety_correlation = j.value("reward_safety_correlation", s.reward_safety_correlation);
  validate(s);
  return s;
}

/// Runs fn(i) for i in [0, n) on `threads` workers.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

int algorithm_rank(Algorithm a) { return static_cast<int>(a); }

}  // namespace

BenchConfig bench_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid bench config JSON: ") + e.what());
  }
  try {
    BenchConfig c;
    if (j.contains("grid_spec")) c.grid_spec = spec_from_json(j.at("grid_spec"));
    if (j.contains("algorithms")) {
      c.algorithms.clear();
      for (const auto& name : j.at("algorithms")) {
        auto a = parse_algorithm(name.get<std::string>());
        if (!a) throw InvalidSpec("unknown algorithm: " + name.get<std::string>());
        if (std::find(c.algorithms.begin(), c.algorithms.end(), *a) == c.algorithms.end()) {
          c.algorithms.push_back(*a);
        }
      }
    }
    c.steps_per_run = j.value("steps_per_run", c.steps_per_run);
    c.n_seeds = j.value("n_seeds", c.n_seeds);
    if (j.contains("fov_sweep")) c.fov_sweep = j.at("fov_sweep").get<std::vector<int>>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("scaling_sizes")) {
      for (const auto& p : j.at("scaling_sizes")) {
        c.scaling_sizes.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
      }
    }
    c.scaling_steps = j.value("scaling_steps", c.scaling_steps);
    c.base_seed = j.value("base_seed", c.base_seed);
    c.run.gamma = j.value("gamma", c.run.gamma);
    c.run.delta_r = j.value("delta_r", c.run.delta_r);
    c.run.delta_g = j.value("delta_g", c.run.delta_g);
    c.run.prior_safety_samples = j.value("prior_safety_samples", c.run.prior_safety_samples);
    c.run.prior_reward_samples = j.value("prior_reward_samples", c.run.prior_reward_samples);
    c.run.step_safe_phase1_budget = j.value("step_safe_phase1_budget", c.run.step_safe_phase1_budget);
    c.run.step_safe_stability_k = j.value("step_safe_stability_k", c.run.step_safe_stability_k);
    c.run.etse_early_exit = j.value("etse_early_exit", c.run.etse_early_exit);

    if (c.n_seeds < 1) throw InvalidSpec("n_seeds must be >= 1");
    if (c.steps_per_run < 0) throw InvalidSpec("steps_per_run must be >= 0");
    if (c.algorithms.empty()) throw InvalidSpec("no algorithms given");
    if (c.fov_sweep.empty()) throw InvalidSpec("fov_sweep is empty");
    for (int k : c.fov_sweep) {
      if (k < 0) throw InvalidSpec("fov values must be >= 0");
    }
    std::sort(c.fov_sweep.begin(), c.fov_sweep.end());
    c.fov_sweep.erase(std::unique(c.fov_sweep.begin(), c.fov_sweep.end()), c.fov_sweep.end());
    for (const auto& [w, h] : c.scaling_sizes) {
      if (w < 1 || h < 1) throw InvalidSpec("scaling sizes must be positive");
    }
    validate(c.run);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed bench config: ") + e.what());
  }
}

BenchConfig load_bench_config(const std::filesystem::path& path) {
  return bench_config_from_json(read_text_file(path));
}

std::uint64_t world_seed(std::uint64_t base, int index) {
  return derive_seed(base, 2 * static_cast<std::uint64_t>(index));
}

std::uint64_t agent_seed(std::uint64_t base, int index) {
  return derive_seed(base, 2 * static_cast<std::uint64_t>(index) + 1);
}

int default_thread_count() {
  if (const char* env = std::getenv("SPOLF_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

std::string trajectory_file_name(Algorithm a, int fov, int seed_index) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s_k%d_s%04d.csv", std::string(to_string(a)).c_str(), fov,
                seed_index);
  return buf;
}

BenchResult run_bench(const BenchConfig& config, int threads) {
  namespace fs = std::filesystem;
  const fs::path traj_dir = config.output_dir / "trajectories";
  // Stale files from an earlier bench would leak into the aggregate.
  fs::remove_all(traj_dir);
  fs::create_directories(traj_dir);

  // Worlds are shared by every algorithm and fov at the same seed index.
  const auto n_seeds = static_cast<std::size_t>(config.n_seeds);
  std::vector<std::optional<GridWorld>> worlds(n_seeds);
  std::vector<std::string> world_errors(n_seeds);
  parallel_for(n_seeds, threads, [&](std::size_t i) {
    GridSpec spec = config.grid_spec;
    spec.seed = world_seed(config.base_seed, static_cast<int>(i));
    try {
      worlds[i] = generate(spec);
    } catch (const Error& e) {
      world_errors[i] = e.what();
    }
  });

  std::vector<Algorithm> algos = config.algorithms;
  std::sort(algos.begin(), algos.end(),
            [](Algorithm a, Algorithm b) { return algorithm_rank(a) < algorithm_rank(b); });

  struct Job {
    Algorithm algorithm;
    int fov;
    int seed_index;
  };
  std::vector<Job> jobs;
  for (Algorithm a : algos) {
    for (int k : config.fov_sweep) {
      for (int i = 0; i < config.n_seeds; ++i) jobs.push_back({a, k, i});
    }
  }

  BenchResult result;
  result.runs.resize(jobs.size());
  std::vector<std::vector<double>> rewards(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    RunSummary& s = result.runs[j];
    s.algorithm = job.algorithm;
    s.fov = job.fov;
    s.seed_index = job.seed_index;
    const auto i = static_cast<std::size_t>(job.seed_index);
    if (!worlds[i]) {
      s.ok = false;
      s.error = "world generation failed: " + world_errors[i];
      return;
    }
    RunConfig cfg = config.run;
    cfg.algorithm = job.algorithm;
    cfg.fov_radius = job.fov;
    cfg.steps = config.steps_per_run;
    cfg.seed = agent_seed(config.base_seed, job.seed_index);
    cfg.record_timing = false;
    cfg.assert_safe = false;
    try {
      const RunResult run = run_episode(*worlds[i], cfg);
      write_text_file(traj_dir / trajectory_file_name(job.algorithm, job.fov, job.seed_index),
                      trajectory_csv(run.records));
      s.unsafe_count = run.unsafe_count;
      s.final_cum_reward = run.records.empty() ? 0.0 : run.records.back().cum_reward;
      s.violation_count = run.violation_count;
      s.fit_failures = run.fit_failures;
      for (const auto& r : run.records) rewards[j].push_back(r.reward_true);
    } catch (const std::exception& e) {
      s.ok = false;
      s.error = e.what();
    }
  });

  // Pair every run with the oracle at the same fov and seed.
  std::map<std::pair<int, int>, std::size_t> oracle_of;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (jobs[j].algorithm == Algorithm::kOracle && result.runs[j].ok) {
      oracle_of[{jobs[j].fov, jobs[j].seed_index}] = j;
    }
  }
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    auto it = oracle_of.find({jobs[j].fov, jobs[j].seed_index});
    if (!result.runs[j].ok || it == oracle_of.end()) continue;
    result.runs[j].steps_to_90 = steps_to_fraction(rewards[j], rewards[it->second]);
  }

  // Aggregation reads back the files it just wrote so that it is exactly the
  // fold over stored trajectories.
  const std::string aggregate = aggregate_from_directory(config.output_dir);
  write_text_file(config.output_dir / "aggregate.csv", aggregate);

  CsvTable runs;
  runs.header = {"algorithm",    "fov",         "seed_index",      "unsafe_count", "final_cum_reward",
                 "steps_to_90", "violation_count", "fit_failures", "ok"};
  CsvTable failures;
  failures.header = {"algorithm", "fov", "seed_index", "error"};
  for (const auto& s : result.runs) {
    runs.rows.push_back({std::string(to_string(s.algorithm)), std::to_string(s.fov),
                         std::to_string(s.seed_index), std::to_string(s.unsafe_count),
                         format_real(s.final_cum_reward), std::to_string(s.steps_to_90),
                         std::to_string(s.violation_count), std::to_string(s.fit_failures),
                         s.ok ? "1" : "0"});
    if (!s.ok) {
      ++result.failed;
      std::string msg = s.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      failures.rows.push_back({std::string(to_string(s.algorithm)), std::to_string(s.fov),
                               std::to_string(s.seed_index), msg});
    }
  }
  const std::string runs_text = to_csv(runs);
  write_text_file(config.output_dir / "runs.csv", runs_text);
  if (result.failed > 0) {
    write_text_file(config.output_dir / "failures.csv", to_csv(failures));
  } else {
    std::error_code ec;
    fs::remove(config.output_dir / "failures.csv", ec);
  }

  std::string scaling_text;
  if (!config.scaling_sizes.empty()) {
    RunConfig cfg = config.run;
    cfg.steps = config.scaling_steps;
    cfg.fov_radius = config.grid_spec.fov_radius;
    cfg.seed = agent_seed(config.base_seed, 0);
    GridSpec spec = config.grid_spec;
    spec.seed = world_seed(config.base_seed, 0);
    scaling_text = scaling_csv(scaling_study(spec, cfg, config.scaling_sizes));
    write_text_file(config.output_dir / "scaling.csv", scaling_text);
  }
  write_text_file(config.output_dir / "summary.md",
                  summary_markdown(aggregate, runs_text, scaling_text));
  return result;
}

std::string aggregate_from_directory(const std::filesystem::path& results_dir) {
  namespace fs = std::filesystem;
  const fs::path traj_dir = results_dir / "trajectories";
  if (!fs::is_directory(traj_dir)) throw ParseError("no trajectories directory in " + results_dir.string());

  struct Entry {
    int rank;
    int fov;
    int seed;
    fs::path path;
  };
  std::vector<Entry> entries;
  for (const auto& f : fs::directory_iterator(traj_dir)) {
    const std::string name = f.path().filename().string();
    if (f.path().extension() != ".csv") continue;
    const auto k = name.rfind("_k");
    const auto s = name.rfind("_s");
    if (k == std::string::npos || s == std::string::npos || s < k) continue;
    auto algo = parse_algorithm(name.substr(0, k));
    if (!algo) continue;
    Entry e;
    e.rank = algorithm_rank(*algo);
    e.fov = static_cast<int>(parse_int(name.substr(k + 2, s - k - 2)));
    e.seed = static_cast<int>(parse_int(name.substr(s + 2, name.size() - s - 6)));
    e.path = f.path();
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.rank, a.fov, a.seed) < std::tie(b.rank, b.fov, b.seed);
  });

  std::vector<RunGroup> groups;
  for (const auto& e : entries) {
    const std::string algo(to_string(static_cast<Algorithm>(e.rank)));
    if (groups.empty() || groups.back().algorithm != algo || groups.back().fov != e.fov) {
      groups.push_back({algo, e.fov, {}});
    }
    groups.back().runs.push_back(parse_trajectory(read_text_file(e.path)));
  }
  return aggregate_csv(groups);
}

}  // namespace spolf
