#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "spolf/agent.hpp"
#include "spolf/env.hpp"

namespace spolf {

struct BenchConfig {
  GridSpec grid_spec;
  std::vector<Algorithm> algorithms = {Algorithm::kSpolf, Algorithm::kOracle,
                                       Algorithm::kUnsafeGlm, Algorithm::kRandom};
  int steps_per_run = 400;
  int n_seeds = 100;
  std::vector<int> fov_sweep = {3};
  std::filesystem::path output_dir = "results";
  std::vector<std::pair<int, int>> scaling_sizes;
  int scaling_steps = 100;
  /// World i uses derive_seed(base_seed, i); agent streams are derived from it.
  std::uint64_t base_seed = 0;
  /// Template for the per-run agent settings (algorithm, fov, seed, steps are overridden).
  RunConfig run;
};

/// Parses the JSON form; unknown algorithm names and bad values raise InvalidSpec,
/// malformed JSON raises ParseError.
BenchConfig bench_config_from_json(const std::string& text);
BenchConfig load_bench_config(const std::filesystem::path& path);

/// Seed used to generate world i, and the agent seed paired with it.
std::uint64_t world_seed(std::uint64_t base, int index);
std::uint64_t agent_seed(std::uint64_t base, int index);

/// Worker count: SPOLF_THREADS if set and positive, else hardware concurrency.
int default_thread_count();

struct RunSummary {
  Algorithm algorithm = Algorithm::kSpolf;
  int fov = 0;
  int seed_index = 0;
  long long unsafe_count = 0;
  double final_cum_reward = 0.0;
  long long violation_count = 0;
  long long fit_failures = 0;
  /// Steps to reach 90% of the oracle at the same fov; -1 without an oracle run.
  int steps_to_90 = -1;
  bool ok = true;
  std::string error;
};

struct BenchResult {
  std::vector<RunSummary> runs;
  int failed = 0;
};

/// Runs every (algorithm, fov, seed) job on a worker pool and writes
/// trajectories/, aggregate.csv, runs.csv, summary.md and, when any run
/// failed, failures.csv. Output bytes do not depend on the thread count.
BenchResult run_bench(const BenchConfig& config, int threads);

std::string trajectory_file_name(Algorithm a, int fov, int seed_index);

/// Rebuilds aggregate.csv text from the stored trajectory files.
std::string aggregate_from_directory(const std::filesystem::path& results_dir);

}  // namespace spolf
