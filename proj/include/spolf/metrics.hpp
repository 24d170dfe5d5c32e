#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace spolf {

inline constexpr int kTrailingWindow = 50;
inline constexpr double kOracleFraction = 0.9;

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  ///< sample std / sqrt(n); 0 for a single value
};

MeanSe mean_se(std::span<const double> values);

/// Entry t is the mean of values[max(0, t - window + 1) .. t].
std::vector<double> trailing_mean(std::span<const double> values, int window = kTrailingWindow);

/// First step index from which the agent's trailing mean stays at or above
/// `fraction` times the oracle's trailing mean over the same window, through
/// the last step. Returns the run length if the last step already fails.
int steps_to_fraction(std::span<const double> agent_rewards, std::span<const double> oracle_rewards,
                      double fraction = kOracleFraction, int window = kTrailingWindow);

/// Per-step reward columns read back from a trajectory CSV.
struct Trajectory {
  std::vector<double> reward;
  std::vector<double> cum_reward;
  std::vector<int> unsafe;
};

Trajectory parse_trajectory(const std::string& csv_text);

/// Key for one (algorithm, fov) group and its runs, in seed order.
struct RunGroup {
  std::string algorithm;
  int fov = 0;
  std::vector<Trajectory> runs;
};

/// aggregate.csv: one row per (algorithm, fov, step) with mean and standard
/// error of per-step reward, cumulative reward, trailing-window reward and
/// cumulative unsafe count. A pure function of the trajectories.
std::string aggregate_csv(const std::vector<RunGroup>& groups);

}  // namespace spolf
