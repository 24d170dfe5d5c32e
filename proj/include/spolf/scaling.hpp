#pragma once

#include <string>
#include <utility>
#include <vector>

#include "spolf/agent.hpp"
#include "spolf/env.hpp"

namespace spolf {

/// Mean per-step wall time of an SPO-LF run at one grid size, in seconds.
struct ScalingRow {
  int width = 0;
  int height = 0;
  int steps = 0;
  double glm_bound_time = 0.0;
  double set_ops_time = 0.0;
  double planning_time = 0.0;
  double step_time = 0.0;
  /// Wall time of the whole run including init.
  double run_time = 0.0;
};

/// One timed run per size; the grid spec supplies everything but the size.
std::vector<ScalingRow> scaling_study(const GridSpec& base, const RunConfig& run,
                                      const std::vector<std::pair<int, int>>& sizes);

std::string scaling_csv(const std::vector<ScalingRow>& rows);

}  // namespace spolf
