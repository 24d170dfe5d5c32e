#include "spolf/scaling.hpp"

#include <chrono>

#include "spolf/csv.hpp"

namespace spolf {

std::vector<ScalingRow> scaling_study(const GridSpec& base, const RunConfig& run,
                                      const std::vector<std::pair<int, int>>& sizes) {
  std::vector<ScalingRow> rows;
  for (const auto& [w, h] : sizes) {
    GridSpec spec = base;
    spec.width = w;
    spec.height = h;
    const GridWorld world = generate(spec);
    RunConfig cfg = run;
    cfg.algorithm = Algorithm::kSpolf;
    cfg.record_timing = true;

    const auto t0 = std::chrono::steady_clock::now();
    const RunResult result = run_episode(world, cfg);
    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    ScalingRow row;
    row.width = w;
    row.height = h;
    row.steps = cfg.steps;
    row.run_time = total;
    for (const auto& r : result.records) {
      row.glm_bound_time += static_cast<double>(r.glm_bound_nanos);
      row.set_ops_time += static_cast<double>(r.set_ops_nanos);
      row.planning_time += static_cast<double>(r.planning_nanos);
      row.step_time += static_cast<double>(r.step_wall_nanos);
    }
    const double scale = result.records.empty() ? 0.0 : 1e-9 / static_cast<double>(result.records.size());
    row.glm_bound_time *= scale;
    row.set_ops_time *= scale;
    row.planning_time *= scale;
    row.step_time *= scale;
    rows.push_back(row);
  }
  return rows;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
  CsvTable table;
  table.header = {"width",         "height",       "states",        "steps",    "glm_bound_time",
                  "set_ops_time",  "planning_time", "step_time",    "run_time"};
  for (const auto& r : rows) {
    table.rows.push_back({std::to_string(r.width), std::to_string(r.height),
                          std::to_string(static_cast<long long>(r.width) * r.height),
                          std::to_string(r.steps), format_real(r.glm_bound_time),
                          format_real(r.set_ops_time), format_real(r.planning_time),
                          format_real(r.step_time), format_real(r.run_time)});
  }
  return to_csv(table);
}

}  // namespace spolf
