#pragma once

#include <filesystem>
#include <string>

namespace spolf {

/// Markdown tables built from aggregate.csv text and, when non-empty, the
/// per-run runs.csv and scaling.csv texts.
std::string summary_markdown(const std::string& aggregate_text, const std::string& runs_text,
                             const std::string& scaling_text);

/// Trailing-window reward against step, one polyline per (algorithm, fov).
std::string reward_chart_svg(const std::string& aggregate_text);

/// Per-step time components against grid size.
std::string scaling_chart_svg(const std::string& scaling_text);

/// Reads the results directory and writes summary.md (plus reward.svg and,
/// when scaling.csv exists, scaling.svg if `svg`). Throws ParseError when
/// aggregate.csv is missing or malformed.
void write_report(const std::filesystem::path& results_dir, bool svg);

}  // namespace spolf
