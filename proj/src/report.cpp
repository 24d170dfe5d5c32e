#include "spolf/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "spolf/csv.hpp"
#include "spolf/errors.hpp"
#include "spolf/metrics.hpp"

namespace spolf {

namespace {

std::string fixed(double v, int digits = 3) {
  if (!std::isfinite(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct GroupKey {
  std::string algorithm;
  int fov = 0;
  bool operator==(const GroupKey&) const = default;
};

/// Rows of a CSV grouped by (algorithm, fov) in order of first appearance.
std::vector<std::pair<GroupKey, std::vector<const std::vector<std::string>*>>> group_rows(
    const CsvTable& t) {
  const auto ca = t.column("algorithm");
  const auto cf = t.column("fov");
  std::vector<std::pair<GroupKey, std::vector<const std::vector<std::string>*>>> out;
  for (const auto& row : t.rows) {
    GroupKey key{row.at(ca), static_cast<int>(parse_int(row.at(cf)))};
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& g) { return g.first == key; });
    if (it == out.end()) {
      out.push_back({key, {}});
      it = std::prev(out.end());
    }
    it->second.push_back(&row);
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series) {
  const double W = 720, H = 440, left = 70, right = 180, top = 40, bottom = 60;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  y0 = std::min(y0, 0.0);
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
        << fixed(xv, xv >= 100 ? 0 : 2) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << fixed(yv, 3) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
      << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << top + ph / 2 << ")\">" << y_label << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      out << fixed(px(s.x[i]), 2) << ',' << fixed(py(s.y[i]), 2) << ' ';
    }
    out << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

std::string summary_markdown(const std::string& aggregate_text, const std::string& runs_text,
                             const std::string& scaling_text) {
  const CsvTable agg = parse_csv(aggregate_text);
  std::ostringstream md;
  md << "# Benchmark summary\n\n";
  md << "| algorithm | fov | runs | steps | mean unsafe | se | final cum. reward | se | "
        "final trailing reward |\n";
  md << "|---|---|---|---|---|---|---|---|---|\n";
  const auto cn = agg.column("n"), cs = agg.column("step"), cu = agg.column("unsafe_cum_mean"),
             cus = agg.column("unsafe_cum_se"), cc = agg.column("cum_reward_mean"),
             ccs = agg.column("cum_reward_se"), ct = agg.column("trailing_mean");
  for (const auto& [key, rows] : group_rows(agg)) {
    const auto& last = *rows.back();
    md << "| " << key.algorithm << " | " << key.fov << " | " << last.at(cn) << " | "
       << parse_int(last.at(cs)) + 1 << " | " << fixed(parse_real(last.at(cu))) << " | "
       << fixed(parse_real(last.at(cus))) << " | " << fixed(parse_real(last.at(cc))) << " | "
       << fixed(parse_real(last.at(ccs))) << " | " << fixed(parse_real(last.at(ct))) << " |\n";
  }

  if (!runs_text.empty()) {
    const CsvTable runs = parse_csv(runs_text);
    const auto c90 = runs.column("steps_to_90"), cv = runs.column("violation_count"),
               cok = runs.column("ok");
    md << "\n## Convergence and confidence\n\n";
    md << "Steps to 90% of the oracle: first step from which the trailing " << kTrailingWindow
       << "-step mean reward stays at or above 90% of the oracle's on the same world and fov.\n\n";
    md << "| algorithm | fov | runs ok | failed | steps to 90% oracle | se | reached | "
          "runs with zero interval repairs |\n";
    md << "|---|---|---|---|---|---|---|---|\n";
    std::map<std::string, int> steps_of;
    for (const auto& [key, rows] : group_rows(agg)) {
      steps_of[key.algorithm + "/" + std::to_string(key.fov)] =
          static_cast<int>(parse_int(rows.back()->at(cs))) + 1;
    }
    for (const auto& [key, rows] : group_rows(runs)) {
      std::vector<double> steps90;
      int ok = 0, failed = 0, reached = 0, clean = 0;
      const int cap = steps_of.count(key.algorithm + "/" + std::to_string(key.fov))
                          ? steps_of[key.algorithm + "/" + std::to_string(key.fov)]
                          : 0;
      for (const auto* row : rows) {
        if (row->at(cok) != "1") {
          ++failed;
          continue;
        }
        ++ok;
        const auto s90 = parse_int(row->at(c90));
        if (s90 >= 0) {
          steps90.push_back(static_cast<double>(s90));
          if (s90 < cap) ++reached;
        }
        if (parse_int(row->at(cv)) == 0) ++clean;
      }
      const MeanSe m = mean_se(steps90);
      md << "| " << key.algorithm << " | " << key.fov << " | " << ok << " | " << failed << " | "
         << (steps90.empty() ? "n/a" : fixed(m.mean, 1)) << " | "
         << (steps90.empty() ? "n/a" : fixed(m.se, 1)) << " | "
         << (steps90.empty() ? "n/a" : std::to_string(reached) + "/" + std::to_string(steps90.size()))
         << " | " << clean << "/" << ok << " |\n";
    }
  }

  if (!scaling_text.empty()) {
    const CsvTable sc = parse_csv(scaling_text);
    md << "\n## Per-step time by grid size (seconds)\n\n";
    md << "| size | states | GLM bound | set ops | planning | step | whole run |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const auto& row : sc.rows) {
      md << "| " << row.at(sc.column("width")) << "x" << row.at(sc.column("height")) << " | "
         << row.at(sc.column("states")) << " | "
         << fixed(parse_real(row.at(sc.column("glm_bound_time"))), 6) << " | "
         << fixed(parse_real(row.at(sc.column("set_ops_time"))), 6) << " | "
         << fixed(parse_real(row.at(sc.column("planning_time"))), 6) << " | "
         << fixed(parse_real(row.at(sc.column("step_time"))), 6) << " | "
         << fixed(parse_real(row.at(sc.column("run_time"))), 3) << " |\n";
    }
  }
  return md.str();
}

std::string reward_chart_svg(const std::string& aggregate_text) {
  const CsvTable agg = parse_csv(aggregate_text);
  const auto cs = agg.column("step"), ct = agg.column("trailing_mean");
  std::vector<Series> series;
  for (const auto& [key, rows] : group_rows(agg)) {
    Series s;
    s.label = key.algorithm + " k=" + std::to_string(key.fov);
    for (const auto* row : rows) {
      s.x.push_back(static_cast<double>(parse_int(row->at(cs))));
      s.y.push_back(parse_real(row->at(ct)));
    }
    series.push_back(std::move(s));
  }
  return line_chart("Trailing-" + std::to_string(kTrailingWindow) + " mean reward", "step",
                    "reward", series);
}

std::string scaling_chart_svg(const std::string& scaling_text) {
  const CsvTable sc = parse_csv(scaling_text);
  const char* columns[] = {"glm_bound_time", "set_ops_time", "planning_time", "step_time"};
  std::vector<Series> series;
  for (const char* c : columns) {
    Series s;
    s.label = c;
    for (const auto& row : sc.rows) {
      s.x.push_back(parse_real(row.at(sc.column("states"))));
      s.y.push_back(parse_real(row.at(sc.column(c))));
    }
    series.push_back(std::move(s));
  }
  return line_chart("Per-step time vs grid size", "states", "seconds", series);
}

void write_report(const std::filesystem::path& results_dir, bool svg) {
  namespace fs = std::filesystem;
  const fs::path agg_path = results_dir / "aggregate.csv";
  if (!fs::is_regular_file(agg_path)) throw ParseError("missing " + agg_path.string());
  const std::string aggregate = read_text_file(agg_path);
  const std::string runs =
      fs::is_regular_file(results_dir / "runs.csv") ? read_text_file(results_dir / "runs.csv") : "";
  const std::string scaling = fs::is_regular_file(results_dir / "scaling.csv")
                                  ? read_text_file(results_dir / "scaling.csv")
                                  : "";
  write_text_file(results_dir / "summary.md", summary_markdown(aggregate, runs, scaling));
  if (!svg) return;
  write_text_file(results_dir / "reward.svg", reward_chart_svg(aggregate));
  if (!scaling.empty()) write_text_file(results_dir / "scaling.svg", scaling_chart_svg(scaling));
}

}  // namespace spolf
