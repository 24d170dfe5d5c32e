#include "spolf/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "spolf/csv.hpp"
#include "spolf/errors.hpp"

namespace spolf {

MeanSe mean_se(std::span<const double> values) {
  MeanSe out;
  if (values.empty()) return {std::nan(""), std::nan("")};
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / n;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

std::vector<double> trailing_mean(std::span<const double> values, int window) {
  if (window < 1) throw InvalidSpec("window must be >= 1");
  std::vector<double> out(values.size());
  double sum = 0.0;
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t t = 0; t < values.size(); ++t) {
    sum += values[t];
    if (t >= w) sum -= values[t - w];
    out[t] = sum / static_cast<double>(std::min(t + 1, w));
  }
  return out;
}

int steps_to_fraction(std::span<const double> agent_rewards, std::span<const double> oracle_rewards,
                      double fraction, int window) {
  if (agent_rewards.size() != oracle_rewards.size()) {
    throw InvalidSpec("agent and oracle runs differ in length");
  }
  const auto a = trailing_mean(agent_rewards, window);
  const auto o = trailing_mean(oracle_rewards, window);
  int first = static_cast<int>(a.size());
  for (std::size_t t = a.size(); t-- > 0;) {
    if (a[t] >= fraction * o[t]) {
      first = static_cast<int>(t);
    } else {
      break;
    }
  }
  return first;
}

Trajectory parse_trajectory(const std::string& csv_text) {
  const CsvTable table = parse_csv(csv_text);
  const auto c_reward = table.column("reward_true");
  const auto c_cum = table.column("cum_reward");
  const auto c_unsafe = table.column("unsafe");
  Trajectory out;
  for (const auto& row : table.rows) {
    out.reward.push_back(parse_real(row.at(c_reward)));
    out.cum_reward.push_back(parse_real(row.at(c_cum)));
    out.unsafe.push_back(static_cast<int>(parse_int(row.at(c_unsafe))));
  }
  return out;
}

std::string aggregate_csv(const std::vector<RunGroup>& groups) {
  CsvTable table;
  table.header = {"algorithm",  "fov",         "step",          "n",
                  "reward_mean", "reward_se",  "cum_reward_mean", "cum_reward_se",
                  "trailing_mean", "trailing_se", "unsafe_cum_mean", "unsafe_cum_se"};
  for (const auto& g : groups) {
    if (g.runs.empty()) continue;
    std::size_t steps = g.runs.front().reward.size();
    for (const auto& r : g.runs) steps = std::min(steps, r.reward.size());
    std::vector<std::vector<double>> trailing, unsafe_cum;
    for (const auto& r : g.runs) {
      trailing.push_back(trailing_mean(r.reward));
      std::vector<double> u(r.unsafe.size());
      double acc = 0.0;
      for (std::size_t t = 0; t < u.size(); ++t) u[t] = acc += r.unsafe[t];
      unsafe_cum.push_back(std::move(u));
    }
    std::vector<double> col(g.runs.size());
    auto stat = [&](auto&& pick) {
      for (std::size_t i = 0; i < g.runs.size(); ++i) col[i] = pick(i);
      return mean_se(col);
    };
    for (std::size_t t = 0; t < steps; ++t) {
      const MeanSe rw = stat([&](std::size_t i) { return g.runs[i].reward[t]; });
      const MeanSe cr = stat([&](std::size_t i) { return g.runs[i].cum_reward[t]; });
      const MeanSe tr = stat([&](std::size_t i) { return trailing[i][t]; });
      const MeanSe uc = stat([&](std::size_t i) { return unsafe_cum[i][t]; });
      table.rows.push_back({g.algorithm, std::to_string(g.fov), std::to_string(t),
                            std::to_string(g.runs.size()), format_real(rw.mean), format_real(rw.se),
                            format_real(cr.mean), format_real(cr.se), format_real(tr.mean),
                            format_real(tr.se), format_real(uc.mean), format_real(uc.se)});
    }
  }
  return to_csv(table);
}

}  // namespace spolf
