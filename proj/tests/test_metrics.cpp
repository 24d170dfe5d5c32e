#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "spolf/bench.hpp"
#include "spolf/csv.hpp"
#include "spolf/errors.hpp"
#include "spolf/metrics.hpp"
#include "spolf/report.hpp"

using namespace spolf;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Metrics, MeanSe) {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const MeanSe m = mean_se(v);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  // sample std sqrt(5/3), divided by 2.
  EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  const std::vector<double> one = {7.0};
  EXPECT_EQ(mean_se(one).se, 0.0);
  EXPECT_TRUE(std::isnan(mean_se(std::vector<double>{}).mean));
}

TEST(Metrics, TrailingMeanMatchesNaiveWindow) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> v(137);
  for (double& x : v) x = u(rng);
  for (int w : {1, 5, 50, 200}) {
    const auto t = trailing_mean(v, w);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::size_t lo = i + 1 >= static_cast<std::size_t>(w) ? i + 1 - w : 0;
      double s = 0;
      for (std::size_t j = lo; j <= i; ++j) s += v[j];
      EXPECT_NEAR(t[i], s / static_cast<double>(i + 1 - lo), 1e-12);
    }
  }
  EXPECT_THROW(trailing_mean(v, 0), InvalidSpec);
}

TEST(Metrics, StepsToFraction) {
  const std::vector<double> oracle(100, 1.0);
  std::vector<double> agent(100, 0.0);
  for (int t = 40; t < 100; ++t) agent[static_cast<std::size_t>(t)] = 1.0;
  // Trailing-10 mean reaches 0.9 once nine of the last ten are ones: t = 48.
  EXPECT_EQ(steps_to_fraction(agent, oracle, 0.9, 10), 48);
  // Never reached.
  EXPECT_EQ(steps_to_fraction(std::vector<double>(100, 0.5), oracle, 0.9, 10), 100);
  // Reached, then lost before the end: counts as not reached.
  std::vector<double> dip = agent;
  for (int t = 95; t < 100; ++t) dip[static_cast<std::size_t>(t)] = 0.0;
  EXPECT_EQ(steps_to_fraction(dip, oracle, 0.9, 10), 100);
  EXPECT_EQ(steps_to_fraction(oracle, oracle), 0);
  EXPECT_THROW(steps_to_fraction(std::vector<double>(3), oracle), InvalidSpec);
}

TEST(Metrics, AggregateSingleRunHasZeroSe) {
  RunGroup g{"spolf", 3, {}};
  g.runs.push_back({{0.5, 0.25}, {0.5, 0.75}, {0, 1}});
  const CsvTable t = parse_csv(aggregate_csv({g}));
  ASSERT_EQ(t.rows.size(), 2u);
  for (const char* c : {"reward_se", "cum_reward_se", "trailing_se", "unsafe_cum_se"}) {
    EXPECT_EQ(parse_real(t.rows[1][t.column(c)]), 0.0);
  }
  EXPECT_EQ(parse_real(t.rows[1][t.column("trailing_mean")]), 0.375);
  EXPECT_EQ(parse_real(t.rows[1][t.column("unsafe_cum_mean")]), 1.0);
}

TEST(Metrics, AggregateAgainstDirectComputation) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  RunGroup g{"random", 1, {}};
  for (int r = 0; r < 5; ++r) {
    Trajectory tr;
    double acc = 0;
    for (int t = 0; t < 60; ++t) {
      tr.reward.push_back(u(rng));
      tr.cum_reward.push_back(acc += tr.reward.back());
      tr.unsafe.push_back(u(rng) < 0.3);
    }
    g.runs.push_back(tr);
  }
  const CsvTable t = parse_csv(aggregate_csv({g}));
  ASSERT_EQ(t.rows.size(), 60u);
  const std::size_t step = 55;
  std::vector<double> col;
  for (const auto& r : g.runs) {
    double s = 0;
    for (std::size_t j = step + 1 - 50; j <= step; ++j) s += r.reward[j];
    col.push_back(s / 50.0);
  }
  const MeanSe m = mean_se(col);
  EXPECT_NEAR(parse_real(t.rows[step][t.column("trailing_mean")]), m.mean, 1e-12);
  EXPECT_NEAR(parse_real(t.rows[step][t.column("trailing_se")]), m.se, 1e-12);
}

TEST(Bench, ConfigParsing) {
  const BenchConfig c = bench_config_from_json(
      R"({"grid_spec": {"width": 8, "height": 6, "link": "identity"},
          "algorithms": ["spolf", "oracle"], "n_seeds": 3, "fov_sweep": [3, 0, 3],
          "steps_per_run": 20, "output_dir": "out"})");
  EXPECT_EQ(c.grid_spec.width, 8);
  EXPECT_EQ(c.grid_spec.link_reward, LinkKind::kIdentity);
  EXPECT_EQ(c.grid_spec.link_safety, LinkKind::kIdentity);
  EXPECT_EQ(c.fov_sweep, (std::vector<int>{0, 3}));
  EXPECT_EQ(c.algorithms.size(), 2u);
  EXPECT_THROW(bench_config_from_json(R"({"algorithms": ["nope"]})"), InvalidSpec);
  EXPECT_THROW(bench_config_from_json(R"({"n_seeds": 0})"), InvalidSpec);
  EXPECT_THROW(bench_config_from_json("{"), ParseError);
}

TEST(Bench, SeedsArePairedAndDistinct) {
  EXPECT_NE(world_seed(0, 0), agent_seed(0, 0));
  EXPECT_NE(world_seed(0, 0), world_seed(0, 1));
  EXPECT_EQ(world_seed(5, 3), world_seed(5, 3));
  EXPECT_EQ(trajectory_file_name(Algorithm::kUnsafeGlm, 3, 7), "unsafe_glm_k3_s0007.csv");
}

// The aggregate is a pure fold over the stored trajectories, and the output
// bytes do not depend on the worker count.
TEST(Bench, SmallBenchIsReproducible) {
  BenchConfig c;
  c.grid_spec.width = c.grid_spec.height = 8;
  c.grid_spec.min_safe_region = 5;
  c.n_seeds = 3;
  c.steps_per_run = 30;
  c.fov_sweep = {1, 3};
  c.algorithms = {Algorithm::kSpolf, Algorithm::kOracle, Algorithm::kRandom};
  c.output_dir = fresh_dir("spolf_bench_a");
  const BenchResult a = run_bench(c, 1);
  EXPECT_EQ(a.failed, 0);
  EXPECT_EQ(a.runs.size(), 18u);
  const std::string agg = read_text_file(c.output_dir / "aggregate.csv");
  EXPECT_EQ(aggregate_from_directory(c.output_dir), agg);
  EXPECT_TRUE(std::filesystem::exists(c.output_dir / "runs.csv"));
  EXPECT_TRUE(std::filesystem::exists(c.output_dir / "summary.md"));
  EXPECT_FALSE(std::filesystem::exists(c.output_dir / "failures.csv"));
  EXPECT_TRUE(std::filesystem::exists(c.output_dir / "trajectories" / "oracle_k1_s0002.csv"));

  const auto first_runs = read_text_file(c.output_dir / "runs.csv");
  c.output_dir = fresh_dir("spolf_bench_b");
  run_bench(c, 3);
  EXPECT_EQ(read_text_file(c.output_dir / "aggregate.csv"), agg);
  EXPECT_EQ(read_text_file(c.output_dir / "runs.csv"), first_runs);

  for (const auto& r : a.runs) {
    if (r.algorithm == Algorithm::kOracle) {
      EXPECT_EQ(r.steps_to_90, 0);
    }
    if (r.algorithm == Algorithm::kSpolf) {
      EXPECT_EQ(r.unsafe_count, 0);
    }
  }
  std::filesystem::remove_all(c.output_dir);
  std::filesystem::remove_all(std::filesystem::temp_directory_path() / "spolf_bench_a");
}

TEST(Report, SummaryAndCharts) {
  RunGroup g{"spolf", 3, {}};
  g.runs.push_back({{0.5, 0.25}, {0.5, 0.75}, {0, 0}});
  const std::string agg = aggregate_csv({g});
  const std::string md = summary_markdown(agg, "", "");
  EXPECT_NE(md.find("spolf"), std::string::npos);
  EXPECT_NE(reward_chart_svg(agg).find("<svg"), std::string::npos);

  const auto dir = fresh_dir("spolf_report");
  EXPECT_THROW(write_report(dir, false), ParseError);
  write_text_file(dir / "aggregate.csv", agg);
  write_report(dir, true);
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.md"));
  EXPECT_TRUE(std::filesystem::exists(dir / "reward.svg"));
  std::filesystem::remove_all(dir);
}
