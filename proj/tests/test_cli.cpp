#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "spolf/csv.hpp"

using namespace spolf;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  const auto dir = fresh_dir("spolf_cli_usage");
  const auto env = (dir / "w.json").string();
  EXPECT_EQ(cli({"gen-env", "--width", "0", "--out", env}).code, kExitUsage);
  EXPECT_EQ(cli({"gen-env", "--link", "probit", "--out", env}).code, kExitUsage);
  EXPECT_EQ(cli({"run", "--env", (dir / "missing.json").string(), "--out", "x.csv"}).code,
            kExitUsage);
  EXPECT_EQ(cli({"report", dir.string()}).code, kExitUsage);
  EXPECT_EQ(cli({"run", "--help"}).code, kExitOk);
  std::filesystem::remove_all(dir);
}

TEST(Cli, GenEnvIsReproducible) {
  const auto dir = fresh_dir("spolf_cli_gen");
  const auto a = (dir / "a.json").string(), b = (dir / "b.json").string();
  for (const auto& p : {a, b}) {
    EXPECT_EQ(cli({"gen-env", "--width", "10", "--height", "8", "--seed", "4", "--h", "0.1",
                   "--out", p})
                  .code,
              kExitOk);
  }
  EXPECT_EQ(read_text_file(a), read_text_file(b));
  std::filesystem::remove_all(dir);
}

TEST(Cli, RunWritesTrajectory) {
  const auto dir = fresh_dir("spolf_cli_run");
  const auto env = (dir / "w.json").string();
  ASSERT_EQ(cli({"gen-env", "--width", "10", "--height", "10", "--seed", "2", "--out", env}).code,
            kExitOk);
  const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  EXPECT_EQ(cli({"run", "--env", env, "--steps", "25", "--seed", "3", "--out", a}).code, kExitOk);
  EXPECT_EQ(cli({"run", "--env", env, "--steps", "25", "--seed", "3", "--out", b}).code, kExitOk);
  EXPECT_EQ(read_text_file(a), read_text_file(b));
  EXPECT_EQ(parse_csv(read_text_file(a)).rows.size(), 25u);

  // Zero steps: header only.
  EXPECT_EQ(cli({"run", "--env", env, "--steps", "0", "--out", a}).code, kExitOk);
  EXPECT_EQ(parse_csv(read_text_file(a)).rows.size(), 0u);

  EXPECT_EQ(cli({"run", "--env", env, "--steps", "40", "--assert-safe", "--out", a}).code,
            kExitOk);
  EXPECT_EQ(cli({"run", "--env", env, "--algo", "nope", "--out", a}).code, kExitUsage);
  EXPECT_EQ(cli({"run", "--env", env, "--prior-safety", "2", "--out", a}).code, kExitRunFailed);
  std::filesystem::remove_all(dir);
}

TEST(Cli, BenchAndReport) {
  const auto dir = fresh_dir("spolf_cli_bench");
  const auto cfg = dir / "bench.json";
  write_text_file(cfg, R"({"grid_spec": {"width": 8, "height": 8, "min_safe_region": 5},
    "algorithms": ["spolf", "oracle"], "n_seeds": 1, "steps_per_run": 20, "fov_sweep": [2]})");
  const auto out = (dir / "results").string();
  EXPECT_EQ(cli({"bench", cfg.string(), "--output-dir", out, "--threads", "1"}).code, kExitOk);
  const CsvTable agg = read_csv(dir / "results" / "aggregate.csv");
  ASSERT_EQ(agg.rows.size(), 40u);
  for (const auto& row : agg.rows) {
    for (const char* c : {"reward_se", "cum_reward_se", "trailing_se", "unsafe_cum_se"}) {
      EXPECT_EQ(parse_real(row[agg.column(c)]), 0.0);
    }
  }
  EXPECT_EQ(cli({"report", out, "--svg"}).code, kExitOk);
  EXPECT_TRUE(std::filesystem::exists(dir / "results" / "reward.svg"));
  std::filesystem::remove_all(dir);
}
