#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <ostream>

#include "spolf/agent.hpp"
#include "spolf/bench.hpp"
#include "spolf/csv.hpp"
#include "spolf/env.hpp"
#include "spolf/errors.hpp"
#include "spolf/report.hpp"

namespace spolf {

namespace {

struct GenEnvArgs {
  GridSpec spec;
  std::string link = "sigmoid";
  std::string link_reward;
  std::string link_safety;
  std::string out;
};

struct RunArgs {
  std::string env;
  std::string algo = "spolf";
  int steps = 400;
  int fov = -1;
  std::uint64_t seed = 0;
  std::string out;
  double gamma = 0.999;
  double delta = 0.05;
  int prior_g = 10;
  int prior_r = 10;
  bool assert_safe = false;
  bool timing = false;
  bool no_early_exit = false;
};

struct BenchArgs {
  std::string config;
  std::string output_dir;
  int threads = 0;
};

struct ReportArgs {
  std::string dir;
  bool svg = false;
};

int do_gen_env(const GenEnvArgs& a, std::ostream& out) {
  GridSpec spec = a.spec;
  auto link = [](const std::string& name) {
    auto k = parse_link(name);
    if (!k) throw InvalidSpec("unknown link: " + name);
    return *k;
  };
  spec.link_reward = link(a.link_reward.empty() ? a.link : a.link_reward);
  spec.link_safety = link(a.link_safety.empty() ? a.link : a.link_safety);
  validate(spec);
  const GridWorld world = generate(spec);
  save_world(world, a.out);
  out << "wrote " << a.out << " (" << world.num_states() << " states, |S0| = " << world.s0().size()
      << ")\n";
  return kExitOk;
}

int do_run(const RunArgs& a, std::ostream& out) {
  const GridWorld world = load_world(a.env);
  auto algo = parse_algorithm(a.algo);
  if (!algo) throw InvalidSpec("unknown algorithm: " + a.algo);
  RunConfig cfg;
  cfg.algorithm = *algo;
  cfg.steps = a.steps;
  cfg.fov_radius = a.fov >= 0 ? a.fov : world.spec().fov_radius;
  cfg.seed = a.seed;
  cfg.gamma = a.gamma;
  cfg.delta_r = cfg.delta_g = a.delta;
  cfg.prior_safety_samples = a.prior_g;
  cfg.prior_reward_samples = a.prior_r;
  cfg.assert_safe = a.assert_safe;
  cfg.record_timing = a.timing;
  cfg.etse_early_exit = !a.no_early_exit;
  const RunResult result = run_episode(world, cfg);
  write_text_file(a.out, trajectory_csv(result.records));
  out << "wrote " << a.out << ": " << result.records.size() << " steps, " << result.unsafe_count
      << " unsafe\n";
  return kExitOk;
}

int do_bench(const BenchArgs& a, std::ostream& out) {
  BenchConfig cfg = load_bench_config(a.config);
  if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
  const int threads = a.threads > 0 ? a.threads : default_thread_count();
  const BenchResult result = run_bench(cfg, threads);
  out << "bench: " << result.runs.size() << " runs, " << result.failed << " failed; results in "
      << cfg.output_dir.string() << "\n";
  return result.failed > 0 ? kExitRunFailed : kExitOk;
}

int do_report(const ReportArgs& a, std::ostream& out) {
  write_report(a.dir, a.svg);
  out << "wrote " << (std::filesystem::path(a.dir) / "summary.md").string() << "\n";
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Safe exploration with GLM-estimated reward and safety on grid worlds"};
  app.require_subcommand(1);

  GenEnvArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-env", "generate a random grid world as JSON");
  gen_cmd->set_help_flag("--help", "print this help message and exit");
  gen_cmd->add_option("--width", gen.spec.width, "grid width");
  gen_cmd->add_option("--height", gen.spec.height, "grid height");
  gen_cmd->add_option("--dim", gen.spec.feature_dim, "feature dimension");
  gen_cmd->add_option("--link", gen.link, "link for reward and safety (identity|sigmoid)");
  gen_cmd->add_option("--link-reward", gen.link_reward, "reward link, overrides --link");
  gen_cmd->add_option("--link-safety", gen.link_safety, "safety link, overrides --link");
  gen_cmd->add_option("--sigma-r", gen.spec.noise_sigma_r, "reward noise std");
  gen_cmd->add_option("--sigma-g", gen.spec.noise_sigma_g, "safety noise std");
  gen_cmd->add_option("--h", gen.spec.safety_threshold, "safety threshold");
  gen_cmd->add_option("--fov", gen.spec.fov_radius, "default field-of-view radius");
  gen_cmd->add_option("--min-safe-region", gen.spec.min_safe_region, "minimum |S0|");
  gen_cmd->add_option("--unsafe-fraction", gen.spec.unsafe_fraction, "target unsafe cell fraction");
  gen_cmd->add_option("--seed", gen.spec.seed, "generator seed");
  gen_cmd->add_option("--out", gen.out, "output JSON path")->required();

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run one agent on a world and write its trajectory");
  run_cmd->add_option("--env", run.env, "world JSON")->required();
  run_cmd->add_option("--algo", run.algo, "spolf|oracle|unsafe_glm|random|step_safe_glm");
  run_cmd->add_option("--steps", run.steps, "number of steps");
  run_cmd->add_option("--fov", run.fov, "field-of-view radius (default: the world's)");
  run_cmd->add_option("--seed", run.seed, "agent seed");
  run_cmd->add_option("--gamma", run.gamma, "discount");
  run_cmd->add_option("--delta", run.delta, "confidence level for both GLMs");
  run_cmd->add_option("--prior-safety", run.prior_g, "prior safety samples");
  run_cmd->add_option("--prior-reward", run.prior_r, "prior reward samples");
  run_cmd->add_flag("--assert-safe", run.assert_safe, "exit 3 if a move leaves the pessimistic set");
  run_cmd->add_flag("--timing", run.timing, "fill step_wall_nanos (output no longer reproducible)");
  run_cmd->add_flag("--no-early-exit", run.no_early_exit, "stay in exploration until its target");
  run_cmd->add_option("--out", run.out, "trajectory CSV path")->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "multi-seed benchmark from a JSON config");
  bench_cmd->add_option("config", bench.config, "bench config JSON")->required();
  bench_cmd->add_option("--output-dir", bench.output_dir, "override output_dir");
  bench_cmd->add_option("--threads", bench.threads, "worker count (default SPOLF_THREADS or cores)");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "summary tables and charts from a results dir");
  report_cmd->add_option("dir", report.dir, "results directory")->required();
  report_cmd->add_flag("--svg", report.svg, "also write SVG charts");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return do_gen_env(gen, out);
    if (*run_cmd) return do_run(run, out);
    if (*bench_cmd) return do_bench(bench, out);
    if (*report_cmd) return do_report(report, out);
  } catch (const SafetyBreach& e) {
    err << "safety breach: " << e.what() << "\n";
    return kExitSafetyBreach;
  } catch (const InvalidSpec& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "file error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitRunFailed;
  }
  return kExitUsage;
}

}  // namespace spolf
