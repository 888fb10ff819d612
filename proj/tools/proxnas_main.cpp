// Command line front end: run / sweep-eta / bench / export / resume.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "proxnas/harness.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "Override the search seed from the config");
  cmd->add_option("--out-dir", flags.out_dir, "Override the output directory");
  cmd->add_flag("--quiet", flags.quiet, "Suppress progress output");
}

proxnas::RunConfig load(const std::string& path, const CommonFlags& flags) {
  proxnas::RunConfig cfg = proxnas::load_config(path);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.out_dir) cfg.out_dir = *flags.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable architecture search with proximal iterations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string trace_path;
  std::string export_out;
  std::string checkpoint_path;
  std::vector<double> etas;
  CommonFlags run_flags, sweep_flags, bench_flags, export_flags, resume_flags;

  CLI::App* cmd_run = app.add_subcommand("run", "Execute one search described by a config file");
  cmd_run->add_option("config", config_path, "Path to the run config")->required();
  add_common(cmd_run, run_flags);

  CLI::App* cmd_sweep =
      app.add_subcommand("sweep-eta", "Run the search across a list of size penalties");
  cmd_sweep->add_option("config", config_path, "Path to the run config")->required();
  cmd_sweep->add_option("--etas", etas, "Ascending nonnegative penalty weights")
      ->required()
      ->delimiter(',');
  add_common(cmd_sweep, sweep_flags);

  CLI::App* cmd_bench =
      app.add_subcommand("bench", "Median per-epoch phase timings on the identical supernet");
  cmd_bench->add_option("config", config_path, "Path to the run config")->required();
  add_common(cmd_bench, bench_flags);

  CLI::App* cmd_export =
      app.add_subcommand("export", "Convert a trace CSV into a long-form trajectory CSV");
  cmd_export->add_option("trace", trace_path, "Path to a trace.csv written by run")->required();
  cmd_export->add_option("--out", export_out, "Output CSV path")->required();
  add_common(cmd_export, export_flags);

  CLI::App* cmd_resume = app.add_subcommand("resume", "Continue a checkpointed run");
  cmd_resume->add_option("checkpoint", checkpoint_path, "Path to a checkpoint file")->required();
  add_common(cmd_resume, resume_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      proxnas::RunConfig cfg = load(config_path, run_flags);
      return proxnas::run(cfg, cfg.out_dir, run_flags.quiet).exit_code;
    }
    if (cmd_sweep->parsed()) {
      proxnas::RunConfig cfg = load(config_path, sweep_flags);
      proxnas::sweep_eta(cfg, etas, cfg.out_dir, sweep_flags.quiet);
      return proxnas::kOk;
    }
    if (cmd_bench->parsed()) {
      proxnas::RunConfig cfg = load(config_path, bench_flags);
      proxnas::benchmark_timing(cfg, cfg.out_dir, bench_flags.quiet);
      return proxnas::kOk;
    }
    if (cmd_export->parsed()) {
      proxnas::export_trajectory_files(trace_path, export_out, export_flags.quiet);
      return proxnas::kOk;
    }
    if (cmd_resume->parsed()) {
      std::optional<fs::path> dir;
      if (resume_flags.out_dir) dir = fs::path(*resume_flags.out_dir);
      return proxnas::resume(checkpoint_path, dir, resume_flags.quiet).exit_code;
    }
  } catch (const proxnas::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return proxnas::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
