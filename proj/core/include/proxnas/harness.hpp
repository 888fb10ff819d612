#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "proxnas/checkpoint.hpp"
#include "proxnas/config.hpp"
#include "proxnas/report.hpp"

namespace proxnas {

/// Process exit codes for the CLI.
enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalAbort = 3 };

struct RunOutcome {
  RunReport report;
  SearchResult result;
  std::filesystem::path report_path;
  std::filesystem::path trace_path;
  std::filesystem::path checkpoint_path;
  int exit_code = kOk;
};

/// Executes the configured search, retrains the final architecture and
/// writes report.json, trace.csv and checkpoint.bin into out_dir. On a
/// numerical abort the partial artifacts are still written and the exit code
/// is kNumericalAbort.
RunOutcome run(const RunConfig& config, const std::filesystem::path& out_dir, bool quiet);

/// Continues a checkpointed run to its configured epoch count.
RunOutcome resume(const std::filesystem::path& checkpoint_path,
                  const std::optional<std::filesystem::path>& out_dir, bool quiet);

struct SweepRow {
  double eta = 0.0;
  std::uint64_t seed = 0;
  long selected_param_count = 0;
  double test_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;  // one per (eta, seed)
  struct Summary {
    double eta = 0.0;
    double mean_param_count = 0.0;
    double median_param_count = 0.0;
    double mean_test_accuracy = 0.0;
  };
  std::vector<Summary> summaries;  // one per eta
};

/// Runs the configured search once per (eta, seed) and aggregates model size
/// and accuracy. etas must be nonnegative and ascending.
SweepTable sweep_eta(const RunConfig& config, const std::vector<double>& etas,
                     const std::filesystem::path& out_dir, bool quiet);

struct TimingRow {
  std::string algorithm;
  double arch_forward = 0.0;
  double arch_backward = 0.0;
  double weight_forward = 0.0;
  double weight_backward = 0.0;
  double epoch_total = 0.0;
};

/// Median per-epoch phase times on the identical supernet, warm-up epochs
/// excluded, for the proximal searcher and both relaxed orders.
std::vector<TimingRow> benchmark_timing(const RunConfig& config,
                                        const std::filesystem::path& out_dir, bool quiet);

/// Reads a trace CSV and writes the long-form trajectory plus a per-edge
/// switch summary (same stem, "-switches.csv" suffix).
void export_trajectory_files(const std::filesystem::path& trace_csv,
                             const std::filesystem::path& out_csv, bool quiet);

}  // namespace proxnas
