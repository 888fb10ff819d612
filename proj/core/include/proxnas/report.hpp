#pragma once

#include <string>
#include <vector>

#include "proxnas/config.hpp"
#include "proxnas/search.hpp"

namespace proxnas {

/// Human- and machine-readable summary of one run. Everything except the
/// timing block is a pure function of (config, seed); timing fields are
/// wall-clock measurements and are excluded from the canonical form used for
/// reproducibility comparisons.
struct RunReport {
  std::string config_text;
  std::string algorithm;
  std::string task_name;
  int task_rows = 0;
  int classes = 0;
  int train_rows = 0;
  int val_rows = 0;
  int test_rows = 0;

  struct EdgeChoice {
    int from = 0;
    int to = 0;
    std::string op;
    double coefficient = 0.0;
  };
  std::vector<EdgeChoice> architecture;
  long selected_param_count = 0;

  int epochs_run = 0;
  bool aborted = false;
  std::string abort_reason;
  double final_train_loss = 0.0;
  double final_val_loss = 0.0;
  double final_val_accuracy = 0.0;
  std::vector<long> switch_counts;
  double mean_discretization_gap = 0.0;

  double retrain_test_loss = 0.0;
  double retrain_test_accuracy = 0.0;

  // Timing (excluded from the canonical form).
  double total_seconds = 0.0;
  double median_arch_forward = 0.0;
  double median_arch_backward = 0.0;
  double median_weight_forward = 0.0;
  double median_weight_backward = 0.0;

  std::vector<std::string> artifacts;  // paths relative to the output directory
};

RunReport build_report(const RunConfig& config, const TaskData& task, const OperationSet& ops,
                       const CellTopology& topo, const SearchResult& result,
                       const RetrainMetrics* retrain);

/// JSON text; `canonical` drops the timing block.
std::string report_json(const RunReport& report, bool canonical);

double median(std::vector<double> values);

}  // namespace proxnas
