#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "proxnas/tape.hpp"

namespace proxnas {

/// One epoch of a search run. Timings are wall-clock measurements (steady
/// clock) and are the only fields excluded from reproducibility guarantees.
struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  /// Validation loss of the discrete architecture in force after the weight
  /// update. Equals the relaxed loss for natively discrete algorithms.
  double val_loss_discrete = 0.0;
  /// |relaxed validation loss - derived discrete validation loss|; zero for
  /// algorithms that search with discrete architectures directly.
  double discretization_gap = 0.0;
  bool box_violation = false;
  double t_arch_forward = 0.0;
  double t_arch_backward = 0.0;
  double t_weight_forward = 0.0;
  double t_weight_backward = 0.0;
  long arch_builder_calls = 0;
  long weight_builder_calls = 0;
  std::vector<int> selected;  // operation index per edge
  Matrix arch;                // continuous parameters after the update
  Matrix arch_discrete;       // discrete shadow (or derived architecture)
};

struct SearchTrace {
  std::vector<EpochRecord> epochs;
  int first_box_violation = -1;  // epoch index, or -1
  bool aborted = false;
  std::string abort_reason;

  int edge_count() const;
  int op_count() const;
};

/// Per-edge count of epochs whose selected operation differs from the
/// previous epoch's.
std::vector<long> switch_counts(const SearchTrace& trace);
long total_switches(const SearchTrace& trace);

void write_trace_csv(const SearchTrace& trace, std::ostream& out);
void write_trace_csv(const SearchTrace& trace, const std::string& path);
SearchTrace read_trace_csv(const std::string& path);

/// Long-form per-(epoch, edge, op) trajectory with the continuous value and
/// the discrete indicator, loadable by the CSV task reader. Returns the
/// number of rows written.
long export_trajectory(const SearchTrace& trace, std::ostream& out);
long export_trajectory(const SearchTrace& trace, const std::string& path);

/// Per-edge switch-count summary next to a trajectory export.
void write_switch_summary(const SearchTrace& trace, std::ostream& out);
void write_switch_summary(const SearchTrace& trace, const std::string& path);

/// Formats a double with 17 significant digits (lossless round-trip).
std::string format_double(double v);

}  // namespace proxnas
