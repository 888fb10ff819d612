#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "proxnas/objective.hpp"
#include "proxnas/optimizers.hpp"
#include "proxnas/rng.hpp"
#include "proxnas/search_space.hpp"
#include "proxnas/supernet.hpp"
#include "proxnas/tasks.hpp"
#include "proxnas/trace.hpp"

namespace proxnas {

enum class Algorithm { Nasp, DartsFirstOrder, DartsSecondOrder, PaStandard, PaLazy, Random };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct SearchConfig {
  Algorithm algorithm = Algorithm::Nasp;
  int epochs = 50;
  int batch_train = 0;  // 0 = full split
  int batch_val = 0;
  double weight_step = 0.1;
  double weight_momentum = 0.9;
  double arch_step = 0.05;  // the proximal-gradient step size
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double eta = 0.0;
  /// Evaluate the regularizer gradient at the continuous parameters instead
  /// of the discrete shadow (off by default: the shadow is what the update
  /// differentiates through).
  bool reg_at_continuous = false;
  LossKind loss = LossKind::CrossEntropy;
  std::uint64_t seed = 1;
  int random_budget = 8;
};

/// Mid-run optimizer state; everything a checkpoint needs to continue a run
/// bit-identically.
struct SearchState {
  int next_epoch = 0;
  Matrix arch;
  Matrix arch_discrete;
  SupernetState weights;
  AdamState adam;
  SgdMomentum sgd;
  std::string rng_state;
  SearchTrace trace;
  // Random-search progress.
  int candidates_done = 0;
  double best_loss = 0.0;
  Matrix best_arch;
  SupernetState best_weights;
};

using EpochHook = std::function<void(const SearchState&)>;

struct SearchResult {
  Matrix final_arch;  // rows in the discrete constraint set
  SupernetState weights;
  SearchTrace trace;
  double total_seconds = 0.0;
  double final_val_loss = 0.0;
  double final_val_accuracy = 0.0;
  bool aborted = false;
  std::string message;
};

SearchResult run_search(const SearchConfig& config, const CellTopology& topo,
                        const OperationSet& ops, const TaskData& task,
                        const SearchState* resume_from = nullptr,
                        const EpochHook& on_epoch = nullptr);

SearchResult nasp_search(const SearchConfig& config, const CellTopology& topo,
                         const OperationSet& ops, const TaskData& task);
SearchResult darts_search(const SearchConfig& config, const CellTopology& topo,
                          const OperationSet& ops, const TaskData& task, int order);
SearchResult pa_standard_search(const SearchConfig& config, const CellTopology& topo,
                                const OperationSet& ops, const TaskData& task);
SearchResult pa_lazy_search(const SearchConfig& config, const CellTopology& topo,
                            const OperationSet& ops, const TaskData& task);
SearchResult random_search(const SearchConfig& config, const CellTopology& topo,
                           const OperationSet& ops, const TaskData& task, int budget);

struct RetrainMetrics {
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  double train_loss = 0.0;
};

/// Reinitializes weights and trains the discrete architecture on
/// train+validation, then reports test metrics.
RetrainMetrics retrain_final(const Matrix& arch, const SearchConfig& config,
                             const CellTopology& topo, const OperationSet& ops,
                             const TaskData& task, int epochs);

/// Total parameter count of the operations a discrete architecture selects.
long selected_parameter_count(const Matrix& arch, const OperationSet& ops);

/// Width implied by the operation set's weight shapes (feature dim for
/// parameter-free sets).
int cell_width(const OperationSet& ops, const TaskData& task);

}  // namespace proxnas
