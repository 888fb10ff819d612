#include "proxnas/search.hpp"

#include <chrono>
#include <set>
#include <cmath>
#include <stdexcept>

#include "proxnas/prox.hpp"

namespace proxnas {

int cell_width(const OperationSet& ops, const TaskData& task) {
  for (const auto& op : ops) {
    if (!op.weight_shapes.empty()) return op.weight_shapes[0].first;
  }
  return task.feature_dim();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Sub-stream labels for deriving independent generators from the run seed.
enum : std::uint64_t {
  kStreamArchInit = 1,
  kStreamWeightInit = 2,
  kStreamLoop = 3,
  kStreamRetrain = 5,
  kStreamCandidateBase = 100,
};

struct SplitData {
  Matrix x_train, x_val, x_test;
  IntVector y_train, y_val, y_test;

  explicit SplitData(const TaskData& task)
      : x_train(task.gather_features(task.train_idx)),
        x_val(task.gather_features(task.val_idx)),
        x_test(task.gather_features(task.test_idx)),
        y_train(task.gather_labels(task.train_idx)),
        y_val(task.gather_labels(task.val_idx)),
        y_test(task.gather_labels(task.test_idx)) {}
};

struct Batch {
  Matrix x;
  IntVector y;
};

Batch take_batch(const Matrix& x_full, const IntVector& y_full, int batch_size, Rng& rng) {
  const int n = static_cast<int>(x_full.rows());
  if (batch_size <= 0 || batch_size >= n) return Batch{x_full, y_full};
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  Batch b;
  b.x.resize(batch_size, x_full.cols());
  b.y.resize(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    b.x.row(i) = x_full.row(order[static_cast<std::size_t>(i)]);
    b.y(i) = y_full(order[static_cast<std::size_t>(i)]);
  }
  return b;
}

/// Maps WeightKeys onto positions in SupernetState::arrays() order.
struct WeightIndex {
  int stem = -1;
  int head = -1;
  std::vector<std::vector<std::vector<int>>> cell;

  static WeightIndex build(const SupernetState& state) {
    WeightIndex idx;
    int next = 0;
    if (state.stem.size() != 0) idx.stem = next++;
    idx.head = next++;
    idx.cell.resize(state.weights.size());
    for (std::size_t e = 0; e < state.weights.size(); ++e) {
      idx.cell[e].resize(state.weights[e].size());
      for (std::size_t k = 0; k < state.weights[e].size(); ++k) {
        for (std::size_t a = 0; a < state.weights[e][k].size(); ++a) {
          idx.cell[e][k].push_back(next++);
        }
      }
    }
    return idx;
  }

  int of(const WeightKey& key) const {
    if (key.edge == WeightKey::kStem) return stem;
    if (key.edge == WeightKey::kHead) return head;
    return cell[static_cast<std::size_t>(key.edge)][static_cast<std::size_t>(key.op)]
               [static_cast<std::size_t>(key.array)];
  }
};

Matrix* array_for(SupernetState& state, const WeightKey& key) {
  if (key.edge == WeightKey::kStem) return &state.stem;
  if (key.edge == WeightKey::kHead) return &state.head;
  return &state.weights[static_cast<std::size_t>(key.edge)][static_cast<std::size_t>(key.op)]
                       [static_cast<std::size_t>(key.array)];
}

void check_config(const SearchConfig& config) {
  if (config.epochs < 1) throw std::invalid_argument("SearchConfig: epochs must be >= 1");
  if (!(config.arch_step > 0.0)) throw std::invalid_argument("SearchConfig: arch_step must be > 0");
  if (!(config.weight_step > 0.0)) {
    throw std::invalid_argument("SearchConfig: weight_step must be > 0");
  }
  if (config.eta < 0.0) throw std::invalid_argument("SearchConfig: eta must be nonnegative");
}

Matrix interior_arch_init(int edges, int ops, std::uint64_t seed) {
  Rng rng(Rng::derive(seed, kStreamArchInit));
  Matrix a(edges, ops);
  for (int e = 0; e < edges; ++e) {
    for (int k = 0; k < ops; ++k) a(e, k) = 0.5 + rng.uniform(-0.01, 0.01);
  }
  return a;
}

SearchState fresh_state(const SearchConfig& config, const CellTopology& topo,
                        const OperationSet& ops, const TaskData& task, bool interior_init) {
  SearchState st;
  const int edges = topo.edge_count();
  const int nops = static_cast<int>(ops.size());
  st.arch = interior_init ? interior_arch_init(edges, nops, config.seed)
                          : Matrix::Zero(edges, nops);
  st.arch_discrete = Matrix::Zero(edges, nops);
  Rng winit(Rng::derive(config.seed, kStreamWeightInit));
  st.weights = SupernetState::initialize(topo, ops, task.feature_dim(), cell_width(ops, task),
                                         task.classes, winit);
  st.adam = AdamState::make(edges, nops, config.adam_beta1, config.adam_beta2, config.adam_eps);
  st.sgd = SgdMomentum::make(st.weights.arrays(), config.weight_momentum);
  st.rng_state = Rng(Rng::derive(config.seed, kStreamLoop)).save();
  return st;
}

struct PhaseTimes {
  double forward = 0.0;
  double backward = 0.0;
  long builder_calls = 0;
};

/// One SGD step through an assembled loss; only arrays present on the tape
/// are touched.
double weight_update(const CellTopology& topo, const OperationSet& ops, const Matrix& arch,
                     MixMode mode, SupernetState& weights, SgdMomentum& sgd,
                     const WeightIndex& widx, const Batch& batch, int classes, LossKind kind,
                     double step_size, PhaseTimes* times) {
  BuildStats stats;
  const auto t0 = Clock::now();
  AssembledLoss al =
      assemble_loss(topo, ops, arch, weights, mode, batch.x, batch.y, classes, kind, &stats);
  const double loss = al.net.tape.scalar(al.loss);
  const auto t1 = Clock::now();
  std::vector<Matrix> grads = al.net.tape.gradient(al.loss, al.net.weight_vars);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const WeightKey& key = al.net.weight_keys[i];
    sgd.apply_at(static_cast<std::size_t>(widx.of(key)), *array_for(weights, key), grads[i],
                 step_size);
  }
  const auto t2 = Clock::now();
  if (times != nullptr) {
    times->forward += std::chrono::duration<double>(t1 - t0).count();
    times->backward += std::chrono::duration<double>(t2 - t1).count();
    times->builder_calls += stats.op_builder_calls;
  }
  return loss;
}

SearchResult finalize(const SearchConfig& config, const CellTopology& topo,
                      const OperationSet& ops, const TaskData& task, const SplitData& split,
                      SearchState&& st, const Matrix& final_arch, Clock::time_point start) {
  SearchResult res;
  res.final_arch = final_arch;
  res.trace = std::move(st.trace);
  res.weights = std::move(st.weights);
  res.aborted = res.trace.aborted;
  res.message = res.trace.abort_reason;
  if (!res.aborted && res.final_arch.size() != 0 && is_discrete(res.final_arch)) {
    const LossValue v = evaluate_loss(topo, ops, res.final_arch, res.weights, MixMode::Discrete,
                                      split.x_val, split.y_val, task.classes, config.loss);
    res.final_val_loss = v.loss;
    res.final_val_accuracy = v.acc;
  }
  res.total_seconds = seconds_since(start);
  return res;
}

/// Shared loop for the proximal-iteration searchers. With box projection the
/// continuous parameters are re-clipped to [0,1] after every update and the
/// discrete shadow only needs the cardinality projection; without it the
/// parameters drift freely and the shadow needs the full sparse-box
/// projection. The two variants are otherwise identical step for step.
SearchResult proximal_family(const SearchConfig& config, const CellTopology& topo,
                             const OperationSet& ops, const TaskData& task, bool box_project,
                             const SearchState* resume_from, const EpochHook& on_epoch) {
  check_config(config);
  const auto start = Clock::now();
  const SplitData split(task);
  const RegularizerSpec reg = RegularizerSpec::make(config.eta, ops);

  SearchState st = resume_from != nullptr ? *resume_from
                                          : fresh_state(config, topo, ops, task, true);
  Rng rng(0);
  rng.restore(st.rng_state);
  const WeightIndex widx = WeightIndex::build(st.weights);

  auto project_discrete = [&](const Matrix& a, bool* degenerate) {
    if (box_project) {
      *degenerate = false;
      return prox_cardinality_rows(a);
    }
    return prox_cardinality_box_rows(a, degenerate);
  };

  auto abort = [&](int epoch, const std::string& why) {
    st.trace.aborted = true;
    st.trace.abort_reason = "epoch " + std::to_string(epoch) + ": " + why;
  };

  for (int t = st.next_epoch; t < config.epochs && !st.trace.aborted; ++t) {
    const Batch val = take_batch(split.x_val, split.y_val, config.batch_val, rng);
    const Batch train = take_batch(split.x_train, split.y_train, config.batch_train, rng);

    EpochRecord rec;
    rec.epoch = t;

    // Discrete shadow of the current parameters.
    bool degenerate = false;
    Matrix shadow = project_discrete(st.arch, &degenerate);
    if (degenerate || !is_discrete(shadow)) {
      abort(t, "discrete projection produced an infeasible row (no positive entry)");
      break;
    }

    // Architecture update: gradient of the search objective at the discrete
    // shadow, then a proximal step. The forward value at a one-hot row equals
    // the selected operation's output, but the gradient of the mixture is
    // taken with respect to every coordinate, so all candidates contribute
    // their comparison signal (the weight update below stays selected-only).
    BuildStats arch_stats;
    const auto a0 = Clock::now();
    AssembledLoss val_loss = assemble_loss(topo, ops, shadow, st.weights, MixMode::Linear,
                                           val.x, val.y, task.classes, config.loss, &arch_stats);
    rec.val_loss = val_loss.net.tape.scalar(val_loss.loss);
    const auto a1 = Clock::now();
    if (!std::isfinite(rec.val_loss)) {
      abort(t, "validation loss is not finite");
      break;
    }
    const Var arch_var = val_loss.net.arch;
    Matrix g = val_loss.net.tape.gradient(val_loss.loss, std::span<const Var>(&arch_var, 1))[0];
    if (config.eta > 0.0) {
      g += config.eta * regularizer_gradient(config.reg_at_continuous ? st.arch : shadow, reg);
    }
    st.arch -= st.adam.update(g, config.arch_step);
    if (box_project) st.arch = prox_unit_box_rows(st.arch);
    const auto a2 = Clock::now();

    rec.box_violation = !rows_in_unit_box(st.arch);
    rec.t_arch_forward = std::chrono::duration<double>(a1 - a0).count();
    rec.t_arch_backward = std::chrono::duration<double>(a2 - a1).count();
    rec.arch_builder_calls = arch_stats.op_builder_calls;

    // Refine the discrete shadow from the updated parameters.
    st.arch_discrete = project_discrete(st.arch, &degenerate);
    if (degenerate || !is_discrete(st.arch_discrete)) {
      abort(t, "refined discrete projection produced an infeasible row");
      break;
    }

    // Weight update through the selected operations only.
    PhaseTimes wt;
    rec.train_loss = weight_update(topo, ops, st.arch_discrete, MixMode::Discrete, st.weights,
                                   st.sgd, widx, train, task.classes, config.loss,
                                   config.weight_step, &wt);
    if (!std::isfinite(rec.train_loss)) {
      abort(t, "training loss is not finite");
      break;
    }
    rec.t_weight_forward = wt.forward;
    rec.t_weight_backward = wt.backward;
    rec.weight_builder_calls = wt.builder_calls;

    rec.val_loss_discrete = rec.val_loss;
    rec.discretization_gap = 0.0;
    rec.selected = selected_ops(st.arch_discrete);
    rec.arch = st.arch;
    rec.arch_discrete = st.arch_discrete;
    if (rec.box_violation && st.trace.first_box_violation < 0) {
      st.trace.first_box_violation = t;
    }
    st.trace.epochs.push_back(std::move(rec));
    st.next_epoch = t + 1;
    st.rng_state = rng.save();
    if (on_epoch) on_epoch(st);
  }

  const Matrix final_arch = st.arch_discrete;
  return finalize(config, topo, ops, task, split, std::move(st), final_arch, start);
}

/// Single proximal-gradient step per epoch directly onto the discrete set.
/// The gradient is taken at the current iterate through the raw linear
/// mixture (every operation contributes), because after the first projection
/// the iterate itself is discrete and the projection would otherwise never
/// see cross-operation information.
SearchResult pa_standard(const SearchConfig& config, const CellTopology& topo,
                         const OperationSet& ops, const TaskData& task,
                         const SearchState* resume_from, const EpochHook& on_epoch) {
  check_config(config);
  const auto start = Clock::now();
  const SplitData split(task);
  const RegularizerSpec reg = RegularizerSpec::make(config.eta, ops);

  SearchState st = resume_from != nullptr ? *resume_from
                                          : fresh_state(config, topo, ops, task, true);
  Rng rng(0);
  rng.restore(st.rng_state);
  const WeightIndex widx = WeightIndex::build(st.weights);

  auto abort = [&](int epoch, const std::string& why) {
    st.trace.aborted = true;
    st.trace.abort_reason = "epoch " + std::to_string(epoch) + ": " + why;
  };

  for (int t = st.next_epoch; t < config.epochs && !st.trace.aborted; ++t) {
    const Batch val = take_batch(split.x_val, split.y_val, config.batch_val, rng);
    const Batch train = take_batch(split.x_train, split.y_train, config.batch_train, rng);

    EpochRecord rec;
    rec.epoch = t;

    BuildStats arch_stats;
    const auto a0 = Clock::now();
    AssembledLoss val_loss = assemble_loss(topo, ops, st.arch, st.weights, MixMode::Linear,
                                           val.x, val.y, task.classes, config.loss, &arch_stats);
    rec.val_loss = val_loss.net.tape.scalar(val_loss.loss);
    const auto a1 = Clock::now();
    if (!std::isfinite(rec.val_loss)) {
      abort(t, "validation loss is not finite");
      break;
    }
    const Var arch_var = val_loss.net.arch;
    Matrix g = val_loss.net.tape.gradient(val_loss.loss, std::span<const Var>(&arch_var, 1))[0];
    if (config.eta > 0.0) g += config.eta * regularizer_gradient(st.arch, reg);

    bool degenerate = false;
    st.arch = prox_cardinality_box_rows(st.arch - st.adam.update(g, config.arch_step),
                                        &degenerate);
    const auto a2 = Clock::now();
    if (degenerate) {
      abort(t, "projection onto the discrete set produced an infeasible row");
      break;
    }
    rec.t_arch_forward = std::chrono::duration<double>(a1 - a0).count();
    rec.t_arch_backward = std::chrono::duration<double>(a2 - a1).count();
    rec.arch_builder_calls = arch_stats.op_builder_calls;
    rec.box_violation = false;  // range of the projection is inside the box

    st.arch_discrete = st.arch;

    PhaseTimes wt;
    rec.train_loss = weight_update(topo, ops, st.arch, MixMode::Discrete, st.weights, st.sgd,
                                   widx, train, task.classes, config.loss, config.weight_step,
                                   &wt);
    if (!std::isfinite(rec.train_loss)) {
      abort(t, "training loss is not finite");
      break;
    }
    rec.t_weight_forward = wt.forward;
    rec.t_weight_backward = wt.backward;
    rec.weight_builder_calls = wt.builder_calls;

    rec.val_loss_discrete = rec.val_loss;
    rec.discretization_gap = 0.0;
    rec.selected = selected_ops(st.arch);
    rec.arch = st.arch;
    rec.arch_discrete = st.arch;
    st.trace.epochs.push_back(std::move(rec));
    st.next_epoch = t + 1;
    st.rng_state = rng.save();
    if (on_epoch) on_epoch(st);
  }

  const Matrix final_arch = st.arch_discrete;
  return finalize(config, topo, ops, task, split, std::move(st), final_arch, start);
}

SearchResult darts(const SearchConfig& config, const CellTopology& topo, const OperationSet& ops,
                   const TaskData& task, int order, const SearchState* resume_from,
                   const EpochHook& on_epoch) {
  check_config(config);
  if (order != 1 && order != 2) throw std::invalid_argument("darts_search: order must be 1 or 2");
  const auto start = Clock::now();
  const SplitData split(task);

  SearchState st = resume_from != nullptr ? *resume_from
                                          : fresh_state(config, topo, ops, task, false);
  Rng rng(0);
  rng.restore(st.rng_state);
  const WeightIndex widx = WeightIndex::build(st.weights);

  auto abort = [&](int epoch, const std::string& why) {
    st.trace.aborted = true;
    st.trace.abort_reason = "epoch " + std::to_string(epoch) + ": " + why;
  };

  for (int t = st.next_epoch; t < config.epochs && !st.trace.aborted; ++t) {
    const Batch val = take_batch(split.x_val, split.y_val, config.batch_val, rng);
    const Batch train = take_batch(split.x_train, split.y_train, config.batch_train, rng);

    EpochRecord rec;
    rec.epoch = t;

    // Architecture update on the relaxed supernet.
    BuildStats arch_stats;
    double arch_fwd = 0.0;
    double arch_bwd = 0.0;
    const auto a0 = Clock::now();
    AssembledLoss val_loss = assemble_loss(topo, ops, st.arch, st.weights, MixMode::Softmax,
                                           val.x, val.y, task.classes, config.loss, &arch_stats);
    rec.val_loss = val_loss.net.tape.scalar(val_loss.loss);
    const auto a1 = Clock::now();
    arch_fwd += std::chrono::duration<double>(a1 - a0).count();
    if (!std::isfinite(rec.val_loss)) {
      abort(t, "validation loss is not finite");
      break;
    }

    Matrix g;
    if (order == 1) {
      const auto b0 = Clock::now();
      const Var arch_var = val_loss.net.arch;
      g = val_loss.net.tape.gradient(val_loss.loss, std::span<const Var>(&arch_var, 1))[0];
      arch_bwd += seconds_since(b0);
    } else {
      // Second-order correction: the mixed second derivative is approximated
      // by a symmetric finite difference of the training gradient around
      // weights perturbed along the validation weight-gradient.
      const auto b0 = Clock::now();
      std::vector<Var> wrt;
      wrt.push_back(val_loss.net.arch);
      for (Var v : val_loss.net.weight_vars) wrt.push_back(v);
      std::vector<Matrix> grads = val_loss.net.tape.gradient(val_loss.loss, wrt);
      g = grads[0];
      double vnorm_sq = 0.0;
      for (std::size_t i = 1; i < grads.size(); ++i) vnorm_sq += grads[i].squaredNorm();
      const double vnorm = std::sqrt(vnorm_sq);
      arch_bwd += seconds_since(b0);

      if (vnorm > 0.0) {
        const double h = 0.01 / vnorm;
        auto perturbed = [&](double sign) {
          SupernetState w = st.weights;
          for (std::size_t i = 1; i < grads.size(); ++i) {
            const WeightKey& key = val_loss.net.weight_keys[i - 1];
            *array_for(w, key) += sign * h * grads[i];
          }
          return w;
        };
        auto arch_grad_at = [&](const SupernetState& w, double& fwd, double& bwd) {
          const auto f0 = Clock::now();
          AssembledLoss tl = assemble_loss(topo, ops, st.arch, w, MixMode::Softmax, train.x,
                                           train.y, task.classes, config.loss);
          const auto f1 = Clock::now();
          const Var av = tl.net.arch;
          Matrix out = tl.net.tape.gradient(tl.loss, std::span<const Var>(&av, 1))[0];
          fwd += std::chrono::duration<double>(f1 - f0).count();
          bwd += seconds_since(f1);
          return out;
        };
        const SupernetState w_plus = perturbed(1.0);
        const SupernetState w_minus = perturbed(-1.0);
        const Matrix g_plus = arch_grad_at(w_plus, arch_fwd, arch_bwd);
        const Matrix g_minus = arch_grad_at(w_minus, arch_fwd, arch_bwd);
        g -= config.weight_step * (g_plus - g_minus) / (2.0 * h);
      }
    }

    const auto u0 = Clock::now();
    st.arch -= st.adam.update(g, config.arch_step);
    arch_bwd += seconds_since(u0);

    rec.t_arch_forward = arch_fwd;
    rec.t_arch_backward = arch_bwd;
    rec.arch_builder_calls = arch_stats.op_builder_calls;

    // Weight update through all operations.
    PhaseTimes wt;
    rec.train_loss = weight_update(topo, ops, st.arch, MixMode::Softmax, st.weights, st.sgd,
                                   widx, train, task.classes, config.loss, config.weight_step,
                                   &wt);
    if (!std::isfinite(rec.train_loss)) {
      abort(t, "training loss is not finite");
      break;
    }
    rec.t_weight_forward = wt.forward;
    rec.t_weight_backward = wt.backward;
    rec.weight_builder_calls = wt.builder_calls;

    // Discretization gap of the derived architecture, measured after the
    // weight update on the same validation data.
    st.arch_discrete = derive_final_architecture(st.arch);
    const double soft_post = evaluate_loss(topo, ops, st.arch, st.weights, MixMode::Softmax,
                                           val.x, val.y, task.classes, config.loss)
                                 .loss;
    const double disc_post = evaluate_loss(topo, ops, st.arch_discrete, st.weights,
                                           MixMode::Discrete, val.x, val.y, task.classes,
                                           config.loss)
                                 .loss;
    rec.val_loss_discrete = disc_post;
    rec.discretization_gap = std::abs(disc_post - soft_post);
    rec.box_violation = false;  // the relaxed parameters are unconstrained logits
    rec.selected = argmax_ops(st.arch);
    rec.arch = st.arch;
    rec.arch_discrete = st.arch_discrete;
    st.trace.epochs.push_back(std::move(rec));
    st.next_epoch = t + 1;
    st.rng_state = rng.save();
    if (on_epoch) on_epoch(st);
  }

  const Matrix final_arch =
      st.arch_discrete.size() != 0 ? st.arch_discrete : derive_final_architecture(st.arch);
  return finalize(config, topo, ops, task, split, std::move(st), final_arch, start);
}

SearchResult random_search_impl(const SearchConfig& config, const CellTopology& topo,
                                const OperationSet& ops, const TaskData& task, int budget,
                                const SearchState* resume_from, const EpochHook& on_epoch) {
  check_config(config);
  if (budget < 1) throw std::invalid_argument("random_search: budget must be >= 1");
  const auto start = Clock::now();
  const SplitData split(task);
  const int edges = topo.edge_count();
  const int nops = static_cast<int>(ops.size());

  SearchState st;
  if (resume_from != nullptr) {
    st = *resume_from;
  } else {
    st = fresh_state(config, topo, ops, task, true);
    st.best_loss = std::numeric_limits<double>::infinity();
    st.rng_state = Rng(Rng::derive(config.seed, kStreamLoop)).save();
  }
  Rng rng(0);
  rng.restore(st.rng_state);

  // Distinct candidates: sampling is uniform without replacement, so a budget
  // covering the whole space enumerates it exactly.
  double space_size = 1.0;
  for (int e = 0; e < edges; ++e) space_size *= static_cast<double>(nops);
  std::set<std::vector<int>> seen;
  for (const EpochRecord& r : st.trace.epochs) seen.insert(r.selected);

  for (int c = st.candidates_done; c < budget && !st.trace.aborted; ++c) {
    if (static_cast<double>(seen.size()) >= space_size) break;
    std::vector<int> pick(static_cast<std::size_t>(edges));
    do {
      for (int e = 0; e < edges; ++e) {
        pick[static_cast<std::size_t>(e)] =
            static_cast<int>(rng.below(static_cast<std::uint64_t>(nops)));
      }
    } while (!seen.insert(pick).second);
    Matrix arch = Matrix::Zero(edges, nops);
    for (int e = 0; e < edges; ++e) arch(e, pick[static_cast<std::size_t>(e)]) = 1.0;
    Rng winit(Rng::derive(config.seed, kStreamCandidateBase + static_cast<std::uint64_t>(c)));
    SupernetState weights =
        SupernetState::initialize(topo, ops, task.feature_dim(), cell_width(ops, task), task.classes, winit);
    SgdMomentum sgd = SgdMomentum::make(weights.arrays(), config.weight_momentum);
    const WeightIndex widx = WeightIndex::build(weights);

    const std::vector<int> sel = selected_ops(arch);
    for (int e = 0; e < config.epochs; ++e) {
      EpochRecord rec;
      rec.epoch = c * config.epochs + e;
      PhaseTimes wt;
      const Batch train = take_batch(split.x_train, split.y_train, config.batch_train, rng);
      rec.train_loss = weight_update(topo, ops, arch, MixMode::Discrete, weights, sgd, widx,
                                     train, task.classes, config.loss, config.weight_step, &wt);
      if (!std::isfinite(rec.train_loss)) {
        st.trace.aborted = true;
        st.trace.abort_reason = "candidate " + std::to_string(c) + ": non-finite training loss";
        break;
      }
      rec.t_weight_forward = wt.forward;
      rec.t_weight_backward = wt.backward;
      rec.weight_builder_calls = wt.builder_calls;
      rec.val_loss = evaluate_loss(topo, ops, arch, weights, MixMode::Discrete, split.x_val,
                                   split.y_val, task.classes, config.loss)
                         .loss;
      rec.val_loss_discrete = rec.val_loss;
      rec.selected = sel;
      rec.arch = arch;
      rec.arch_discrete = arch;
      st.trace.epochs.push_back(std::move(rec));
    }
    if (st.trace.aborted) break;

    const double val = evaluate_loss(topo, ops, arch, weights, MixMode::Discrete, split.x_val,
                                     split.y_val, task.classes, config.loss)
                           .loss;
    if (val < st.best_loss) {
      st.best_loss = val;
      st.best_arch = arch;
      st.best_weights = weights;
    }
    st.candidates_done = c + 1;
    st.rng_state = rng.save();
    if (on_epoch) on_epoch(st);
  }

  st.arch = st.best_arch;
  st.arch_discrete = st.best_arch;
  st.weights = st.best_weights;
  const Matrix final_arch = st.best_arch;
  return finalize(config, topo, ops, task, split, std::move(st), final_arch, start);
}

}  // namespace

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Nasp:
      return "nasp";
    case Algorithm::DartsFirstOrder:
      return "darts1";
    case Algorithm::DartsSecondOrder:
      return "darts2";
    case Algorithm::PaStandard:
      return "pa_standard";
    case Algorithm::PaLazy:
      return "pa_lazy";
    case Algorithm::Random:
      return "random";
  }
  return "unknown";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "nasp") return Algorithm::Nasp;
  if (name == "darts1") return Algorithm::DartsFirstOrder;
  if (name == "darts2") return Algorithm::DartsSecondOrder;
  if (name == "pa_standard") return Algorithm::PaStandard;
  if (name == "pa_lazy") return Algorithm::PaLazy;
  if (name == "random") return Algorithm::Random;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

SearchResult run_search(const SearchConfig& config, const CellTopology& topo,
                        const OperationSet& ops, const TaskData& task,
                        const SearchState* resume_from, const EpochHook& on_epoch) {
  switch (config.algorithm) {
    case Algorithm::Nasp:
      return proximal_family(config, topo, ops, task, true, resume_from, on_epoch);
    case Algorithm::PaLazy:
      return proximal_family(config, topo, ops, task, false, resume_from, on_epoch);
    case Algorithm::PaStandard:
      return pa_standard(config, topo, ops, task, resume_from, on_epoch);
    case Algorithm::DartsFirstOrder:
      return darts(config, topo, ops, task, 1, resume_from, on_epoch);
    case Algorithm::DartsSecondOrder:
      return darts(config, topo, ops, task, 2, resume_from, on_epoch);
    case Algorithm::Random:
      return random_search_impl(config, topo, ops, task, config.random_budget, resume_from,
                                on_epoch);
  }
  throw std::invalid_argument("run_search: unknown algorithm");
}

SearchResult nasp_search(const SearchConfig& config, const CellTopology& topo,
                         const OperationSet& ops, const TaskData& task) {
  SearchConfig c = config;
  c.algorithm = Algorithm::Nasp;
  return run_search(c, topo, ops, task);
}

SearchResult darts_search(const SearchConfig& config, const CellTopology& topo,
                          const OperationSet& ops, const TaskData& task, int order) {
  SearchConfig c = config;
  c.algorithm = order == 2 ? Algorithm::DartsSecondOrder : Algorithm::DartsFirstOrder;
  return run_search(c, topo, ops, task);
}

SearchResult pa_standard_search(const SearchConfig& config, const CellTopology& topo,
                                const OperationSet& ops, const TaskData& task) {
  SearchConfig c = config;
  c.algorithm = Algorithm::PaStandard;
  return run_search(c, topo, ops, task);
}

SearchResult pa_lazy_search(const SearchConfig& config, const CellTopology& topo,
                            const OperationSet& ops, const TaskData& task) {
  SearchConfig c = config;
  c.algorithm = Algorithm::PaLazy;
  return run_search(c, topo, ops, task);
}

SearchResult random_search(const SearchConfig& config, const CellTopology& topo,
                           const OperationSet& ops, const TaskData& task, int budget) {
  SearchConfig c = config;
  c.algorithm = Algorithm::Random;
  c.random_budget = budget;
  return run_search(c, topo, ops, task);
}

RetrainMetrics retrain_final(const Matrix& arch, const SearchConfig& config,
                             const CellTopology& topo, const OperationSet& ops,
                             const TaskData& task, int epochs) {
  if (!is_discrete(arch)) {
    throw std::invalid_argument("retrain_final: architecture rows must be discrete");
  }
  if (epochs < 1) throw std::invalid_argument("retrain_final: epochs must be >= 1");

  std::vector<int> combined = task.train_idx;
  combined.insert(combined.end(), task.val_idx.begin(), task.val_idx.end());
  const Batch fit{task.gather_features(combined), task.gather_labels(combined)};
  const Batch test{task.gather_features(task.test_idx), task.gather_labels(task.test_idx)};

  Rng winit(Rng::derive(config.seed, kStreamRetrain));
  SupernetState weights =
      SupernetState::initialize(topo, ops, task.feature_dim(), cell_width(ops, task),
                                task.classes, winit);
  SgdMomentum sgd = SgdMomentum::make(weights.arrays(), config.weight_momentum);
  const WeightIndex widx = WeightIndex::build(weights);

  RetrainMetrics metrics;
  for (int e = 0; e < epochs; ++e) {
    metrics.train_loss = weight_update(topo, ops, arch, MixMode::Discrete, weights, sgd, widx,
                                       fit, task.classes, config.loss, config.weight_step,
                                       nullptr);
    if (!std::isfinite(metrics.train_loss)) {
      throw std::runtime_error("retrain_final: training loss is not finite at epoch " +
                               std::to_string(e));
    }
  }
  const LossValue tv = evaluate_loss(topo, ops, arch, weights, MixMode::Discrete, test.x, test.y,
                                     task.classes, config.loss);
  metrics.test_loss = tv.loss;
  metrics.test_accuracy = tv.acc;
  return metrics;
}

long selected_parameter_count(const Matrix& arch, const OperationSet& ops) {
  long total = 0;
  for (int k : selected_ops(arch)) total += ops[static_cast<std::size_t>(k)].param_count;
  return total;
}

}  // namespace proxnas
