// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is a self-contained experiment with pinned seeds,
// tolerances and (where stated) runtime budgets.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "proxnas/checkpoint.hpp"
#include "proxnas/harness.hpp"
#include "proxnas/prox.hpp"
#include "proxnas/search.hpp"
#include "proxnas/tasks.hpp"
#include "proxnas/trace.hpp"
#include "support/gradcheck.hpp"
#include "support/train_oracle.hpp"

using namespace proxnas;
using namespace proxnas::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;  // 0 = unbudgeted
  std::function<bool(std::string&)> run;
};

Vector random_vec(int dim, Rng& rng, double lo, double hi) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

bool bit_equal(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return false;
  }
  return a.size() == b.size();
}

// ---------------------------------------------------------------- criterion 1
bool prox_oracle_equivalence(std::string& detail) {
  Rng rng(20240601);
  for (int i = 0; i < 10000; ++i) {
    const int dim = 1 + static_cast<int>(rng.below(16));
    const Vector a = random_vec(dim, rng, -2.0, 2.0);
    const Vector fast = prox_cardinality_box_checked(a).value;
    const Vector brute = prox_cardinality_box_bruteforce(a);
    if (!bit_equal(fast, brute)) {
      detail = "mismatch at sample " + std::to_string(i);
      return false;
    }
  }
  detail = "10000 vectors, dims 1-16, exact";
  return true;
}

// ---------------------------------------------------------------- criterion 2
bool proposition_composition(std::string& detail) {
  Rng rng(8675309);
  for (int i = 0; i < 10000; ++i) {
    const int dim = 1 + static_cast<int>(rng.below(16));
    const Vector a = random_vec(dim, rng, 0.0, 1.0);
    if (!bit_equal(prox_cardinality(prox_unit_box(a)), prox_cardinality_box_bruteforce(a))) {
      detail = "in-box mismatch at sample " + std::to_string(i);
      return false;
    }
  }
  // General inputs with at least one positive entry. Entries are capped at
  // the box upper bound: above it two clipped coordinates tie exactly and
  // the composition's tie-break no longer tracks the true projection (see
  // the prox unit suite for the divergence case).
  int checked = 0;
  while (checked < 10000) {
    const int dim = 1 + static_cast<int>(rng.below(16));
    const Vector a = random_vec(dim, rng, -2.0, 1.0);
    if (a.maxCoeff() <= 0.0) continue;
    ++checked;
    if (!bit_equal(prox_cardinality(prox_unit_box(a)), prox_cardinality_box_bruteforce(a))) {
      detail = "general-input mismatch at sample " + std::to_string(checked);
      return false;
    }
  }
  detail = "10000 in-box + 10000 general samples, exact";
  return true;
}

// ---------------------------------------------------------------- criterion 3
struct GradCase {
  std::string name;
  std::function<double(Rng&)> run;  // returns the relative error of one instance
};

std::vector<GradCase> primitive_cases();   // defined below
std::vector<GradCase> objective_cases();   // defined below

bool gradient_correctness(std::string& detail) {
  double worst = 0.0;
  std::string worst_name;
  for (const auto& group : {primitive_cases(), objective_cases()}) {
    for (const GradCase& c : group) {
      Rng rng(777);
      for (int i = 0; i < 100; ++i) {
        const double err = c.run(rng);
        if (err > worst) {
          worst = err;
          worst_name = c.name;
        }
      }
    }
  }
  detail = "worst rel error " + format_double(worst) + " (" + worst_name + ")";
  return worst < 1e-5;
}

// ---------------------------------------------------------------- criterion 4
bool feasibility_invariants(std::string& detail) {
  const TaskData task = gen_two_moons(400, 0.15, 42);
  const CellTopology topo = CellTopology::complete(3);
  const OperationSet ops = default_operation_set(2);
  SearchConfig cfg;
  cfg.epochs = 50;
  cfg.arch_step = 0.05;
  cfg.weight_step = 0.25;
  cfg.seed = 7;

  const SearchResult nasp = nasp_search(cfg, topo, ops, task);
  if (nasp.aborted || nasp.trace.epochs.size() != 50) {
    detail = "proximal run did not complete";
    return false;
  }
  for (const EpochRecord& e : nasp.trace.epochs) {
    if (!rows_in_unit_box(e.arch)) {
      detail = "box violation at epoch " + std::to_string(e.epoch);
      return false;
    }
    if (!is_discrete(e.arch_discrete)) {
      detail = "non-discrete shadow at epoch " + std::to_string(e.epoch);
      return false;
    }
  }

  const SearchResult lazy = pa_lazy_search(cfg, topo, ops, task);
  if (lazy.trace.first_box_violation < 0) {
    detail = "lazy run never left the box";
    return false;
  }
  detail = "50 epochs feasible; lazy variant first violation at epoch " +
           std::to_string(lazy.trace.first_box_violation);
  return true;
}

// ---------------------------------------------------------------- criterion 5
bool exhaustive_oracle_agreement(std::string& detail) {
  const CellTopology topo = two_input_parallel_topology();
  const OperationSet ops = make_operation_set({"zero", "tanh_linear", "sigmoid_linear"}, 8);
  std::string partial;
  for (const std::string kind : {std::string("blobs"), std::string("two_moons")}) {
    int matches = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const TaskData task = kind == "blobs" ? gen_blobs(300, 2, 0.5, 100 + seed)
                                            : gen_two_moons(400, 0.05, 100 + seed);
      SearchConfig cfg;
      cfg.epochs = 300;
      cfg.arch_step = 0.02;
      cfg.weight_step = 0.25;
      cfg.seed = seed;
      cfg.batch_val = 64;
      cfg.batch_train = 128;
      const SearchResult res = nasp_search(cfg, topo, ops, task);
      if (res.aborted) continue;
      const std::vector<int> sel = selected_ops(res.final_arch);

      // Exhaustive oracle over all 9 discrete architectures; "best" is the
      // argmax set of validation accuracy after full training (desk-scale
      // training ties are real, so set membership is the match test).
      double best_acc = -1.0;
      double nasp_arch_acc = -1.0;
      for (int i = 0; i < 9; ++i) {
        Matrix arch = Matrix::Zero(2, 3);
        arch(0, i % 3) = 1.0;
        arch(1, i / 3) = 1.0;
        const double acc = train_fixed_arch(arch, topo, ops, task, cfg, 300, seed).acc;
        best_acc = std::max(best_acc, acc);
        if (i % 3 == sel[0] && i / 3 == sel[1]) nasp_arch_acc = acc;
      }
      if (nasp_arch_acc == best_acc) ++matches;
    }
    partial += kind + " " + std::to_string(matches) + "/10 ";
    if (matches < 8) {
      detail = partial + "(need >= 8/10)";
      return false;
    }
  }
  detail = partial;
  return true;
}

// ---------------------------------------------------------------- criterion 6
bool stability_direction(std::string& detail) {
  std::vector<double> nasp_switches;
  std::vector<double> darts_switches;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const TaskData task = gen_two_moons(400, 0.1, 100 + seed);
    const CellTopology topo = CellTopology::complete(3);
    const OperationSet ops = default_operation_set(8);
    SearchConfig cfg;
    cfg.epochs = 50;
    cfg.arch_step = 0.005;
    cfg.weight_step = 0.25;
    cfg.seed = seed;
    cfg.batch_val = 16;
    cfg.batch_train = 32;
    const SearchResult nasp = nasp_search(cfg, topo, ops, task);
    const SearchResult darts = darts_search(cfg, topo, ops, task, 1);
    nasp_switches.push_back(static_cast<double>(total_switches(nasp.trace)));
    darts_switches.push_back(static_cast<double>(total_switches(darts.trace)));
  }
  const double mn = median_of(nasp_switches);
  const double md = median_of(darts_switches);
  detail = "median switches " + format_double(mn) + " (discrete shadow) vs " +
           format_double(md) + " (relaxed argmax)";
  return mn <= md;
}

// ---------------------------------------------------------------- criterion 7
bool efficiency_direction(std::string& detail) {
  const TaskData task = gen_two_moons(512, 0.15, 42);
  const CellTopology topo = CellTopology::complete(4);
  const OperationSet ops = default_operation_set(16);
  SearchConfig cfg;
  cfg.epochs = 12;
  cfg.arch_step = 0.02;
  cfg.weight_step = 0.2;
  cfg.seed = 3;

  struct Phases {
    double weight = 0.0;
    double arch = 0.0;
    double total = 0.0;
  };
  auto phase_medians = [](const SearchResult& r, int warmup) {
    std::vector<double> weight, arch, total;
    for (std::size_t e = static_cast<std::size_t>(warmup); e < r.trace.epochs.size(); ++e) {
      const EpochRecord& rec = r.trace.epochs[e];
      weight.push_back(rec.t_weight_forward + rec.t_weight_backward);
      arch.push_back(rec.t_arch_forward + rec.t_arch_backward);
      total.push_back(weight.back() + arch.back());
    }
    return Phases{median_of(weight), median_of(arch), median_of(total)};
  };
  // Scheduler and frequency noise only ever add time, so the three searchers
  // are measured in interleaved repetitions and the smallest median per phase
  // is kept.
  Phases nasp, d1, d2;
  for (int rep = 0; rep < 3; ++rep) {
    const Phases n = phase_medians(nasp_search(cfg, topo, ops, task), 2);
    const Phases one = phase_medians(darts_search(cfg, topo, ops, task, 1), 2);
    const Phases two = phase_medians(darts_search(cfg, topo, ops, task, 2), 2);
    auto keep_min = [rep](Phases& into, const Phases& sample) {
      if (rep == 0) {
        into = sample;
        return;
      }
      into.weight = std::min(into.weight, sample.weight);
      into.arch = std::min(into.arch, sample.arch);
      into.total = std::min(into.total, sample.total);
    };
    keep_min(nasp, n);
    keep_min(d1, one);
    keep_min(d2, two);
  }

  const double weight_ratio = nasp.weight / d1.weight;
  const double order_ratio = d2.arch / d1.arch;
  const bool epoch_order = nasp.total < d1.total && d1.total < d2.total;
  detail = "weight-update ratio " + format_double(weight_ratio) + " (need <= 0.67), " +
           "second/first-order arch ratio " + format_double(order_ratio) +
           " (need >= 1.5), epoch totals " + format_double(1e3 * nasp.total) + " / " +
           format_double(1e3 * d1.total) + " / " + format_double(1e3 * d2.total) + " ms " +
           (epoch_order ? "(ordered)" : "(NOT ordered)");
  return weight_ratio <= 0.67 && order_ratio >= 1.5 && epoch_order;
}

// ---------------------------------------------------------------- criterion 8
bool regularizer_direction(std::string& detail) {
  const CellTopology topo = CellTopology::complete(3);
  const OperationSet ops = default_operation_set(2);
  std::vector<double> medians;
  detail = "median params by eta:";
  for (double eta : {0.0, 0.1, 1.0, 10.0}) {
    std::vector<double> params;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const TaskData task = gen_two_moons(400, 0.15, 100 + seed);
      SearchConfig cfg;
      cfg.epochs = 50;
      cfg.arch_step = 0.05;
      cfg.weight_step = 0.25;
      cfg.seed = seed;
      cfg.eta = eta;
      const SearchResult res = nasp_search(cfg, topo, ops, task);
      params.push_back(res.aborted ? 0.0
                                   : static_cast<double>(
                                         selected_parameter_count(res.final_arch, ops)));
    }
    medians.push_back(median_of(params));
    detail += " " + format_double(medians.back());
  }
  for (std::size_t i = 1; i < medians.size(); ++i) {
    if (medians[i] > medians[i - 1]) return false;
  }
  return true;
}

// ---------------------------------------------------------------- criterion 9
bool pa_ablation_direction(std::string& detail) {
  std::vector<double> acc_std, acc_lazy, acc_nasp;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const TaskData task = gen_spirals(600, 1.25, 0.05, 100 + seed);
    const CellTopology topo = CellTopology::complete(3);
    const OperationSet ops = default_operation_set(12);
    SearchConfig cfg;
    cfg.epochs = 120;
    cfg.arch_step = 0.01;
    cfg.weight_step = 0.25;
    cfg.seed = seed;
    cfg.batch_val = 48;
    cfg.batch_train = 96;
    const SearchResult s = pa_standard_search(cfg, topo, ops, task);
    const SearchResult l = pa_lazy_search(cfg, topo, ops, task);
    const SearchResult n = nasp_search(cfg, topo, ops, task);
    acc_std.push_back(s.aborted ? 0.0 : s.final_val_accuracy);
    acc_lazy.push_back(l.aborted ? 0.0 : l.final_val_accuracy);
    acc_nasp.push_back(n.aborted ? 0.0 : n.final_val_accuracy);
  }
  const double ms = median_of(acc_std);
  const double ml = median_of(acc_lazy);
  const double mn = median_of(acc_nasp);
  detail = "median val accuracy: standard " + format_double(ms) + ", lazy " + format_double(ml) +
           ", proximal-boxed " + format_double(mn);
  return ms <= ml + 0.02 && ml <= mn + 0.02;
}

// --------------------------------------------------------------- criterion 10
bool completeness(std::string& detail) {
  const TaskData task = gen_two_moons(300, 0.12, 21);
  const CellTopology topo = CellTopology::complete(3);
  const OperationSet ops = default_operation_set(2);
  SearchConfig cfg;
  cfg.epochs = 30;
  cfg.arch_step = 0.05;
  cfg.weight_step = 0.25;
  cfg.seed = 5;

  const SearchResult nasp = nasp_search(cfg, topo, ops, task);
  if (nasp.aborted) {
    detail = "proximal run aborted";
    return false;
  }
  const Matrix& final_a = nasp.trace.epochs.back().arch;
  const Matrix derived = prox_cardinality_rows(final_a);
  if (derived != nasp.final_arch) {
    detail = "returned architecture is not the projection of the final parameters";
    return false;
  }

  const SearchResult darts = darts_search(cfg, topo, ops, task, 1);
  double max_gap = 0.0;
  for (const EpochRecord& e : darts.trace.epochs) {
    if (e.discretization_gap < 0.0) {
      detail = "negative discretization gap";
      return false;
    }
    max_gap = std::max(max_gap, e.discretization_gap);
  }
  detail = "returned architecture bit-equal to projected parameters; max relaxed-vs-derived gap " +
           format_double(max_gap);
  return true;
}

// --------------------------------------------------------------- criterion 11
bool reproducibility(std::string& detail) {
  const std::string config_text = R"(
[task]
kind = two_moons
n = 240
noise = 0.12
seed = 9

[space]
topology = complete
nodes = 3
width = 2
operations = default7

[algorithm]
kind = nasp
epochs = 18
arch_step = 0.05
seed = 4

[optimizer]
weight_step = 0.25

[output]
checkpoint_every = 6
retrain_epochs = 40
)";
  RunConfig cfg = parse_config_text(config_text);
  const fs::path base = fs::temp_directory_path() / "proxnas_acceptance_repro";
  fs::remove_all(base);

  const RunOutcome a = run(cfg, base / "a", true);
  const RunOutcome b = run(cfg, base / "b", true);
  if (report_json(a.report, true) != report_json(b.report, true)) {
    detail = "identical config+seed produced different canonical reports";
    return false;
  }

  const fs::path mid = base / "a" / "checkpoint_epoch12.bin";
  if (!fs::exists(mid)) {
    detail = "expected mid-run checkpoint missing";
    return false;
  }
  const RunOutcome resumed = resume(mid, base / "c", true);
  if (report_json(resumed.report, true) != report_json(a.report, true)) {
    detail = "resumed run diverged from the uninterrupted run";
    return false;
  }
  if (resumed.result.final_arch != a.result.final_arch) {
    detail = "resumed final architecture differs";
    return false;
  }
  fs::remove_all(base);
  detail = "rerun and resume both reproduce the canonical report exactly";
  return true;
}

// Gradient-check case tables (criterion 3). Structured like the unit suite
// but assembled here so the acceptance binary is self-contained.
std::vector<GradCase> primitive_cases() {
  std::vector<GradCase> cases;
  auto unary = [](auto record, bool away_from_zero) {
    return [record, away_from_zero](Rng& rng) {
      const int r = 1 + static_cast<int>(rng.below(4));
      const int c = 1 + static_cast<int>(rng.below(4));
      const Matrix x0 = away_from_zero ? random_matrix_away_from_zero(r, c, rng)
                                       : random_matrix(r, c, rng, -2.0, 2.0);
      auto build = [&](const Matrix& x) {
        Tape t;
        Var xv = t.input(x);
        return t.scalar(t.sum(record(t, xv)));
      };
      Tape t;
      Var xv = t.input(x0);
      Var s = t.sum(record(t, xv));
      return check_gradient(build, x0, t.gradient(s, std::span<const Var>(&xv, 1))[0]);
    };
  };
  cases.push_back({"relu", unary([](Tape& t, Var v) { return t.relu(v); }, true)});
  cases.push_back({"tanh", unary([](Tape& t, Var v) { return t.tanh(v); }, false)});
  cases.push_back({"sigmoid", unary([](Tape& t, Var v) { return t.sigmoid(v); }, false)});
  cases.push_back({"scale", unary([](Tape& t, Var v) { return t.scale(v, 2.3); }, false)});
  cases.push_back({"sum", unary([](Tape& t, Var v) { return v; }, false)});
  cases.push_back({"matmul", [](Rng& rng) {
                     const Matrix a0 = random_matrix(3, 4, rng);
                     const Matrix b = random_matrix(4, 2, rng);
                     auto build = [&](const Matrix& a) {
                       Tape t;
                       return t.scalar(t.sum(t.tanh(t.matmul(t.input(a), t.input(b)))));
                     };
                     Tape t;
                     Var av = t.input(a0);
                     Var s = t.sum(t.tanh(t.matmul(av, t.input(b))));
                     return check_gradient(build, a0,
                                           t.gradient(s, std::span<const Var>(&av, 1))[0]);
                   }});
  cases.push_back({"add", [](Rng& rng) {
                     const Matrix a0 = random_matrix(3, 3, rng);
                     const Matrix b = random_matrix(3, 3, rng);
                     const Matrix c = random_matrix(3, 3, rng);
                     auto build = [&](const Matrix& a) {
                       Tape t;
                       return t.scalar(
                           t.sum(t.multiply(t.add(t.input(a), t.input(b)), t.input(c))));
                     };
                     Tape t;
                     Var av = t.input(a0);
                     Var s = t.sum(t.multiply(t.add(av, t.input(b)), t.input(c)));
                     return check_gradient(build, a0,
                                           t.gradient(s, std::span<const Var>(&av, 1))[0]);
                   }});
  cases.push_back({"multiply", [](Rng& rng) {
                     const Matrix a0 = random_matrix(2, 5, rng);
                     const Matrix b = random_matrix(2, 5, rng);
                     auto build = [&](const Matrix& a) {
                       Tape t;
                       return t.scalar(t.sum(t.multiply(t.input(a), t.input(b))));
                     };
                     Tape t;
                     Var av = t.input(a0);
                     Var s = t.sum(t.multiply(av, t.input(b)));
                     return check_gradient(build, a0,
                                           t.gradient(s, std::span<const Var>(&av, 1))[0]);
                   }});
  cases.push_back({"multiply-broadcast", [](Rng& rng) {
                     const Matrix c0 = random_matrix(1, 1, rng);
                     const Matrix b = random_matrix(3, 4, rng);
                     auto build = [&](const Matrix& c) {
                       Tape t;
                       return t.scalar(t.sum(t.tanh(t.multiply(t.input(c), t.input(b)))));
                     };
                     Tape t;
                     Var cv = t.input(c0);
                     Var s = t.sum(t.tanh(t.multiply(cv, t.input(b))));
                     return check_gradient(build, c0,
                                           t.gradient(s, std::span<const Var>(&cv, 1))[0]);
                   }});
  cases.push_back({"softmax-rows", [](Rng& rng) {
                     const Matrix a0 = random_matrix(3, 5, rng, -2.0, 2.0);
                     const Matrix c = random_matrix(3, 5, rng);
                     auto build = [&](const Matrix& a) {
                       Tape t;
                       return t.scalar(t.sum(t.multiply(t.softmax_rows(t.input(a)), t.input(c))));
                     };
                     Tape t;
                     Var av = t.input(a0);
                     Var s = t.sum(t.multiply(t.softmax_rows(av), t.input(c)));
                     return check_gradient(build, a0,
                                           t.gradient(s, std::span<const Var>(&av, 1))[0]);
                   }});
  cases.push_back({"entry", [](Rng& rng) {
                     const Matrix a0 = random_matrix(3, 3, rng);
                     const Matrix b = random_matrix(3, 3, rng);
                     const int i = static_cast<int>(rng.below(3));
                     const int j = static_cast<int>(rng.below(3));
                     auto build = [&](const Matrix& a) {
                       Tape t;
                       return t.scalar(t.entry(t.tanh(t.matmul(t.input(a), t.input(b))), i, j));
                     };
                     Tape t;
                     Var av = t.input(a0);
                     Var s = t.entry(t.tanh(t.matmul(av, t.input(b))), i, j);
                     return check_gradient(build, a0,
                                           t.gradient(s, std::span<const Var>(&av, 1))[0]);
                   }});
  cases.push_back({"softmax-cross-entropy", [](Rng& rng) {
                     const int n = 2 + static_cast<int>(rng.below(4));
                     const int k = 2 + static_cast<int>(rng.below(3));
                     const Matrix l0 = random_matrix(n, k, rng, -2.0, 2.0);
                     IntVector labels(n);
                     for (int i = 0; i < n; ++i) {
                       labels(i) = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
                     }
                     auto build = [&](const Matrix& l) {
                       Tape t;
                       return t.scalar(t.softmax_cross_entropy(t.input(l), labels));
                     };
                     Tape t;
                     Var lv = t.input(l0);
                     Var s = t.softmax_cross_entropy(lv, labels);
                     return check_gradient(build, l0,
                                           t.gradient(s, std::span<const Var>(&lv, 1))[0]);
                   }});
  cases.push_back({"mean-squared-error", [](Rng& rng) {
                     const Matrix p0 = random_matrix(4, 3, rng);
                     const Matrix target = random_matrix(4, 3, rng);
                     auto build = [&](const Matrix& p) {
                       Tape t;
                       return t.scalar(t.mean_squared_error(t.input(p), target));
                     };
                     Tape t;
                     Var pv = t.input(p0);
                     Var s = t.mean_squared_error(pv, target);
                     return check_gradient(build, p0,
                                           t.gradient(s, std::span<const Var>(&pv, 1))[0]);
                   }});
  return cases;
}

struct ObjectiveFixture {
  CellTopology topo = CellTopology::chain(3);
  OperationSet ops = make_operation_set({"linear", "tanh_linear", "identity"}, 2);
  SupernetState state;
  Matrix x;
  IntVector y;

  explicit ObjectiveFixture(std::uint64_t seed) {
    Rng rng(seed);
    state = SupernetState::initialize(topo, ops, 2, 2, 2, rng);
    x = random_matrix(6, 2, rng);
    y.resize(6);
    for (int i = 0; i < 6; ++i) y(i) = static_cast<int>(rng.below(2));
  }
};

std::vector<GradCase> objective_cases() {
  std::vector<GradCase> cases;
  for (const double eta : {0.0, 0.7}) {
    const std::string tag = eta == 0.0 ? " (plain)" : " (with size penalty)";
    cases.push_back({"relaxed arch gradient" + tag, [eta](Rng& rng) {
                       ObjectiveFixture f(1000 + rng.below(4096));
                       const RegularizerSpec reg{eta, param_counts(f.ops), 8};
                       const Matrix arch0 = random_matrix(2, 3, rng, -1.0, 1.0);
                       auto build = [&](const Matrix& a) {
                         return search_objective(f.topo, f.ops, a, f.state, MixMode::Softmax,
                                                 f.x, f.y, 2, LossKind::CrossEntropy, reg);
                       };
                       AssembledLoss al =
                           assemble_loss(f.topo, f.ops, arch0, f.state, MixMode::Softmax, f.x,
                                         f.y, 2, LossKind::CrossEntropy);
                       const Var av = al.net.arch;
                       Matrix g = al.net.tape.gradient(al.loss, std::span<const Var>(&av, 1))[0];
                       if (eta > 0.0) g += eta * regularizer_gradient(arch0, reg);
                       return check_gradient(build, arch0, g);
                     }});
    cases.push_back({"discrete arch gradient" + tag, [eta](Rng& rng) {
                       ObjectiveFixture f(2000 + rng.below(4096));
                       const RegularizerSpec reg{eta, param_counts(f.ops), 8};
                       Matrix arch = Matrix::Zero(2, 3);
                       std::vector<std::pair<int, int>> picks;
                       for (int e = 0; e < 2; ++e) {
                         const int k = static_cast<int>(rng.below(3));
                         arch(e, k) = rng.uniform(0.3, 0.9);
                         picks.emplace_back(e, k);
                       }
                       AssembledLoss al =
                           assemble_loss(f.topo, f.ops, arch, f.state, MixMode::Discrete, f.x,
                                         f.y, 2, LossKind::CrossEntropy);
                       const Var av = al.net.arch;
                       Matrix g = al.net.tape.gradient(al.loss, std::span<const Var>(&av, 1))[0];
                       if (eta > 0.0) g += eta * regularizer_gradient(arch, reg);
                       double worst = 0.0;
                       for (const auto& pick : picks) {
                         const int e = pick.first;
                         const int k = pick.second;
                         auto f1 = [&](const Matrix& c) {
                           Matrix a = arch;
                           a(e, k) = c(0, 0);
                           const double loss =
                               evaluate_loss(f.topo, f.ops, a, f.state, MixMode::Discrete, f.x,
                                             f.y, 2, LossKind::CrossEntropy)
                                   .loss;
                           return loss + eta * regularizer(a, reg);
                         };
                         const Matrix fd = finite_difference_gradient(
                             f1, Matrix::Constant(1, 1, arch(e, k)), kFdStep);
                         worst = std::max(worst, std::abs(g(e, k) - fd(0, 0)) /
                                                     std::max(1.0, std::abs(fd(0, 0))));
                       }
                       return worst;
                     }});
  }
  for (const MixMode mode : {MixMode::Softmax, MixMode::Discrete}) {
    const std::string tag = mode == MixMode::Softmax ? "relaxed" : "discrete";
    cases.push_back({"weight gradient (" + tag + ")", [mode](Rng& rng) {
                       ObjectiveFixture f(3000 + rng.below(4096));
                       Matrix arch;
                       if (mode == MixMode::Softmax) {
                         arch = random_matrix(2, 3, rng, -0.5, 0.5);
                       } else {
                         arch = Matrix::Zero(2, 3);
                         for (int e = 0; e < 2; ++e) {
                           arch(e, static_cast<int>(rng.below(3))) = rng.uniform(0.3, 0.9);
                         }
                       }
                       AssembledLoss al = assemble_loss(f.topo, f.ops, arch, f.state, mode, f.x,
                                                        f.y, 2, LossKind::CrossEntropy);
                       const std::vector<Matrix> grads =
                           al.net.tape.gradient(al.loss, al.net.weight_vars);
                       // Check one rotating weight array per instance.
                       const std::size_t pick = rng.below(al.net.weight_vars.size());
                       const WeightKey key = al.net.weight_keys[pick];
                       SupernetState probe = f.state;
                       Matrix* target =
                           key.edge == WeightKey::kHead
                               ? &probe.head
                               : &probe.weights[static_cast<std::size_t>(key.edge)]
                                               [static_cast<std::size_t>(key.op)]
                                               [static_cast<std::size_t>(key.array)];
                       const Matrix w0 = *target;
                       auto build = [&](const Matrix& w) {
                         *target = w;
                         return evaluate_loss(f.topo, f.ops, arch, probe, mode, f.x, f.y, 2,
                                              LossKind::CrossEntropy)
                             .loss;
                       };
                       return check_gradient(build, w0, grads[pick]);
                     }});
  }
  return cases;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "prox closed form equals the brute-force oracle", 1.0, prox_oracle_equivalence},
      {2, "cardinality-after-box composition matches the oracle", 1.0, proposition_composition},
      {3, "all gradients match central finite differences (1e-5)", 30.0, gradient_correctness},
      {4, "proximal iterates stay feasible; lazy variant leaves the box", 0.0,
       feasibility_invariants},
      {5, "search agrees with the exhaustive-enumeration oracle (>=8/10 seeds)", 300.0,
       exhaustive_oracle_agreement},
      {6, "discrete shadow switches no more than the relaxed argmax", 600.0,
       stability_direction},
      {7, "discrete weight updates are cheap; second order is expensive", 300.0,
       efficiency_direction},
      {8, "selected model size is nonincreasing in the penalty weight", 600.0,
       regularizer_direction},
      {9, "standard <= lazy <= boxed proximal on spirals (median accuracy)", 0.0,
       pa_ablation_direction},
      {10, "returned architecture is complete; relaxed gap is nonnegative", 0.0, completeness},
      {11, "reruns and checkpoint resumes reproduce reports exactly", 0.0, reproducibility},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = Clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    if (ok && c.budget_seconds > 0.0 && elapsed > c.budget_seconds) {
      ok = false;
      detail += " [over budget " + format_double(c.budget_seconds) + "s]";
    }
    std::printf("[%s] %2d. %s -- %s (%.1fs)\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
                detail.c_str(), elapsed);
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  if (failed > 0) {
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
