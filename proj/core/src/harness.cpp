#include "proxnas/harness.hpp"

#include <fstream>
#include <iostream>

#include "proxnas/trace.hpp"

namespace proxnas {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
}

RunOutcome execute(const RunConfig& config, const fs::path& out_dir, bool quiet,
                   const SearchState* resume_state) {
  fs::create_directories(out_dir);
  const TaskData task = config.make_task();
  const CellTopology topo = config.make_topology();
  const OperationSet ops = config.make_operations(task.feature_dim());
  const SearchConfig sc = config.search_config();
  const std::string config_text = config.normalized_text();

  const fs::path checkpoint_path = out_dir / "checkpoint.bin";
  Checkpoint last;
  last.config_text = config_text;
  if (resume_state != nullptr) last.state = *resume_state;
  EpochHook hook = [&](const SearchState& st) {
    last.state = st;
    const bool periodic = config.checkpoint_every > 0 &&
                          st.next_epoch % config.checkpoint_every == 0 &&
                          st.next_epoch < config.epochs;
    if (periodic) {
      save_checkpoint(last, (out_dir / ("checkpoint_epoch" + std::to_string(st.next_epoch) +
                                        ".bin"))
                                .string());
    }
  };

  SearchResult result = run_search(sc, topo, ops, task, resume_state, hook);

  RetrainMetrics retrain;
  bool have_retrain = false;
  if (!result.aborted && result.final_arch.size() != 0) {
    retrain = retrain_final(result.final_arch, sc, topo, ops, task, config.retrain_epochs);
    have_retrain = true;
  }

  RunOutcome outcome;
  outcome.report = build_report(config, task, ops, topo, result, have_retrain ? &retrain : nullptr);
  outcome.report.artifacts = {"report.json", "trace.csv", "checkpoint.bin"};
  outcome.trace_path = out_dir / "trace.csv";
  outcome.report_path = out_dir / "report.json";
  outcome.checkpoint_path = checkpoint_path;

  write_trace_csv(result.trace, outcome.trace_path.string());
  write_text(outcome.report_path, report_json(outcome.report, false));
  // The hook keeps the complete optimizer/rng state of the last finished
  // epoch; the aborted case retains whatever progress was made.
  last.state.trace = result.trace;
  save_checkpoint(last, checkpoint_path.string());

  outcome.result = std::move(result);
  outcome.exit_code = outcome.result.aborted ? kNumericalAbort : kOk;

  if (!quiet) {
    std::cout << "algorithm: " << config.algorithm << "  task: " << task.name << "\n";
    if (outcome.result.aborted) {
      std::cout << "aborted: " << outcome.result.message << "\n";
    } else {
      std::cout << "final val loss " << outcome.report.final_val_loss << ", accuracy "
                << outcome.report.final_val_accuracy << "\n";
      for (const auto& c : outcome.report.architecture) {
        std::cout << "  edge " << c.from << "->" << c.to << ": " << c.op << " ("
                  << c.coefficient << ")\n";
      }
      if (have_retrain) {
        std::cout << "retrain test accuracy " << retrain.test_accuracy << "\n";
      }
    }
    std::cout << "artifacts in " << out_dir.string() << "\n";
  }
  return outcome;
}

}  // namespace

RunOutcome run(const RunConfig& config, const fs::path& out_dir, bool quiet) {
  return execute(config, out_dir, quiet, nullptr);
}

RunOutcome resume(const fs::path& checkpoint_path, const std::optional<fs::path>& out_dir,
                  bool quiet) {
  const Checkpoint cp = load_checkpoint(checkpoint_path.string());
  RunConfig config = parse_config_text(cp.config_text);
  const fs::path dir = out_dir.value_or(fs::path(config.out_dir));
  if (cp.state.next_epoch >= config.epochs && cp.state.trace.epochs.size() >=
                                                  static_cast<std::size_t>(config.epochs)) {
    if (!quiet) std::cout << "checkpoint already covers all configured epochs; re-finalizing\n";
  }
  return execute(config, dir, quiet, &cp.state);
}

SweepTable sweep_eta(const RunConfig& config, const std::vector<double>& etas,
                     const fs::path& out_dir, bool quiet) {
  if (etas.empty()) throw ConfigError("etas", "need at least one eta value");
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (etas[i] < 0.0) throw ConfigError("etas", "eta values must be nonnegative");
    if (i > 0 && etas[i] < etas[i - 1]) throw ConfigError("etas", "eta values must be ascending");
  }
  fs::create_directories(out_dir);

  const TaskData task = config.make_task();
  const CellTopology topo = config.make_topology();
  const OperationSet ops = config.make_operations(task.feature_dim());

  SweepTable table;
  for (double eta : etas) {
    std::vector<double> params;
    std::vector<double> accs;
    for (std::uint64_t seed : config.seed_list()) {
      RunConfig rc = config;
      rc.eta = eta;
      rc.seed = seed;
      SearchConfig sc = rc.search_config();
      SearchResult res = run_search(sc, topo, ops, task);
      SweepRow row;
      row.eta = eta;
      row.seed = seed;
      if (!res.aborted && res.final_arch.size() != 0) {
        row.selected_param_count = selected_parameter_count(res.final_arch, ops);
        const RetrainMetrics m =
            retrain_final(res.final_arch, sc, topo, ops, task, config.retrain_epochs);
        row.test_accuracy = m.test_accuracy;
        row.val_accuracy = res.final_val_accuracy;
      }
      params.push_back(static_cast<double>(row.selected_param_count));
      accs.push_back(row.test_accuracy);
      table.rows.push_back(row);
      if (!quiet) {
        std::cout << "eta " << eta << " seed " << seed << ": params "
                  << row.selected_param_count << ", test acc " << row.test_accuracy << "\n";
      }
    }
    SweepTable::Summary s;
    s.eta = eta;
    double psum = 0.0;
    double asum = 0.0;
    for (double p : params) psum += p;
    for (double a : accs) asum += a;
    s.mean_param_count = psum / static_cast<double>(params.size());
    s.median_param_count = median(params);
    s.mean_test_accuracy = asum / static_cast<double>(accs.size());
    table.summaries.push_back(s);
  }

  {
    std::ofstream f(out_dir / "sweep.csv");
    f << "eta,seed,selected_param_count,test_accuracy,val_accuracy\n";
    for (const auto& r : table.rows) {
      f << format_double(r.eta) << "," << r.seed << "," << r.selected_param_count << ","
        << format_double(r.test_accuracy) << "," << format_double(r.val_accuracy) << "\n";
    }
  }
  {
    std::ofstream f(out_dir / "sweep_summary.csv");
    f << "eta,mean_selected_param_count,mean_test_accuracy\n";
    for (const auto& s : table.summaries) {
      f << format_double(s.eta) << "," << format_double(s.mean_param_count) << ","
        << format_double(s.mean_test_accuracy) << "\n";
    }
  }
  return table;
}

std::vector<TimingRow> benchmark_timing(const RunConfig& config, const fs::path& out_dir,
                                        bool quiet) {
  if (config.epochs <= config.bench_warmup) {
    throw ConfigError("algorithm.epochs",
                      "bench needs epochs > bench_warmup (warm-up epochs are excluded)");
  }
  fs::create_directories(out_dir);
  const TaskData task = config.make_task();
  const CellTopology topo = config.make_topology();
  const OperationSet ops = config.make_operations(task.feature_dim());

  std::vector<TimingRow> rows;
  for (const std::string algo : {"nasp", "darts1", "darts2"}) {
    RunConfig rc = config;
    rc.algorithm = algo;
    SearchConfig sc = rc.search_config();
    SearchResult res = run_search(sc, topo, ops, task);
    std::vector<double> af, ab, wf, wb, tot;
    for (std::size_t e = static_cast<std::size_t>(config.bench_warmup);
         e < res.trace.epochs.size(); ++e) {
      const EpochRecord& r = res.trace.epochs[e];
      af.push_back(r.t_arch_forward);
      ab.push_back(r.t_arch_backward);
      wf.push_back(r.t_weight_forward);
      wb.push_back(r.t_weight_backward);
      tot.push_back(r.t_arch_forward + r.t_arch_backward + r.t_weight_forward +
                    r.t_weight_backward);
    }
    TimingRow row;
    row.algorithm = algo;
    row.arch_forward = median(af);
    row.arch_backward = median(ab);
    row.weight_forward = median(wf);
    row.weight_backward = median(wb);
    row.epoch_total = median(tot);
    rows.push_back(row);
    if (!quiet) {
      std::cout << algo << ": arch " << row.arch_forward + row.arch_backward << "s, weights "
                << row.weight_forward + row.weight_backward << "s per epoch (median)\n";
    }
  }

  std::ofstream f(out_dir / "bench.csv");
  f << "algorithm,arch_forward,arch_backward,weight_forward,weight_backward,epoch_total\n";
  for (const auto& r : rows) {
    f << r.algorithm << "," << format_double(r.arch_forward) << ","
      << format_double(r.arch_backward) << "," << format_double(r.weight_forward) << ","
      << format_double(r.weight_backward) << "," << format_double(r.epoch_total) << "\n";
  }
  return rows;
}

void export_trajectory_files(const fs::path& trace_csv, const fs::path& out_csv, bool quiet) {
  const SearchTrace trace = read_trace_csv(trace_csv.string());
  const long rows = export_trajectory(trace, out_csv.string());
  fs::path switches = out_csv;
  switches.replace_filename(out_csv.stem().string() + "-switches.csv");
  write_switch_summary(trace, switches.string());
  if (!quiet) {
    std::cout << "wrote " << rows << " trajectory rows to " << out_csv.string() << " and switch"
              << " counts to " << switches.string() << "\n";
  }
}

}  // namespace proxnas
