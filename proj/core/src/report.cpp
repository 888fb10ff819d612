#include "proxnas/report.hpp"

#include <algorithm>

#include <json.hpp>

#include "proxnas/trace.hpp"

namespace proxnas {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

RunReport build_report(const RunConfig& config, const TaskData& task, const OperationSet& ops,
                       const CellTopology& topo, const SearchResult& result,
                       const RetrainMetrics* retrain) {
  RunReport rep;
  rep.config_text = config.normalized_text();
  rep.algorithm = config.algorithm;
  rep.task_name = task.name;
  rep.task_rows = static_cast<int>(task.features.rows());
  rep.classes = task.classes;
  rep.train_rows = static_cast<int>(task.train_idx.size());
  rep.val_rows = static_cast<int>(task.val_idx.size());
  rep.test_rows = static_cast<int>(task.test_idx.size());

  if (result.final_arch.size() != 0 && is_discrete(result.final_arch)) {
    const std::vector<int> sel = selected_ops(result.final_arch);
    for (int e = 0; e < topo.edge_count(); ++e) {
      RunReport::EdgeChoice choice;
      choice.from = topo.edges[static_cast<std::size_t>(e)].first;
      choice.to = topo.edges[static_cast<std::size_t>(e)].second;
      choice.op = ops[static_cast<std::size_t>(sel[static_cast<std::size_t>(e)])].name;
      choice.coefficient = result.final_arch(e, sel[static_cast<std::size_t>(e)]);
      rep.architecture.push_back(choice);
    }
    rep.selected_param_count = selected_parameter_count(result.final_arch, ops);
  }

  rep.epochs_run = static_cast<int>(result.trace.epochs.size());
  rep.aborted = result.aborted;
  rep.abort_reason = result.message;
  if (!result.trace.epochs.empty()) {
    rep.final_train_loss = result.trace.epochs.back().train_loss;
  }
  rep.final_val_loss = result.final_val_loss;
  rep.final_val_accuracy = result.final_val_accuracy;
  rep.switch_counts = switch_counts(result.trace);
  if (!result.trace.epochs.empty()) {
    double gap = 0.0;
    for (const auto& e : result.trace.epochs) gap += e.discretization_gap;
    rep.mean_discretization_gap = gap / static_cast<double>(result.trace.epochs.size());
  }
  if (retrain != nullptr) {
    rep.retrain_test_loss = retrain->test_loss;
    rep.retrain_test_accuracy = retrain->test_accuracy;
  }

  rep.total_seconds = result.total_seconds;
  std::vector<double> af, ab, wf, wb;
  for (const auto& e : result.trace.epochs) {
    af.push_back(e.t_arch_forward);
    ab.push_back(e.t_arch_backward);
    wf.push_back(e.t_weight_forward);
    wb.push_back(e.t_weight_backward);
  }
  rep.median_arch_forward = median(af);
  rep.median_arch_backward = median(ab);
  rep.median_weight_forward = median(wf);
  rep.median_weight_backward = median(wb);
  return rep;
}

std::string report_json(const RunReport& rep, bool canonical) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["config"] = rep.config_text;
  j["algorithm"] = rep.algorithm;
  j["task"] = {{"name", rep.task_name},
               {"rows", rep.task_rows},
               {"classes", rep.classes},
               {"train_rows", rep.train_rows},
               {"val_rows", rep.val_rows},
               {"test_rows", rep.test_rows}};
  nlohmann::json arch = nlohmann::json::array();
  for (const auto& c : rep.architecture) {
    arch.push_back({{"edge", std::to_string(c.from) + "->" + std::to_string(c.to)},
                    {"op", c.op},
                    {"coefficient", c.coefficient}});
  }
  j["architecture"] = arch;
  j["selected_param_count"] = rep.selected_param_count;
  j["search"] = {{"epochs_run", rep.epochs_run},
                 {"aborted", rep.aborted},
                 {"abort_reason", rep.abort_reason},
                 {"final_train_loss", rep.final_train_loss},
                 {"final_val_loss", rep.final_val_loss},
                 {"final_val_accuracy", rep.final_val_accuracy},
                 {"switch_counts", rep.switch_counts},
                 {"mean_discretization_gap", rep.mean_discretization_gap}};
  j["retrain"] = {{"test_loss", rep.retrain_test_loss},
                  {"test_accuracy", rep.retrain_test_accuracy}};
  j["artifacts"] = rep.artifacts;
  if (!canonical) {
    j["timing"] = {{"total_seconds", rep.total_seconds},
                   {"median_arch_forward", rep.median_arch_forward},
                   {"median_arch_backward", rep.median_arch_backward},
                   {"median_weight_forward", rep.median_weight_forward},
                   {"median_weight_backward", rep.median_weight_backward}};
  }
  return j.dump(2);
}

}  // namespace proxnas
