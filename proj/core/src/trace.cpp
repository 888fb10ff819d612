#include "proxnas/trace.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace proxnas {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int SearchTrace::edge_count() const {
  return epochs.empty() ? 0 : static_cast<int>(epochs.front().arch.rows());
}

int SearchTrace::op_count() const {
  return epochs.empty() ? 0 : static_cast<int>(epochs.front().arch.cols());
}

std::vector<long> switch_counts(const SearchTrace& trace) {
  std::vector<long> counts(static_cast<std::size_t>(trace.edge_count()), 0);
  for (std::size_t t = 1; t < trace.epochs.size(); ++t) {
    const auto& prev = trace.epochs[t - 1].selected;
    const auto& cur = trace.epochs[t].selected;
    for (std::size_t e = 0; e < counts.size(); ++e) {
      if (cur[e] != prev[e]) ++counts[e];
    }
  }
  return counts;
}

long total_switches(const SearchTrace& trace) {
  long total = 0;
  for (long c : switch_counts(trace)) total += c;
  return total;
}

void write_trace_csv(const SearchTrace& trace, std::ostream& out) {
  const int edges = trace.edge_count();
  const int ops = trace.op_count();
  out << "epoch,train_loss,val_loss,val_loss_discrete,discretization_gap,box_violation,"
         "t_arch_forward,t_arch_backward,t_weight_forward,t_weight_backward,"
         "arch_builder_calls,weight_builder_calls";
  for (int e = 0; e < edges; ++e) out << ",sel_" << e;
  for (int e = 0; e < edges; ++e) {
    for (int k = 0; k < ops; ++k) out << ",a_" << e << "_" << k;
  }
  for (int e = 0; e < edges; ++e) {
    for (int k = 0; k < ops; ++k) out << ",abar_" << e << "_" << k;
  }
  out << "\n";
  for (const EpochRecord& r : trace.epochs) {
    out << r.epoch << "," << format_double(r.train_loss) << "," << format_double(r.val_loss)
        << "," << format_double(r.val_loss_discrete) << ","
        << format_double(r.discretization_gap) << "," << (r.box_violation ? 1 : 0) << ","
        << format_double(r.t_arch_forward) << "," << format_double(r.t_arch_backward) << ","
        << format_double(r.t_weight_forward) << "," << format_double(r.t_weight_backward) << ","
        << r.arch_builder_calls << "," << r.weight_builder_calls;
    for (int e = 0; e < edges; ++e) out << "," << r.selected[static_cast<std::size_t>(e)];
    for (int e = 0; e < edges; ++e) {
      for (int k = 0; k < ops; ++k) out << "," << format_double(r.arch(e, k));
    }
    for (int e = 0; e < edges; ++e) {
      for (int k = 0; k < ops; ++k) out << "," << format_double(r.arch_discrete(e, k));
    }
    out << "\n";
  }
}

void write_trace_csv(const SearchTrace& trace, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_trace_csv: cannot open " + path);
  write_trace_csv(trace, f);
}

SearchTrace read_trace_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_trace_csv: cannot open " + path);
  std::string header;
  if (!std::getline(f, header)) throw std::runtime_error("read_trace_csv: empty file " + path);

  std::vector<std::string> columns;
  {
    std::stringstream ss(header);
    std::string cell;
    while (std::getline(ss, cell, ',')) columns.push_back(cell);
  }
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < columns.size(); ++i) index[columns[i]] = static_cast<int>(i);

  int edges = 0;
  while (index.count("sel_" + std::to_string(edges)) != 0) ++edges;
  int ops = 0;
  while (index.count("a_0_" + std::to_string(ops)) != 0) ++ops;
  if (edges == 0 || ops == 0) {
    throw std::runtime_error("read_trace_csv: " + path + " is not a search trace");
  }

  SearchTrace trace;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns.size()) {
      throw std::runtime_error("read_trace_csv: row with " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(columns.size()));
    }
    auto num = [&](const std::string& name) { return std::stod(cells[static_cast<std::size_t>(index.at(name))]); };
    EpochRecord r;
    r.epoch = static_cast<int>(num("epoch"));
    r.train_loss = num("train_loss");
    r.val_loss = num("val_loss");
    r.val_loss_discrete = num("val_loss_discrete");
    r.discretization_gap = num("discretization_gap");
    r.box_violation = num("box_violation") != 0.0;
    r.t_arch_forward = num("t_arch_forward");
    r.t_arch_backward = num("t_arch_backward");
    r.t_weight_forward = num("t_weight_forward");
    r.t_weight_backward = num("t_weight_backward");
    r.arch_builder_calls = static_cast<long>(num("arch_builder_calls"));
    r.weight_builder_calls = static_cast<long>(num("weight_builder_calls"));
    r.selected.resize(static_cast<std::size_t>(edges));
    r.arch.resize(edges, ops);
    r.arch_discrete.resize(edges, ops);
    for (int e = 0; e < edges; ++e) {
      r.selected[static_cast<std::size_t>(e)] = static_cast<int>(num("sel_" + std::to_string(e)));
      for (int k = 0; k < ops; ++k) {
        r.arch(e, k) = num("a_" + std::to_string(e) + "_" + std::to_string(k));
        r.arch_discrete(e, k) = num("abar_" + std::to_string(e) + "_" + std::to_string(k));
      }
    }
    trace.epochs.push_back(std::move(r));
  }
  for (std::size_t t = 0; t < trace.epochs.size(); ++t) {
    if (trace.epochs[t].box_violation) {
      trace.first_box_violation = trace.epochs[t].epoch;
      break;
    }
  }
  return trace;
}

long export_trajectory(const SearchTrace& trace, std::ostream& out) {
  if (trace.epochs.empty()) throw std::invalid_argument("export_trajectory: empty trace");
  out << "epoch,edge,op,value,selected\n";
  long rows = 0;
  for (const EpochRecord& r : trace.epochs) {
    for (Eigen::Index e = 0; e < r.arch.rows(); ++e) {
      for (Eigen::Index k = 0; k < r.arch.cols(); ++k) {
        const int sel = r.selected[static_cast<std::size_t>(e)] == static_cast<int>(k) ? 1 : 0;
        out << r.epoch << "," << e << "," << k << "," << format_double(r.arch(e, k)) << "," << sel
            << "\n";
        ++rows;
      }
    }
  }
  return rows;
}

long export_trajectory(const SearchTrace& trace, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("export_trajectory: cannot open " + path);
  return export_trajectory(trace, f);
}

void write_switch_summary(const SearchTrace& trace, std::ostream& out) {
  out << "edge,switches\n";
  const std::vector<long> counts = switch_counts(trace);
  for (std::size_t e = 0; e < counts.size(); ++e) out << e << "," << counts[e] << "\n";
}

void write_switch_summary(const SearchTrace& trace, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_switch_summary: cannot open " + path);
  write_switch_summary(trace, f);
}

}  // namespace proxnas
