#include "proxnas/tasks.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "proxnas/rng.hpp"

namespace proxnas {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

/// Shuffles row indices and assigns 50% train / 25% val / 25% test.
void split_rows(TaskData& task, Rng& rng, std::array<double, 3> fractions) {
  const int n = static_cast<int>(task.features.rows());
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  const int n_train = static_cast<int>(std::llround(fractions[0] * n));
  const int n_val = static_cast<int>(std::llround(fractions[1] * n));
  task.train_idx.assign(order.begin(), order.begin() + n_train);
  task.val_idx.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  task.test_idx.assign(order.begin() + n_train + n_val, order.end());
}

void finish(TaskData& task, Rng& rng, bool standardize) {
  split_rows(task, rng, {0.5, 0.25, 0.25});
  if (standardize) standardize_features(task);
}

}  // namespace

Matrix TaskData::gather_features(const std::vector<int>& idx) const {
  Matrix out(static_cast<Eigen::Index>(idx.size()), features.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = features.row(idx[r]);
  }
  return out;
}

IntVector TaskData::gather_labels(const std::vector<int>& idx) const {
  IntVector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) out(static_cast<Eigen::Index>(r)) = labels(idx[r]);
  return out;
}

void standardize_features(TaskData& task) {
  const Matrix train = task.gather_features(task.train_idx);
  const Eigen::Index d = task.features.cols();
  for (Eigen::Index c = 0; c < d; ++c) {
    const double mean = train.col(c).mean();
    const double var = (train.col(c).array() - mean).square().sum() /
                       static_cast<double>(train.rows());
    const double sd = std::sqrt(var);
    task.features.col(c).array() -= mean;
    if (sd > 1e-12) task.features.col(c) /= sd;
  }
  task.standardized = true;
}

TaskData gen_two_moons(int n, double noise, std::uint64_t seed, bool standardize) {
  if (n < 4) throw std::invalid_argument("gen_two_moons: need n >= 4");
  if (noise < 0.0) throw std::invalid_argument("gen_two_moons: noise must be nonnegative");
  TaskData task;
  task.name = "two_moons";
  task.seed = seed;
  task.noise = noise;
  task.classes = 2;
  task.features.resize(n, 2);
  task.labels.resize(n);

  Rng rng(seed);
  const int n0 = (n + 1) / 2;  // class 0 gets the extra point when n is odd
  for (int i = 0; i < n; ++i) {
    const bool first = i < n0;
    const int j = first ? i : i - n0;
    const int m = first ? n0 : n - n0;
    const double t = kPi * (m > 1 ? static_cast<double>(j) / (m - 1) : 0.5);
    double x = first ? std::cos(t) : 1.0 - std::cos(t);
    double y = first ? std::sin(t) : 0.5 - std::sin(t);
    x += noise * rng.normal();
    y += noise * rng.normal();
    task.features(i, 0) = x;
    task.features(i, 1) = y;
    task.labels(i) = first ? 0 : 1;
  }
  finish(task, rng, standardize);
  return task;
}

TaskData gen_blobs(int n, int centers, double spread, std::uint64_t seed,
                   bool standardize) {
  if (n < centers) throw std::invalid_argument("gen_blobs: need n >= centers");
  if (centers < 2) throw std::invalid_argument("gen_blobs: need at least 2 centers");
  if (spread < 0.0) throw std::invalid_argument("gen_blobs: spread must be nonnegative");
  TaskData task;
  task.name = "blobs";
  task.seed = seed;
  task.noise = spread;
  task.classes = centers;
  task.features.resize(n, 2);
  task.labels.resize(n);

  Rng rng(seed);
  const double radius = 3.0;
  for (int i = 0; i < n; ++i) {
    const int c = i % centers;
    const double angle = 2.0 * kPi * c / centers;
    task.features(i, 0) = radius * std::cos(angle) + spread * rng.normal();
    task.features(i, 1) = radius * std::sin(angle) + spread * rng.normal();
    task.labels(i) = c;
  }
  finish(task, rng, standardize);
  return task;
}

TaskData gen_spirals(int n, double turns, double noise, std::uint64_t seed,
                     bool standardize) {
  if (n < 4) throw std::invalid_argument("gen_spirals: need n >= 4");
  if (noise < 0.0) throw std::invalid_argument("gen_spirals: noise must be nonnegative");
  if (turns <= 0.0) throw std::invalid_argument("gen_spirals: turns must be positive");
  TaskData task;
  task.name = "spirals";
  task.seed = seed;
  task.noise = noise;
  task.classes = 2;
  task.features.resize(n, 2);
  task.labels.resize(n);

  Rng rng(seed);
  const int n0 = (n + 1) / 2;
  for (int i = 0; i < n; ++i) {
    const bool first = i < n0;
    const int j = first ? i : i - n0;
    const int m = first ? n0 : n - n0;
    const double t = 0.15 + 0.85 * (m > 1 ? static_cast<double>(j) / (m - 1) : 0.5);
    const double angle = 2.0 * kPi * turns * t + (first ? 0.0 : kPi);
    const double r = 2.0 * t;
    task.features(i, 0) = r * std::cos(angle) + noise * rng.normal();
    task.features(i, 1) = r * std::sin(angle) + noise * rng.normal();
    task.labels(i) = first ? 0 : 1;
  }
  finish(task, rng, standardize);
  return task;
}

TaskData load_csv(const std::string& path, const std::string& label_column,
                  std::array<double, 3> fractions, std::uint64_t seed, bool standardize) {
  const double frac_sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(frac_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("load_csv: split fractions sum to " + std::to_string(frac_sum) +
                                ", expected 1");
  }
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("load_csv: cannot open " + path);

  std::string header;
  if (!std::getline(f, header)) throw std::invalid_argument("load_csv: " + path + " is empty");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  std::vector<std::string> columns;
  {
    std::stringstream ss(header);
    std::string cell;
    while (std::getline(ss, cell, ',')) columns.push_back(cell);
  }
  int label_col = -1;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == label_column) label_col = static_cast<int>(i);
  }
  if (label_col < 0) {
    throw std::invalid_argument("load_csv: label column '" + label_column + "' not found in " +
                                path);
  }

  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || cell.empty()) {
        throw std::invalid_argument("load_csv: non-numeric cell '" + cell + "' at row " +
                                    std::to_string(line_no) + ", column '" +
                                    columns[static_cast<std::size_t>(col)] + "'");
      }
      row.push_back(v);
      ++col;
    }
    if (row.size() != columns.size()) {
      throw std::invalid_argument("load_csv: row " + std::to_string(line_no) + " has " +
                                  std::to_string(row.size()) + " cells, header has " +
                                  std::to_string(columns.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("load_csv: " + path + " has a header but no data");

  TaskData task;
  task.name = "csv";
  task.seed = seed;
  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(columns.size()) - 1;
  task.features.resize(n, d);
  task.labels.resize(n);
  int max_label = 0;
  for (int r = 0; r < n; ++r) {
    int c_out = 0;
    for (int c = 0; c < static_cast<int>(columns.size()); ++c) {
      const double v = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (c == label_col) {
        const long label = std::lround(v);
        if (label < 0 || std::abs(v - static_cast<double>(label)) > 1e-9) {
          throw std::invalid_argument("load_csv: label '" + std::to_string(v) + "' at data row " +
                                      std::to_string(r + 2) + " is not a nonnegative integer");
        }
        task.labels(r) = static_cast<int>(label);
        max_label = std::max(max_label, static_cast<int>(label));
      } else {
        task.features(r, c_out++) = v;
      }
    }
  }
  task.classes = max_label + 1;

  Rng rng(seed);
  split_rows(task, rng, fractions);
  if (standardize) standardize_features(task);
  return task;
}

}  // namespace proxnas
