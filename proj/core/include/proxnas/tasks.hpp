#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "proxnas/tape.hpp"

namespace proxnas {

/// A supervised dataset with disjoint train/validation/test splits covering
/// all rows. Features are standardized per column using train-split
/// statistics unless a generator is asked not to.
struct TaskData {
  Matrix features;
  IntVector labels;
  int classes = 0;
  std::vector<int> train_idx;
  std::vector<int> val_idx;
  std::vector<int> test_idx;

  std::string name;
  std::uint64_t seed = 0;
  double noise = 0.0;
  bool standardized = false;

  int feature_dim() const { return static_cast<int>(features.cols()); }
  Matrix gather_features(const std::vector<int>& idx) const;
  IntVector gather_labels(const std::vector<int>& idx) const;
};

/// Two interleaving half circles, binary labels, 50/25/25 split.
TaskData gen_two_moons(int n, double noise, std::uint64_t seed, bool standardize = true);

/// Gaussian clusters placed on a circle, one class per cluster. A linearly
/// separable control task when spread is small relative to the circle.
TaskData gen_blobs(int n, int centers, double spread, std::uint64_t seed, bool standardize = true);

/// Two interleaved spiral arms with the given number of turns.
TaskData gen_spirals(int n, double turns, double noise, std::uint64_t seed,
                     bool standardize = true);

/// Numeric CSV with a header row. Rows are shuffled with the seed and split
/// by the fractions (which must sum to 1). Labels are read from the named
/// column and must be nonnegative integers.
TaskData load_csv(const std::string& path, const std::string& label_column,
                  std::array<double, 3> fractions, std::uint64_t seed, bool standardize = true);

/// Zero mean / unit variance per column, fit on the train split only.
void standardize_features(TaskData& task);

}  // namespace proxnas
