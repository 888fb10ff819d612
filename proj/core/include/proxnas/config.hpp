#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxnas/search.hpp"

namespace proxnas {

/// Raised for malformed run configuration; carries the offending field.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string field_name, const std::string& what)
      : std::runtime_error("[" + field_name + "] " + what), field(std::move(field_name)) {}
};

/// A full experiment description, parsed from a sectioned key = value file.
/// Sections: [task], [space], [algorithm], [optimizer], [output]. Unknown
/// sections or keys are errors.
struct RunConfig {
  // [task]
  std::string task_kind = "two_moons";  // two_moons | blobs | spirals | csv
  int task_n = 400;
  double task_noise = 0.15;
  double task_turns = 1.75;   // spirals
  int task_centers = 3;       // blobs
  double task_spread = 0.4;   // blobs
  std::string task_path;      // csv
  std::string task_label_column = "label";
  std::array<double, 3> task_fractions = {0.5, 0.25, 0.25};
  bool task_standardize = true;
  std::uint64_t task_seed = 1;

  // [space]
  std::string space_topology = "chain";  // chain | complete
  int space_nodes = 3;
  int space_width = 0;  // 0 = feature dimension (no stem)
  std::vector<std::string> space_operations;  // empty = default set

  // [algorithm]
  std::string algorithm = "nasp";
  int epochs = 50;
  int batch_train = 0;
  int batch_val = 0;
  double arch_step = 0.05;
  double eta = 0.0;
  bool reg_at_continuous = false;
  std::string loss = "cross_entropy";  // cross_entropy | mse
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds;  // sweep seeds; defaults to {seed}
  int random_budget = 8;

  // [optimizer]
  double weight_step = 0.1;
  double weight_momentum = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  // [output]
  std::string out_dir = "out";
  int checkpoint_every = 0;  // epochs; 0 = final checkpoint only
  int retrain_epochs = 100;
  int bench_warmup = 2;

  /// Canonical textual form; parsing it reproduces this config.
  std::string normalized_text() const;

  SearchConfig search_config() const;
  TaskData make_task() const;
  CellTopology make_topology() const;
  OperationSet make_operations(int feature_dim) const;
  std::vector<std::uint64_t> seed_list() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace proxnas
