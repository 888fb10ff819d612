#include "proxnas/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "proxnas/trace.hpp"

namespace proxnas {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a number, got '" + value + "'");
  }
}

long parse_int(const std::string& field, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected an integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& field, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a nonnegative integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string& field, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(field, "expected true/false, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void apply_key(RunConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
  const std::string field = section + "." + key;
  if (section == "task") {
    if (key == "kind") {
      cfg.task_kind = value;
    } else if (key == "n") {
      cfg.task_n = static_cast<int>(parse_int(field, value));
    } else if (key == "noise") {
      cfg.task_noise = parse_double(field, value);
    } else if (key == "turns") {
      cfg.task_turns = parse_double(field, value);
    } else if (key == "centers") {
      cfg.task_centers = static_cast<int>(parse_int(field, value));
    } else if (key == "spread") {
      cfg.task_spread = parse_double(field, value);
    } else if (key == "path") {
      cfg.task_path = value;
    } else if (key == "label_column") {
      cfg.task_label_column = value;
    } else if (key == "fractions") {
      const auto parts = split_list(value);
      if (parts.size() != 3) throw ConfigError(field, "expected three comma-separated fractions");
      for (std::size_t i = 0; i < 3; ++i) cfg.task_fractions[i] = parse_double(field, parts[i]);
    } else if (key == "standardize") {
      cfg.task_standardize = parse_bool(field, value);
    } else if (key == "seed") {
      cfg.task_seed = parse_u64(field, value);
    } else {
      throw ConfigError(field, "unknown key '" + key + "' in [task]");
    }
  } else if (section == "space") {
    if (key == "topology") {
      cfg.space_topology = value;
    } else if (key == "nodes") {
      cfg.space_nodes = static_cast<int>(parse_int(field, value));
    } else if (key == "width") {
      cfg.space_width = static_cast<int>(parse_int(field, value));
    } else if (key == "operations") {
      cfg.space_operations = value == "default7" ? std::vector<std::string>{} : split_list(value);
    } else {
      throw ConfigError(field, "unknown key '" + key + "' in [space]");
    }
  } else if (section == "algorithm") {
    if (key == "kind") {
      cfg.algorithm = value;
    } else if (key == "epochs") {
      cfg.epochs = static_cast<int>(parse_int(field, value));
    } else if (key == "batch_train") {
      cfg.batch_train = static_cast<int>(parse_int(field, value));
    } else if (key == "batch_val") {
      cfg.batch_val = static_cast<int>(parse_int(field, value));
    } else if (key == "arch_step") {
      cfg.arch_step = parse_double(field, value);
    } else if (key == "eta") {
      cfg.eta = parse_double(field, value);
    } else if (key == "reg_at_continuous") {
      cfg.reg_at_continuous = parse_bool(field, value);
    } else if (key == "loss") {
      cfg.loss = value;
    } else if (key == "seed") {
      cfg.seed = parse_u64(field, value);
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& s : split_list(value)) cfg.seeds.push_back(parse_u64(field, s));
    } else if (key == "budget") {
      cfg.random_budget = static_cast<int>(parse_int(field, value));
    } else {
      throw ConfigError(field, "unknown key '" + key + "' in [algorithm]");
    }
  } else if (section == "optimizer") {
    if (key == "weight_step") {
      cfg.weight_step = parse_double(field, value);
    } else if (key == "weight_momentum") {
      cfg.weight_momentum = parse_double(field, value);
    } else if (key == "adam_beta1") {
      cfg.adam_beta1 = parse_double(field, value);
    } else if (key == "adam_beta2") {
      cfg.adam_beta2 = parse_double(field, value);
    } else if (key == "adam_eps") {
      cfg.adam_eps = parse_double(field, value);
    } else {
      throw ConfigError(field, "unknown key '" + key + "' in [optimizer]");
    }
  } else if (section == "output") {
    if (key == "dir") {
      cfg.out_dir = value;
    } else if (key == "checkpoint_every") {
      cfg.checkpoint_every = static_cast<int>(parse_int(field, value));
    } else if (key == "retrain_epochs") {
      cfg.retrain_epochs = static_cast<int>(parse_int(field, value));
    } else if (key == "bench_warmup") {
      cfg.bench_warmup = static_cast<int>(parse_int(field, value));
    } else {
      throw ConfigError(field, "unknown key '" + key + "' in [output]");
    }
  } else {
    throw ConfigError(section, "unknown section [" + section + "]");
  }
}

void validate(const RunConfig& cfg) {
  if (cfg.task_kind != "two_moons" && cfg.task_kind != "blobs" && cfg.task_kind != "spirals" &&
      cfg.task_kind != "csv") {
    throw ConfigError("task.kind", "unknown task '" + cfg.task_kind + "'");
  }
  if (cfg.task_kind == "csv" && cfg.task_path.empty()) {
    throw ConfigError("task.path", "csv task requires a path");
  }
  const double frac_sum = cfg.task_fractions[0] + cfg.task_fractions[1] + cfg.task_fractions[2];
  if (std::abs(frac_sum - 1.0) > 1e-9) {
    throw ConfigError("task.fractions", "fractions must sum to 1");
  }
  if (cfg.space_topology != "chain" && cfg.space_topology != "complete") {
    throw ConfigError("space.topology", "unknown topology '" + cfg.space_topology + "'");
  }
  if (cfg.space_nodes < 2) throw ConfigError("space.nodes", "need at least 2 nodes");
  if (cfg.space_width < 0) throw ConfigError("space.width", "width must be >= 0");
  algorithm_from_name(cfg.algorithm);  // throws on unknown
  if (cfg.epochs < 1) throw ConfigError("algorithm.epochs", "epochs must be >= 1");
  if (!(cfg.arch_step > 0.0)) throw ConfigError("algorithm.arch_step", "must be > 0");
  if (cfg.eta < 0.0) throw ConfigError("algorithm.eta", "must be nonnegative");
  if (cfg.loss != "cross_entropy" && cfg.loss != "mse") {
    throw ConfigError("algorithm.loss", "unknown loss '" + cfg.loss + "'");
  }
  if (cfg.random_budget < 1) throw ConfigError("algorithm.budget", "must be >= 1");
  if (!(cfg.weight_step > 0.0)) throw ConfigError("optimizer.weight_step", "must be > 0");
  if (cfg.weight_momentum < 0.0 || cfg.weight_momentum >= 1.0) {
    throw ConfigError("optimizer.weight_momentum", "must be in [0,1)");
  }
  if (cfg.checkpoint_every < 0) throw ConfigError("output.checkpoint_every", "must be >= 0");
  if (cfg.retrain_epochs < 1) throw ConfigError("output.retrain_epochs", "must be >= 1");
  if (cfg.bench_warmup < 1) throw ConfigError("output.bench_warmup", "must be >= 1");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no), "malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(line_no), "key outside any section");
    }
    apply_key(cfg, section, key, value);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

std::string RunConfig::normalized_text() const {
  std::ostringstream os;
  os << "[task]\n";
  os << "kind = " << task_kind << "\n";
  if (task_kind == "csv") {
    os << "path = " << task_path << "\n";
    os << "label_column = " << task_label_column << "\n";
    os << "fractions = " << format_double(task_fractions[0]) << ", "
       << format_double(task_fractions[1]) << ", " << format_double(task_fractions[2]) << "\n";
  } else {
    os << "n = " << task_n << "\n";
    if (task_kind != "blobs") os << "noise = " << format_double(task_noise) << "\n";
    if (task_kind == "spirals") os << "turns = " << format_double(task_turns) << "\n";
    if (task_kind == "blobs") {
      os << "centers = " << task_centers << "\n";
      os << "spread = " << format_double(task_spread) << "\n";
    }
  }
  os << "standardize = " << (task_standardize ? "true" : "false") << "\n";
  os << "seed = " << task_seed << "\n";
  os << "\n[space]\n";
  os << "topology = " << space_topology << "\n";
  os << "nodes = " << space_nodes << "\n";
  os << "width = " << space_width << "\n";
  os << "operations = ";
  if (space_operations.empty()) {
    os << "default7";
  } else {
    for (std::size_t i = 0; i < space_operations.size(); ++i) {
      os << (i > 0 ? ", " : "") << space_operations[i];
    }
  }
  os << "\n\n[algorithm]\n";
  os << "kind = " << algorithm << "\n";
  os << "epochs = " << epochs << "\n";
  os << "batch_train = " << batch_train << "\n";
  os << "batch_val = " << batch_val << "\n";
  os << "arch_step = " << format_double(arch_step) << "\n";
  os << "eta = " << format_double(eta) << "\n";
  os << "reg_at_continuous = " << (reg_at_continuous ? "true" : "false") << "\n";
  os << "loss = " << loss << "\n";
  os << "seed = " << seed << "\n";
  if (!seeds.empty()) {
    os << "seeds = ";
    for (std::size_t i = 0; i < seeds.size(); ++i) os << (i > 0 ? ", " : "") << seeds[i];
    os << "\n";
  }
  os << "budget = " << random_budget << "\n";
  os << "\n[optimizer]\n";
  os << "weight_step = " << format_double(weight_step) << "\n";
  os << "weight_momentum = " << format_double(weight_momentum) << "\n";
  os << "adam_beta1 = " << format_double(adam_beta1) << "\n";
  os << "adam_beta2 = " << format_double(adam_beta2) << "\n";
  os << "adam_eps = " << format_double(adam_eps) << "\n";
  os << "\n[output]\n";
  os << "dir = " << out_dir << "\n";
  os << "checkpoint_every = " << checkpoint_every << "\n";
  os << "retrain_epochs = " << retrain_epochs << "\n";
  os << "bench_warmup = " << bench_warmup << "\n";
  return os.str();
}

SearchConfig RunConfig::search_config() const {
  SearchConfig sc;
  sc.algorithm = algorithm_from_name(algorithm);
  sc.epochs = epochs;
  sc.batch_train = batch_train;
  sc.batch_val = batch_val;
  sc.weight_step = weight_step;
  sc.weight_momentum = weight_momentum;
  sc.arch_step = arch_step;
  sc.adam_beta1 = adam_beta1;
  sc.adam_beta2 = adam_beta2;
  sc.adam_eps = adam_eps;
  sc.eta = eta;
  sc.reg_at_continuous = reg_at_continuous;
  sc.loss = loss == "mse" ? LossKind::MeanSquaredError : LossKind::CrossEntropy;
  sc.seed = seed;
  sc.random_budget = random_budget;
  return sc;
}

TaskData RunConfig::make_task() const {
  if (task_kind == "two_moons") {
    return gen_two_moons(task_n, task_noise, task_seed, task_standardize);
  }
  if (task_kind == "blobs") {
    return gen_blobs(task_n, task_centers, task_spread, task_seed, task_standardize);
  }
  if (task_kind == "spirals") {
    return gen_spirals(task_n, task_turns, task_noise, task_seed, task_standardize);
  }
  return load_csv(task_path, task_label_column, task_fractions, task_seed, task_standardize);
}

CellTopology RunConfig::make_topology() const {
  return space_topology == "complete" ? CellTopology::complete(space_nodes)
                                      : CellTopology::chain(space_nodes);
}

OperationSet RunConfig::make_operations(int feature_dim) const {
  const int width = space_width > 0 ? space_width : feature_dim;
  if (space_operations.empty()) return default_operation_set(width);
  return make_operation_set(space_operations, width);
}

std::vector<std::uint64_t> RunConfig::seed_list() const {
  return seeds.empty() ? std::vector<std::uint64_t>{seed} : seeds;
}

}  // namespace proxnas
