#include "socgcf/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace socgcf {

namespace {

Index parse_index(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return static_cast<Index>(v);
  } catch (...) {
    throw std::invalid_argument("config key '" + key + "': expected integer, got '" + value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("config key '" + key + "': expected number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return static_cast<std::uint64_t>(v);
  } catch (...) {
    throw std::invalid_argument("config key '" + key + "': expected unsigned integer, got '" +
                                value + "'");
  }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& value) {
  std::vector<std::uint64_t> seeds;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, ',')) {
    if (item.empty()) {
      throw std::invalid_argument("config key '" + key + "': empty entry in list '" + value + "'");
    }
    seeds.push_back(parse_u64(key, item));
  }
  if (seeds.empty()) {
    throw std::invalid_argument("config key '" + key + "': empty list");
  }
  return seeds;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "interactions") cfg.interactions = value;
  else if (key == "social") cfg.social = value;
  else if (key == "format") {
    if (value != "canonical" && value != "adjacency") {
      throw std::invalid_argument("config key 'format': expected canonical|adjacency, got '" +
                                  value + "'");
    }
    cfg.format = value;
  } else if (key == "dataset") cfg.dataset = value;
  else if (key == "k_core") cfg.k_core = parse_index(key, value);
  else if (key == "ratio") cfg.ratio = parse_real(key, value);
  else if (key == "test_fraction") cfg.test_fraction = parse_real(key, value);
  else if (key == "d") cfg.d = parse_index(key, value);
  else if (key == "K") cfg.K = parse_index(key, value);
  else if (key == "w_a") cfg.w_a = parse_real(key, value);
  else if (key == "w_c") cfg.w_c = parse_real(key, value);
  else if (key == "w_s") cfg.w_s = parse_real(key, value);
  else if (key == "use_social") cfg.use_social = parse_bool(key, value);
  else if (key == "use_correlation") cfg.use_correlation = parse_bool(key, value);
  else if (key == "lr") cfg.lr = parse_real(key, value);
  else if (key == "l2_lambda") cfg.l2_lambda = parse_real(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_index(key, value);
  else if (key == "max_epochs") cfg.max_epochs = parse_index(key, value);
  else if (key == "eval_every") cfg.eval_every = parse_index(key, value);
  else if (key == "patience") cfg.patience = parse_index(key, value);
  else if (key == "adam_beta1") cfg.adam_beta1 = parse_real(key, value);
  else if (key == "adam_beta2") cfg.adam_beta2 = parse_real(key, value);
  else if (key == "adam_eps") cfg.adam_eps = parse_real(key, value);
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "seeds") cfg.seeds = parse_seed_list(key, value);
  else if (key == "runs") {
    cfg.runs.clear();
    std::string item;
    std::istringstream ss(value);
    while (std::getline(ss, item, ',')) {
      if (item != "w_interact" && item != "w_social" && item != "w_correlation" &&
          item != "model_all") {
        throw std::invalid_argument("config key 'runs': unknown run name '" + item + "'");
      }
      cfg.runs.push_back(item);
    }
    if (cfg.runs.empty()) throw std::invalid_argument("config key 'runs': empty list");
  }
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "data_dir") cfg.data_dir = value;
  else if (key == "k") cfg.k = parse_index(key, value);
  else if (key == "checkpoint") cfg.checkpoint = value;
  else if (key == "stats") cfg.stats = parse_bool(key, value);
  else throw std::invalid_argument("unknown config key: " + key);
}

}  // namespace

double dataset_default_ratio(const std::string& name) {
  if (name == "gowalla") return 1.44;
  if (name == "librarything") return 1.60;
  if (name == "ciao") return 18.78;
  if (name == "epinions") return 11.95;
  return 0.0;
}

RunConfig parse_run_config(const std::string& config_path,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg;
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw std::runtime_error("cannot open config file: " + config_path);
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::istringstream ss(line);
      std::string key, value, extra;
      if (!(ss >> key)) continue;
      if (!(ss >> value) || (ss >> extra)) {
        throw std::invalid_argument(config_path + ":" + std::to_string(line_no) +
                                    ": expected 'key value'");
      }
      apply_key(cfg, key, value);
    }
  }
  for (const auto& [key, value] : overrides) apply_key(cfg, key, value);
  if (cfg.ratio == 0.0 && !cfg.dataset.empty()) cfg.ratio = dataset_default_ratio(cfg.dataset);
  return cfg;
}

std::vector<std::uint64_t> effective_seeds(const RunConfig& cfg) {
  if (!cfg.seeds.empty()) return cfg.seeds;
  return {cfg.seed};
}

std::string run_label(bool use_social, bool use_correlation) {
  if (use_social && use_correlation) return "model_all";
  if (use_social) return "w_social";
  if (use_correlation) return "w_correlation";
  return "w_interact";
}

}  // namespace socgcf
