#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "socgcf/sparse.hpp"

namespace socgcf {

// Flat run configuration shared by every command. Keys in config files and
// `--key value` overrides match the field names exactly; precedence is
// CLI > file > defaults.
struct RunConfig {
  // raw inputs
  std::string interactions;
  std::string social;
  std::string format = "canonical";  // or "adjacency"
  std::string dataset;               // optional name; fills `ratio` if known

  // preprocessing
  Index k_core = 10;
  double ratio = 0.0;  // users kept = round(n_items / ratio); must be set
  double test_fraction = 0.2;

  // model
  Index d = 64;
  Index K = 3;
  double w_a = 1.0;
  double w_c = 1.0;
  double w_s = 1.0;
  bool use_social = true;
  bool use_correlation = true;

  // training
  double lr = 1e-3;
  double l2_lambda = 1e-4;
  Index batch_size = 2048;
  Index max_epochs = 1500;
  Index eval_every = 10;
  Index patience = 5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  // run plumbing
  std::uint64_t seed = 42;
  std::vector<std::uint64_t> seeds;  // ablation seeds; empty means {seed}
  std::vector<std::string> runs;     // ablation subset; empty means all three
  std::string output_dir = "out";
  std::string data_dir;  // preprocessed dataset location; empty = output_dir
  Index k = 20;          // report cutoff for evaluate/final metrics
  std::string checkpoint;  // explicit checkpoint path for evaluate
  bool stats = false;      // print per-operator nnz/density at preprocess
};

// Parse `key value` lines (# comments, blank lines allowed), then apply
// overrides. Unknown keys and unparsable values are rejected. An empty
// config_path skips the file step.
RunConfig parse_run_config(const std::string& config_path,
                           const std::vector<std::pair<std::string, std::string>>& overrides);

// Known dataset name -> user-selection ratio; 0.0 when unknown.
double dataset_default_ratio(const std::string& name);

// Seeds to use for multi-seed runs: cfg.seeds, or {cfg.seed} when empty.
std::vector<std::uint64_t> effective_seeds(const RunConfig& cfg);

// "model_all", "w_social", "w_correlation" or "w_interact" from the channel
// flags.
std::string run_label(bool use_social, bool use_correlation);

}  // namespace socgcf
