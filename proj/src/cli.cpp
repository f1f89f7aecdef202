#include "socgcf/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "socgcf/checkpoint.hpp"
#include "socgcf/dataset.hpp"
#include "socgcf/evaluator.hpp"
#include "socgcf/graph.hpp"
#include "socgcf/model.hpp"
#include "socgcf/reference.hpp"
#include "socgcf/trainer.hpp"

namespace socgcf {

namespace {

// Presence-file lock so concurrent invocations cannot interleave writes in
// one output directory.
class DirLock {
 public:
  explicit DirLock(const std::string& dir) : path_(dir + "/.lock") {
    std::filesystem::create_directories(dir);
    if (std::filesystem::exists(path_)) {
      throw std::runtime_error("output directory is locked (" + path_ +
                               " exists); remove it if no other run is active");
    }
    std::ofstream f(path_);
    if (!f) throw std::runtime_error("cannot create lock file: " + path_);
    f << "locked\n";
  }
  ~DirLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::string path_;
};

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string resolved_data_dir(const RunConfig& cfg) {
  return cfg.data_dir.empty() ? cfg.output_dir : cfg.data_dir;
}

ModelConfig model_config(const RunConfig& cfg, std::uint64_t seed) {
  ModelConfig m;
  m.embed_dim = cfg.d;
  m.n_layers = cfg.K;
  m.w_interact = cfg.w_a;
  m.w_correlation = cfg.w_c;
  m.w_social = cfg.w_s;
  m.seed = seed;
  return m;
}

TrainConfig train_config(const RunConfig& cfg, std::uint64_t seed) {
  TrainConfig t;
  t.lr = cfg.lr;
  t.l2_lambda = cfg.l2_lambda;
  t.batch_size = cfg.batch_size;
  t.max_epochs = cfg.max_epochs;
  t.eval_every = cfg.eval_every;
  t.patience = cfg.patience;
  t.adam_beta1 = cfg.adam_beta1;
  t.adam_beta2 = cfg.adam_beta2;
  t.adam_eps = cfg.adam_eps;
  t.seed = seed;
  return t;
}

void write_metrics_files(const std::string& dir, const std::string& label,
                         const MetricsReport& report) {
  write_text_file(dir + "/" + label + "_metrics.txt", metrics_kv_block(label, report));
  write_text_file(dir + "/" + label + "_metrics.csv",
                  metrics_csv_header() + "\n" + metrics_csv_row(label, report) + "\n");
}

void print_operator_stats(const std::string& name, const SparseMatrix& m) {
  const double cells = static_cast<double>(m.n_rows) * static_cast<double>(m.n_cols);
  std::cout << name << " nnz=" << m.nnz()
            << " density=" << format_double(cells > 0 ? static_cast<double>(m.nnz()) / cells : 0.0)
            << '\n';
}

struct AblateCombo {
  std::string name;
  bool use_social;
  bool use_correlation;
};

AblateCombo combo_by_name(const std::string& name) {
  if (name == "w_interact") return {name, false, false};
  if (name == "w_social") return {name, true, false};
  if (name == "w_correlation") return {name, false, true};
  if (name == "model_all") return {name, true, true};
  throw std::invalid_argument("unknown ablation run: " + name);
}

}  // namespace

int cmd_preprocess(const RunConfig& cfg) {
  if (cfg.interactions.empty()) {
    throw std::invalid_argument("preprocess requires an 'interactions' path");
  }
  if (cfg.ratio <= 0.0) {
    throw std::invalid_argument("preprocess requires 'ratio' (or a known 'dataset' name)");
  }
  if (cfg.use_social && cfg.social.empty()) {
    throw std::invalid_argument("use_social is on but no 'social' path was given");
  }
  const InteractionFormat format =
      cfg.format == "adjacency" ? InteractionFormat::adjacency : InteractionFormat::canonical;
  const std::vector<RawInteraction> raw = load_interactions(cfg.interactions, format);
  const std::vector<std::pair<std::string, std::string>> social_raw =
      cfg.social.empty() ? std::vector<std::pair<std::string, std::string>>{}
                         : load_social_edges(cfg.social);

  PreprocessConfig pcfg;
  pcfg.k_core = cfg.k_core;
  pcfg.ratio = cfg.ratio;
  pcfg.test_fraction = cfg.test_fraction;
  const Dataset ds = build_dataset(raw, social_raw, pcfg);

  DirLock lock(cfg.output_dir);
  save_dataset(ds, cfg.output_dir);

  const SparseMatrix r = build_interaction_matrix(ds);
  const auto [r_norm, r_norm_t] = build_interaction_operator(r);
  save_coo(cfg.output_dir + "/r_norm.coo", r_norm);
  if (cfg.stats) print_operator_stats("r_norm", r_norm);
  if (cfg.use_correlation) {
    const SparseMatrix c_norm = build_correlation_operator(r);
    save_coo(cfg.output_dir + "/c_norm.coo", c_norm);
    if (cfg.stats) print_operator_stats("c_norm", c_norm);
  }
  if (cfg.use_social) {
    const std::optional<SparseMatrix> s_norm = build_social_operator(ds);
    if (s_norm) {
      save_coo(cfg.output_dir + "/s_norm.coo", *s_norm);
      if (cfg.stats) print_operator_stats("s_norm", *s_norm);
    } else {
      std::cerr << "warning: no social edges survive preprocessing; social "
                   "operator not written\n";
    }
  }

  const DatasetStats stats = dataset_stats(ds);
  std::cout << "n_users=" << stats.n_users << " n_items=" << stats.n_items
            << " n_edges=" << stats.n_edges << " n_social=" << stats.n_social << '\n';
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const Dataset ds = load_dataset(resolved_data_dir(cfg));
  const GraphInputs g = build_graph_inputs(ds, cfg.use_social, cfg.use_correlation);
  const std::string label = run_label(g.use_social, g.use_correlation);
  const ModelConfig mcfg = model_config(cfg, cfg.seed);
  const TrainConfig tcfg = train_config(cfg, cfg.seed);

  DirLock lock(cfg.output_dir);
  const auto [best, history] = train(ds, g, mcfg, tcfg);

  save_checkpoint(best, cfg.output_dir + "/" + label + "_checkpoint.bin");
  {
    std::ofstream f(cfg.output_dir + "/" + label + "_history.csv");
    if (!f) throw std::runtime_error("cannot open history CSV for writing");
    write_history_csv(history, f);
  }
  const EmbeddingState final_state = forward_final(best, g, mcfg);
  const MetricsReport report = evaluate_all(final_state, ds, cfg.k);
  write_metrics_files(cfg.output_dir, label, report);
  std::cout << metrics_kv_block(label, report);
  std::cout << "epochs_to_best " << history.epochs_to_best << '\n';
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  const Dataset ds = load_dataset(resolved_data_dir(cfg));
  const GraphInputs g = build_graph_inputs(ds, cfg.use_social, cfg.use_correlation);
  const std::string label = run_label(g.use_social, g.use_correlation);
  const std::string ckpt_path = cfg.checkpoint.empty()
                                    ? cfg.output_dir + "/" + label + "_checkpoint.bin"
                                    : cfg.checkpoint;
  const EmbeddingState best = load_checkpoint(ckpt_path);
  if (best.users.n_rows != ds.n_users || best.items.n_rows != ds.n_items) {
    throw std::runtime_error("checkpoint dimensions do not match the dataset");
  }
  const ModelConfig mcfg = model_config(cfg, cfg.seed);
  const EmbeddingState final_state = forward_final(best, g, mcfg);
  const MetricsReport report = evaluate_all(final_state, ds, cfg.k);

  DirLock lock(cfg.output_dir);
  write_metrics_files(cfg.output_dir, label, report);
  std::cout << metrics_kv_block(label, report);
  return 0;
}

int cmd_ablate(const RunConfig& cfg) {
  const Dataset ds = load_dataset(resolved_data_dir(cfg));
  const std::vector<std::uint64_t> seeds = effective_seeds(cfg);
  std::vector<std::string> run_names = cfg.runs;
  if (run_names.empty()) run_names = {"w_interact", "w_social", "model_all"};

  DirLock lock(cfg.output_dir);

  std::vector<std::pair<std::string, MetricsReport>> mean_runs;
  std::ostringstream convergence;
  convergence << "run,seed,epochs_to_best,best_recall\n";

  for (const std::string& name : run_names) {
    const AblateCombo combo = combo_by_name(name);
    const GraphInputs g = build_graph_inputs(ds, combo.use_social, combo.use_correlation);
    MetricsReport mean;
    mean.k = cfg.k;
    for (const std::uint64_t seed : seeds) {
      const ModelConfig mcfg = model_config(cfg, seed);
      const TrainConfig tcfg = train_config(cfg, seed);
      const auto [best, history] = train(ds, g, mcfg, tcfg);

      std::ofstream hf(cfg.output_dir + "/" + combo.name + "_seed" + std::to_string(seed) +
                       "_history.csv");
      if (!hf) throw std::runtime_error("cannot open history CSV for writing");
      write_history_csv(history, hf);

      double best_recall = 0.0;
      for (const TrainHistory::Eval& e : history.evals) best_recall = std::max(best_recall, e.recall);
      convergence << combo.name << ',' << seed << ',' << history.epochs_to_best << ','
                  << format_double(best_recall) << '\n';

      const EmbeddingState final_state = forward_final(best, g, mcfg);
      const MetricsReport r = evaluate_all(final_state, ds, cfg.k);
      mean.precision += r.precision;
      mean.recall += r.recall;
      mean.ndcg += r.ndcg;
      mean.n_eval_users = r.n_eval_users;
    }
    const double inv = 1.0 / static_cast<double>(seeds.size());
    mean.precision *= inv;
    mean.recall *= inv;
    mean.ndcg *= inv;
    mean_runs.emplace_back(combo.name, mean);
  }

  std::ostringstream out;
  out << "seeds:";
  for (std::uint64_t s : seeds) out << ' ' << s;
  out << "; metrics are means over seeds at k=" << cfg.k << '\n';
  out << "w_interact is the interaction-only configuration and doubles as the "
         "LightGCN-equivalent baseline\n";
  if (mean_runs.size() == 1) {
    out << metrics_kv_block(mean_runs[0].first, mean_runs[0].second);
  } else {
    const std::string baseline =
        std::any_of(mean_runs.begin(), mean_runs.end(),
                    [](const auto& r) { return r.first == "w_interact"; })
            ? "w_interact"
            : mean_runs[0].first;
    out << ablation_report(mean_runs, baseline);
  }
  const std::string report_text = out.str();
  write_text_file(cfg.output_dir + "/ablation.txt", report_text);

  std::ostringstream csv;
  csv << metrics_csv_header() << '\n';
  for (const auto& [name, r] : mean_runs) csv << metrics_csv_row(name, r) << '\n';
  write_text_file(cfg.output_dir + "/ablation.csv", csv.str());
  write_text_file(cfg.output_dir + "/convergence.csv", convergence.str());

  std::cout << report_text;
  return 0;
}

int cmd_check(const RunConfig& cfg) {
  const std::vector<CheckResult> results = run_all_checks(cfg.seed);
  bool all_pass = true;
  for (const CheckResult& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << ' ' << r.name << " — " << r.detail << '\n';
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

namespace {

void print_usage(std::ostream& out) {
  out << "usage: socgcf <command> [--config FILE] [--key value ...]\n"
         "\n"
         "commands:\n"
         "  preprocess   filter raw interactions, split train/test, rebuild social edges\n"
         "  train        train embeddings; writes checkpoint, history CSV, metrics\n"
         "  evaluate     score a saved checkpoint against the test split\n"
         "  ablate       train the channel-toggle configurations and compare them\n"
         "  check        run the internal verification suite (dense oracle,\n"
         "               gradient check, reduction check, metric oracles)\n"
         "\n"
         "keys: interactions social format dataset k_core ratio test_fraction\n"
         "      d K w_a w_c w_s use_social use_correlation lr l2_lambda\n"
         "      batch_size max_epochs eval_every patience adam_beta1 adam_beta2\n"
         "      adam_eps seed seeds runs output_dir data_dir k checkpoint stats\n";
}

}  // namespace

int run_cli(int argc, char** argv) {
  if (argc < 2) {
    print_usage(std::cerr);
    return 2;
  }
  const std::string command = argv[1];
  if (command == "help" || command == "--help" || command == "-h") {
    print_usage(std::cout);
    return 0;
  }
  try {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    for (int i = 2; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg.rfind("--", 0) != 0) {
        throw std::invalid_argument("expected --key, got '" + arg + "'");
      }
      if (i + 1 >= argc) throw std::invalid_argument("missing value after '" + arg + "'");
      const std::string value = argv[++i];
      if (arg == "--config") {
        config_path = value;
      } else {
        overrides.emplace_back(arg.substr(2), value);
      }
    }
    const RunConfig cfg = parse_run_config(config_path, overrides);

    if (command == "preprocess") return cmd_preprocess(cfg);
    if (command == "train") return cmd_train(cfg);
    if (command == "evaluate") return cmd_evaluate(cfg);
    if (command == "ablate") return cmd_ablate(cfg);
    if (command == "check") return cmd_check(cfg);
    std::cerr << "unknown command: " << command << "\n\n";
    print_usage(std::cerr);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace socgcf
