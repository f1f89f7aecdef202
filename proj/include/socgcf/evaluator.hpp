#pragma once

#include <string>
#include <utility>
#include <vector>

#include "socgcf/dataset.hpp"
#include "socgcf/model.hpp"

namespace socgcf {

struct MetricsReport {
  Index k = 20;
  double precision = 0.0;
  double recall = 0.0;
  double ndcg = 0.0;
  Index n_eval_users = 0;
};

// The k items with the highest score for user u, skipping `exclude` (the
// user's training items). Ties break toward the smaller item index so
// rankings are reproducible; returns fewer than k when candidates run out.
std::vector<Index> rank_topk(const EmbeddingState& final_state, Index u, Index k,
                             const std::vector<Index>& exclude);

// TP = |topk ∩ test|; precision = TP/|topk|, recall = TP/|test|.
std::pair<double, double> precision_recall(const std::vector<Index>& topk,
                                           const std::vector<Index>& test_items);

// Binary gains, 1/log2(rank+1) discount, ideal vector = min(|test|, k)
// leading hits.
double ndcg_at_k(const std::vector<Index>& topk, const std::vector<Index>& test_items, Index k);

// Mean per-user metrics over users with at least one test item. Throws when
// no user is evaluable.
MetricsReport evaluate_all(const EmbeddingState& final_state, const Dataset& d, Index k = 20);

// Flat key-value block / CSV row serializations.
std::string metrics_kv_block(const std::string& run, const MetricsReport& r);
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& run, const MetricsReport& r);

// Comparison table over named runs with percentage deltas against the
// named baseline. Requires >= 2 runs and a baseline present in `runs`.
std::string ablation_report(const std::vector<std::pair<std::string, MetricsReport>>& runs,
                            const std::string& baseline);

}  // namespace socgcf
