#include "socgcf/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "socgcf/parallel.hpp"

namespace socgcf {

std::vector<Index> rank_topk(const EmbeddingState& final_state, Index u, Index k,
                             const std::vector<Index>& exclude) {
  if (k < 1) throw std::invalid_argument("rank_topk: k must be >= 1");
  const std::vector<double> scores = score_all_items(final_state, u);
  const Index m = static_cast<Index>(scores.size());

  std::vector<char> excluded(static_cast<std::size_t>(m), 0);
  for (Index i : exclude) excluded[static_cast<std::size_t>(i)] = 1;

  std::vector<Index> candidates;
  candidates.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    if (!excluded[static_cast<std::size_t>(i)]) candidates.push_back(i);
  }
  const auto better = [&scores](Index a, Index b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  };
  if (k < static_cast<Index>(candidates.size())) {
    std::nth_element(candidates.begin(), candidates.begin() + k, candidates.end(), better);
    candidates.resize(static_cast<std::size_t>(k));
  }
  std::sort(candidates.begin(), candidates.end(), better);
  return candidates;
}

std::pair<double, double> precision_recall(const std::vector<Index>& topk,
                                           const std::vector<Index>& test_items) {
  if (test_items.empty()) throw std::invalid_argument("precision_recall: empty test set");
  const std::unordered_set<Index> test(test_items.begin(), test_items.end());
  Index tp = 0;
  for (Index i : topk) tp += test.count(i) ? 1 : 0;
  const double precision =
      topk.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(topk.size());
  const double recall = static_cast<double>(tp) / static_cast<double>(test.size());
  return {precision, recall};
}

double ndcg_at_k(const std::vector<Index>& topk, const std::vector<Index>& test_items, Index k) {
  if (test_items.empty()) throw std::invalid_argument("ndcg_at_k: empty test set");
  const std::unordered_set<Index> test(test_items.begin(), test_items.end());
  double dcg = 0.0;
  const Index depth = std::min<Index>(k, static_cast<Index>(topk.size()));
  for (Index r = 1; r <= depth; ++r) {
    if (test.count(topk[static_cast<std::size_t>(r - 1)])) {
      dcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
    }
  }
  const Index ideal_hits = std::min<Index>(static_cast<Index>(test.size()), k);
  double idcg = 0.0;
  for (Index r = 1; r <= ideal_hits; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  return dcg / idcg;
}

MetricsReport evaluate_all(const EmbeddingState& final_state, const Dataset& d, Index k) {
  if (k < 1) throw std::invalid_argument("evaluate_all: k must be >= 1");
  std::vector<std::vector<Index>> train_items(static_cast<std::size_t>(d.n_users));
  std::vector<std::vector<Index>> test_items(static_cast<std::size_t>(d.n_users));
  for (const auto& [u, i] : d.train) train_items[static_cast<std::size_t>(u)].push_back(i);
  for (const auto& [u, i] : d.test) test_items[static_cast<std::size_t>(u)].push_back(i);

  std::vector<Index> evaluable;
  for (Index u = 0; u < d.n_users; ++u) {
    if (!test_items[static_cast<std::size_t>(u)].empty()) evaluable.push_back(u);
  }
  if (evaluable.empty()) throw std::runtime_error("evaluate_all: no user has test items");

  const std::size_t n = evaluable.size();
  std::vector<double> precision(n), recall(n), ndcg(n);
  parallel_for(static_cast<std::int64_t>(n), [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t p = begin; p < end; ++p) {
      const Index u = evaluable[static_cast<std::size_t>(p)];
      const std::vector<Index> topk =
          rank_topk(final_state, u, k, train_items[static_cast<std::size_t>(u)]);
      const auto& test = test_items[static_cast<std::size_t>(u)];
      std::tie(precision[static_cast<std::size_t>(p)], recall[static_cast<std::size_t>(p)]) =
          precision_recall(topk, test);
      ndcg[static_cast<std::size_t>(p)] = ndcg_at_k(topk, test, k);
    }
  });

  MetricsReport r;
  r.k = k;
  r.n_eval_users = static_cast<Index>(n);
  const double inv = 1.0 / static_cast<double>(n);
  r.precision = std::accumulate(precision.begin(), precision.end(), 0.0) * inv;
  r.recall = std::accumulate(recall.begin(), recall.end(), 0.0) * inv;
  r.ndcg = std::accumulate(ndcg.begin(), ndcg.end(), 0.0) * inv;
  return r;
}

std::string metrics_kv_block(const std::string& run, const MetricsReport& r) {
  std::ostringstream out;
  out << "run " << run << '\n'
      << "k " << r.k << '\n'
      << "precision " << format_double(r.precision) << '\n'
      << "recall " << format_double(r.recall) << '\n'
      << "ndcg " << format_double(r.ndcg) << '\n'
      << "n_users " << r.n_eval_users << '\n';
  return out.str();
}

std::string metrics_csv_header() { return "run,k,precision,recall,ndcg,n_users"; }

std::string metrics_csv_row(const std::string& run, const MetricsReport& r) {
  std::ostringstream out;
  out << run << ',' << r.k << ',' << format_double(r.precision) << ',' << format_double(r.recall)
      << ',' << format_double(r.ndcg) << ',' << r.n_eval_users;
  return out.str();
}

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string with_delta(double v, double base) {
  std::string cell = fixed4(v);
  if (base == 0.0) return cell + " (n/a)";
  char buf[32];
  std::snprintf(buf, sizeof(buf), " (%+.1f%%)", (v - base) / base * 100.0);
  return cell + buf;
}

}  // namespace

std::string ablation_report(const std::vector<std::pair<std::string, MetricsReport>>& runs,
                            const std::string& baseline) {
  if (runs.size() < 2) throw std::invalid_argument("ablation_report: need at least two runs");
  const MetricsReport* base = nullptr;
  for (const auto& [name, r] : runs) {
    if (name == baseline) base = &r;
  }
  if (!base) throw std::invalid_argument("ablation_report: baseline run '" + baseline + "' missing");

  std::size_t name_w = std::string("run").size();
  for (const auto& [name, r] : runs) name_w = std::max(name_w, name.size());

  std::ostringstream out;
  out << "baseline: " << baseline << '\n';
  char header[160];
  std::snprintf(header, sizeof(header), "%-*s  %3s  %-18s  %-18s  %-18s  %7s",
                static_cast<int>(name_w), "run", "k", "precision", "recall", "ndcg", "n_users");
  out << header << '\n';
  for (const auto& [name, r] : runs) {
    const bool is_base = &r == base;
    const std::string p = is_base ? fixed4(r.precision) : with_delta(r.precision, base->precision);
    const std::string rec = is_base ? fixed4(r.recall) : with_delta(r.recall, base->recall);
    const std::string n = is_base ? fixed4(r.ndcg) : with_delta(r.ndcg, base->ndcg);
    char row[256];
    std::snprintf(row, sizeof(row), "%-*s  %3lld  %-18s  %-18s  %-18s  %7lld",
                  static_cast<int>(name_w), name.c_str(), static_cast<long long>(r.k), p.c_str(),
                  rec.c_str(), n.c_str(), static_cast<long long>(r.n_eval_users));
    out << row << '\n';
  }
  return out.str();
}

}  // namespace socgcf
