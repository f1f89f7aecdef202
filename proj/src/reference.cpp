#include "socgcf/reference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "socgcf/config.hpp"

namespace socgcf {

namespace {

DenseMatrix dense_matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.n_rows, b.n_cols);
  for (Index i = 0; i < a.n_rows; ++i) {
    for (Index k = 0; k < a.n_cols; ++k) {
      const double v = a(i, k);
      if (v == 0.0) continue;
      for (Index j = 0; j < b.n_cols; ++j) c(i, j) += v * b(k, j);
    }
  }
  return c;
}

std::vector<Index> dense_row_nnz(const DenseMatrix& a) {
  std::vector<Index> deg(static_cast<std::size_t>(a.n_rows), 0);
  for (Index i = 0; i < a.n_rows; ++i) {
    for (Index j = 0; j < a.n_cols; ++j) {
      if (a(i, j) != 0.0) deg[static_cast<std::size_t>(i)]++;
    }
  }
  return deg;
}

std::vector<Index> dense_col_nnz(const DenseMatrix& a) {
  std::vector<Index> deg(static_cast<std::size_t>(a.n_cols), 0);
  for (Index i = 0; i < a.n_rows; ++i) {
    for (Index j = 0; j < a.n_cols; ++j) {
      if (a(i, j) != 0.0) deg[static_cast<std::size_t>(j)]++;
    }
  }
  return deg;
}

double bucket_weight(double j) {
  if (j < 0.1) return 0.0;
  if (j < 0.4) return 0.005;
  if (j < 0.6) return 0.05;
  if (j < 0.9) return 0.5;
  return 1.0;
}

}  // namespace

DenseMatrix dense_jaccard_classified(const DenseMatrix& r) {
  const Index n = r.n_rows;
  DenseMatrix c(n, n);
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      Index inter = 0, uni = 0;
      for (Index j = 0; j < r.n_cols; ++j) {
        const bool a = r(u, j) != 0.0;
        const bool b = r(v, j) != 0.0;
        inter += (a && b) ? 1 : 0;
        uni += (a || b) ? 1 : 0;
      }
      if (uni == 0) continue;
      const double w = bucket_weight(static_cast<double>(inter) / static_cast<double>(uni));
      c(u, v) = w;
      c(v, u) = w;
    }
  }
  return c;
}

std::pair<DenseMatrix, DenseMatrix> dense_forward_final(const DenseGraph& dg,
                                                        const DenseMatrix& e_users,
                                                        const DenseMatrix& e_items,
                                                        Index n_layers) {
  const Index n = dg.n_users;
  const Index m = dg.n_items;
  const Index d = e_users.n_cols;

  // The full square operator, materialized.
  DenseMatrix t(n + m, n + m);
  {
    const std::vector<Index> du = dense_row_nnz(dg.r);
    const std::vector<Index> di = dense_col_nnz(dg.r);
    for (Index u = 0; u < n; ++u) {
      for (Index i = 0; i < m; ++i) {
        if (dg.r(u, i) == 0.0) continue;
        const double norm = 1.0 / std::sqrt(static_cast<double>(du[static_cast<std::size_t>(u)]) *
                                            static_cast<double>(di[static_cast<std::size_t>(i)]));
        t(u, n + i) = dg.w_a * norm;
        t(n + i, u) = norm;
      }
    }
  }
  if (dg.use_correlation) {
    const DenseMatrix c = dense_jaccard_classified(dg.r);
    const std::vector<Index> deg = dense_row_nnz(c);
    for (Index u = 0; u < n; ++u) {
      for (Index v = 0; v < n; ++v) {
        if (c(u, v) == 0.0) continue;
        t(u, v) += dg.w_c * c(u, v) /
                   std::sqrt(static_cast<double>(deg[static_cast<std::size_t>(u)]) *
                             static_cast<double>(deg[static_cast<std::size_t>(v)]));
      }
    }
  }
  if (dg.use_social) {
    const std::vector<Index> deg = dense_row_nnz(dg.s);
    for (Index u = 0; u < n; ++u) {
      for (Index v = 0; v < n; ++v) {
        if (dg.s(u, v) == 0.0) continue;
        t(u, v) += dg.w_s * dg.s(u, v) /
                   std::sqrt(static_cast<double>(deg[static_cast<std::size_t>(u)]) *
                             static_cast<double>(deg[static_cast<std::size_t>(v)]));
      }
    }
  }

  DenseMatrix e(n + m, d);
  for (Index u = 0; u < n; ++u) {
    for (Index j = 0; j < d; ++j) e(u, j) = e_users(u, j);
  }
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < d; ++j) e(n + i, j) = e_items(i, j);
  }

  DenseMatrix total = e;
  DenseMatrix current = e;
  for (Index k = 0; k < n_layers; ++k) {
    current = dense_matmul(t, current);
    for (std::size_t p = 0; p < total.values.size(); ++p) total.values[p] += current.values[p];
  }
  const double inv = 1.0 / static_cast<double>(n_layers + 1);
  for (double& v : total.values) v *= inv;

  DenseMatrix fu(n, d), fi(m, d);
  for (Index u = 0; u < n; ++u) {
    for (Index j = 0; j < d; ++j) fu(u, j) = total(u, j);
  }
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < d; ++j) fi(i, j) = total(n + i, j);
  }
  return {std::move(fu), std::move(fi)};
}

std::pair<DenseMatrix, DenseMatrix> lightgcn_reference_layer(const DenseMatrix& r,
                                                             const DenseMatrix& e_users,
                                                             const DenseMatrix& e_items) {
  const Index n = r.n_rows;
  const Index m = r.n_cols;
  const Index d = e_users.n_cols;
  const std::vector<Index> du = dense_row_nnz(r);
  const std::vector<Index> di = dense_col_nnz(r);
  DenseMatrix out_u(n, d), out_i(m, d);
  for (Index u = 0; u < n; ++u) {
    for (Index i = 0; i < m; ++i) {
      if (r(u, i) == 0.0) continue;
      const double norm = 1.0 / std::sqrt(static_cast<double>(du[static_cast<std::size_t>(u)]) *
                                          static_cast<double>(di[static_cast<std::size_t>(i)]));
      for (Index j = 0; j < d; ++j) out_u(u, j) += norm * e_items(i, j);
    }
  }
  for (Index i = 0; i < m; ++i) {
    for (Index u = 0; u < n; ++u) {
      if (r(u, i) == 0.0) continue;
      const double norm = 1.0 / std::sqrt(static_cast<double>(du[static_cast<std::size_t>(u)]) *
                                          static_cast<double>(di[static_cast<std::size_t>(i)]));
      for (Index j = 0; j < d; ++j) out_i(i, j) += norm * e_users(u, j);
    }
  }
  return {std::move(out_u), std::move(out_i)};
}

MetricsReport evaluate_bruteforce(const EmbeddingState& final_state, const Dataset& d, Index k) {
  std::vector<std::unordered_set<Index>> train(static_cast<std::size_t>(d.n_users));
  std::vector<std::unordered_set<Index>> test(static_cast<std::size_t>(d.n_users));
  for (const auto& [u, i] : d.train) train[static_cast<std::size_t>(u)].insert(i);
  for (const auto& [u, i] : d.test) test[static_cast<std::size_t>(u)].insert(i);

  double sum_p = 0.0, sum_r = 0.0, sum_n = 0.0;
  Index evaluable = 0;
  for (Index u = 0; u < d.n_users; ++u) {
    const auto& test_u = test[static_cast<std::size_t>(u)];
    if (test_u.empty()) continue;
    ++evaluable;

    std::vector<std::pair<double, Index>> ranked;
    for (Index i = 0; i < d.n_items; ++i) {
      if (train[static_cast<std::size_t>(u)].count(i)) continue;
      double score = 0.0;
      for (Index j = 0; j < final_state.users.n_cols; ++j) {
        score += final_state.users(u, j) * final_state.items(i, j);
      }
      ranked.emplace_back(score, i);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const std::pair<double, Index>& a, const std::pair<double, Index>& b) {
                       if (a.first != b.first) return a.first > b.first;
                       return a.second < b.second;
                     });
    const Index depth = std::min<Index>(k, static_cast<Index>(ranked.size()));

    Index tp = 0;
    double dcg = 0.0;
    for (Index r = 1; r <= depth; ++r) {
      if (test_u.count(ranked[static_cast<std::size_t>(r - 1)].second)) {
        ++tp;
        dcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
      }
    }
    double idcg = 0.0;
    const Index ideal = std::min<Index>(static_cast<Index>(test_u.size()), k);
    for (Index r = 1; r <= ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);

    sum_p += depth > 0 ? static_cast<double>(tp) / static_cast<double>(depth) : 0.0;
    sum_r += static_cast<double>(tp) / static_cast<double>(test_u.size());
    sum_n += dcg / idcg;
  }
  if (evaluable == 0) throw std::runtime_error("evaluate_bruteforce: no user has test items");

  MetricsReport r;
  r.k = k;
  r.n_eval_users = evaluable;
  r.precision = sum_p / static_cast<double>(evaluable);
  r.recall = sum_r / static_cast<double>(evaluable);
  r.ndcg = sum_n / static_cast<double>(evaluable);
  return r;
}

SparseMatrix random_binary_matrix(Rng& rng, Index n, Index m, double density) {
  std::vector<std::tuple<Index, Index, double>> triplets;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (rng.next_double() < density) triplets.emplace_back(i, j, 1.0);
    }
  }
  if (triplets.empty()) triplets.emplace_back(0, 0, 1.0);
  return SparseMatrix::from_triplets(n, m, triplets);
}

SparseMatrix random_symmetric_binary(Rng& rng, Index n, double density) {
  std::vector<std::tuple<Index, Index, double>> triplets;
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      if (rng.next_double() < density) {
        triplets.emplace_back(u, v, 1.0);
        triplets.emplace_back(v, u, 1.0);
      }
    }
  }
  return SparseMatrix::from_triplets(n, n, triplets);
}

double dense_forward_max_diff(const GraphInputs& g, const ModelConfig& mcfg, const DenseGraph& dg,
                              const EmbeddingState& e0) {
  const ForwardTrace trace = forward(e0, g, mcfg);
  const auto [du, di] = dense_forward_final(dg, e0.users, e0.items, mcfg.n_layers);
  return std::max(max_abs_diff(trace.final.users, du), max_abs_diff(trace.final.items, di));
}

CheckResult check_dense_forward(std::uint64_t seed, int n_cases) {
  Rng rng(derive_seed(seed, "dense-forward"));
  double worst = 0.0;
  for (int c = 0; c < n_cases; ++c) {
    const Index n = 2 + static_cast<Index>(rng.next_below(13));
    const Index m = 2 + static_cast<Index>(rng.next_below(13));
    const SparseMatrix r = random_binary_matrix(rng, n, m, 0.35);
    const SparseMatrix s = random_symmetric_binary(rng, n, 0.3);
    const bool want_social = (c % 4) & 1;
    const bool want_corr = (c % 4) & 2;

    ModelConfig mcfg;
    mcfg.embed_dim = 2 + static_cast<Index>(rng.next_below(4));
    mcfg.n_layers = static_cast<Index>(rng.next_below(5));
    mcfg.w_interact = 0.5 + rng.next_double();
    mcfg.w_correlation = 0.5 + rng.next_double();
    mcfg.w_social = 0.5 + rng.next_double();
    mcfg.seed = seed + static_cast<std::uint64_t>(c);

    const std::optional<SparseMatrix> s_opt =
        s.nnz() > 0 ? std::optional<SparseMatrix>(s) : std::nullopt;
    const GraphInputs g = build_graph_inputs_from(r, s_opt, want_social && s.nnz() > 0, want_corr);

    DenseGraph dg;
    dg.n_users = n;
    dg.n_items = m;
    dg.r = r.to_dense();
    dg.s = s.to_dense();
    dg.use_social = g.use_social;
    dg.use_correlation = g.use_correlation;
    dg.w_a = mcfg.w_interact;
    dg.w_c = mcfg.w_correlation;
    dg.w_s = mcfg.w_social;

    const EmbeddingState e0 = init_embeddings(n, m, mcfg);
    worst = std::max(worst, dense_forward_max_diff(g, mcfg, dg, e0));
  }
  std::ostringstream detail;
  detail << "max|diff|=" << worst << " over " << n_cases << " random graphs";
  return {"dense-forward", worst <= 1e-10, detail.str()};
}

CheckResult check_finite_diff() {
  // Fixed 5-user / 8-item instance; every user has spare items for negatives.
  std::vector<std::tuple<Index, Index, double>> r_trip;
  const std::vector<std::vector<Index>> rows = {
      {0, 1, 2}, {1, 3, 4}, {2, 4, 5, 6}, {0, 3, 7}, {1, 5, 6, 7}};
  for (Index u = 0; u < 5; ++u) {
    for (Index i : rows[static_cast<std::size_t>(u)]) r_trip.emplace_back(u, i, 1.0);
  }
  const SparseMatrix r = SparseMatrix::from_triplets(5, 8, r_trip);
  std::vector<std::tuple<Index, Index, double>> s_trip;
  for (const auto& [a, b] :
       std::vector<std::pair<Index, Index>>{{0, 1}, {1, 2}, {3, 4}, {0, 4}}) {
    s_trip.emplace_back(a, b, 1.0);
    s_trip.emplace_back(b, a, 1.0);
  }
  const SparseMatrix s = SparseMatrix::from_triplets(5, 5, s_trip);

  std::vector<BPRTriple> batch;
  for (Index u = 0; u < 5; ++u) {
    const std::vector<Index>& items = rows[static_cast<std::size_t>(u)];
    for (Index i : items) {
      Index j = (i + 1) % 8;
      while (std::find(items.begin(), items.end(), j) != items.end()) j = (j + 1) % 8;
      batch.push_back({u, i, j});
    }
  }

  double worst = 0.0;
  std::string worst_combo;
  for (int combo = 0; combo < 4; ++combo) {
    const bool use_social = combo & 1;
    const bool use_corr = combo & 2;
    ModelConfig mcfg;
    mcfg.embed_dim = 4;
    mcfg.n_layers = 2;
    mcfg.seed = 1234;
    const GraphInputs g = build_graph_inputs_from(r, s, use_social, use_corr);
    const double err = finite_diff_check(g, mcfg, batch, 1e-4, 1e-4);
    if (err > worst) {
      worst = err;
      worst_combo = run_label(use_social, use_corr);
    }
  }
  std::ostringstream detail;
  detail << "max rel err=" << worst << " (worst combo: " << worst_combo << ")";
  return {"finite-diff-gradient", worst < 1e-4, detail.str()};
}

CheckResult check_lightgcn_reduction(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "lightgcn-reduction"));
  double worst = 0.0;
  for (int c = 0; c < 5; ++c) {
    const Index n = 2 + static_cast<Index>(rng.next_below(8));
    const Index m = 2 + static_cast<Index>(rng.next_below(8));
    const SparseMatrix r = random_binary_matrix(rng, n, m, 0.4);
    const GraphInputs g = build_graph_inputs_from(r, std::nullopt, false, false);
    const DenseMatrix r_dense = r.to_dense();

    ModelConfig mcfg;
    mcfg.embed_dim = 3;
    mcfg.n_layers = 3;
    mcfg.seed = seed + static_cast<std::uint64_t>(c);
    EmbeddingState state = init_embeddings(n, m, mcfg);
    for (int layer = 0; layer < 3; ++layer) {
      const EmbeddingState next = propagate_layer(state, g, mcfg);
      const auto [ru, ri] = lightgcn_reference_layer(r_dense, state.users, state.items);
      worst = std::max({worst, max_abs_diff(next.users, ru), max_abs_diff(next.items, ri)});
      state = next;
    }
  }
  std::ostringstream detail;
  detail << "max|diff|=" << worst << " across layers";
  return {"lightgcn-reduction", worst <= 1e-12, detail.str()};
}

CheckResult check_metric_oracles(std::uint64_t seed) {
  bool pass = true;
  std::ostringstream detail;

  // Single hit at rank 2: (1/log2 3) / (1/log2 2).
  const double ndcg = ndcg_at_k({5, 0, 7}, {0}, 3);
  const double expected = std::log(2.0) / std::log(3.0);
  if (std::abs(ndcg - expected) > 1e-9) {
    pass = false;
    detail << "ndcg rank-2 fixture off: " << ndcg << "; ";
  }

  // 5 hits in a top-20 against 10 test items.
  std::vector<Index> topk(20);
  for (Index i = 0; i < 20; ++i) topk[static_cast<std::size_t>(i)] = i;
  std::vector<Index> test = {0, 1, 2, 3, 4, 100, 101, 102, 103, 104};
  const auto [p, r] = precision_recall(topk, test);
  if (std::abs(p - 0.25) > 1e-12 || std::abs(r - 0.5) > 1e-12) {
    pass = false;
    detail << "precision/recall fixture off: " << p << "," << r << "; ";
  }

  // Three-user aggregate fixture at k=3 with d=1 embeddings, so every score
  // and rank is readable by eye. Items score 6,5,4,3,2,1 for every user:
  //   user 0: train {0}, test {1,2} -> top3 {1,2,3}: p=2/3, r=1, ndcg=1
  //   user 1: train {1}, test {0,5} -> top3 {0,2,3}: p=1/3, r=1/2,
  //           ndcg = 1 / (1 + 1/log2 3)
  //   user 2: train {5}, test {4}  -> top3 {0,1,2}: all zero
  {
    Dataset fx;
    fx.n_users = 3;
    fx.n_items = 6;
    fx.train = {{0, 0}, {1, 1}, {2, 5}};
    fx.test = {{0, 1}, {0, 2}, {1, 0}, {1, 5}, {2, 4}};
    EmbeddingState fs;
    fs.users = DenseMatrix(3, 1);
    fs.items = DenseMatrix(6, 1);
    for (double& v : fs.users.values) v = 1.0;
    for (Index i = 0; i < 6; ++i) fs.items.values[static_cast<std::size_t>(i)] = 6.0 - i;
    const MetricsReport got = evaluate_all(fs, fx, 3);
    const double want_ndcg = (1.0 + 1.0 / (1.0 + std::log(2.0) / std::log(3.0)) + 0.0) / 3.0;
    if (std::abs(got.precision - 1.0 / 3.0) > 1e-9 || std::abs(got.recall - 0.5) > 1e-9 ||
        std::abs(got.ndcg - want_ndcg) > 1e-9 || got.n_eval_users != 3) {
      pass = false;
      detail << "3-user fixture off: p=" << got.precision << " r=" << got.recall
             << " ndcg=" << got.ndcg << "; ";
    }
  }

  // precision*k == TP == recall*|test| on random fixtures.
  Rng rng(derive_seed(seed, "metric-fixtures"));
  for (int c = 0; c < 1000; ++c) {
    const Index m = 10 + static_cast<Index>(rng.next_below(90));
    std::vector<Index> items(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) items[static_cast<std::size_t>(i)] = i;
    rng.shuffle(items);
    const Index k = 1 + static_cast<Index>(rng.next_below(20));
    const std::vector<Index> tk(items.begin(),
                                items.begin() + std::min<Index>(k, m));
    rng.shuffle(items);
    const Index nt = 1 + static_cast<Index>(rng.next_below(10));
    const std::vector<Index> ts(items.begin(), items.begin() + std::min<Index>(nt, m));

    std::unordered_set<Index> ts_set(ts.begin(), ts.end());
    Index tp = 0;
    for (Index i : tk) tp += ts_set.count(i) ? 1 : 0;
    const auto [pp, rr] = precision_recall(tk, ts);
    if (std::abs(pp * static_cast<double>(tk.size()) - static_cast<double>(tp)) > 1e-9 ||
        std::abs(rr * static_cast<double>(ts.size()) - static_cast<double>(tp)) > 1e-9) {
      pass = false;
      detail << "tp identity broken at case " << c << "; ";
      break;
    }
  }

  // Aggregate evaluation equals the brute-force loop bit-for-bit.
  Dataset d;
  d.n_users = 30;
  d.n_items = 40;
  for (Index u = 0; u < d.n_users; ++u) {
    std::vector<Index> items(40);
    for (Index i = 0; i < 40; ++i) items[static_cast<std::size_t>(i)] = i;
    rng.shuffle(items);
    const Index n_train = 3 + static_cast<Index>(rng.next_below(8));
    const Index n_test = static_cast<Index>(rng.next_below(5));
    for (Index p2 = 0; p2 < n_train; ++p2) d.train.emplace_back(u, items[static_cast<std::size_t>(p2)]);
    for (Index p2 = 0; p2 < n_test; ++p2) {
      d.test.emplace_back(u, items[static_cast<std::size_t>(n_train + p2)]);
    }
  }
  EmbeddingState final_state;
  final_state.users = DenseMatrix(d.n_users, 6);
  final_state.items = DenseMatrix(d.n_items, 6);
  for (double& v : final_state.users.values) v = rng.next_gaussian(0.0, 1.0);
  for (double& v : final_state.items.values) v = rng.next_gaussian(0.0, 1.0);
  const MetricsReport fast = evaluate_all(final_state, d, 10);
  const MetricsReport slow = evaluate_bruteforce(final_state, d, 10);
  if (fast.precision != slow.precision || fast.recall != slow.recall || fast.ndcg != slow.ndcg ||
      fast.n_eval_users != slow.n_eval_users) {
    pass = false;
    detail << "aggregate evaluation diverges from brute force; ";
  }

  if (pass) detail << "all metric fixtures and identities hold";
  return {"metric-oracles", pass, detail.str()};
}

std::vector<CheckResult> run_all_checks(std::uint64_t seed) {
  return {check_dense_forward(seed, 24), check_finite_diff(), check_lightgcn_reduction(seed),
          check_metric_oracles(seed)};
}

}  // namespace socgcf
