#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "socgcf/evaluator.hpp"
#include "socgcf/reference.hpp"
#include "socgcf/rng.hpp"

using namespace socgcf;

namespace {

// d=1 embeddings where item i scores (m - i) for every user: the ranking is
// exactly ascending item index.
EmbeddingState index_ranked(Index n_users, Index m) {
  EmbeddingState f;
  f.users = DenseMatrix(n_users, 1);
  f.items = DenseMatrix(m, 1);
  f.users.fill(1.0);
  for (Index i = 0; i < m; ++i) f.items(i, 0) = static_cast<double>(m - i);
  return f;
}

}  // namespace

TEST_CASE("rank_topk basics") {
  const EmbeddingState f = index_ranked(1, 5);
  CHECK(rank_topk(f, 0, 3, {}) == std::vector<Index>{0, 1, 2});

  // Excluding the top item promotes the rest.
  CHECK(rank_topk(f, 0, 3, {0}) == std::vector<Index>{1, 2, 3});

  // All-equal scores: ties break toward smaller index.
  EmbeddingState flat;
  flat.users = DenseMatrix(1, 1);
  flat.items = DenseMatrix(4, 1);
  flat.users.fill(1.0);
  flat.items.fill(2.5);
  CHECK(rank_topk(flat, 0, 2, {}) == std::vector<Index>{0, 1});

  // Fewer candidates than k.
  CHECK(rank_topk(f, 0, 10, {1, 3}) == std::vector<Index>{0, 2, 4});

  CHECK_THROWS_AS(rank_topk(f, 0, 0, {}), std::invalid_argument);
}

TEST_CASE("precision and recall examples") {
  // 5 of the 10 test items inside a top-20 list: precision 0.25, recall 0.5.
  std::vector<Index> topk, test;
  for (Index i = 0; i < 20; ++i) topk.push_back(i);
  for (Index i = 15; i < 25; ++i) test.push_back(i);
  auto [p, r] = precision_recall(topk, test);
  CHECK(p == 0.25);
  CHECK(r == 0.5);

  // No overlap.
  std::tie(p, r) = precision_recall({1, 2, 3}, {7, 8});
  CHECK(p == 0.0);
  CHECK(r == 0.0);

  // Top-20 contains all 3 test items: precision 3/20, recall 1.
  std::vector<Index> top20;
  for (Index i = 0; i < 20; ++i) top20.push_back(i);
  std::tie(p, r) = precision_recall(top20, {4, 9, 11});
  CHECK(p == 0.15);
  CHECK(r == 1.0);

  CHECK_THROWS_AS(precision_recall(topk, {}), std::invalid_argument);
}

TEST_CASE("ndcg examples") {
  // Every test item ranked first: NDCG exactly 1.
  CHECK(ndcg_at_k({3, 7, 1, 9}, {3, 7}, 4) == 1.0);

  // Single test item at rank 2 of 3 with one relevant item:
  // DCG = 1/log2(3), IDCG = 1/log2(2) -> NDCG = log(2)/log(3).
  const double expect = std::log(2.0) / std::log(3.0);
  CHECK(std::abs(ndcg_at_k({5, 0, 7}, {0}, 3) - expect) <= 1e-9);
  CHECK(std::abs(ndcg_at_k({5, 0, 7}, {0}, 3) - 0.6309297535714574) <= 1e-9);

  CHECK(ndcg_at_k({1, 2, 3}, {9}, 3) == 0.0);

  // More test items than k: the ideal vector saturates at k hits.
  CHECK(ndcg_at_k({0, 1}, {0, 1, 2, 3}, 2) == 1.0);
}

TEST_CASE("evaluate_all means per-user metrics") {
  // Two users, 10 items, rankings ascend by item index for both.
  Dataset d;
  d.n_users = 2;
  d.n_items = 10;
  // User 0: no training items, test = {0}: hit at rank 1 -> recall 1.
  // User 1: test = {7}: rank_topk(k=1) = {0}, miss -> recall 0.
  d.test = {{0, 0}, {1, 7}};
  d.train = {{1, 0}};  // user 1 trains on item 0, so their top-1 is item 1
  const EmbeddingState f = index_ranked(2, 10);
  const MetricsReport rep = evaluate_all(f, d, 1);
  CHECK(rep.n_eval_users == 2);
  CHECK(rep.recall == 0.5);
  CHECK(rep.precision == 0.5);

  // Users without test items are excluded from the mean.
  Dataset d2 = d;
  d2.n_users = 3;
  d2.user_ids.clear();
  const MetricsReport rep2 = evaluate_all(f, d2, 1);
  CHECK(rep2.n_eval_users == 2);

  Dataset empty = d;
  empty.test.clear();
  CHECK_THROWS_AS(evaluate_all(f, empty, 1), std::runtime_error);
}

TEST_CASE("evaluate_all averages recalls 0.2 and 0.4 to 0.3") {
  Dataset d;
  d.n_users = 2;
  d.n_items = 30;
  // k=2 window shows items {0,1} to both users (no train rows).
  // User 0: test {0, 10, 11, 12, 13} -> 1 hit of 5 -> recall 0.2.
  // User 1: test {0, 1, 20, 21, 22} -> 2 hits of 5 -> recall 0.4.
  d.test = {{0, 0}, {0, 10}, {0, 11}, {0, 12}, {0, 13},
            {1, 0}, {1, 1}, {1, 20}, {1, 21}, {1, 22}};
  const EmbeddingState f = index_ranked(2, 30);
  const MetricsReport rep = evaluate_all(f, d, 2);
  CHECK(std::abs(rep.recall - 0.3) <= 1e-15);
}

TEST_CASE("metrics are invariant under monotone score transforms") {
  // Same ranking from scores s_i and 2*s_i + 5, built as d=2 embeddings:
  // user (1,0) vs (2,5) against items (s_i, 1).
  Rng rng(88);
  const Index m = 25;
  EmbeddingState a, b;
  a.users = DenseMatrix(1, 2);
  b.users = DenseMatrix(1, 2);
  a.users(0, 0) = 1.0;
  b.users(0, 0) = 2.0;
  b.users(0, 1) = 5.0;
  a.items = DenseMatrix(m, 2);
  for (Index i = 0; i < m; ++i) {
    a.items(i, 0) = rng.next_gaussian(0.0, 1.0);
    a.items(i, 1) = 1.0;
  }
  b.items = a.items;

  Dataset d;
  d.n_users = 1;
  d.n_items = m;
  d.train = {{0, 3}, {0, 4}};
  d.test = {{0, 0}, {0, 7}, {0, 19}};

  const MetricsReport ra = evaluate_all(a, d, 5);
  const MetricsReport rb = evaluate_all(b, d, 5);
  CHECK(ra.precision == rb.precision);
  CHECK(ra.recall == rb.recall);
  CHECK(ra.ndcg == rb.ndcg);
  CHECK(rank_topk(a, 0, 5, {3, 4}) == rank_topk(b, 0, 5, {3, 4}));
}

TEST_CASE("precision times k equals true positives on random fixtures") {
  Rng rng(303);
  for (int rep = 0; rep < 1000; ++rep) {
    const Index k = 1 + static_cast<Index>(rng.next_below(30));
    std::vector<Index> topk, test;
    for (Index i = 0; i < k; ++i) topk.push_back(i * 2);  // even indices
    const Index n_test = 1 + static_cast<Index>(rng.next_below(20));
    Index tp = 0;
    for (Index t = 0; t < n_test; ++t) {
      // Half the draws land on even (possible hits), half on odd (misses).
      const Index cand = static_cast<Index>(rng.next_below(200));
      test.push_back(cand);
    }
    std::sort(test.begin(), test.end());
    test.erase(std::unique(test.begin(), test.end()), test.end());
    for (Index t : test) {
      if (t % 2 == 0 && t / 2 < k) ++tp;
    }
    auto [p, r] = precision_recall(topk, test);
    CHECK(std::abs(p * static_cast<double>(k) - static_cast<double>(tp)) <= 1e-9);
    CHECK(std::abs(r * static_cast<double>(test.size()) - static_cast<double>(tp)) <= 1e-9);
  }
}

TEST_CASE("evaluate_all equals the brute-force evaluator") {
  Rng rng(99);
  Dataset d;
  d.n_users = 60;
  d.n_items = 80;
  for (Index u = 0; u < d.n_users; ++u) {
    for (Index i = 0; i < d.n_items; ++i) {
      const double roll = rng.next_double();
      if (roll < 0.08) {
        d.train.emplace_back(u, i);
      } else if (roll < 0.12) {
        d.test.emplace_back(u, i);
      }
    }
  }
  EmbeddingState f;
  f.users = DenseMatrix(d.n_users, 8);
  f.items = DenseMatrix(d.n_items, 8);
  for (double& v : f.users.values) v = rng.next_gaussian(0.0, 1.0);
  for (double& v : f.items.values) v = rng.next_gaussian(0.0, 1.0);

  for (Index k : {1, 5, 20}) {
    const MetricsReport mine = evaluate_all(f, d, k);
    const MetricsReport ref = evaluate_bruteforce(f, d, k);
    CHECK(mine.precision == ref.precision);
    CHECK(mine.recall == ref.recall);
    CHECK(mine.ndcg == ref.ndcg);
    CHECK(mine.n_eval_users == ref.n_eval_users);
  }
}

TEST_CASE("metrics serialization formats") {
  MetricsReport r;
  r.k = 20;
  r.precision = 0.0185;
  r.recall = 0.1808;
  r.ndcg = 0.25;
  r.n_eval_users = 1234;
  const std::string kv = metrics_kv_block("model_all", r);
  CHECK(kv.find("run model_all\n") != std::string::npos);
  CHECK(kv.find("k 20\n") != std::string::npos);
  CHECK(kv.find("recall 0.1808\n") != std::string::npos);
  CHECK(kv.find("n_users 1234\n") != std::string::npos);

  // Rows come without a trailing newline; callers join them into files.
  CHECK(metrics_csv_header() == "run,k,precision,recall,ndcg,n_users");
  CHECK(metrics_csv_row("model_all", r) == "model_all,20,0.0185,0.1808,0.25,1234");
}

TEST_CASE("ablation report deltas") {
  MetricsReport base;
  base.recall = 0.1808;
  base.precision = 0.0185;
  base.ndcg = 0.2;
  base.n_eval_users = 10;
  MetricsReport better = base;
  better.recall = 0.1940;

  SUBCASE("+7.3% recall against the baseline") {
    const std::string rep = ablation_report({{"w_interact", base}, {"model_all", better}},
                                            "w_interact");
    CHECK(rep.find("baseline: w_interact") != std::string::npos);
    CHECK(rep.find("+7.3%") != std::string::npos);
    CHECK(rep.find("0.1940") != std::string::npos);
  }

  SUBCASE("identical runs show +0.0%") {
    const std::string rep = ablation_report({{"w_interact", base}, {"clone", base}}, "w_interact");
    CHECK(rep.find("+0.0%") != std::string::npos);
  }

  SUBCASE("zero baseline metric reports n/a") {
    MetricsReport zero = base;
    zero.ndcg = 0.0;
    MetricsReport other = better;
    const std::string rep = ablation_report({{"w_interact", zero}, {"model_all", other}},
                                            "w_interact");
    CHECK(rep.find("n/a") != std::string::npos);
  }

  SUBCASE("missing baseline or too few runs throw") {
    CHECK_THROWS_AS(ablation_report({{"a", base}, {"b", better}}, "zzz"), std::invalid_argument);
    CHECK_THROWS_AS(ablation_report({{"a", base}}, "a"), std::invalid_argument);
  }
}
