#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "socgcf/reference.hpp"
#include "socgcf/trainer.hpp"

using namespace socgcf;

namespace {

// Block-structured dataset: 4 blocks of 25 users and 25 items; each user
// touches 10 in-block items (7 train, 3 test), leaving 15 unseen in-block
// distractors. Block preference is learnable but recall cannot saturate
// instantly, so it climbs over the early epochs.
Dataset block_dataset() {
  Dataset d;
  d.n_users = 100;
  d.n_items = 100;
  for (Index u = 0; u < d.n_users; ++u) {
    const Index block = u / 25;
    for (Index t = 0; t < 10; ++t) {
      const Index item = 25 * block + (3 * u + 2 * t) % 25;
      if (t < 7) {
        d.train.emplace_back(u, item);
      } else {
        d.test.emplace_back(u, item);
      }
    }
  }
  std::sort(d.train.begin(), d.train.end());
  std::sort(d.test.begin(), d.test.end());
  // Social ring inside each block.
  for (Index block = 0; block < 4; ++block) {
    for (Index u = 25 * block; u + 1 < 25 * (block + 1); ++u) {
      d.social_edges.emplace_back(u, u + 1);
    }
  }
  std::sort(d.social_edges.begin(), d.social_edges.end());
  return d;
}

GraphInputs fixed_fixture_graph(bool social, bool correlation) {
  // 5 users x 8 items, the finite-difference fixture rows.
  std::vector<std::tuple<Index, Index, double>> trip;
  const std::vector<std::vector<Index>> rows = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5, 6}, {0, 3, 7},
                                                {1, 5, 6, 7}};
  for (Index u = 0; u < 5; ++u) {
    for (Index i : rows[static_cast<std::size_t>(u)]) trip.emplace_back(u, i, 1.0);
  }
  const SparseMatrix r = SparseMatrix::from_triplets(5, 8, trip);
  std::vector<std::tuple<Index, Index, double>> strip;
  for (auto [a, b] : {std::pair<Index, Index>{0, 1}, {1, 2}, {3, 4}, {0, 4}}) {
    strip.emplace_back(a, b, 1.0);
    strip.emplace_back(b, a, 1.0);
  }
  const SparseMatrix s = SparseMatrix::from_triplets(5, 5, strip);
  return build_graph_inputs_from(r, s, social, correlation);
}

std::vector<BPRTriple> fixture_batch() {
  // One triple per user; negatives are items the user never trained on.
  return {{0, 1, 5}, {1, 3, 0}, {2, 4, 1}, {3, 7, 2}, {4, 6, 0}};
}

}  // namespace

TEST_CASE("train config validation") {
  TrainConfig ok;
  validate_train_config(ok);
  TrainConfig bad = ok;
  bad.lr = 0.0;
  CHECK_THROWS_AS(validate_train_config(bad), std::invalid_argument);
  bad = ok;
  bad.l2_lambda = -1e-9;
  CHECK_THROWS_AS(validate_train_config(bad), std::invalid_argument);
  bad = ok;
  bad.batch_size = 0;
  CHECK_THROWS_AS(validate_train_config(bad), std::invalid_argument);
  bad = ok;
  bad.adam_beta1 = 1.0;
  CHECK_THROWS_AS(validate_train_config(bad), std::invalid_argument);
  bad = ok;
  bad.patience = 0;
  CHECK_THROWS_AS(validate_train_config(bad), std::invalid_argument);
}

TEST_CASE("sample_epoch forces the only possible negative") {
  // One user, trained on item 0 of 2: the only legal triple is (0, 0, 1).
  Rng rng(1);
  const auto triples = sample_epoch({{0, 0}}, 2, rng);
  REQUIRE(triples.size() == 1);
  CHECK(triples[0].u == 0);
  CHECK(triples[0].i_pos == 0);
  CHECK(triples[0].j_neg == 1);
}

TEST_CASE("sample_epoch yields one valid triple per interaction, deterministically") {
  std::vector<std::pair<Index, Index>> train;
  for (Index u = 0; u < 6; ++u) {
    for (Index i = 0; i < 4; ++i) train.emplace_back(u, (u + i) % 9);
  }
  std::set<std::pair<Index, Index>> train_set(train.begin(), train.end());

  Rng rng_a(77), rng_b(77), rng_c(78);
  const auto a = sample_epoch(train, 9, rng_a);
  const auto b = sample_epoch(train, 9, rng_b);
  const auto c = sample_epoch(train, 9, rng_c);

  CHECK(a.size() == train.size());
  for (const auto& t : a) {
    CHECK(train_set.count({t.u, t.i_pos}) == 1);
    CHECK(train_set.count({t.u, t.j_neg}) == 0);
    CHECK(t.j_neg >= 0);
    CHECK(t.j_neg < 9);
  }

  auto key = [](const BPRTriple& t) { return std::tuple(t.u, t.i_pos, t.j_neg); };
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(key(a[i]) == key(b[i]));
  bool differs = c.size() != a.size();
  for (std::size_t i = 0; !differs && i < a.size(); ++i) differs = key(a[i]) != key(c[i]);
  CHECK(differs);
}

TEST_CASE("sample_epoch skips users who trained on every item") {
  Rng rng(5);
  // User 0 owns both items; user 1 owns one.
  const auto triples = sample_epoch({{0, 0}, {0, 1}, {1, 0}}, 2, rng);
  REQUIRE(triples.size() == 1);
  CHECK(triples[0].u == 1);
  CHECK(triples[0].j_neg == 1);
}

TEST_CASE("bpr_loss closed-form values") {
  // Equal scores: -ln sigmoid(0) = ln 2 per pair.
  CHECK(std::abs(bpr_loss({{1.0, 1.0}}, 0.0, 0.0) - std::log(2.0)) <= 1e-15);
  CHECK(std::abs(bpr_loss({{0.5, 0.5}, {2.0, 2.0}}, 0.0, 0.0) - 2.0 * std::log(2.0)) <= 1e-15);

  // Gap of 2: -ln sigmoid(2) ~ 0.126928.
  CHECK(std::abs(bpr_loss({{3.0, 1.0}}, 0.0, 0.0) - 0.12692801104297263) <= 1e-12);

  // Huge positive gap: loss approaches 0 without overflow; huge negative gap
  // grows linearly without inf.
  CHECK(bpr_loss({{1000.0, 0.0}}, 0.0, 0.0) >= 0.0);
  CHECK(bpr_loss({{1000.0, 0.0}}, 0.0, 0.0) <= 1e-12);
  const double steep = bpr_loss({{0.0, 1000.0}}, 0.0, 0.0);
  CHECK(std::isfinite(steep));
  CHECK(steep >= 999.0);

  // Regularizer adds lambda * norm_sq.
  CHECK(std::abs(bpr_loss({{1.0, 1.0}}, 4.0, 0.5) - (std::log(2.0) + 2.0)) <= 1e-15);

  // Strictly decreasing in the gap.
  double prev = bpr_loss({{-3.0, 0.0}}, 0.0, 0.0);
  for (double gap = -2.5; gap <= 3.0; gap += 0.5) {
    const double cur = bpr_loss({{gap, 0.0}}, 0.0, 0.0);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("empty batch with regularization alone yields zero gradient") {
  // The L2 term covers rows the batch touches; an empty batch touches none,
  // so the loss is exactly zero no matter the lambda.
  const GraphInputs g = fixed_fixture_graph(true, true);
  ModelConfig mcfg;
  mcfg.embed_dim = 4;
  mcfg.n_layers = 2;
  const EmbeddingState e0 = init_embeddings(5, 8, mcfg);
  const BatchGradient grad = batch_loss_and_gradient(e0, g, mcfg, 1e-2, {});
  CHECK(grad.loss == 0.0);
  CHECK(grad.n_triples == 0);
  for (double v : grad.users.values) CHECK(v == 0.0);
  for (double v : grad.items.values) CHECK(v == 0.0);
  CHECK(finite_diff_check(g, mcfg, {}, 1e-2, 1e-4) <= 1e-8);
}

TEST_CASE("analytic gradient matches central differences on every channel combo") {
  const std::vector<BPRTriple> batch = fixture_batch();
  double worst = 0.0;
  for (int combo = 0; combo < 4; ++combo) {
    const bool social = combo & 1, correlation = combo & 2;
    const GraphInputs g = fixed_fixture_graph(social, correlation);
    ModelConfig mcfg;
    mcfg.embed_dim = 4;
    mcfg.n_layers = 2;
    mcfg.w_interact = 1.1;
    mcfg.w_correlation = 0.7;
    mcfg.w_social = 0.9;
    const double err = finite_diff_check(g, mcfg, batch, 1e-4, 1e-4);
    worst = std::max(worst, err);
    CHECK(err < 1e-4);
  }
  MESSAGE("worst finite-diff relative error: ", worst);
}

TEST_CASE("halving epsilon does not blow up the finite-difference error") {
  const GraphInputs g = fixed_fixture_graph(true, true);
  ModelConfig mcfg;
  mcfg.embed_dim = 4;
  mcfg.n_layers = 2;
  const double err_full = finite_diff_check(g, mcfg, fixture_batch(), 1e-4, 1e-4);
  const double err_half = finite_diff_check(g, mcfg, fixture_batch(), 1e-4, 5e-5);
  CHECK(err_half <= 4.0 * err_full + 1e-7);
}

TEST_CASE("K=0 leaves rows outside the batch bit-identical") {
  const GraphInputs g = fixed_fixture_graph(true, true);
  ModelConfig mcfg;
  mcfg.embed_dim = 4;
  mcfg.n_layers = 0;
  EmbeddingState e0 = init_embeddings(5, 8, mcfg);
  const EmbeddingState before = e0;
  AdamState adam = init_adam(5, 8, 4);
  TrainConfig tcfg;
  // Batch touches user 0 and items 1, 5 only.
  const std::vector<BPRTriple> batch = {{0, 1, 5}};
  const BatchGradient grad = batch_loss_and_gradient(e0, g, mcfg, 1e-4, batch);
  grad_step(e0, adam, grad, tcfg);

  for (Index u = 1; u < 5; ++u) {
    for (Index k = 0; k < 4; ++k) CHECK(e0.users(u, k) == before.users(u, k));
  }
  for (Index i = 0; i < 8; ++i) {
    if (i == 1 || i == 5) continue;
    for (Index k = 0; k < 4; ++k) CHECK(e0.items(i, k) == before.items(i, k));
  }
  // The touched rows did move.
  bool moved = false;
  for (Index k = 0; k < 4; ++k) moved = moved || e0.users(0, k) != before.users(0, k);
  CHECK(moved);
}

TEST_CASE("Adam moments make identical consecutive batches step differently") {
  const GraphInputs g = fixed_fixture_graph(false, false);
  ModelConfig mcfg;
  mcfg.embed_dim = 3;
  mcfg.n_layers = 1;
  EmbeddingState e0 = init_embeddings(5, 8, mcfg);
  AdamState adam = init_adam(5, 8, 3);
  TrainConfig tcfg;
  tcfg.lr = 0.1;

  const std::vector<BPRTriple> batch = fixture_batch();
  const BatchGradient g1 = batch_loss_and_gradient(e0, g, mcfg, 0.0, batch);
  const EmbeddingState s0 = e0;
  grad_step(e0, adam, g1, tcfg);
  EmbeddingState s1 = e0;
  const BatchGradient g2 = batch_loss_and_gradient(e0, g, mcfg, 0.0, batch);
  grad_step(e0, adam, g2, tcfg);

  DenseMatrix step1(5, 3), step2(5, 3);
  for (std::size_t i = 0; i < step1.values.size(); ++i) {
    step1.values[i] = s1.users.values[i] - s0.users.values[i];
    step2.values[i] = e0.users.values[i] - s1.users.values[i];
  }
  CHECK(max_abs_diff(step1, step2) > 1e-9);
  CHECK(adam.step == 2);
}

TEST_CASE("grad_step rejects non-finite gradients") {
  EmbeddingState e0;
  e0.users = DenseMatrix(2, 2);
  e0.items = DenseMatrix(2, 2);
  AdamState adam = init_adam(2, 2, 2);
  TrainConfig tcfg;
  BatchGradient grad;
  grad.users = DenseMatrix(2, 2);
  grad.items = DenseMatrix(2, 2);
  grad.users(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(grad_step(e0, adam, grad, tcfg),
                       "non-finite gradient encountered; aborting run", std::runtime_error);
}

TEST_CASE("train with max_epochs=0 returns the initialization") {
  const Dataset d = block_dataset();
  const GraphInputs g = build_graph_inputs(d, true, true);
  ModelConfig mcfg;
  mcfg.embed_dim = 4;
  mcfg.seed = 9;
  TrainConfig tcfg;
  tcfg.max_epochs = 0;
  tcfg.seed = 9;
  const auto [state, history] = train(d, g, mcfg, tcfg);
  CHECK(history.evals.empty());
  CHECK(history.epochs_to_best == 0);
  const EmbeddingState fresh = init_embeddings(d.n_users, d.n_items, mcfg);
  CHECK(state.users.values == fresh.users.values);
  CHECK(state.items.values == fresh.items.values);
}

TEST_CASE("stagnant recall stops after patience evaluations") {
  const Dataset d = block_dataset();
  const GraphInputs g = build_graph_inputs(d, false, false);
  ModelConfig mcfg;
  mcfg.embed_dim = 4;
  TrainConfig tcfg;
  // A learning rate this small cannot change any ranking, so recall is flat:
  // the first evaluation sets the best, the second exhausts patience=1.
  tcfg.lr = 1e-300;
  tcfg.eval_every = 1;
  tcfg.patience = 1;
  tcfg.max_epochs = 50;
  tcfg.eval_k = 3;
  const auto [state, history] = train(d, g, mcfg, tcfg);
  CHECK(history.evals.size() == 2);
  CHECK(history.epochs_to_best == 1);
}

TEST_CASE("recall improves across early evaluations on the block dataset") {
  const Dataset d = block_dataset();
  const GraphInputs g = build_graph_inputs(d, true, true);
  ModelConfig mcfg;
  mcfg.embed_dim = 8;
  mcfg.n_layers = 2;
  mcfg.seed = 3;
  TrainConfig tcfg;
  tcfg.lr = 0.002;
  tcfg.l2_lambda = 1e-5;
  tcfg.batch_size = 64;
  tcfg.max_epochs = 3;
  tcfg.eval_every = 1;
  tcfg.patience = 10;
  tcfg.eval_k = 5;
  tcfg.seed = 3;
  const auto [state, history] = train(d, g, mcfg, tcfg);
  REQUIRE(history.evals.size() == 3);
  MESSAGE("recalls: ", history.evals[0].recall, " ", history.evals[1].recall, " ",
          history.evals[2].recall);
  CHECK(history.evals[1].recall > history.evals[0].recall);
  CHECK(history.evals[2].recall > history.evals[1].recall);
  CHECK(history.evals[2].loss < history.evals[0].loss);
}

TEST_CASE("training is bit-reproducible") {
  const Dataset d = block_dataset();
  const GraphInputs g = build_graph_inputs(d, true, true);
  ModelConfig mcfg;
  mcfg.embed_dim = 6;
  mcfg.n_layers = 2;
  mcfg.seed = 21;
  TrainConfig tcfg;
  tcfg.lr = 0.02;
  tcfg.batch_size = 16;
  tcfg.max_epochs = 12;
  tcfg.eval_every = 4;
  tcfg.patience = 5;
  tcfg.eval_k = 3;
  tcfg.seed = 21;

  const auto [state_a, hist_a] = train(d, g, mcfg, tcfg);
  const auto [state_b, hist_b] = train(d, g, mcfg, tcfg);
  CHECK(state_a.users.values == state_b.users.values);
  CHECK(state_a.items.values == state_b.items.values);
  REQUIRE(hist_a.evals.size() == hist_b.evals.size());
  for (std::size_t i = 0; i < hist_a.evals.size(); ++i) {
    CHECK(hist_a.evals[i].epoch == hist_b.evals[i].epoch);
    CHECK(hist_a.evals[i].loss == hist_b.evals[i].loss);
    CHECK(hist_a.evals[i].recall == hist_b.evals[i].recall);
  }

  std::ostringstream csv_a, csv_b;
  write_history_csv(hist_a, csv_a);
  write_history_csv(hist_b, csv_b);
  CHECK(csv_a.str() == csv_b.str());
  CHECK(csv_a.str().rfind("epoch,loss,recall20,precision20,ndcg20\n", 0) == 0);
}

TEST_CASE("history epochs are strictly increasing") {
  const Dataset d = block_dataset();
  const GraphInputs g = build_graph_inputs(d, false, true);
  ModelConfig mcfg;
  mcfg.embed_dim = 4;
  TrainConfig tcfg;
  tcfg.lr = 0.05;
  tcfg.max_epochs = 9;
  tcfg.eval_every = 3;
  tcfg.eval_k = 3;
  const auto [state, history] = train(d, g, mcfg, tcfg);
  REQUIRE(history.evals.size() == 3);
  CHECK(history.evals[0].epoch == 3);
  CHECK(history.evals[1].epoch == 6);
  CHECK(history.evals[2].epoch == 9);
}
