#include "socgcf/model.hpp"

#include <cmath>
#include <stdexcept>

#include "socgcf/rng.hpp"

namespace socgcf {

namespace {

void check_dims(const EmbeddingState& state, const GraphInputs& g, const char* where) {
  if (state.users.n_rows != g.n_users || state.items.n_rows != g.n_items ||
      state.users.n_cols != state.items.n_cols) {
    throw std::invalid_argument(std::string(where) + ": embedding/graph dimension mismatch");
  }
}

EmbeddingState zeros_like(const EmbeddingState& state) {
  EmbeddingState out;
  out.users = DenseMatrix(state.users.n_rows, state.users.n_cols);
  out.items = DenseMatrix(state.items.n_rows, state.items.n_cols);
  return out;
}

}  // namespace

void validate_model_config(const ModelConfig& cfg) {
  if (cfg.embed_dim < 1) throw std::invalid_argument("embed_dim must be >= 1");
  if (cfg.n_layers < 0) throw std::invalid_argument("n_layers must be >= 0");
  for (double w : {cfg.w_interact, cfg.w_correlation, cfg.w_social}) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("aggregation weights must be finite and non-negative");
    }
  }
}

EmbeddingState init_embeddings(Index n_users, Index n_items, const ModelConfig& cfg) {
  validate_model_config(cfg);
  if (n_users < 1 || n_items < 1) {
    throw std::invalid_argument("init_embeddings: need at least one user and one item");
  }
  Rng rng(derive_seed(cfg.seed, "init"));
  EmbeddingState state;
  state.users = DenseMatrix(n_users, cfg.embed_dim);
  state.items = DenseMatrix(n_items, cfg.embed_dim);
  for (double& v : state.users.values) v = rng.next_gaussian(0.0, 0.1);
  for (double& v : state.items.values) v = rng.next_gaussian(0.0, 0.1);
  return state;
}

EmbeddingState propagate_layer(const EmbeddingState& state, const GraphInputs& g,
                               const ModelConfig& cfg) {
  check_dims(state, g, "propagate_layer");
  EmbeddingState next = zeros_like(state);
  spmm_add(g.r_norm, state.items, cfg.w_interact, next.users);
  if (g.use_correlation) spmm_add(*g.c_norm, state.users, cfg.w_correlation, next.users);
  if (g.use_social) spmm_add(*g.s_norm, state.users, cfg.w_social, next.users);
  spmm_add(g.r_norm_t, state.users, 1.0, next.items);
  return next;
}

EmbeddingState propagate_adjoint(const EmbeddingState& state, const GraphInputs& g,
                                 const ModelConfig& cfg) {
  check_dims(state, g, "propagate_adjoint");
  EmbeddingState next = zeros_like(state);
  spmm_add(g.r_norm, state.items, 1.0, next.users);
  if (g.use_correlation) spmm_add(*g.c_norm, state.users, cfg.w_correlation, next.users);
  if (g.use_social) spmm_add(*g.s_norm, state.users, cfg.w_social, next.users);
  spmm_add(g.r_norm_t, state.users, cfg.w_interact, next.items);
  return next;
}

ForwardTrace forward(const EmbeddingState& state0, const GraphInputs& g, const ModelConfig& cfg) {
  validate_model_config(cfg);
  check_dims(state0, g, "forward");
  ForwardTrace trace;
  trace.layers.reserve(static_cast<std::size_t>(cfg.n_layers) + 1);
  trace.layers.push_back(state0);
  for (Index k = 0; k < cfg.n_layers; ++k) {
    trace.layers.push_back(propagate_layer(trace.layers.back(), g, cfg));
  }
  // Sum first, scale once: bit-identical to forward_final.
  trace.final = state0;
  for (std::size_t k = 1; k < trace.layers.size(); ++k) {
    add_scaled(trace.final.users, trace.layers[k].users, 1.0);
    add_scaled(trace.final.items, trace.layers[k].items, 1.0);
  }
  const double inv = 1.0 / static_cast<double>(cfg.n_layers + 1);
  scale(trace.final.users, inv);
  scale(trace.final.items, inv);
  return trace;
}

EmbeddingState forward_final(const EmbeddingState& state0, const GraphInputs& g,
                             const ModelConfig& cfg) {
  validate_model_config(cfg);
  check_dims(state0, g, "forward_final");
  EmbeddingState sum = state0;
  EmbeddingState current = state0;
  for (Index k = 0; k < cfg.n_layers; ++k) {
    current = propagate_layer(current, g, cfg);
    add_scaled(sum.users, current.users, 1.0);
    add_scaled(sum.items, current.items, 1.0);
  }
  const double inv = 1.0 / static_cast<double>(cfg.n_layers + 1);
  scale(sum.users, inv);
  scale(sum.items, inv);
  return sum;
}

double score(const EmbeddingState& final_state, Index u, Index i) {
  if (u < 0 || u >= final_state.users.n_rows) throw std::out_of_range("score: user out of range");
  if (i < 0 || i >= final_state.items.n_rows) throw std::out_of_range("score: item out of range");
  const double* eu = final_state.users.row(u);
  const double* ei = final_state.items.row(i);
  double acc = 0.0;
  for (Index k = 0; k < final_state.users.n_cols; ++k) acc += eu[k] * ei[k];
  return acc;
}

std::vector<double> score_all_items(const EmbeddingState& final_state, Index u) {
  if (u < 0 || u >= final_state.users.n_rows) {
    throw std::out_of_range("score_all_items: user out of range");
  }
  const Index m = final_state.items.n_rows;
  const Index d = final_state.users.n_cols;
  const double* eu = final_state.users.row(u);
  std::vector<double> out(static_cast<std::size_t>(m), 0.0);
  for (Index i = 0; i < m; ++i) {
    const double* ei = final_state.items.row(i);
    double acc = 0.0;
    for (Index k = 0; k < d; ++k) acc += eu[k] * ei[k];
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

}  // namespace socgcf
