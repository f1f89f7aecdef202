#pragma once

#include <cstdint>
#include <vector>

#include "socgcf/graph.hpp"
#include "socgcf/sparse.hpp"

namespace socgcf {

struct ModelConfig {
  Index embed_dim = 64;
  Index n_layers = 3;
  double w_interact = 1.0;
  double w_correlation = 1.0;
  double w_social = 1.0;
  std::uint64_t seed = 42;
};

// Throws std::invalid_argument unless embed_dim >= 1, n_layers >= 0, and all
// weights are finite and non-negative.
void validate_model_config(const ModelConfig& cfg);

// The only trainable parameters: one embedding row per user and per item.
struct EmbeddingState {
  DenseMatrix users;
  DenseMatrix items;
};

struct ForwardTrace {
  std::vector<EmbeddingState> layers;  // K+1 snapshots, layers[0] = input
  EmbeddingState final;                // mean over the snapshots
};

// i.i.d. Gaussian(0, 0.1) rows, deterministic in cfg.seed. Users are drawn
// first, then items, so the layout is stable across runs.
EmbeddingState init_embeddings(Index n_users, Index n_items, const ModelConfig& cfg);

// One propagation step:
//   users' = w_interact * (r_norm @ items)
//          + w_correlation * (c_norm @ users)   when enabled
//          + w_social * (s_norm @ users)        when enabled
//   items' = r_norm_t @ users
// No feature transforms, no activations.
EmbeddingState propagate_layer(const EmbeddingState& state, const GraphInputs& g,
                               const ModelConfig& cfg);

// Transpose of propagate_layer as a linear map on (users, items). Feeding a
// gradient through this K times yields exact gradients of the forward pass:
//   users' = w_correlation * (c_norm @ users) + w_social * (s_norm @ users)
//          + r_norm @ items
//   items' = w_interact * (r_norm_t @ users)
EmbeddingState propagate_adjoint(const EmbeddingState& state, const GraphInputs& g,
                                 const ModelConfig& cfg);

// Full trace: K+1 snapshots plus their mean.
ForwardTrace forward(const EmbeddingState& state0, const GraphInputs& g, const ModelConfig& cfg);

// Mean over snapshots without retaining them.
EmbeddingState forward_final(const EmbeddingState& state0, const GraphInputs& g,
                             const ModelConfig& cfg);

// Dot product of a user row and an item row of the final embeddings.
double score(const EmbeddingState& final_state, Index u, Index i);

// Scores of user u against every item; entry i equals score(final, u, i).
std::vector<double> score_all_items(const EmbeddingState& final_state, Index u);

}  // namespace socgcf
