#pragma once

#include <string>
#include <vector>

#include "socgcf/evaluator.hpp"
#include "socgcf/graph.hpp"
#include "socgcf/model.hpp"
#include "socgcf/rng.hpp"
#include "socgcf/trainer.hpp"

namespace socgcf {

// Everything here is a deliberately naive, dense re-implementation used to
// cross-check the sparse production path. Nothing in this header calls the
// sparse kernels, the graph builders, or the model's propagation; keeping the
// two routes disjoint is what makes the comparisons meaningful.

// Raw (unnormalized) dense inputs for the oracle. The correlation matrix is
// derived from r inside the oracle itself.
struct DenseGraph {
  Index n_users = 0;
  Index n_items = 0;
  DenseMatrix r;  // n x m binary
  DenseMatrix s;  // n x n binary symmetric, zero diagonal (ignored unless use_social)
  bool use_social = false;
  bool use_correlation = false;
  double w_a = 1.0;
  double w_c = 1.0;
  double w_s = 1.0;
};

// Pairwise Jaccard over dense rows, bucketed into correlation weights, by a
// plain double loop over user pairs.
DenseMatrix dense_jaccard_classified(const DenseMatrix& r);

// Layer-mean embeddings computed by materializing the full square
// (n+m)x(n+m) propagation operator and repeatedly multiplying — the
// brute-force reading of the model.
std::pair<DenseMatrix, DenseMatrix> dense_forward_final(const DenseGraph& dg,
                                                        const DenseMatrix& e_users,
                                                        const DenseMatrix& e_items, Index n_layers);

// Minimal independent LightGCN layer: normalize the bipartite adjacency
// densely and apply E_U' = R~ E_I, E_I' = R~^T E_U.
std::pair<DenseMatrix, DenseMatrix> lightgcn_reference_layer(const DenseMatrix& r,
                                                             const DenseMatrix& e_users,
                                                             const DenseMatrix& e_items);

// Per-user loop evaluation with its own scoring and ranking.
MetricsReport evaluate_bruteforce(const EmbeddingState& final_state, const Dataset& d, Index k);

// Fixture generators for randomized comparisons.
SparseMatrix random_binary_matrix(Rng& rng, Index n, Index m, double density);
SparseMatrix random_symmetric_binary(Rng& rng, Index n, double density);

// Max |sparse forward - dense oracle| over the final embeddings, given both
// views of the same graph. Exposed separately so mutation tests can feed
// deliberately inconsistent pairs.
double dense_forward_max_diff(const GraphInputs& g, const ModelConfig& mcfg, const DenseGraph& dg,
                              const EmbeddingState& e0);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

CheckResult check_dense_forward(std::uint64_t seed, int n_cases);
CheckResult check_finite_diff();
CheckResult check_lightgcn_reduction(std::uint64_t seed);
CheckResult check_metric_oracles(std::uint64_t seed);
std::vector<CheckResult> run_all_checks(std::uint64_t seed);

}  // namespace socgcf
