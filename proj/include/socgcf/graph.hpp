#pragma once

#include <optional>
#include <utility>

#include "socgcf/dataset.hpp"
#include "socgcf/sparse.hpp"

namespace socgcf {

// The frozen propagation operators. r_norm/r_norm_t are the normalized
// interaction blocks; s_norm and c_norm are the user-user channels, present
// only when the corresponding flag is on.
struct GraphInputs {
  Index n_users = 0;
  Index n_items = 0;
  SparseMatrix r_norm;    // n x m
  SparseMatrix r_norm_t;  // m x n, transpose of r_norm
  std::optional<SparseMatrix> s_norm;  // n x n social channel
  std::optional<SparseMatrix> c_norm;  // n x n correlation channel
  bool use_social = false;
  bool use_correlation = false;
};

// Binary user-item matrix over the training interactions only.
SparseMatrix build_interaction_matrix(const Dataset& d);

// (r_norm, r_norm_t) with 1/sqrt(deg_u * deg_i) scaling. The square
// (n+m) adjacency is never materialized; the block pair is equivalent.
std::pair<SparseMatrix, SparseMatrix> build_interaction_operator(const SparseMatrix& r);

// Symmetric matrix of pairwise Jaccard similarities between users' item
// sets, storing entries >= floor, zero diagonal. Accumulates co-occurrence
// counts item by item; never forms a dense n x n intermediate.
SparseMatrix jaccard_pairs(const SparseMatrix& r, double floor = 0.1);

// Bucket a Jaccard value into its correlation weight. Rejects j outside
// [0, 1].
double classify_jaccard(double j);

// Classified correlation matrix C (weights from classify_jaccard), then its
// symmetrically normalized form. Entries whose bucket is 0.0 vanish, which
// is why a 0.1 sparsity floor on jaccard_pairs loses nothing.
SparseMatrix build_correlation_matrix(const SparseMatrix& r, double floor = 0.1);
SparseMatrix build_correlation_operator(const SparseMatrix& r, double floor = 0.1);

// Binary symmetric friendship matrix and its normalized form. Absent when
// the dataset has no social edges.
std::optional<SparseMatrix> build_social_matrix(const Dataset& d);
std::optional<SparseMatrix> build_social_operator(const Dataset& d);

// Assemble everything. If use_social is requested but the dataset has no
// edges, the flag is forced off with a warning on stderr.
GraphInputs build_graph_inputs(const Dataset& d, bool use_social, bool use_correlation);

// Same assembly from a binary interaction matrix and an optional raw social
// matrix, for callers that do not hold a Dataset (fixtures, checks).
GraphInputs build_graph_inputs_from(const SparseMatrix& r, const std::optional<SparseMatrix>& s,
                                    bool use_social, bool use_correlation);

}  // namespace socgcf
