#include "socgcf/graph.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace socgcf {

SparseMatrix build_interaction_matrix(const Dataset& d) {
  if (d.train.empty()) throw std::runtime_error("build_interaction_matrix: empty train split");
  std::vector<std::pair<Index, Index>> pairs = d.train;
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<std::tuple<Index, Index, double>> triplets;
  triplets.reserve(pairs.size());
  for (const auto& [u, i] : pairs) triplets.emplace_back(u, i, 1.0);
  return SparseMatrix::from_triplets(d.n_users, d.n_items, triplets);
}

std::pair<SparseMatrix, SparseMatrix> build_interaction_operator(const SparseMatrix& r) {
  SparseMatrix r_norm = bipartite_normalize(r);
  SparseMatrix r_norm_t = transpose(r_norm);
  return {std::move(r_norm), std::move(r_norm_t)};
}

SparseMatrix jaccard_pairs(const SparseMatrix& r, double floor) {
  if (!(floor >= 0.0 && floor < 1.0)) {
    throw std::invalid_argument("jaccard_pairs: floor must lie in [0, 1)");
  }
  for (double v : r.values) {
    if (v != 1.0) throw std::invalid_argument("jaccard_pairs: matrix must be binary");
  }
  const Index n = r.n_rows;
  const std::vector<Index> degree = nnz_degrees(r, Axis::rows);

  // Users per item, then co-occurrence counts per user pair. Only pairs
  // that share at least one item ever get a key, so memory tracks the
  // overlap structure, not n^2.
  std::vector<std::vector<Index>> item_users(static_cast<std::size_t>(r.n_cols));
  for (Index u = 0; u < n; ++u) {
    for (Index p = r.row_offsets[static_cast<std::size_t>(u)];
         p < r.row_offsets[static_cast<std::size_t>(u) + 1]; ++p) {
      item_users[static_cast<std::size_t>(r.col_indices[static_cast<std::size_t>(p)])].push_back(u);
    }
  }
  std::unordered_map<std::uint64_t, Index> inter;
  for (const auto& users : item_users) {
    for (std::size_t a = 0; a < users.size(); ++a) {
      for (std::size_t b = a + 1; b < users.size(); ++b) {
        const std::uint64_t key =
            static_cast<std::uint64_t>(users[a]) * static_cast<std::uint64_t>(n) +
            static_cast<std::uint64_t>(users[b]);
        inter[key]++;
      }
    }
  }

  std::vector<std::tuple<Index, Index, double>> triplets;
  triplets.reserve(2 * inter.size());
  for (const auto& [key, c] : inter) {
    const Index u = static_cast<Index>(key / static_cast<std::uint64_t>(n));
    const Index v = static_cast<Index>(key % static_cast<std::uint64_t>(n));
    const Index uni = degree[static_cast<std::size_t>(u)] + degree[static_cast<std::size_t>(v)] - c;
    const double j = static_cast<double>(c) / static_cast<double>(uni);
    if (j < floor) continue;
    triplets.emplace_back(u, v, j);
    triplets.emplace_back(v, u, j);
  }
  return SparseMatrix::from_triplets(n, n, triplets);
}

double classify_jaccard(double j) {
  if (!(j >= 0.0 && j <= 1.0)) {
    throw std::invalid_argument("classify_jaccard: value outside [0, 1]");
  }
  if (j < 0.1) return 0.0;
  if (j < 0.4) return 0.005;
  if (j < 0.6) return 0.05;
  if (j < 0.9) return 0.5;
  return 1.0;
}

SparseMatrix build_correlation_matrix(const SparseMatrix& r, double floor) {
  SparseMatrix j = jaccard_pairs(r, floor);
  std::vector<std::tuple<Index, Index, double>> triplets;
  triplets.reserve(j.nnz());
  for (Index row = 0; row < j.n_rows; ++row) {
    for (Index p = j.row_offsets[static_cast<std::size_t>(row)];
         p < j.row_offsets[static_cast<std::size_t>(row) + 1]; ++p) {
      const double w = classify_jaccard(j.values[static_cast<std::size_t>(p)]);
      if (w == 0.0) continue;
      triplets.emplace_back(row, j.col_indices[static_cast<std::size_t>(p)], w);
    }
  }
  return SparseMatrix::from_triplets(j.n_rows, j.n_cols, triplets);
}

SparseMatrix build_correlation_operator(const SparseMatrix& r, double floor) {
  return sym_normalize(build_correlation_matrix(r, floor));
}

std::optional<SparseMatrix> build_social_matrix(const Dataset& d) {
  if (d.social_edges.empty()) return std::nullopt;
  std::vector<std::tuple<Index, Index, double>> triplets;
  triplets.reserve(2 * d.social_edges.size());
  for (const auto& [a, b] : d.social_edges) {
    triplets.emplace_back(a, b, 1.0);
    triplets.emplace_back(b, a, 1.0);
  }
  return SparseMatrix::from_triplets(d.n_users, d.n_users, triplets);
}

std::optional<SparseMatrix> build_social_operator(const Dataset& d) {
  std::optional<SparseMatrix> s = build_social_matrix(d);
  if (!s) return std::nullopt;
  return sym_normalize(*s);
}

GraphInputs build_graph_inputs(const Dataset& d, bool use_social, bool use_correlation) {
  return build_graph_inputs_from(build_interaction_matrix(d), build_social_matrix(d), use_social,
                                 use_correlation);
}

GraphInputs build_graph_inputs_from(const SparseMatrix& r, const std::optional<SparseMatrix>& s,
                                    bool use_social, bool use_correlation) {
  GraphInputs g;
  g.n_users = r.n_rows;
  g.n_items = r.n_cols;
  std::tie(g.r_norm, g.r_norm_t) = build_interaction_operator(r);
  if (use_social) {
    if (s && s->nnz() > 0) {
      g.s_norm = sym_normalize(*s);
    } else {
      std::cerr << "warning: social channel requested but the dataset has no "
                   "social edges; disabling it\n";
    }
  }
  if (use_correlation) {
    g.c_norm = build_correlation_operator(r);
  }
  g.use_social = g.s_norm.has_value();
  g.use_correlation = g.c_norm.has_value();
  return g;
}

}  // namespace socgcf
