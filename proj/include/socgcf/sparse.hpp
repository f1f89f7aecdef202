#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <tuple>
#include <vector>

namespace socgcf {

using Index = std::int64_t;

// Row-major dense matrix of 64-bit reals.
struct DenseMatrix {
  Index n_rows = 0;
  Index n_cols = 0;
  std::vector<double> values;

  DenseMatrix() = default;
  DenseMatrix(Index rows, Index cols)
      : n_rows(rows), n_cols(cols), values(static_cast<std::size_t>(rows * cols), 0.0) {}

  double& operator()(Index i, Index j) { return values[static_cast<std::size_t>(i * n_cols + j)]; }
  double operator()(Index i, Index j) const {
    return values[static_cast<std::size_t>(i * n_cols + j)];
  }
  double* row(Index i) { return values.data() + i * n_cols; }
  const double* row(Index i) const { return values.data() + i * n_cols; }

  void fill(double v) { values.assign(values.size(), v); }
};

bool all_finite(const DenseMatrix& a);

// out += alpha * a, shapes must match.
void add_scaled(DenseMatrix& out, const DenseMatrix& a, double alpha);
void scale(DenseMatrix& a, double alpha);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// CSR sparse matrix. Invariants: row_offsets is non-decreasing with
// row_offsets[0] == 0 and row_offsets[n_rows] == nnz; column indices are
// strictly increasing within each row; no explicit zeros are stored.
struct SparseMatrix {
  Index n_rows = 0;
  Index n_cols = 0;
  std::vector<Index> row_offsets;  // length n_rows + 1
  std::vector<Index> col_indices;
  std::vector<double> values;

  SparseMatrix() : row_offsets(1, 0) {}
  SparseMatrix(Index rows, Index cols)
      : n_rows(rows), n_cols(cols), row_offsets(static_cast<std::size_t>(rows) + 1, 0) {}

  Index nnz() const { return static_cast<Index>(values.size()); }

  // Builds a CSR matrix from (row, col, value) triplets. Entries are sorted;
  // exact zeros are dropped; duplicate coordinates are an error.
  static SparseMatrix from_triplets(Index rows, Index cols,
                                    std::vector<std::tuple<Index, Index, double>> triplets);
  static SparseMatrix from_dense(const DenseMatrix& a);
  DenseMatrix to_dense() const;

  // Throws std::invalid_argument when a CSR invariant is violated.
  void validate() const;
};

enum class Axis { rows, cols };

// out[i,:] = sum_j a[i,j] * b[j,:]. Rows of `a` with no entries yield zero rows.
DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b);

// out += weight * (a * b). Parallelizes over output rows; `out` must be n_rows x b.n_cols.
void spmm_add(const SparseMatrix& a, const DenseMatrix& b, double weight, DenseMatrix& out);

SparseMatrix transpose(const SparseMatrix& a);

// Count of stored entries per row (or per column).
std::vector<Index> nnz_degrees(const SparseMatrix& a, Axis axis);

// out[i,j] = a[i,j] / sqrt(deg_i * deg_j) with deg = per-row stored-entry count.
// Requires a square matrix; a stored entry whose column has row degree 0 is rejected
// (it cannot occur for the symmetric operators this kernel serves).
SparseMatrix sym_normalize(const SparseMatrix& a);

// For a binary user-item matrix r: out[u,i] = 1/sqrt(deg_u * deg_i) with
// deg_u = row count and deg_i = column count. Equals the upper-right block of
// the symmetric normalization of the full bipartite block matrix.
SparseMatrix bipartite_normalize(const SparseMatrix& r);

// Text COO persistence: first line "rows cols nnz", then one "i j v" line per
// stored entry, 0-based indices, v in shortest round-trip decimal.
void write_coo(std::ostream& out, const SparseMatrix& a);
SparseMatrix read_coo(std::istream& in);
void save_coo(const std::string& path, const SparseMatrix& a);
SparseMatrix load_coo(const std::string& path);

// Shortest round-trip decimal rendering of a double (locale-independent).
std::string format_double(double v);

}  // namespace socgcf
