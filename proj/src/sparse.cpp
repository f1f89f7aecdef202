#include "socgcf/sparse.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "socgcf/parallel.hpp"

namespace socgcf {

bool all_finite(const DenseMatrix& a) {
  for (double v : a.values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void add_scaled(DenseMatrix& out, const DenseMatrix& a, double alpha) {
  if (out.n_rows != a.n_rows || out.n_cols != a.n_cols) {
    throw std::invalid_argument("add_scaled: shape mismatch");
  }
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += alpha * a.values[i];
}

void scale(DenseMatrix& a, double alpha) {
  for (double& v : a.values) v *= alpha;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.n_rows != b.n_rows || a.n_cols != b.n_cols) {
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  }
  return m;
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols,
                                         std::vector<std::tuple<Index, Index, double>> triplets) {
  std::erase_if(triplets, [](const auto& t) { return std::get<2>(t) == 0.0; });
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });

  SparseMatrix out(rows, cols);
  out.col_indices.reserve(triplets.size());
  out.values.reserve(triplets.size());
  Index prev_row = -1, prev_col = -1;
  for (const auto& [i, j, v] : triplets) {
    if (i < 0 || i >= rows || j < 0 || j >= cols) {
      throw std::invalid_argument("from_triplets: index out of range");
    }
    if (i == prev_row && j == prev_col) {
      throw std::invalid_argument("from_triplets: duplicate coordinate");
    }
    while (prev_row < i) out.row_offsets[static_cast<std::size_t>(++prev_row)] = out.nnz();
    out.col_indices.push_back(j);
    out.values.push_back(v);
    prev_col = j;
  }
  while (prev_row < rows) out.row_offsets[static_cast<std::size_t>(++prev_row)] = out.nnz();
  return out;
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& a) {
  std::vector<std::tuple<Index, Index, double>> trip;
  for (Index i = 0; i < a.n_rows; ++i) {
    for (Index j = 0; j < a.n_cols; ++j) {
      if (a(i, j) != 0.0) trip.emplace_back(i, j, a(i, j));
    }
  }
  return from_triplets(a.n_rows, a.n_cols, std::move(trip));
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix out(n_rows, n_cols);
  for (Index i = 0; i < n_rows; ++i) {
    for (Index p = row_offsets[i]; p < row_offsets[i + 1]; ++p) {
      out(i, col_indices[static_cast<std::size_t>(p)]) = values[static_cast<std::size_t>(p)];
    }
  }
  return out;
}

void SparseMatrix::validate() const {
  if (n_rows < 0 || n_cols < 0) throw std::invalid_argument("csr: negative dimension");
  if (static_cast<Index>(row_offsets.size()) != n_rows + 1) {
    throw std::invalid_argument("csr: row_offsets length");
  }
  if (row_offsets.front() != 0 || row_offsets.back() != nnz() ||
      col_indices.size() != values.size()) {
    throw std::invalid_argument("csr: offset bounds");
  }
  for (Index i = 0; i < n_rows; ++i) {
    if (row_offsets[i] > row_offsets[i + 1]) throw std::invalid_argument("csr: offsets decrease");
    for (Index p = row_offsets[i]; p < row_offsets[i + 1]; ++p) {
      Index j = col_indices[static_cast<std::size_t>(p)];
      if (j < 0 || j >= n_cols) throw std::invalid_argument("csr: column out of range");
      if (p > row_offsets[i] && col_indices[static_cast<std::size_t>(p - 1)] >= j) {
        throw std::invalid_argument("csr: columns not strictly increasing");
      }
      if (values[static_cast<std::size_t>(p)] == 0.0) {
        throw std::invalid_argument("csr: explicit zero stored");
      }
    }
  }
}

void spmm_add(const SparseMatrix& a, const DenseMatrix& b, double weight, DenseMatrix& out) {
  if (a.n_cols != b.n_rows) throw std::invalid_argument("spmm: inner dimension mismatch");
  if (out.n_rows != a.n_rows || out.n_cols != b.n_cols) {
    throw std::invalid_argument("spmm: output shape mismatch");
  }
  const Index d = b.n_cols;
  parallel_for(a.n_rows, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      double* out_row = out.row(i);
      for (Index p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
        const double w = weight * a.values[static_cast<std::size_t>(p)];
        const double* b_row = b.row(a.col_indices[static_cast<std::size_t>(p)]);
        for (Index k = 0; k < d; ++k) out_row[k] += w * b_row[k];
      }
    }
  });
}

DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.n_rows, b.n_cols);
  spmm_add(a, b, 1.0, out);
  return out;
}

SparseMatrix transpose(const SparseMatrix& a) {
  SparseMatrix out(a.n_cols, a.n_rows);
  out.col_indices.assign(static_cast<std::size_t>(a.nnz()), 0);
  out.values.assign(static_cast<std::size_t>(a.nnz()), 0.0);

  for (Index j : a.col_indices) out.row_offsets[static_cast<std::size_t>(j + 1)]++;
  for (Index j = 0; j < out.n_rows; ++j) {
    out.row_offsets[static_cast<std::size_t>(j + 1)] += out.row_offsets[static_cast<std::size_t>(j)];
  }

  std::vector<Index> cursor(out.row_offsets.begin(), out.row_offsets.end() - 1);
  for (Index i = 0; i < a.n_rows; ++i) {
    for (Index p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
      Index j = a.col_indices[static_cast<std::size_t>(p)];
      Index q = cursor[static_cast<std::size_t>(j)]++;
      out.col_indices[static_cast<std::size_t>(q)] = i;
      out.values[static_cast<std::size_t>(q)] = a.values[static_cast<std::size_t>(p)];
    }
  }
  return out;
}

std::vector<Index> nnz_degrees(const SparseMatrix& a, Axis axis) {
  if (axis == Axis::rows) {
    std::vector<Index> deg(static_cast<std::size_t>(a.n_rows));
    for (Index i = 0; i < a.n_rows; ++i) deg[static_cast<std::size_t>(i)] = a.row_offsets[i + 1] - a.row_offsets[i];
    return deg;
  }
  std::vector<Index> deg(static_cast<std::size_t>(a.n_cols), 0);
  for (Index j : a.col_indices) deg[static_cast<std::size_t>(j)]++;
  return deg;
}

SparseMatrix sym_normalize(const SparseMatrix& a) {
  if (a.n_rows != a.n_cols) throw std::invalid_argument("sym_normalize: matrix not square");
  const std::vector<Index> deg = nnz_degrees(a, Axis::rows);

  SparseMatrix out = a;
  for (Index i = 0; i < a.n_rows; ++i) {
    for (Index p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
      Index j = a.col_indices[static_cast<std::size_t>(p)];
      Index dj = deg[static_cast<std::size_t>(j)];
      if (dj == 0) throw std::invalid_argument("sym_normalize: stored entry in degree-0 column");
      out.values[static_cast<std::size_t>(p)] =
          a.values[static_cast<std::size_t>(p)] /
          std::sqrt(static_cast<double>(deg[static_cast<std::size_t>(i)]) * static_cast<double>(dj));
    }
  }
  return out;
}

SparseMatrix bipartite_normalize(const SparseMatrix& r) {
  for (double v : r.values) {
    if (v != 1.0) throw std::invalid_argument("bipartite_normalize: matrix not binary");
  }
  const std::vector<Index> row_deg = nnz_degrees(r, Axis::rows);
  const std::vector<Index> col_deg = nnz_degrees(r, Axis::cols);

  SparseMatrix out = r;
  for (Index u = 0; u < r.n_rows; ++u) {
    for (Index p = r.row_offsets[u]; p < r.row_offsets[u + 1]; ++p) {
      Index i = r.col_indices[static_cast<std::size_t>(p)];
      out.values[static_cast<std::size_t>(p)] =
          1.0 / std::sqrt(static_cast<double>(row_deg[static_cast<std::size_t>(u)]) *
                          static_cast<double>(col_deg[static_cast<std::size_t>(i)]));
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_coo(std::ostream& out, const SparseMatrix& a) {
  out << a.n_rows << ' ' << a.n_cols << ' ' << a.nnz() << '\n';
  for (Index i = 0; i < a.n_rows; ++i) {
    for (Index p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
      out << i << ' ' << a.col_indices[static_cast<std::size_t>(p)] << ' '
          << format_double(a.values[static_cast<std::size_t>(p)]) << '\n';
    }
  }
}

SparseMatrix read_coo(std::istream& in) {
  Index rows = -1, cols = -1, nnz = -1;
  if (!(in >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
    throw std::runtime_error("coo: bad header line");
  }
  std::vector<std::tuple<Index, Index, double>> trip;
  trip.reserve(static_cast<std::size_t>(nnz));
  for (Index e = 0; e < nnz; ++e) {
    Index i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw std::runtime_error("coo: truncated entry list");
    if (v == 0.0) throw std::runtime_error("coo: explicit zero entry " + std::to_string(e));
    trip.emplace_back(i, j, v);
  }
  SparseMatrix out = SparseMatrix::from_triplets(rows, cols, std::move(trip));
  out.validate();
  return out;
}

void save_coo(const std::string& path, const SparseMatrix& a) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  write_coo(f, a);
  if (!f) throw std::runtime_error("write failed: " + path);
}

SparseMatrix load_coo(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return read_coo(f);
}

}  // namespace socgcf
