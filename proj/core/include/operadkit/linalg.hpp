#pragma once

#include <map>
#include <string>
#include <vector>

#include "operadkit/rational.hpp"

namespace operadkit {

/// Sparse vector: index -> nonzero coefficient.
using SparseVec = std::map<int, Rat>;

/// Exact sparse matrix over the rationals, stored column-major. No explicit zeros.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), col_(cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  void add(int r, int c, const Rat& v);
  void set(int r, int c, const Rat& v);
  Rat at(int r, int c) const;
  const SparseVec& column(int c) const { return col_[c]; }

  int nnz() const;
  bool is_zero() const;

  /// this * other, exact.
  SparseMatrix multiply(const SparseMatrix& other) const;
  SparseMatrix transpose() const;

  /// Applies the matrix to a sparse vector of length cols().
  SparseVec apply(const SparseVec& x) const;

  /// MatrixMarket-style coordinate text with exact fraction literals (1-based indices).
  std::string dump() const;
  static SparseMatrix parse(const std::string& text);

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.col_ == b.col_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<SparseVec> col_;
};

struct RankKernel {
  int rank = 0;
  std::vector<SparseVec> kernel;  // basis of the right kernel, each of length cols()
};

/// Pivot selection order, used by the determinism cross-check.
enum class PivotRule { SparsestColumn, FirstColumn };

/// Exact rank and a spanning basis of the kernel over the rationals.
RankKernel rank_kernel(const SparseMatrix& m, PivotRule rule = PivotRule::SparsestColumn);

/// One arity slice of a cochain complex: degree k -> dimension, and d^k : k -> k+1.
struct ComplexSlice {
  std::map<int, int> dims;
  std::map<int, SparseMatrix> d;  // d[k] has shape dims[k+1] x dims[k]

  /// Verifies consistency of shapes and d.d = 0. Returns offending degree or nullopt-like -1 sentinel in `bad_degree`.
  bool check_d_squared(int* bad_degree = nullptr) const;
};

/// dim H^k = dim ker d^k - rank d^{k-1}. Throws std::invalid_argument if d^2 != 0,
/// with the offending degree in the message.
std::map<int, int> cohomology_dims(const ComplexSlice& c);

}  // namespace operadkit
