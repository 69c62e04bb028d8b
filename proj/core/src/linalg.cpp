#include "operadkit/linalg.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace operadkit {

void SparseMatrix::add(int r, int c, const Rat& v) {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
    throw std::out_of_range("SparseMatrix::add index");
  if (v.is_zero()) return;
  auto& col = col_[c];
  auto it = col.find(r);
  if (it == col.end()) {
    col.emplace(r, v);
  } else {
    it->second += v;
    if (it->second.is_zero()) col.erase(it);
  }
}

void SparseMatrix::set(int r, int c, const Rat& v) {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
    throw std::out_of_range("SparseMatrix::set index");
  if (v.is_zero())
    col_[c].erase(r);
  else
    col_[c][r] = v;
}

Rat SparseMatrix::at(int r, int c) const {
  const auto& col = col_.at(c);
  auto it = col.find(r);
  return it == col.end() ? Rat() : it->second;
}

int SparseMatrix::nnz() const {
  int n = 0;
  for (const auto& c : col_) n += static_cast<int>(c.size());
  return n;
}

bool SparseMatrix::is_zero() const { return nnz() == 0; }

SparseMatrix SparseMatrix::multiply(const SparseMatrix& other) const {
  if (cols_ != other.rows_) throw std::invalid_argument("matrix shape mismatch");
  SparseMatrix out(rows_, other.cols_);
  for (int j = 0; j < other.cols_; ++j) {
    SparseVec acc;
    for (const auto& [k, w] : other.col_[j]) {
      for (const auto& [r, v] : col_[k]) {
        Rat& slot = acc[r];
        slot += v * w;
      }
    }
    for (auto& [r, v] : acc)
      if (!v.is_zero()) out.col_[j].emplace(r, std::move(v));
  }
  return out;
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix out(cols_, rows_);
  for (int j = 0; j < cols_; ++j)
    for (const auto& [r, v] : col_[j]) out.col_[r].emplace(j, v);
  return out;
}

SparseVec SparseMatrix::apply(const SparseVec& x) const {
  SparseVec out;
  for (const auto& [j, w] : x) {
    if (j < 0 || j >= cols_) throw std::out_of_range("apply index");
    for (const auto& [r, v] : col_[j]) {
      Rat& slot = out[r];
      slot += v * w;
    }
  }
  for (auto it = out.begin(); it != out.end();)
    it = it->second.is_zero() ? out.erase(it) : std::next(it);
  return out;
}

std::string SparseMatrix::dump() const {
  std::ostringstream os;
  os << "%%MatrixMarket matrix coordinate rational general\n";
  os << rows_ << " " << cols_ << " " << nnz() << "\n";
  for (int j = 0; j < cols_; ++j)
    for (const auto& [r, v] : col_[j]) os << (r + 1) << " " << (j + 1) << " " << v.str() << "\n";
  return os.str();
}

SparseMatrix SparseMatrix::parse(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw std::invalid_argument("missing MatrixMarket header");
  int rows, cols, nnz;
  if (!(is >> rows >> cols >> nnz)) throw std::invalid_argument("missing matrix shape");
  SparseMatrix m(rows, cols);
  for (int k = 0; k < nnz; ++k) {
    int r, c;
    std::string v;
    if (!(is >> r >> c >> v)) throw std::invalid_argument("truncated matrix entries");
    m.set(r - 1, c - 1, Rat::parse(v));
  }
  return m;
}

namespace {

// Plain rational Gaussian elimination on a column-major copy. Partial pivoting
// prefers sparse pivot columns to limit fill-in; exactness comes first.
struct Elimination {
  int rows, cols;
  std::vector<SparseVec> col;
  std::vector<int> pivot_row_of_col;  // -1 for free columns
  std::vector<char> row_used;
  int rank = 0;

  Elimination(const SparseMatrix& m, PivotRule rule)
      : rows(m.rows()), cols(m.cols()), col(cols), pivot_row_of_col(cols, -1), row_used(rows, 0) {
    for (int j = 0; j < cols; ++j) col[j] = m.column(j);

    std::vector<int> order(cols);
    for (int j = 0; j < cols; ++j) order[j] = j;
    if (rule == PivotRule::SparsestColumn) {
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return col[a].size() < col[b].size();
      });
    }

    for (int oj : order) eliminate_column(oj);
  }

  void eliminate_column(int j) {
    // Reduce column j by all existing pivots, then pick a new pivot if nonzero.
    for (int pj = 0; pj < cols; ++pj) {
      int pr = pivot_row_of_col[pj];
      if (pr < 0 || pj == j) continue;
      auto it = col[j].find(pr);
      if (it == col[j].end()) continue;
      Rat factor = it->second / col[pj].at(pr);
      axpy(j, pj, factor);
    }
    if (col[j].empty()) return;
    // Pivot on the first unused row with a nonzero entry.
    int pr = -1;
    for (const auto& [r, v] : col[j]) {
      (void)v;
      if (!row_used[r]) {
        pr = r;
        break;
      }
    }
    if (pr < 0) return;  // cannot happen: reduced column touches only unused rows
    pivot_row_of_col[j] = pr;
    row_used[pr] = 1;
    ++rank;
  }

  // col[j] -= factor * col[pj]
  void axpy(int j, int pj, const Rat& factor) {
    if (factor.is_zero()) return;
    for (const auto& [r, v] : col[pj]) {
      auto it = col[j].find(r);
      if (it == col[j].end()) {
        Rat nv = -(factor * v);
        if (!nv.is_zero()) col[j].emplace(r, std::move(nv));
      } else {
        it->second -= factor * v;
        if (it->second.is_zero()) col[j].erase(it);
      }
    }
  }
};

}  // namespace

RankKernel rank_kernel(const SparseMatrix& m, PivotRule rule) {
  // Eliminate on an augmented copy that tracks the column operations, so the
  // free columns of the reduced matrix directly give kernel vectors.
  const int rows = m.rows(), cols = m.cols();
  SparseMatrix aug(rows + cols, cols);
  for (int j = 0; j < cols; ++j) {
    for (const auto& [r, v] : m.column(j)) aug.set(r, j, v);
    aug.set(rows + j, j, Rat(1));
  }

  // Same elimination as above, but pivots are only taken on the top block.
  std::vector<SparseVec> col(cols);
  for (int j = 0; j < cols; ++j) col[j] = aug.column(j);
  std::vector<int> pivot_row_of_col(cols, -1);
  std::vector<char> row_used(rows, 0);
  int rank = 0;

  std::vector<int> order(cols);
  for (int j = 0; j < cols; ++j) order[j] = j;
  if (rule == PivotRule::SparsestColumn) {
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return col[a].size() < col[b].size(); });
  }

  auto axpy = [&](int j, int pj, const Rat& factor) {
    for (const auto& [r, v] : col[pj]) {
      auto it = col[j].find(r);
      if (it == col[j].end()) {
        Rat nv = -(factor * v);
        if (!nv.is_zero()) col[j].emplace(r, std::move(nv));
      } else {
        it->second -= factor * v;
        if (it->second.is_zero()) col[j].erase(it);
      }
    }
  };

  for (int oj : order) {
    for (int pj = 0; pj < cols; ++pj) {
      int pr = pivot_row_of_col[pj];
      if (pr < 0 || pj == oj) continue;
      auto it = col[oj].find(pr);
      if (it == col[oj].end()) continue;
      Rat factor = it->second / col[pj].at(pr);
      axpy(oj, pj, factor);
    }
    int pr = -1;
    for (const auto& [r, v] : col[oj]) {
      (void)v;
      if (r >= rows) break;  // only the bookkeeping block remains
      if (!row_used[r]) {
        pr = r;
        break;
      }
    }
    if (pr >= 0) {
      pivot_row_of_col[oj] = pr;
      row_used[pr] = 1;
      ++rank;
    }
  }

  RankKernel out;
  out.rank = rank;
  for (int j = 0; j < cols; ++j) {
    if (pivot_row_of_col[j] >= 0) continue;
    // Column reduced to zero in the top block: bottom block is a kernel vector.
    SparseVec k;
    for (const auto& [r, v] : col[j]) {
      if (r < rows && !v.is_zero())
        throw std::logic_error("free column with nonzero top block");
      if (r >= rows) k.emplace(r - rows, v);
    }
    out.kernel.push_back(std::move(k));
  }
  return out;
}

bool ComplexSlice::check_d_squared(int* bad_degree) const {
  for (const auto& [k, dk] : d) {
    auto dim_at = [&](int deg) {
      auto it = dims.find(deg);
      return it == dims.end() ? 0 : it->second;
    };
    if (dk.cols() != dim_at(k) || dk.rows() != dim_at(k + 1)) {
      if (bad_degree) *bad_degree = k;
      return false;
    }
    auto up = d.find(k + 1);
    if (up == d.end()) {
      if (dim_at(k + 2) != 0 && dk.rows() > 0) continue;
      continue;
    }
    if (!up->second.multiply(dk).is_zero()) {
      if (bad_degree) *bad_degree = k;
      return false;
    }
  }
  return true;
}

std::map<int, int> cohomology_dims(const ComplexSlice& c) {
  int bad = 0;
  if (!c.check_d_squared(&bad))
    throw std::invalid_argument("d^2 != 0 at degree " + std::to_string(bad));
  std::map<int, int> h;
  auto rank_at = [&](int k) -> int {
    auto it = c.d.find(k);
    if (it == c.d.end()) return 0;
    return rank_kernel(it->second).rank;
  };
  for (const auto& [k, dim] : c.dims) {
    if (dim == 0) continue;
    int rk = rank_at(k);
    int kernel = dim - rk;
    int image_below = rank_at(k - 1);
    int hk = kernel - image_below;
    if (hk != 0) h[k] = hk;
  }
  return h;
}

}  // namespace operadkit
