#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace smoothsdp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Sparse symmetric matrix stored as one triangle (i <= j) in coordinate
/// form. Build with add(), then freeze(); duplicates are summed at freeze.
/// Immutable and shareable after freeze.
class SparseSymMatrix {
 public:
  struct Entry {
    int i;
    int j;
    double v;
  };

  SparseSymMatrix() = default;
  explicit SparseSymMatrix(int n) : n_(n) {
    if (n < 0) throw std::invalid_argument("SparseSymMatrix: negative dimension");
  }

  static SparseSymMatrix identity(int n) {
    SparseSymMatrix a(n);
    for (int i = 0; i < n; ++i) a.add(i, i, 1.0);
    a.freeze();
    return a;
  }

  static SparseSymMatrix zero(int n) {
    SparseSymMatrix a(n);
    a.freeze();
    return a;
  }

  static SparseSymMatrix from_dense(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("from_dense: not square");
    SparseSymMatrix s(static_cast<int>(a.rows()));
    for (int j = 0; j < a.cols(); ++j)
      for (int i = 0; i <= j; ++i) {
        double v = 0.5 * (a(i, j) + a(j, i));
        if (v != 0.0) s.add(i, j, v);
      }
    s.freeze();
    return s;
  }

  int n() const { return n_; }
  bool frozen() const { return frozen_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }

  void add(int i, int j, double v) {
    if (frozen_) throw std::logic_error("SparseSymMatrix: add after freeze");
    if (i < 0 || j < 0 || i >= n_ || j >= n_)
      throw std::out_of_range("SparseSymMatrix: index (" + std::to_string(i) + "," +
                              std::to_string(j) + ") out of range for n=" + std::to_string(n_));
    if (!std::isfinite(v)) throw std::invalid_argument("SparseSymMatrix: non-finite value");
    if (i > j) std::swap(i, j);
    entries_.push_back({i, j, v});
  }

  /// Sorts, sums duplicates, drops exact zeros.
  void freeze() {
    if (frozen_) return;
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    std::vector<Entry> merged;
    merged.reserve(entries_.size());
    for (const Entry& e : entries_) {
      if (!merged.empty() && merged.back().i == e.i && merged.back().j == e.j)
        merged.back().v += e.v;
      else
        merged.push_back(e);
    }
    std::erase_if(merged, [](const Entry& e) { return e.v == 0.0; });
    entries_ = std::move(merged);
    frozen_ = true;
  }

  /// A * Y for a dense factor Y (n x p). Single fixed accumulation order.
  Matrix apply(const Matrix& y) const {
    require_frozen();
    if (y.rows() != n_)
      throw std::invalid_argument("SparseSymMatrix::apply: dimension mismatch (A.n=" +
                                  std::to_string(n_) + ", Y.rows=" + std::to_string(y.rows()) + ")");
    Matrix out = Matrix::Zero(y.rows(), y.cols());
    for (const Entry& e : entries_) {
      out.row(e.i) += e.v * y.row(e.j);
      if (e.i != e.j) out.row(e.j) += e.v * y.row(e.i);
    }
    return out;
  }

  Vector apply_vec(const Vector& x) const {
    Matrix y = apply(Matrix(x));
    return y.col(0);
  }

  Matrix to_dense() const {
    require_frozen();
    Matrix a = Matrix::Zero(n_, n_);
    for (const Entry& e : entries_) {
      a(e.i, e.j) += e.v;
      if (e.i != e.j) a(e.j, e.i) += e.v;
    }
    return a;
  }

  SparseMatrix to_eigen_sparse() const {
    require_frozen();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * entries_.size());
    for (const Entry& e : entries_) {
      trips.emplace_back(e.i, e.j, e.v);
      if (e.i != e.j) trips.emplace_back(e.j, e.i, e.v);
    }
    SparseMatrix s(n_, n_);
    s.setFromTriplets(trips.begin(), trips.end());
    return s;
  }

  Vector diagonal() const {
    require_frozen();
    Vector d = Vector::Zero(n_);
    for (const Entry& e : entries_)
      if (e.i == e.j) d[e.i] = e.v;
    return d;
  }

  /// <A, M> = trace(A M) for symmetric A.
  double inner(const Matrix& m) const {
    require_frozen();
    double s = 0.0;
    for (const Entry& e : entries_)
      s += e.v * (e.i == e.j ? m(e.i, e.i) : m(e.i, e.j) + m(e.j, e.i));
    return s;
  }

  double frobenius_norm() const {
    require_frozen();
    double s = 0.0;
    for (const Entry& e : entries_) s += (e.i == e.j ? 1.0 : 2.0) * e.v * e.v;
    return std::sqrt(s);
  }

  /// max_i sum_j |A_ij|; an upper bound on the spectral norm.
  double gershgorin_spectral_bound() const {
    require_frozen();
    Vector rowsum = Vector::Zero(n_);
    for (const Entry& e : entries_) {
      rowsum[e.i] += std::abs(e.v);
      if (e.i != e.j) rowsum[e.j] += std::abs(e.v);
    }
    return rowsum.size() > 0 ? rowsum.maxCoeff() : 0.0;
  }

 private:
  void require_frozen() const {
    if (!frozen_) throw std::logic_error("SparseSymMatrix: freeze() before use");
  }

  int n_ = 0;
  std::vector<Entry> entries_;
  bool frozen_ = false;
};

/// min_i (A_ii - sum_{j != i} |A_ij|); a lower bound on every eigenvalue.
inline double gershgorin_lower_bound(const SparseMatrix& a) {
  const int n = static_cast<int>(a.rows());
  Vector diag = Vector::Zero(n);
  Vector offsum = Vector::Zero(n);
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      if (it.row() == it.col())
        diag[it.row()] += it.value();
      else
        offsum[it.row()] += std::abs(it.value());
    }
  return n > 0 ? (diag - offsum).minCoeff() : 0.0;
}

inline double gershgorin_lower_bound(const Matrix& a) {
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.rows(); ++i) {
    double off = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
    lo = std::min(lo, a(i, i) - off);
  }
  return a.rows() > 0 ? lo : 0.0;
}

}  // namespace smoothsdp
