#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>

#include "smoothsdp/rng.hpp"
#include "smoothsdp/sparse_sym.hpp"

namespace smoothsdp {

using LinearOperator = std::function<Vector(const Vector&)>;

struct LanczosResult {
  double value = 0.0;        // smallest Ritz value; always >= lambda_min(A)
  Vector vector;             // corresponding unit Ritz vector
  double residual = 0.0;     // ||A v - value v||
  bool converged = false;
  int iterations = 0;
};

/// Smallest eigenvalue of a symmetric operator by Lanczos with full
/// reorthogonalization. Converged when the Ritz residual |beta * y_k| drops
/// below tol * max(1, |T| scale). Non-convergence is reported, not thrown;
/// the Ritz value remains a valid upper bound on lambda_min.
inline LanczosResult lanczos_min_eig(const LinearOperator& apply, int n, double tol,
                                     int max_iter = 0, std::uint64_t seed = 0) {
  if (tol <= 0) throw std::invalid_argument("lanczos_min_eig: tol must be positive");
  if (n <= 0) throw std::invalid_argument("lanczos_min_eig: empty operator");
  if (max_iter <= 0) max_iter = std::min(n, 400);
  max_iter = std::min(max_iter, n);

  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Matrix basis(n, max_iter);
  std::vector<double> alpha, beta;  // T diagonal / off-diagonal

  Vector v = rng.gaussian_vector(n);
  v.normalize();
  basis.col(0) = v;

  LanczosResult res;
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  double scale = 1.0;

  for (int k = 0; k < max_iter; ++k) {
    Vector w = apply(basis.col(k));
    if (!w.allFinite()) throw std::runtime_error("lanczos_min_eig: operator returned non-finite values");
    double a = basis.col(k).dot(w);
    alpha.push_back(a);
    w -= a * basis.col(k);
    if (k > 0) w -= beta[k - 1] * basis.col(k - 1);
    // full reorthogonalization; twice is enough
    for (int pass = 0; pass < 2; ++pass)
      w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).transpose() * w);

    const int m = k + 1;
    Matrix t = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) t(i, i) = alpha[i];
    for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
    es.compute(t);
    scale = std::max(1.0, std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(m - 1))));

    double b = w.norm();
    res.value = es.eigenvalues()(0);
    res.vector = basis.leftCols(m) * es.eigenvectors().col(0);
    res.residual = b * std::abs(es.eigenvectors()(m - 1, 0));
    res.iterations = m;
    if (res.residual <= tol * scale) {
      res.converged = true;
      break;
    }
    if (k + 1 == max_iter) break;
    if (b <= n * 1e-15 * scale) {
      // invariant subspace: restart orthogonal to what we have
      w = rng.gaussian_vector(n);
      for (int pass = 0; pass < 2; ++pass)
        w -= basis.leftCols(m) * (basis.leftCols(m).transpose() * w);
      b = w.norm();
      if (b <= 1e-12) {  // operator exhausted (m == n)
        res.converged = true;
        break;
      }
      beta.push_back(0.0);
    } else {
      beta.push_back(b);
    }
    basis.col(k + 1) = w / b;
  }
  res.vector.normalize();
  return res;
}

inline LanczosResult lanczos_min_eig(const SparseSymMatrix& a, double tol,
                                     int max_iter = 0, std::uint64_t seed = 0) {
  return lanczos_min_eig([&a](const Vector& x) { return a.apply_vec(x); }, a.n(), tol, max_iter, seed);
}

/// Strict floating-point Cholesky success test. Positive definite up to
/// roundoff passes; callers supply shifts to probe the semidefinite boundary.
inline bool cholesky_psd_test(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cholesky_psd_test: not square");
  if (!a.allFinite()) throw std::invalid_argument("cholesky_psd_test: non-finite entries");
  Eigen::LLT<Matrix> llt(a);
  return llt.info() == Eigen::Success;
}

inline bool cholesky_psd_test(const SparseMatrix& a,
                              Eigen::SimplicialLLT<SparseMatrix>* factor = nullptr) {
  Eigen::SimplicialLLT<SparseMatrix> local;
  Eigen::SimplicialLLT<SparseMatrix>& llt = factor ? *factor : local;
  llt.compute(a);
  return llt.info() == Eigen::Success;
}

struct EigInterval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

namespace detail {

template <typename Mat>
Mat shifted(const Mat& a, double s);

template <>
inline Matrix shifted<Matrix>(const Matrix& a, double s) {
  Matrix b = a;
  b.diagonal().array() -= s;
  return b;
}

template <>
inline SparseMatrix shifted<SparseMatrix>(const SparseMatrix& a, double s) {
  SparseMatrix ident(a.rows(), a.cols());
  ident.setIdentity();
  return a - s * ident;
}

template <typename Mat>
EigInterval bisect_min_eig_impl(const Mat& a, double lo, double hi, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("bisect_min_eig: tol must be positive");
  if (!(lo <= hi)) throw std::invalid_argument("bisect_min_eig: empty bracket");
  if (!cholesky_psd_test(shifted(a, lo)))
    throw std::invalid_argument("bisect_min_eig: invalid initial bracket (A - lo*I not PSD)");
  // The hi end must fail; if the caller's estimate was exact, nudge upward.
  double span = std::max({1.0, std::abs(lo), std::abs(hi)});
  int guard = 0;
  while (cholesky_psd_test(shifted(a, hi))) {
    lo = hi;
    hi += std::max(tol, 1e-12 * span) * std::pow(4.0, guard);
    if (++guard > 60) throw std::runtime_error("bisect_min_eig: upper bracket never fails");
  }
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at roundoff resolution
    if (cholesky_psd_test(shifted(a, mid)))
      lo = mid;
    else
      hi = mid;
  }
  return {lo, hi};
}

}  // namespace detail

/// Shrinks a certified bracket around lambda_min(A) by bisection on the
/// Cholesky test. Pre: A - lo*I passes the test (callers typically take lo
/// from a Gershgorin bound and hi from a Lanczos estimate). Post:
/// hi - lo <= tol, A - lo*I passes, A - hi*I fails, lambda_min in (lo, hi].
inline EigInterval bisect_min_eig(const Matrix& a, double lo, double hi, double tol) {
  return detail::bisect_min_eig_impl(a, lo, hi, tol);
}

inline EigInterval bisect_min_eig(const SparseMatrix& a, double lo, double hi, double tol) {
  return detail::bisect_min_eig_impl(a, lo, hi, tol);
}

/// Certified lambda_min enclosure from an uncertified estimate: probe a tight
/// bracket just below the estimate first, falling back to the certified
/// lower bound only when the probe fails. Dense path for n <= dense_limit.
template <typename Mat>
EigInterval min_eig_enclosure(const Mat& a, double estimate, double certified_lo, double tol) {
  double span = std::max(1.0, std::abs(estimate));
  double hi = estimate + std::max(tol, 1e-13 * span);
  double lo = certified_lo - std::max(tol, 1e-13 * std::max(1.0, std::abs(certified_lo)));
  for (double step = 8.0 * tol; step < (hi - lo); step *= 64.0) {
    double probe = estimate - step;
    if (probe <= lo) break;
    if (cholesky_psd_test(detail::shifted(a, probe))) {
      lo = probe;
      break;
    }
    hi = probe;  // failed probe is a tighter valid upper end
  }
  EigInterval iv = detail::bisect_min_eig_impl(a, lo, hi, tol);
  // A negative lower end drives the eps_H certificates, so sharpen it beyond
  // the absolute tol: down to roundoff when the matrix may still be PSD, and
  // to a small relative slack once lambda_min is certainly negative.
  for (int extra = 0; extra < 40 && iv.lo < 0.0; ++extra) {
    double tail = std::max(1e-15 * span, iv.hi < 0.0 ? 0.125 * -iv.hi : 0.0);
    if (iv.width() <= tail) break;
    double mid = 0.5 * (iv.lo + iv.hi);
    if (mid <= iv.lo || mid >= iv.hi) break;
    if (cholesky_psd_test(detail::shifted(a, mid)))
      iv.lo = mid;
    else
      iv.hi = mid;
  }
  return iv;
}

}  // namespace smoothsdp
