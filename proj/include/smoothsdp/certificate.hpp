#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "smoothsdp/eig.hpp"
#include "smoothsdp/problem.hpp"

namespace smoothsdp {

struct CertifyOptions {
  double enclosure_tol = 1e-9;   // absolute width of the lambda_min(S) interval
  int dense_limit = 4096;        // bisection on a dense copy up to this n
  double feasibility_tol = 1e-8;
  double lanczos_tol = 1e-10;
  int lanczos_max_iter = 0;      // 0: kernel default
  std::uint64_t seed = 0;
};

/// A posteriori optimality certificate at a feasible Y. The bound is on
/// twice the suboptimality: 2(f(Y) - f*) <= gap_bound, from the certified
/// lower end of the lambda_min(S) enclosure and the gradient norm. For the
/// built-in classes I_n lies in the image of A*, the gradient term drops,
/// and the simplified bound eps_H * R is active.
struct Certificate {
  double f = 0.0;
  double grad_norm = 0.0;  // eps_g
  EigInterval lambda_min_s;
  double eps_h = 0.0;      // 2 * max(0, -lambda_min_s.lo)
  double r = 0.0;          // max feasible trace
  bool simplified = false;
  double gap_bound_general = 0.0;
  double gap_bound_simplified = std::numeric_limits<double>::quiet_NaN();
  double gap_bound = 0.0;  // the active bound
  double dual_value = 0.0;
  Multipliers mu;
  double lanczos_estimate = 0.0;
  Vector min_eig_vector;   // Ritz vector for lambda_min(S) (estimate)
  bool has_rayleigh = false;
  double rayleigh = 0.0;   // Hessian quotient along the escape direction
};

namespace detail {

inline EigInterval lambda_min_enclosure(const DualMatrix& s, const CertifyOptions& opt,
                                        LanczosResult* lanczos_out) {
  SparseMatrix sp = s.to_sparse();
  LanczosResult lan = lanczos_min_eig([&sp](const Vector& v) { return Vector(sp * v); },
                                      s.n(), opt.lanczos_tol, opt.lanczos_max_iter, opt.seed);
  if (lanczos_out) *lanczos_out = lan;
  double gersh = gershgorin_lower_bound(sp);
  if (s.n() <= opt.dense_limit) {
    Matrix dense(sp);
    return min_eig_enclosure(dense, lan.value, gersh, opt.enclosure_tol);
  }
  return min_eig_enclosure(sp, lan.value, gersh, opt.enclosure_tol);
}

}  // namespace detail

inline Certificate certify(const SmoothSDP& problem, const Matrix& y,
                           const CertifyOptions& opt = {}) {
  if (y.rows() != problem.n()) throw std::invalid_argument("certify: Y row count != n");
  auto [violation, idx] = problem.feasibility_violation(y);
  if (!(violation <= opt.feasibility_tol))
    throw std::invalid_argument("certify: Y infeasible, constraint " + std::to_string(idx) +
                                " violated by " + std::to_string(violation));

  Certificate cert;
  cert.mu = multipliers(problem, y);
  DualMatrix s(problem, cert.mu);
  cert.f = cost(problem, y);
  cert.grad_norm = 2.0 * s.apply(y).norm();
  cert.r = problem.max_trace();
  cert.dual_value = dual_value(problem, cert.mu);

  LanczosResult lan;
  cert.lambda_min_s = detail::lambda_min_enclosure(s, opt, &lan);
  cert.lanczos_estimate = lan.value;
  cert.min_eig_vector = lan.vector;

  cert.eps_h = 2.0 * std::max(0.0, -cert.lambda_min_s.lo);
  cert.gap_bound_general = cert.eps_h * cert.r + cert.grad_norm * std::sqrt(cert.r);
  cert.simplified = problem.has_manifold();  // I_n in im(A*) for all built-ins
  if (cert.simplified) cert.gap_bound_simplified = cert.eps_h * cert.r;
  cert.gap_bound = cert.simplified ? cert.gap_bound_simplified : cert.gap_bound_general;
  return cert;
}

inline Certificate certify(const SmoothSDP& problem, const FactorPoint& y,
                           const CertifyOptions& opt = {}) {
  return certify(problem, y.y, opt);
}

/// Certificate at the rank-lifted point [Y | 0]. S is unchanged by the
/// lift, so the bounds coincide with certify(); additionally evaluates the
/// Riemannian Hessian quotient along the escape direction u e_{p+1}^T at
/// the lifted point, which must match 2 u^T S u. For p > n the lift is the
/// identity and the quotient check is skipped, as it is when S >= 0.
inline Certificate certify_lifted(const SmoothSDP& problem, const Matrix& y,
                                  const CertifyOptions& opt = {}) {
  Certificate cert = certify(problem, y, opt);
  if (!problem.has_manifold()) return cert;
  const int p = static_cast<int>(y.cols());
  if (p > problem.n()) return cert;
  if (cert.lambda_min_s.hi >= 0.0) return cert;  // no escape direction

  FactorPoint lifted{problem.manifold(p + 1), Matrix::Zero(y.rows(), p + 1)};
  lifted.y.leftCols(p) = y;
  TangentVector dir{Matrix::Zero(y.rows(), p + 1)};
  dir.z.col(p) = cert.min_eig_vector;
  DualMatrix s(problem, cert.mu);
  TangentVector h = riemannian_hessian_apply(s, lifted, dir);
  cert.rayleigh = (dir.z.array() * h.z.array()).sum() / dir.z.squaredNorm();
  cert.has_rayleigh = true;
  return cert;
}

inline Certificate certify_lifted(const SmoothSDP& problem, const FactorPoint& y,
                                  const CertifyOptions& opt = {}) {
  return certify_lifted(problem, y.y, opt);
}

/// mu(Y) is feasible for the dual SDP exactly when S(Y) >= 0; then b^T mu
/// is a valid lower bound on f*.
inline bool dual_feasibility(const SmoothSDP& problem, const Certificate& cert) {
  double scale = std::max(1.0, problem.c().gershgorin_spectral_bound());
  return cert.lambda_min_s.lo >= -1e-12 * scale;
}

}  // namespace smoothsdp
