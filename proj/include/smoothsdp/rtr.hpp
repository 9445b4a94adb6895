#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smoothsdp/manifold.hpp"
#include "smoothsdp/problem.hpp"

namespace smoothsdp {

struct RtrConfig {
  double eps_g = 2e-6;      // ||grad f|| stop, i.e. ||SY|| <= 1e-6
  int max_outer = 10000;
  int max_inner = 500;
  double rho_accept = 0.1;  // in (0, 1/4)
  double radius_init = 0.0; // 0: sqrt(manifold dim)/8, clamped to radius_max/2
  double radius_max = 0.0;  // 0: sqrt(p * R)
  std::uint64_t seed = 0;

  void validate() const {
    if (!(eps_g > 0)) throw std::invalid_argument("RtrConfig: eps_g must be positive");
    if (!(rho_accept > 0 && rho_accept < 0.25))
      throw std::invalid_argument("RtrConfig: rho_accept must lie in (0, 1/4)");
    if (max_outer < 1 || max_inner < 1) throw std::invalid_argument("RtrConfig: iteration caps");
  }
};

enum class RtrStatus { Converged, IterationCap };

struct RtrIterationRecord {
  double f = 0.0;
  double grad_norm = 0.0;
  double radius = 0.0;
  double step_norm = 0.0;
  double rho = 0.0;
  int inner_iterations = 0;
  bool negative_curvature = false;
  bool accepted = false;
};

struct RtrTrace {
  std::vector<RtrIterationRecord> iterations;
};

struct RtrResult {
  FactorPoint y;
  RtrTrace trace;
  RtrStatus status = RtrStatus::IterationCap;
  double f = 0.0;
  double grad_norm = 0.0;
  int outer_iterations = 0;
};

namespace detail {

struct TcgResult {
  Matrix eta;
  Matrix h_eta;
  int inner = 0;
  bool negative_curvature = false;
  bool hit_boundary = false;
};

/// Steihaug-Toint truncated CG on the trust-region model
/// m(Z) = <grad, Z> + 1/2 <Z, H Z>, ||Z|| <= radius. Stops on negative
/// curvature, the boundary, or residual <= min(0.1, ||grad||^0.5)*||grad||.
inline TcgResult tcg(const Matrix& grad, const std::function<Matrix(const Matrix&)>& hess,
                     double radius, int max_inner) {
  TcgResult out;
  out.eta = Matrix::Zero(grad.rows(), grad.cols());
  out.h_eta = out.eta;

  Matrix r = grad;
  double r_r = r.squaredNorm();
  double norm_r0 = std::sqrt(r_r);
  if (norm_r0 == 0.0) return out;
  double tol_stop = norm_r0 * std::min(0.1, std::sqrt(norm_r0));

  Matrix dir = -r;
  double e_e = 0.0, e_d = 0.0, d_d = r_r;
  const double radius2 = radius * radius;

  for (int j = 0; j < max_inner; ++j) {
    Matrix h_dir = hess(dir);
    double d_hd = (dir.array() * h_dir.array()).sum();
    out.inner = j + 1;

    if (d_hd <= 0.0) {
      double tau = (-e_d + std::sqrt(e_d * e_d + d_d * (radius2 - e_e))) / d_d;
      out.eta += tau * dir;
      out.h_eta += tau * h_dir;
      out.negative_curvature = true;
      out.hit_boundary = true;
      return out;
    }

    double alpha = r_r / d_hd;
    double e_e_next = e_e + 2.0 * alpha * e_d + alpha * alpha * d_d;
    if (e_e_next >= radius2) {
      double tau = (-e_d + std::sqrt(e_d * e_d + d_d * (radius2 - e_e))) / d_d;
      out.eta += tau * dir;
      out.h_eta += tau * h_dir;
      out.hit_boundary = true;
      return out;
    }

    out.eta += alpha * dir;
    out.h_eta += alpha * h_dir;
    e_e = e_e_next;
    r += alpha * h_dir;
    double r_r_next = r.squaredNorm();
    if (std::sqrt(r_r_next) <= tol_stop) return out;

    double beta = r_r_next / r_r;
    r_r = r_r_next;
    dir = -r + beta * dir;
    e_d = beta * (e_d + alpha * d_d);
    d_d = r_r + beta * beta * d_d;
  }
  return out;
}

}  // namespace detail

/// Riemannian trust-region method on the factor manifold: from any feasible
/// start, descends to ||grad f|| <= eps_g (or the iteration cap), exploiting
/// negative curvature through the tCG subproblem solver.
inline RtrResult rtr_solve(const SmoothSDP& problem, const FactorPoint& y0,
                           const RtrConfig& cfg = {}) {
  cfg.validate();
  if (!problem.has_manifold())
    throw std::invalid_argument("rtr_solve: general linear constraints have no manifold solver");
  if (y0.y.rows() != problem.n()) throw std::invalid_argument("rtr_solve: Y0 row count != n");
  if (feasibility_residual(y0) > 1e-8)
    throw std::invalid_argument("rtr_solve: infeasible initial point (residual " +
                                std::to_string(feasibility_residual(y0)) + ")");

  const ManifoldDescriptor& manifold = y0.manifold;
  const double radius_max =
      cfg.radius_max > 0 ? cfg.radius_max : std::sqrt(manifold.p * problem.max_trace());
  double radius = cfg.radius_init > 0
                      ? cfg.radius_init
                      : std::min(std::sqrt(static_cast<double>(manifold.dimension())) / 8.0,
                                 radius_max / 2.0);
  if (!(radius > 0)) radius = radius_max / 8.0;

  RtrResult result;
  result.y = project_to_manifold(manifold, y0.y);  // scrub roundoff in the input

  Matrix cy = problem.c().apply(result.y.y);
  Multipliers mu = multipliers(problem, result.y.y, cy);
  double f = (cy.array() * result.y.y.array()).sum();
  Matrix grad = 2.0 * (cy - detail::adjoint_apply(problem, mu, result.y.y));

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    if (!std::isfinite(f) || !grad.allFinite())
      throw std::runtime_error("rtr_solve: non-finite cost or gradient at iteration " +
                               std::to_string(outer));
    double grad_norm = grad.norm();
    if (grad_norm <= cfg.eps_g) {
      result.status = RtrStatus::Converged;
      result.f = f;
      result.grad_norm = grad_norm;
      result.outer_iterations = outer;
      return result;
    }

    auto hess = [&](const Matrix& z) {
      Matrix sz = problem.c().apply(z) - detail::adjoint_apply(problem, mu, z);
      return project_tangent(result.y, 2.0 * sz).z;
    };
    detail::TcgResult step = detail::tcg(grad, hess, radius, cfg.max_inner);

    // predicted model decrease; guard roundoff with a tiny regularizer
    double pred = -((grad.array() * step.eta.array()).sum() +
                    0.5 * (step.eta.array() * step.h_eta.array()).sum());
    double rho_reg = std::max(1.0, std::abs(f)) * 1e-12;

    RtrIterationRecord rec;
    rec.f = f;
    rec.grad_norm = grad_norm;
    rec.radius = radius;
    rec.step_norm = step.eta.norm();
    rec.inner_iterations = step.inner;
    rec.negative_curvature = step.negative_curvature;

    FactorPoint candidate = retract(result.y, TangentVector{project_tangent(result.y, step.eta).z});
    double f_new = cost(problem, candidate);
    if (!std::isfinite(f_new))
      throw std::runtime_error("rtr_solve: non-finite cost after retraction");
    double rho = (f - f_new + rho_reg) / (pred + rho_reg);
    rec.rho = rho;

    if (pred > 0 && rho >= cfg.rho_accept) {
      rec.accepted = true;
      result.y = candidate;
      cy = problem.c().apply(result.y.y);
      mu = multipliers(problem, result.y.y, cy);
      f = (cy.array() * result.y.y.array()).sum();
      grad = 2.0 * (cy - detail::adjoint_apply(problem, mu, result.y.y));
    }
    if (rho < 0.25 || pred <= 0)
      radius *= 0.25;
    else if (rho > 0.75 && step.hit_boundary)
      radius = std::min(2.0 * radius, radius_max);
    result.trace.iterations.push_back(rec);

    if (radius < 1e-15 * radius_max) break;  // no representable progress left
  }

  result.status = RtrStatus::IterationCap;
  result.f = f;
  result.grad_norm = grad.norm();
  result.outer_iterations = static_cast<int>(result.trace.iterations.size());
  return result;
}

}  // namespace smoothsdp
