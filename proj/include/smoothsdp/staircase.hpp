#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "smoothsdp/certificate.hpp"
#include "smoothsdp/eig.hpp"
#include "smoothsdp/rtr.hpp"

namespace smoothsdp {

struct StaircaseConfig {
  int p_start = 2;
  int p_max = 0;                // 0: ceil(sqrt(2m)), clamped to n+1
  std::vector<int> p_schedule;  // empty: 5 geometric steps p_start..p_max
  double cert_tol = std::numeric_limits<double>::quiet_NaN();
  // NaN: -max(1e-6 * spectral bound of C, 16 * enclosure tol)
  double perturb_sigma = 1e-5;
  std::uint64_t seed = 0;
  RtrConfig rtr;
  CertifyOptions certify;
};

enum class StaircaseStatus { Certified, Uncertified, Corollary3 };

inline std::string to_string(StaircaseStatus s) {
  switch (s) {
    case StaircaseStatus::Certified: return "certified";
    case StaircaseStatus::Uncertified: return "uncertified";
    case StaircaseStatus::Corollary3: return "corollary3";
  }
  return "?";
}

struct LevelReport {
  int p = 0;
  int iterations = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  EigInterval lambda_min_s;
  double gap_bound = 0.0;
  double seconds = 0.0;
  RtrStatus rtr_status = RtrStatus::IterationCap;
};

struct SolveReport {
  std::string instance;
  std::string constraint_class;
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  std::vector<LevelReport> levels;
  StaircaseStatus status = StaircaseStatus::Uncertified;
  double total_seconds = 0.0;
};

struct StaircaseResult {
  FactorPoint y;
  Certificate certificate;
  SolveReport report;
};

/// [Y | 0]: same Gram matrix, cost, multipliers and S one floor up.
inline FactorPoint lift(const FactorPoint& y) {
  FactorPoint out{y.manifold.with_columns(y.manifold.p + 1),
                  Matrix::Zero(y.manifold.n, y.manifold.p + 1)};
  out.y.leftCols(y.manifold.p) = y.y;
  return out;
}

/// Escape tangent vector u e_p^T at a lifted point whose last column is
/// exactly zero, with u the (estimated) eigenvector of lambda_min(S). Its
/// Hessian quadratic form is 2 u^T S u < 0, so it leaves the saddle.
inline TangentVector escape_direction(const SmoothSDP& problem, const FactorPoint& y_lifted,
                                      std::uint64_t seed = 0) {
  const int last = y_lifted.manifold.p - 1;
  if (y_lifted.y.col(last).norm() != 0.0)
    throw std::invalid_argument("escape_direction: last column of the lifted point must be zero");
  DualMatrix s = dual_matrix(problem, y_lifted.y);
  SparseMatrix sp = s.to_sparse();
  LanczosResult lan = lanczos_min_eig([&sp](const Vector& v) { return Vector(sp * v); },
                                      problem.n(), 1e-10, 0, seed);
  if (lan.value >= 0.0)
    throw std::runtime_error("escape_direction: no escape, S has no negative eigenvalue");
  TangentVector dir{Matrix::Zero(y_lifted.manifold.n, y_lifted.manifold.p)};
  dir.z.col(last) = lan.vector;
  return dir;
}

namespace detail {

inline std::vector<int> geometric_schedule(int p_start, int p_max, int levels = 5) {
  std::vector<int> out;
  if (p_max <= p_start) return {p_start};
  double ratio = static_cast<double>(p_max) / p_start;
  for (int k = 0; k < levels; ++k) {
    int p = static_cast<int>(std::lround(p_start * std::pow(ratio, double(k) / (levels - 1))));
    if (out.empty() || p > out.back()) out.push_back(p);
  }
  out.front() = p_start;
  if (out.back() != p_max) out.push_back(p_max);
  return out;
}

/// Move from the solution at one rank to the starting point of the next:
/// lift by a zero column, step along the escape direction (backtracked),
/// randomize at scale sigma, fill any additional columns with sigma
/// Gaussians, and retract.
inline FactorPoint advance_rank(const SmoothSDP& problem, const FactorPoint& y, int p_next,
                                double sigma, Rng& rng, std::uint64_t escape_seed) {
  FactorPoint lifted = lift(y);
  double f_cur = cost(problem, lifted);
  try {
    TangentVector dir = escape_direction(problem, lifted, escape_seed);
    double t = 1.0;
    for (int back = 0; back < 60; ++back, t *= 0.5) {
      FactorPoint cand = retract(lifted, TangentVector{t * dir.z});
      if (cost(problem, cand) < f_cur) {
        lifted = cand;
        break;
      }
    }
  } catch (const std::runtime_error&) {
    // no usable escape; the sigma noise below still leaves the saddle
  }
  Matrix w(lifted.manifold.n, p_next);
  w.leftCols(lifted.manifold.p) = lifted.y;
  w.col(lifted.manifold.p - 1) += sigma * rng.gaussian_vector(lifted.manifold.n);
  for (int j = lifted.manifold.p; j < p_next; ++j)
    w.col(j) = sigma * rng.gaussian_vector(lifted.manifold.n);
  return project_to_manifold(y.manifold.with_columns(p_next), w);
}

}  // namespace detail

/// The rank-incrementing staircase: solve with RTR at each scheduled rank,
/// certify through S, and either stop with the certified gap bound or lift
/// and escape to the next rank. At p = n+1 the returned bound holds
/// unconditionally.
inline StaircaseResult staircase_run(const SmoothSDP& problem, const StaircaseConfig& cfg = {}) {
  if (!problem.has_manifold())
    throw std::invalid_argument("staircase_run: general linear constraints are certify-only");
  const int n = problem.n();
  const int m = problem.constraint_count();

  int p_floor = problem.kind() == ConstraintKind::FixedDiagonalBlocks ? problem.block_rows() : 1;
  int p_start = std::max(std::max(cfg.p_start, 1), p_floor);
  int p_max = cfg.p_max > 0 ? cfg.p_max
                            : static_cast<int>(std::ceil(std::sqrt(2.0 * m)));
  p_max = std::min(std::max(p_max, p_start), n + 1);
  p_start = std::min(p_start, p_max);

  std::vector<int> schedule = cfg.p_schedule;
  if (schedule.empty()) {
    schedule = detail::geometric_schedule(p_start, p_max);
  } else {
    for (std::size_t i = 0; i + 1 < schedule.size(); ++i)
      if (schedule[i] >= schedule[i + 1])
        throw std::invalid_argument("staircase_run: schedule must be strictly increasing");
    if (schedule.front() < p_floor || schedule.back() > n + 1)
      throw std::invalid_argument("staircase_run: schedule out of range");
  }

  double cert_tol = cfg.cert_tol;
  if (std::isnan(cert_tol))
    cert_tol = -std::max(1e-6 * problem.c().gershgorin_spectral_bound(),
                         16.0 * cfg.certify.enclosure_tol);

  StaircaseResult out;
  out.report.constraint_class = constraint_kind_name(problem.kind());
  out.report.n = n;
  out.report.m = m;
  out.report.seed = cfg.seed;

  Rng rng(Rng::derive(cfg.seed, 0x73746169));
  auto t_start = std::chrono::steady_clock::now();
  FactorPoint y = random_point(problem.manifold(schedule.front()), cfg.seed);

  for (std::size_t level = 0; level < schedule.size(); ++level) {
    auto t_level = std::chrono::steady_clock::now();
    RtrConfig rtr_cfg = cfg.rtr;
    rtr_cfg.seed = Rng::derive(cfg.seed, 1000 + level);
    RtrResult solved = rtr_solve(problem, y, rtr_cfg);
    y = solved.y;

    CertifyOptions cert_opt = cfg.certify;
    cert_opt.seed = Rng::derive(cfg.seed, 2000 + level);
    Certificate cert = certify(problem, y, cert_opt);

    LevelReport rec;
    rec.p = schedule[level];
    rec.iterations = solved.outer_iterations;
    rec.f = solved.f;
    rec.grad_norm = solved.grad_norm;
    rec.lambda_min_s = cert.lambda_min_s;
    rec.gap_bound = cert.gap_bound;
    rec.rtr_status = solved.status;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_level).count();
    out.report.levels.push_back(rec);

    bool last_level = (level + 1 == schedule.size());
    if (cert.lambda_min_s.lo >= cert_tol) {
      out.report.status = StaircaseStatus::Certified;
      out.y = y;
      out.certificate = cert;
      break;
    }
    if (last_level) {
      out.report.status =
          schedule[level] >= n + 1 ? StaircaseStatus::Corollary3 : StaircaseStatus::Uncertified;
      out.y = y;
      out.certificate = cert;
      break;
    }
    y = detail::advance_rank(problem, y, schedule[level + 1], cfg.perturb_sigma, rng,
                             Rng::derive(cfg.seed, 3000 + level));
  }

  out.report.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

}  // namespace smoothsdp
