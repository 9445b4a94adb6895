#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smoothsdp/manifold.hpp"
#include "smoothsdp/sparse_sym.hpp"

namespace smoothsdp {

enum class ConstraintKind { FixedTrace, FixedDiagonal, FixedDiagonalBlocks, GeneralLinear };

inline std::string constraint_kind_name(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::FixedTrace: return "trace";
    case ConstraintKind::FixedDiagonal: return "diag";
    case ConstraintKind::FixedDiagonalBlocks: return "blockdiag";
    case ConstraintKind::GeneralLinear: return "general";
  }
  return "?";
}

struct ConstraintQualificationError : std::runtime_error {
  double sigma_min;
  explicit ConstraintQualificationError(double s)
      : std::runtime_error("constraint qualification fails: Gram matrix smallest singular value " +
                           std::to_string(s)),
        sigma_min(s) {}
};

/// min <C, X> over { X psd : A(X) = b } restricted to the smooth classes
/// with fixed trace, fixed diagonal or fixed diagonal blocks, plus general
/// linear constraints (certification only; no manifold solve).
class SmoothSDP {
 public:
  static SmoothSDP fixed_trace(SparseSymMatrix c) {
    return SmoothSDP(std::move(c), ConstraintKind::FixedTrace, 0, 0, {}, Vector(), 1.0);
  }

  static SmoothSDP fixed_diagonal(SparseSymMatrix c) {
    int n = c.n();
    return SmoothSDP(std::move(c), ConstraintKind::FixedDiagonal, 0, 0, {}, Vector(),
                     static_cast<double>(n));
  }

  static SmoothSDP fixed_diagonal_blocks(SparseSymMatrix c, int d, int q) {
    if (d < 1 || q < 1 || c.n() != d * q)
      throw std::invalid_argument("fixed_diagonal_blocks: need n == d*q with d, q >= 1");
    return SmoothSDP(std::move(c), ConstraintKind::FixedDiagonalBlocks, d, q, {}, Vector(),
                     static_cast<double>(q * d));
  }

  /// max_trace is R, the largest trace over the feasible set; the caller
  /// supplies it because it is not computable from (A, b) in general.
  static SmoothSDP general_linear(SparseSymMatrix c, std::vector<SparseSymMatrix> a, Vector b,
                                  double max_trace) {
    if (a.empty()) throw std::invalid_argument("general_linear: no constraints");
    if (static_cast<int>(a.size()) != b.size())
      throw std::invalid_argument("general_linear: |A| != |b|");
    for (const auto& ai : a)
      if (ai.n() != c.n()) throw std::invalid_argument("general_linear: constraint dimension mismatch");
    if (!(max_trace > 0) || !std::isfinite(max_trace))
      throw std::invalid_argument("general_linear: max_trace must be positive and finite");
    return SmoothSDP(std::move(c), ConstraintKind::GeneralLinear, 0, 0, std::move(a), std::move(b),
                     max_trace);
  }

  const SparseSymMatrix& c() const { return c_; }
  ConstraintKind kind() const { return kind_; }
  int n() const { return c_.n(); }
  int block_rows() const { return d_; }
  int block_count() const { return q_; }
  const std::vector<SparseSymMatrix>& constraint_matrices() const { return a_; }
  const Vector& rhs() const { return b_; }

  int constraint_count() const {
    switch (kind_) {
      case ConstraintKind::FixedTrace: return 1;
      case ConstraintKind::FixedDiagonal: return n();
      case ConstraintKind::FixedDiagonalBlocks: return q_ * d_ * (d_ + 1) / 2;
      case ConstraintKind::GeneralLinear: return static_cast<int>(a_.size());
    }
    return 0;
  }

  /// R in the gap bounds: the maximal trace over the feasible set.
  double max_trace() const { return max_trace_; }

  bool has_manifold() const { return kind_ != ConstraintKind::GeneralLinear; }

  ManifoldDescriptor manifold(int p) const {
    switch (kind_) {
      case ConstraintKind::FixedTrace: return ManifoldDescriptor::sphere(n(), p);
      case ConstraintKind::FixedDiagonal: return ManifoldDescriptor::product_of_spheres(n(), p);
      case ConstraintKind::FixedDiagonalBlocks:
        return ManifoldDescriptor::product_of_stiefel(d_, q_, p);
      case ConstraintKind::GeneralLinear:
        throw std::logic_error("manifold(): general linear constraints have no built-in manifold");
    }
    throw std::logic_error("manifold(): bad kind");
  }

  /// A(YY^T) as an m-vector, any class.
  Vector constraint_values(const Matrix& y) const {
    switch (kind_) {
      case ConstraintKind::FixedTrace: {
        Vector v(1);
        v[0] = y.squaredNorm();
        return v;
      }
      case ConstraintKind::FixedDiagonal:
        return y.rowwise().squaredNorm();
      case ConstraintKind::FixedDiagonalBlocks: {
        Vector v(constraint_count());
        int k = 0;
        for (int i = 0; i < q_; ++i) {
          Matrix g = y.middleRows(i * d_, d_) * y.middleRows(i * d_, d_).transpose();
          for (int r = 0; r < d_; ++r)
            for (int s = r; s < d_; ++s) v[k++] = g(r, s);
        }
        return v;
      }
      case ConstraintKind::GeneralLinear: {
        Vector v(constraint_count());
        Matrix yyt = y * y.transpose();
        for (std::size_t i = 0; i < a_.size(); ++i) v[static_cast<int>(i)] = a_[i].inner(yyt);
        return v;
      }
    }
    throw std::logic_error("constraint_values: bad kind");
  }

  Vector constraint_rhs() const {
    switch (kind_) {
      case ConstraintKind::FixedTrace:
        return Vector::Ones(1);
      case ConstraintKind::FixedDiagonal:
        return Vector::Ones(n());
      case ConstraintKind::FixedDiagonalBlocks: {
        Vector v = Vector::Zero(constraint_count());
        int k = 0;
        for (int i = 0; i < q_; ++i)
          for (int r = 0; r < d_; ++r)
            for (int s = r; s < d_; ++s) v[k++] = (r == s) ? 1.0 : 0.0;
        return v;
      }
      case ConstraintKind::GeneralLinear:
        return b_;
    }
    throw std::logic_error("constraint_rhs: bad kind");
  }

  /// ||A(YY^T) - b||_inf together with the index of the worst constraint.
  std::pair<double, int> feasibility_violation(const Matrix& y) const {
    Vector r = constraint_values(y) - constraint_rhs();
    int idx = 0;
    double worst = r.cwiseAbs().maxCoeff(&idx);
    return {worst, idx};
  }

 private:
  SmoothSDP(SparseSymMatrix c, ConstraintKind kind, int d, int q, std::vector<SparseSymMatrix> a,
            Vector b, double max_trace)
      : c_(std::move(c)), kind_(kind), d_(d), q_(q), a_(std::move(a)), b_(std::move(b)),
        max_trace_(max_trace) {
    if (!c_.frozen()) throw std::invalid_argument("SmoothSDP: cost matrix must be frozen");
    if (c_.n() < 1) throw std::invalid_argument("SmoothSDP: empty problem");
  }

  SparseSymMatrix c_;
  ConstraintKind kind_;
  int d_, q_;
  std::vector<SparseSymMatrix> a_;
  Vector b_;
  double max_trace_;
};

/// Lagrange-type multipliers mu(Y): the unique solution of
/// A(A*(mu) YY^T) = A(C YY^T), stored in the natural shape of each class.
struct Multipliers {
  ConstraintKind kind;
  double trace = 0.0;          // FixedTrace
  Vector vec;                  // FixedDiagonal (length n) / GeneralLinear (length m)
  std::vector<Matrix> blocks;  // FixedDiagonalBlocks (q symmetric d x d)

  /// Flattened m-vector view (blocks flattened as upper triangles row-major).
  Vector as_vector() const {
    switch (kind) {
      case ConstraintKind::FixedTrace: {
        Vector v(1);
        v[0] = trace;
        return v;
      }
      case ConstraintKind::FixedDiagonal:
      case ConstraintKind::GeneralLinear:
        return vec;
      case ConstraintKind::FixedDiagonalBlocks: {
        int d = blocks.empty() ? 0 : static_cast<int>(blocks[0].rows());
        Vector v(static_cast<int>(blocks.size()) * d * (d + 1) / 2);
        int k = 0;
        for (const Matrix& b : blocks)
          for (int r = 0; r < d; ++r)
            for (int s = r; s < d; ++s) v[k++] = b(r, s);
        return v;
      }
    }
    throw std::logic_error("Multipliers::as_vector: bad kind");
  }
};

inline double cost(const SmoothSDP& problem, const Matrix& y) {
  return (problem.c().apply(y).array() * y.array()).sum();
}

inline double cost(const SmoothSDP& problem, const FactorPoint& y) { return cost(problem, y.y); }

namespace detail {

/// A*(mu) * Z for each class.
inline Matrix adjoint_apply(const SmoothSDP& problem, const Multipliers& mu, const Matrix& z) {
  switch (mu.kind) {
    case ConstraintKind::FixedTrace:
      return mu.trace * z;
    case ConstraintKind::FixedDiagonal:
      return mu.vec.asDiagonal() * z;
    case ConstraintKind::FixedDiagonalBlocks: {
      Matrix out(z.rows(), z.cols());
      int d = problem.block_rows();
      for (int i = 0; i < problem.block_count(); ++i)
        out.middleRows(i * d, d) = mu.blocks[i] * z.middleRows(i * d, d);
      return out;
    }
    case ConstraintKind::GeneralLinear: {
      Matrix out = Matrix::Zero(z.rows(), z.cols());
      const auto& a = problem.constraint_matrices();
      for (std::size_t k = 0; k < a.size(); ++k)
        if (mu.vec[static_cast<int>(k)] != 0.0)
          out += mu.vec[static_cast<int>(k)] * a[k].apply(z);
      return out;
    }
  }
  throw std::logic_error("adjoint_apply: bad kind");
}

/// Gram matrix G_ij = <A_i Y, A_j Y> for general linear constraints.
inline Matrix gram_matrix(const SmoothSDP& problem, const Matrix& y) {
  const auto& a = problem.constraint_matrices();
  const int m = static_cast<int>(a.size());
  std::vector<Matrix> ay(a.size());
  for (int i = 0; i < m; ++i) ay[i] = a[i].apply(y);
  Matrix g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) g(i, j) = g(j, i) = (ay[i].array() * ay[j].array()).sum();
  return g;
}

}  // namespace detail

/// Closed forms for the built-in classes; dense Gram solve for general
/// constraints, refusing (as a CQ failure) when the Gram matrix is
/// numerically singular. The overload taking cy reuses a cached C*Y.
inline Multipliers multipliers(const SmoothSDP& problem, const Matrix& y, const Matrix& cy) {
  Multipliers mu;
  mu.kind = problem.kind();
  switch (problem.kind()) {
    case ConstraintKind::FixedTrace:
      mu.trace = (cy.array() * y.array()).sum();
      return mu;
    case ConstraintKind::FixedDiagonal:
      mu.vec = (cy.array() * y.array()).rowwise().sum();
      return mu;
    case ConstraintKind::FixedDiagonalBlocks: {
      int d = problem.block_rows();
      mu.blocks.reserve(problem.block_count());
      for (int i = 0; i < problem.block_count(); ++i) {
        Matrix g = cy.middleRows(i * d, d) * y.middleRows(i * d, d).transpose();
        mu.blocks.push_back(0.5 * (g + g.transpose()));
      }
      return mu;
    }
    case ConstraintKind::GeneralLinear: {
      Matrix g = detail::gram_matrix(problem, y);
      Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
      double smallest = es.eigenvalues()(0);
      double largest = es.eigenvalues()(g.rows() - 1);
      if (!(smallest > 1e-10 * std::max(largest, 1.0)))
        throw ConstraintQualificationError(std::max(smallest, 0.0));
      const auto& a = problem.constraint_matrices();
      Vector rhs(g.rows());
      for (int i = 0; i < g.rows(); ++i) rhs[i] = (a[i].apply(y).array() * cy.array()).sum();
      mu.vec = Eigen::LLT<Matrix>(g).solve(rhs);
      return mu;
    }
  }
  throw std::logic_error("multipliers: bad kind");
}

inline Multipliers multipliers(const SmoothSDP& problem, const Matrix& y) {
  return multipliers(problem, y, problem.c().apply(y));
}

/// The dual certificate matrix S(Y) = C - A*(mu(Y)), kept in operator form
/// to preserve the sparsity of C. S depends on Y only through YY^T.
class DualMatrix {
 public:
  DualMatrix(const SmoothSDP& problem, Multipliers mu) : problem_(&problem), mu_(std::move(mu)) {}

  const Multipliers& mu() const { return mu_; }
  int n() const { return problem_->n(); }

  Matrix apply(const Matrix& z) const {
    return problem_->c().apply(z) - detail::adjoint_apply(*problem_, mu_, z);
  }

  Vector apply_vec(const Vector& v) const {
    Matrix z = apply(Matrix(v));
    return z.col(0);
  }

  /// Materialized copy for bisection/Cholesky work.
  SparseMatrix to_sparse() const {
    std::vector<Eigen::Triplet<double>> trips;
    for (const auto& e : problem_->c().entries()) {
      trips.emplace_back(e.i, e.j, e.v);
      if (e.i != e.j) trips.emplace_back(e.j, e.i, e.v);
    }
    switch (mu_.kind) {
      case ConstraintKind::FixedTrace:
        for (int i = 0; i < n(); ++i) trips.emplace_back(i, i, -mu_.trace);
        break;
      case ConstraintKind::FixedDiagonal:
        for (int i = 0; i < n(); ++i) trips.emplace_back(i, i, -mu_.vec[i]);
        break;
      case ConstraintKind::FixedDiagonalBlocks: {
        int d = problem_->block_rows();
        for (int b = 0; b < problem_->block_count(); ++b)
          for (int r = 0; r < d; ++r)
            for (int s = 0; s < d; ++s)
              if (mu_.blocks[b](r, s) != 0.0)
                trips.emplace_back(b * d + r, b * d + s, -mu_.blocks[b](r, s));
        break;
      }
      case ConstraintKind::GeneralLinear: {
        const auto& a = problem_->constraint_matrices();
        for (std::size_t k = 0; k < a.size(); ++k) {
          double w = mu_.vec[static_cast<int>(k)];
          if (w == 0.0) continue;
          for (const auto& e : a[k].entries()) {
            trips.emplace_back(e.i, e.j, -w * e.v);
            if (e.i != e.j) trips.emplace_back(e.j, e.i, -w * e.v);
          }
        }
        break;
      }
    }
    SparseMatrix s(n(), n());
    s.setFromTriplets(trips.begin(), trips.end());
    return s;
  }

  Matrix to_dense() const { return Matrix(to_sparse()); }

 private:
  const SmoothSDP* problem_;
  Multipliers mu_;
};

inline DualMatrix dual_matrix(const SmoothSDP& problem, const Matrix& y) {
  return DualMatrix(problem, multipliers(problem, y));
}

/// grad f(Y) = 2 S(Y) Y, a tangent vector by construction of mu. Also equals
/// the tangent projection of the ambient gradient 2 C Y.
inline Matrix riemannian_gradient(const SmoothSDP& problem, const Matrix& y) {
  return 2.0 * dual_matrix(problem, y).apply(y);
}

inline TangentVector riemannian_gradient(const SmoothSDP& problem, const FactorPoint& y) {
  return {riemannian_gradient(problem, y.y)};
}

/// Hess f(Y)[Z] = 2 Proj_Y(S Z); the mu-derivative term S' Y is annihilated
/// by the projection.
inline TangentVector riemannian_hessian_apply(const DualMatrix& s, const FactorPoint& y,
                                              const TangentVector& z) {
  return project_tangent(y, 2.0 * s.apply(z.z));
}

inline TangentVector riemannian_hessian_apply(const SmoothSDP& problem, const FactorPoint& y,
                                              const TangentVector& z) {
  return riemannian_hessian_apply(dual_matrix(problem, y.y), y, z);
}

struct CqReport {
  bool ok = false;
  double witness = 0.0;  // smallest Gram singular value (general) or class witness
  std::string what;
};

/// Constraint qualification at Y: linear independence of the A_i Y. The
/// built-in classes have closed-form witnesses; general constraints report
/// the smallest singular value of the Gram matrix.
inline CqReport check_constraint_qualification(const SmoothSDP& problem, const Matrix& y) {
  switch (problem.kind()) {
    case ConstraintKind::FixedTrace: {
      double norm = y.norm();
      return {norm > 1e-12, norm, "||Y||"};
    }
    case ConstraintKind::FixedDiagonal: {
      double worst = y.rowwise().norm().minCoeff();
      return {worst > 1e-12, worst, "min row norm"};
    }
    case ConstraintKind::FixedDiagonalBlocks: {
      int d = problem.block_rows();
      double worst = std::numeric_limits<double>::infinity();
      for (int i = 0; i < problem.block_count(); ++i) {
        Eigen::JacobiSVD<Matrix> svd(y.middleRows(i * d, d));
        worst = std::min(worst, svd.singularValues()(d - 1));
      }
      return {worst > 1e-10, worst, "min block singular value"};
    }
    case ConstraintKind::GeneralLinear: {
      Matrix g = detail::gram_matrix(problem, y);
      Eigen::SelfAdjointEigenSolver<Matrix> es(g);
      double smallest = std::max(es.eigenvalues()(0), 0.0);
      double largest = std::max(es.eigenvalues()(g.rows() - 1), 0.0);
      return {smallest > 1e-10 * std::max(largest, 1.0), smallest, "Gram sigma_min"};
    }
  }
  throw std::logic_error("check_constraint_qualification: bad kind");
}

/// b^T mu, the dual objective at mu(Y).
inline double dual_value(const SmoothSDP& problem, const Multipliers& mu) {
  switch (mu.kind) {
    case ConstraintKind::FixedTrace:
      return mu.trace;
    case ConstraintKind::FixedDiagonal:
      return mu.vec.sum();
    case ConstraintKind::FixedDiagonalBlocks: {
      double s = 0.0;
      for (const Matrix& b : mu.blocks) s += b.trace();
      return s;
    }
    case ConstraintKind::GeneralLinear:
      return problem.rhs().dot(mu.vec);
  }
  throw std::logic_error("dual_value: bad kind");
}

}  // namespace smoothsdp
