#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>

#include <cstdint>
#include <stdexcept>
#include <string>

#include "smoothsdp/rng.hpp"
#include "smoothsdp/sparse_sym.hpp"

namespace smoothsdp {

/// Search-space geometry for the three built-in constraint classes:
///   Sphere             ||Y||_F = 1          (fixed trace,  m = 1)
///   ProductOfSpheres   unit rows            (fixed diagonal, m = n)
///   ProductOfStiefel   q row-blocks of size d x p with Y_i Y_i^T = I_d
///                                           (fixed diagonal blocks, m = q d(d+1)/2)
struct ManifoldDescriptor {
  enum class Kind { Sphere, ProductOfSpheres, ProductOfStiefel };

  Kind kind = Kind::Sphere;
  int n = 0;  // rows
  int p = 0;  // columns
  int d = 0;  // Stiefel block row count
  int q = 0;  // Stiefel block count

  static ManifoldDescriptor sphere(int n, int p) {
    check_dims(n, p);
    return {Kind::Sphere, n, p, 0, 0};
  }
  static ManifoldDescriptor product_of_spheres(int n, int p) {
    check_dims(n, p);
    return {Kind::ProductOfSpheres, n, p, 0, 0};
  }
  static ManifoldDescriptor product_of_stiefel(int d, int q, int p) {
    if (d < 1 || q < 1) throw std::invalid_argument("ManifoldDescriptor: d, q must be positive");
    check_dims(d * q, p);
    if (p < d)
      throw std::invalid_argument("ManifoldDescriptor: Stiefel blocks need p >= d (got p=" +
                                  std::to_string(p) + ", d=" + std::to_string(d) + ")");
    return {Kind::ProductOfStiefel, d * q, p, d, q};
  }

  int constraint_count() const {
    switch (kind) {
      case Kind::Sphere: return 1;
      case Kind::ProductOfSpheres: return n;
      case Kind::ProductOfStiefel: return q * d * (d + 1) / 2;
    }
    return 0;
  }

  int dimension() const { return n * p - constraint_count(); }

  ManifoldDescriptor with_columns(int new_p) const {
    switch (kind) {
      case Kind::Sphere: return sphere(n, new_p);
      case Kind::ProductOfSpheres: return product_of_spheres(n, new_p);
      case Kind::ProductOfStiefel: return product_of_stiefel(d, q, new_p);
    }
    throw std::logic_error("ManifoldDescriptor: bad kind");
  }

  std::string name() const {
    switch (kind) {
      case Kind::Sphere: return "sphere";
      case Kind::ProductOfSpheres: return "product-of-spheres";
      case Kind::ProductOfStiefel: return "product-of-stiefel";
    }
    return "?";
  }

 private:
  static void check_dims(int n, int p) {
    if (n < 1 || p < 1) throw std::invalid_argument("ManifoldDescriptor: n, p must be positive");
  }
};

/// A feasible iterate Y on its manifold.
struct FactorPoint {
  ManifoldDescriptor manifold;
  Matrix y;
};

/// An element of the tangent space at some FactorPoint; which point is
/// contextual, as in the operations below.
struct TangentVector {
  Matrix z;
  double norm() const { return z.norm(); }
};

/// max-norm violation of the defining constraints at Y.
inline double feasibility_residual(const ManifoldDescriptor& m, const Matrix& y) {
  if (y.rows() != m.n || y.cols() != m.p)
    throw std::invalid_argument("feasibility_residual: shape mismatch");
  switch (m.kind) {
    case ManifoldDescriptor::Kind::Sphere:
      return std::abs(y.squaredNorm() - 1.0);
    case ManifoldDescriptor::Kind::ProductOfSpheres:
      return (y.rowwise().squaredNorm().array() - 1.0).abs().maxCoeff();
    case ManifoldDescriptor::Kind::ProductOfStiefel: {
      double worst = 0.0;
      for (int i = 0; i < m.q; ++i) {
        Matrix g = y.middleRows(i * m.d, m.d) * y.middleRows(i * m.d, m.d).transpose();
        g.diagonal().array() -= 1.0;
        worst = std::max(worst, g.cwiseAbs().maxCoeff());
      }
      return worst;
    }
  }
  return 0.0;
}

inline double feasibility_residual(const FactorPoint& y) {
  return feasibility_residual(y.manifold, y.y);
}

inline constexpr double kFeasibilityTol = 1e-12;

inline void require_feasible(const FactorPoint& y, double tol = kFeasibilityTol) {
  double r = feasibility_residual(y);
  if (!(r <= tol))
    throw std::invalid_argument("FactorPoint infeasible: residual " + std::to_string(r) +
                                " on " + y.manifold.name());
}

/// max-norm of A(Z Y^T + Y Z^T): membership residual of Z in T_Y M.
inline double tangency_residual(const FactorPoint& y, const Matrix& z) {
  const ManifoldDescriptor& m = y.manifold;
  if (z.rows() != m.n || z.cols() != m.p)
    throw std::invalid_argument("tangency_residual: shape mismatch");
  switch (m.kind) {
    case ManifoldDescriptor::Kind::Sphere:
      return 2.0 * std::abs((z.array() * y.y.array()).sum());
    case ManifoldDescriptor::Kind::ProductOfSpheres:
      return 2.0 * (z.array() * y.y.array()).rowwise().sum().abs().maxCoeff();
    case ManifoldDescriptor::Kind::ProductOfStiefel: {
      double worst = 0.0;
      for (int i = 0; i < m.q; ++i) {
        Matrix zyt = z.middleRows(i * m.d, m.d) * y.y.middleRows(i * m.d, m.d).transpose();
        worst = std::max(worst, (zyt + zyt.transpose()).cwiseAbs().maxCoeff());
      }
      return worst;
    }
  }
  return 0.0;
}

/// Orthogonal projection of an ambient matrix onto T_Y M (Frobenius metric).
inline TangentVector project_tangent(const FactorPoint& y, const Matrix& z) {
  const ManifoldDescriptor& m = y.manifold;
  if (z.rows() != m.n || z.cols() != m.p)
    throw std::invalid_argument("project_tangent: shape mismatch");
  switch (m.kind) {
    case ManifoldDescriptor::Kind::Sphere: {
      double c = (z.array() * y.y.array()).sum();
      return {z - c * y.y};
    }
    case ManifoldDescriptor::Kind::ProductOfSpheres: {
      Vector c = (z.array() * y.y.array()).rowwise().sum();
      return {z - c.asDiagonal() * y.y};
    }
    case ManifoldDescriptor::Kind::ProductOfStiefel: {
      Matrix out = z;
      for (int i = 0; i < m.q; ++i) {
        auto yi = y.y.middleRows(i * m.d, m.d);
        auto zi = z.middleRows(i * m.d, m.d);
        Matrix zyt = zi * yi.transpose();
        Matrix sym = 0.5 * (zyt + zyt.transpose());
        out.middleRows(i * m.d, m.d) = zi - sym * yi;
      }
      return {out};
    }
  }
  throw std::logic_error("project_tangent: bad kind");
}

/// Metric projection of an ambient matrix onto the manifold. Degenerate
/// inputs (zero row, rank-deficient block) make the projection non-unique
/// and are an error naming the offending row/block.
inline FactorPoint project_to_manifold(const ManifoldDescriptor& m, Matrix w) {
  if (w.rows() != m.n || w.cols() != m.p)
    throw std::invalid_argument("project_to_manifold: shape mismatch");
  switch (m.kind) {
    case ManifoldDescriptor::Kind::Sphere: {
      double norm = w.norm();
      if (norm < 1e-14) throw std::runtime_error("retract: degenerate input (zero matrix)");
      return {m, w / norm};
    }
    case ManifoldDescriptor::Kind::ProductOfSpheres: {
      for (int i = 0; i < m.n; ++i) {
        double norm = w.row(i).norm();
        if (norm < 1e-14)
          throw std::runtime_error("retract: degenerate input (zero row " + std::to_string(i) + ")");
        w.row(i) /= norm;
      }
      return {m, std::move(w)};
    }
    case ManifoldDescriptor::Kind::ProductOfStiefel: {
      for (int i = 0; i < m.q; ++i) {
        Eigen::JacobiSVD<Matrix> svd(w.middleRows(i * m.d, m.d),
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.singularValues()(m.d - 1) < 1e-12)
          throw std::runtime_error("retract: degenerate input (rank-deficient block " +
                                   std::to_string(i) + ")");
        w.middleRows(i * m.d, m.d) = svd.matrixU() * svd.matrixV().transpose();
      }
      return {m, std::move(w)};
    }
  }
  throw std::logic_error("project_to_manifold: bad kind");
}

/// Metric-projection retraction. First-order with zero tangential
/// acceleration, so f(retract(Y, tZ)) has the Riemannian Hessian as its
/// exact second derivative at t = 0.
inline FactorPoint retract(const FactorPoint& y, const TangentVector& z) {
  if (z.z.rows() != y.manifold.n || z.z.cols() != y.manifold.p)
    throw std::invalid_argument("retract: shape mismatch");
  return project_to_manifold(y.manifold, y.y + z.z);
}

/// I.i.d. Gaussian entries retracted to the manifold; deterministic per seed.
inline FactorPoint random_point(const ManifoldDescriptor& m, std::uint64_t seed) {
  Rng rng(Rng::derive(seed, 0x70696e74));
  for (int attempt = 0; attempt < 64; ++attempt) {
    try {
      return project_to_manifold(m, rng.gaussian_matrix(m.n, m.p));
    } catch (const std::runtime_error&) {
      // measure-zero degenerate draw; resample
    }
  }
  throw std::runtime_error("random_point: repeated degenerate draws");
}

/// Unit-norm Gaussian tangent vector at Y; deterministic per seed.
inline TangentVector random_tangent(const FactorPoint& y, std::uint64_t seed) {
  Rng rng(Rng::derive(seed, 0x74616e67));
  for (int attempt = 0; attempt < 64; ++attempt) {
    TangentVector t = project_tangent(y, rng.gaussian_matrix(y.manifold.n, y.manifold.p));
    double norm = t.norm();
    if (norm > 1e-12) {
      t.z /= norm;
      return t;
    }
  }
  throw std::runtime_error("random_tangent: tangent space appears to be {0}");
}

}  // namespace smoothsdp
