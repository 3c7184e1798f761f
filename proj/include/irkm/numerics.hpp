#pragma once

#include <Eigen/Dense>

#include "irkm/errors.hpp"

namespace irkm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Symmetry is exact: the constructor stores (A+Aᵀ)/2.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(const Matrix& a);

  static SymmetricMatrix identity(Eigen::Index dim);
  static SymmetricMatrix zero(Eigen::Index dim);
  static SymmetricMatrix diagonal(const Vector& diag);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }

 private:
  Matrix m_;
};

/// Orthonormal basis of a k-dimensional subspace of R^d, with the eigenvalues
/// that selected it when produced by top_k_eigenspace (nonincreasing).
class Subspace {
 public:
  explicit Subspace(Matrix basis, Vector eigenvalues = {});

  Eigen::Index ambient_dim() const { return basis_.rows(); }
  Eigen::Index rank() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }
  const Vector& eigenvalues() const { return eigenvalues_; }

 private:
  Matrix basis_;
  Vector eigenvalues_;
};

struct SpdSolution {
  Matrix x;
  double jitter_used = 0.0;
};

/// Solves (A + jitter·I) X = B by Cholesky. On factorization failure the
/// jitter is raised from max(jitter, 1e-12·tr(A)/dim) by factors of 10, at
/// most six times.
SpdSolution solve_spd(const SymmetricMatrix& a, const Matrix& b, double jitter = 0.0);

/// V·diag(√max(λ,0))·Vᵀ.
SymmetricMatrix psd_sqrt(const SymmetricMatrix& m);

/// All eigenvalues in nonincreasing order.
Vector sorted_eigenvalues(const SymmetricMatrix& m);

Subspace top_k_eigenspace(const SymmetricMatrix& m, Eigen::Index k);

/// Largest principal angle, arccos(σ_min(UᵀV)), in [0, π/2].
double principal_angle(const Subspace& u, const Subspace& v);

/// ‖A − B‖_F / ‖B‖_F.
double relative_matrix_error(const SymmetricMatrix& a, const SymmetricMatrix& b);

}  // namespace irkm
