#include "irkm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace irkm {

namespace {

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch(std::string(what) + ": matrix is " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()));
  }
}

bool try_cholesky(const Matrix& a, double jitter, const Matrix& b, Matrix& out) {
  Matrix shifted = a;
  shifted.diagonal().array() += jitter;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) return false;
  if (!llt.matrixLLT().diagonal().allFinite() || (llt.matrixLLT().diagonal().array() <= 0.0).any())
    return false;
  out = llt.solve(b);
  return out.allFinite();
}

}  // namespace

SymmetricMatrix::SymmetricMatrix(const Matrix& a) {
  require_square(a, "SymmetricMatrix");
  m_ = 0.5 * (a + a.transpose());
}

SymmetricMatrix SymmetricMatrix::identity(Eigen::Index dim) {
  return SymmetricMatrix(Matrix::Identity(dim, dim));
}

SymmetricMatrix SymmetricMatrix::zero(Eigen::Index dim) {
  return SymmetricMatrix(Matrix::Zero(dim, dim));
}

SymmetricMatrix SymmetricMatrix::diagonal(const Vector& diag) {
  return SymmetricMatrix(Matrix(diag.asDiagonal()));
}

Subspace::Subspace(Matrix basis, Vector eigenvalues)
    : basis_(std::move(basis)), eigenvalues_(std::move(eigenvalues)) {
  if (basis_.cols() > basis_.rows() || basis_.cols() == 0) {
    throw DimensionMismatch("Subspace: need 1 <= k <= d columns");
  }
}

SpdSolution solve_spd(const SymmetricMatrix& a, const Matrix& b, double jitter) {
  const Eigen::Index n = a.dim();
  if (b.rows() != n) {
    throw DimensionMismatch("solve_spd: rhs has " + std::to_string(b.rows()) + " rows, expected " +
                            std::to_string(n));
  }
  if (jitter < 0.0 || !std::isfinite(jitter)) {
    throw NotPositiveDefinite("solve_spd: jitter must be finite and nonnegative");
  }
  SpdSolution sol;
  if (try_cholesky(a.matrix(), jitter, b, sol.x)) {
    sol.jitter_used = jitter;
    return sol;
  }
  const double floor = n > 0 ? 1e-12 * std::abs(a.trace()) / static_cast<double>(n) : 0.0;
  double current = std::max(jitter, floor);
  // Retrying the jitter that already failed is pointless.
  if (current <= jitter) current *= 10.0;
  if (current == 0.0) current = 1e-12;
  for (int attempt = 0; attempt < 6; ++attempt, current *= 10.0) {
    if (try_cholesky(a.matrix(), current, b, sol.x)) {
      sol.jitter_used = current;
      return sol;
    }
  }
  throw NotPositiveDefinite("solve_spd: factorization failed after jitter escalation up to " +
                            std::to_string(current / 10.0));
}

SymmetricMatrix psd_sqrt(const SymmetricMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.matrix());
  const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return SymmetricMatrix(eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose());
}

Vector sorted_eigenvalues(const SymmetricMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.matrix(), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().reverse();
}

Subspace top_k_eigenspace(const SymmetricMatrix& m, Eigen::Index k) {
  if (k < 1 || k > m.dim()) {
    throw DimensionMismatch("top_k_eigenspace: k=" + std::to_string(k) + " outside [1, " +
                            std::to_string(m.dim()) + "]");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.matrix());
  // Eigen sorts ascending; take the last k columns in reverse.
  const Eigen::Index d = m.dim();
  Matrix basis(d, k);
  Vector values(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    basis.col(i) = eig.eigenvectors().col(d - 1 - i);
    values(i) = eig.eigenvalues()(d - 1 - i);
  }
  return Subspace(std::move(basis), std::move(values));
}

double principal_angle(const Subspace& u, const Subspace& v) {
  if (u.ambient_dim() != v.ambient_dim() || u.rank() != v.rank()) {
    throw DimensionMismatch("principal_angle: subspaces differ in ambient dimension or rank");
  }
  const Matrix cross = u.basis().transpose() * v.basis();
  Eigen::JacobiSVD<Matrix> svd(cross);
  const double smallest = svd.singularValues().minCoeff();
  return std::acos(std::clamp(smallest, 0.0, 1.0));
}

double relative_matrix_error(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("relative_matrix_error: dimensions differ");
  const double ref = b.matrix().norm();
  if (ref == 0.0) throw ZeroReference("relative_matrix_error: reference matrix is zero");
  return (a.matrix() - b.matrix()).norm() / ref;
}

}  // namespace irkm
