#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "irkm/numerics.hpp"

namespace irkm {

enum class KernelFamily {
  laplacian_radial,   // exp(-r/σ)
  gaussian_radial,    // exp(-r²/2σ²)
  exponential_inner,  // g(t) = exp(a·t)
  polynomial_inner,   // g(t) = (b + t)^m
  linear_inner,       // g(t) = t
};

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// A kernel family plus its parameters. Inner-product families act on
/// t = ⟨x,z⟩/d, radial families on r = ‖x − z‖₂.
struct KernelSpec {
  KernelFamily family = KernelFamily::laplacian_radial;
  double bandwidth = 1.0;  // σ, radial families
  double scale = 1.0;      // a, exponential_inner
  int degree = 2;          // m, polynomial_inner
  double offset = 1.0;     // b, polynomial_inner
  Eigen::Index dim = 1;    // d

  bool is_radial() const {
    return family == KernelFamily::laplacian_radial || family == KernelFamily::gaussian_radial;
  }
  void validate() const;

  /// g(t) for inner-product families, k(r) for radial ones.
  double profile(double arg) const;
  /// g'(t), resp. k'(r).
  double profile_derivative(double arg) const;
};

/// Per-coordinate importance weights, w ≥ 0.
class WeightVector {
 public:
  explicit WeightVector(Vector w);
  static WeightVector ones(Eigen::Index d) { return WeightVector(Vector::Ones(d)); }

  Eigen::Index dim() const { return w_.size(); }
  const Vector& values() const { return w_; }
  const Vector& sqrt_values() const { return sqrt_w_; }

 private:
  Vector w_;
  Vector sqrt_w_;
};

/// PSD importance matrix with its cached square root.
class WeightMatrix {
 public:
  explicit WeightMatrix(SymmetricMatrix m);
  static WeightMatrix identity(Eigen::Index d) {
    return WeightMatrix(SymmetricMatrix::identity(d));
  }

  Eigen::Index dim() const { return m_.dim(); }
  const SymmetricMatrix& matrix() const { return m_; }
  const SymmetricMatrix& sqrt_matrix() const { return sqrt_m_; }

 private:
  SymmetricMatrix m_;
  SymmetricMatrix sqrt_m_;
};

using Weight = std::variant<WeightVector, WeightMatrix>;

Eigen::Index weight_dim(const Weight& weight);

// Single-pair evaluation.
double kernel_value(const KernelSpec& spec, const Vector& x, const Vector& z, const Weight& w);
Vector kernel_input_gradient(const KernelSpec& spec, const Vector& x, const Vector& z,
                             const Weight& w);

/// K_w(X, Z), n×m. Exactly symmetric when called with X and Z the same object
/// (or equal contents).
Matrix gram(const KernelSpec& spec, const Matrix& x, const Matrix& z, const Weight& w);

/// ∂K_w(X,X)/∂w_j. Self-pairs of the laplacian family contribute 0.
SymmetricMatrix weight_derivative_gram(const KernelSpec& spec, const Matrix& x,
                                       const WeightVector& w, Eigen::Index j);

/// ∂K_M(X,X)/∂M_{ij}, symmetrized in (i, j).
SymmetricMatrix matrix_weight_derivative(const KernelSpec& spec, const Matrix& x,
                                         const WeightMatrix& m, Eigen::Index i, Eigen::Index j);

/// Median pairwise distance of the weighted inputs over the first
/// min(n, max_points) rows. Falls back to 1 when all points coincide.
double median_bandwidth(const Matrix& x, const Weight& w, Eigen::Index max_points = 256);

namespace detail {

/// Rows mapped to √w ⊙ x, resp. √M x.
Matrix apply_weight(const Matrix& x, const Weight& w);

/// Right-multiplies row vectors by √w (diagonal) or √M.
Matrix right_multiply_sqrt(const Matrix& rows, const Weight& w);

/// Kernel matrix on already-weighted inputs.
Matrix transformed_gram(const KernelSpec& spec, const Matrix& u, const Matrix& v, bool symmetric);

/// Slope matrix P on weighted inputs: g'(t)/d for inner-product families,
/// k'(r)/r for radial ones (0 for laplacian at r = 0). Every input gradient and
/// weight derivative is P times a polynomial in the raw coordinates.
Matrix transformed_slope(const KernelSpec& spec, const Matrix& u, const Matrix& v, bool symmetric);

/// Pairwise squared distances; exact zeros for identical rows.
Matrix squared_distances(const Matrix& u, const Matrix& v, bool symmetric);

}  // namespace detail

}  // namespace irkm
