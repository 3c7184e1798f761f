#include "irkm/estimators.hpp"

#include <cmath>
#include <string>

namespace irkm {

namespace {

void require_eval(const Matrix& x_eval) {
  if (x_eval.rows() == 0) throw DimensionMismatch("estimator: evaluation set is empty");
}

void require_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw AlphaOutOfRange("alpha=" + std::to_string(alpha) + " outside [0, 1]");
  }
}

void require_eps(double eps_s) {
  if (!(eps_s > 0.0) || !std::isfinite(eps_s)) {
    throw ConfigError("eps_s", "safeguard must be positive and finite");
  }
}

// Σ_ab Q_ab ∂K(x_a,x_b)/∂M as a d×d matrix, where Q = B·P·B (B = Diag β) and
// P is the slope matrix on training points. With Δ = x_a − x_b:
//   inner:  Σ Q_ab (x_a x_bᵀ + x_b x_aᵀ)/2 = XᵀQX
//   radial: Σ Q_ab ΔΔᵀ/2            = Xᵀ Diag(Q1) X − XᵀQX
Matrix dn_quadratic_forms(const KrrModel& model) {
  const Matrix& x = model.x_train();
  const Matrix& u = model.weighted_train();
  const Vector& beta = model.beta();
  const Matrix q =
      beta.asDiagonal() * detail::transformed_slope(model.spec(), u, u, true) * beta.asDiagonal();
  Matrix forms = x.transpose() * q * x;
  if (model.spec().is_radial()) {
    forms = x.transpose() * q.rowwise().sum().asDiagonal() * x - forms;
  }
  return forms;
}

}  // namespace

Vector empirical_sq_gradient_weights(const KrrModel& model, const Matrix& x_eval) {
  require_eval(x_eval);
  const Matrix g = predict_gradient(model, x_eval);
  return g.array().square().colwise().sum().transpose() / static_cast<double>(x_eval.rows());
}

Vector dn_vector(const KrrModel& model) {
  if (!std::holds_alternative<WeightVector>(model.weight())) {
    throw ConfigError("weight", "dn_vector requires a model fitted with a weight vector");
  }
  const Matrix& x = model.x_train();
  const Matrix& u = model.weighted_train();
  const Vector& beta = model.beta();
  const Matrix q =
      beta.asDiagonal() * detail::transformed_slope(model.spec(), u, u, true) * beta.asDiagonal();
  // Diagonal of dn_quadratic_forms without forming the d×d products.
  const Matrix qx = q * x;
  Vector d = (x.array() * qx.array()).colwise().sum().transpose();
  if (model.spec().is_radial()) {
    const Vector rows = q.rowwise().sum();
    d = Vector((x.array().square().colwise() * rows.array()).colwise().sum().transpose()) - d;
  }
  return d;
}

SymmetricMatrix agop(const KrrModel& model, const Matrix& x_eval) {
  require_eval(x_eval);
  const Matrix g = predict_gradient(model, x_eval);
  return SymmetricMatrix(g.transpose() * g / static_cast<double>(x_eval.rows()));
}

SymmetricMatrix dn_matrix(const KrrModel& model) {
  return SymmetricMatrix(dn_quadratic_forms(model));
}

WeightVector safeguard_normalize(const Vector& v, double eps_s) {
  require_eps(eps_s);
  if ((v.array() < 0.0).any()) throw NonnegViolation("safeguard_normalize: negative entry");
  const Vector shifted = v.array() + eps_s;
  return WeightVector(shifted * (static_cast<double>(v.size()) / shifted.sum()));
}

WeightVector mix(const WeightVector& w1, const WeightVector& w2, double alpha) {
  require_alpha(alpha);
  if (w1.dim() != w2.dim()) throw DimensionMismatch("mix: weight dimensions differ");
  return WeightVector((1.0 - alpha) * w1.values() + alpha * w2.values());
}

WeightMatrix safeguard_normalize_matrix(const SymmetricMatrix& m, double eps_s) {
  require_eps(eps_s);
  Matrix shifted = m.matrix();
  shifted.diagonal().array() += eps_s;
  const double tr = shifted.trace();
  if (!(tr > 0.0)) throw NonnegViolation("safeguard_normalize_matrix: nonpositive trace");
  return WeightMatrix(SymmetricMatrix(shifted * (static_cast<double>(m.dim()) / tr)));
}

WeightMatrix mix_matrix(const WeightMatrix& m1, const WeightMatrix& m2, double alpha) {
  require_alpha(alpha);
  if (m1.dim() != m2.dim()) throw DimensionMismatch("mix_matrix: weight dimensions differ");
  return WeightMatrix(
      SymmetricMatrix((1.0 - alpha) * m1.matrix().matrix() + alpha * m2.matrix().matrix()));
}

}  // namespace irkm
