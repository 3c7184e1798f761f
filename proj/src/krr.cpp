#include "irkm/krr.hpp"

#include <string>

namespace irkm {

namespace {

void require_input(const KrrModel& model, const Matrix& z, const char* what) {
  if (z.cols() != model.dim()) {
    throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(model.dim()) +
                            " columns, got " + std::to_string(z.cols()));
  }
}

}  // namespace

KrrModel::KrrModel(KernelSpec spec, Weight weight, Matrix x_train, Vector beta, double lambda,
                   double jitter_used)
    : spec_(spec),
      weight_(std::move(weight)),
      x_train_(std::move(x_train)),
      beta_(std::move(beta)),
      lambda_(lambda),
      jitter_used_(jitter_used),
      weighted_train_(detail::apply_weight(x_train_, weight_)) {
  if (beta_.size() != x_train_.rows()) throw DimensionMismatch("KrrModel: beta length != n");
}

KrrModel fit(const KernelSpec& spec, const Weight& weight, const Matrix& x, const Vector& y,
             double lambda) {
  spec.validate();
  if (x.rows() < 1) throw DimensionMismatch("fit: no training points");
  if (y.size() != x.rows()) {
    throw DimensionMismatch("fit: " + std::to_string(x.rows()) + " inputs but " +
                            std::to_string(y.size()) + " labels");
  }
  if (!(lambda >= 0.0)) throw ConfigError("lambda", "ridge parameter must be >= 0");
  const SymmetricMatrix k(gram(spec, x, x, weight));
  SpdSolution sol = solve_spd(k, y, lambda);
  return KrrModel(spec, weight, x, sol.x.col(0), lambda, sol.jitter_used);
}

Vector predict(const KrrModel& model, const Matrix& z) {
  require_input(model, z, "predict");
  const Matrix u = detail::apply_weight(z, model.weight());
  return detail::transformed_gram(model.spec(), u, model.weighted_train(), false) * model.beta();
}

Matrix predict_gradient(const KrrModel& model, const Matrix& z) {
  require_input(model, z, "predict_gradient");
  const Matrix u = detail::apply_weight(z, model.weight());
  const Matrix& v = model.weighted_train();
  // c_ik = β_k · P(z_i, x_k); the gradient in weighted coordinates is
  // Σ_k c_ik v_k (inner-product) or Σ_k c_ik (u_i − v_k) (radial).
  const Matrix c = detail::transformed_slope(model.spec(), u, v, false) * model.beta().asDiagonal();
  Matrix g = -(c * v);
  if (model.spec().is_radial()) {
    g += c.rowwise().sum().asDiagonal() * u;
  } else {
    g = -g;
  }
  // Chain rule back to raw coordinates.
  return detail::right_multiply_sqrt(g, model.weight());
}

double test_mse(const KrrModel& model, const Matrix& z, const Vector& y) {
  if (z.rows() != y.size()) throw DimensionMismatch("test_mse: inputs and labels differ in length");
  if (y.size() == 0) throw DimensionMismatch("test_mse: empty test set");
  return (predict(model, z) - y).squaredNorm() / static_cast<double>(y.size());
}

}  // namespace irkm
