#pragma once

#include "irkm/kernels.hpp"

namespace irkm {

/// Fitted weighted kernel ridge regression: f̂(z) = K_w(z, X)β with
/// β = (K_w(X,X) + λI)⁻¹y. Immutable after fit.
class KrrModel {
 public:
  KrrModel(KernelSpec spec, Weight weight, Matrix x_train, Vector beta, double lambda,
           double jitter_used);

  const KernelSpec& spec() const { return spec_; }
  const Weight& weight() const { return weight_; }
  const Matrix& x_train() const { return x_train_; }
  const Vector& beta() const { return beta_; }
  double lambda() const { return lambda_; }
  double jitter_used() const { return jitter_used_; }
  Eigen::Index dim() const { return spec_.dim; }

  /// Training inputs mapped through √w / √M.
  const Matrix& weighted_train() const { return weighted_train_; }

 private:
  KernelSpec spec_;
  Weight weight_;
  Matrix x_train_;
  Vector beta_;
  double lambda_;
  double jitter_used_;
  Matrix weighted_train_;
};

KrrModel fit(const KernelSpec& spec, const Weight& weight, const Matrix& x, const Vector& y,
             double lambda);

Vector predict(const KrrModel& model, const Matrix& z);

/// Row i is ∇f̂ at z_i.
Matrix predict_gradient(const KrrModel& model, const Matrix& z);

double test_mse(const KrrModel& model, const Matrix& z, const Vector& y);

}  // namespace irkm
