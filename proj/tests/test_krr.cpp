#include <doctest.h>

#include <cmath>

#include "irkm/data_io.hpp"
#include "irkm/krr.hpp"
#include "irkm/oracles.hpp"

using namespace irkm;

namespace {

KernelSpec make(KernelFamily family, Eigen::Index d, double sigma = 1.0) {
  KernelSpec s;
  s.family = family;
  s.dim = d;
  s.bandwidth = sigma;
  return s;
}

}  // namespace

TEST_CASE("fit: single point with radial kernel gives beta = y") {
  Matrix x(1, 3);
  x << 1, -1, 1;
  Vector y(1);
  y << 2.5;
  const KrrModel m = fit(make(KernelFamily::laplacian_radial, 3), WeightVector::ones(3), x, y, 0.0);
  CHECK(m.beta()(0) == doctest::Approx(2.5));
}

TEST_CASE("fit: two hypercube points against a hand 2x2 inverse") {
  Matrix x(2, 2);
  x << 1, 1, 1, -1;  // distance 2
  Vector y(2);
  y << 1.0, -3.0;
  const double k = std::exp(-2.0);
  const double det = 1.0 - k * k;
  const double b0 = (y(0) - k * y(1)) / det;
  const double b1 = (y(1) - k * y(0)) / det;
  const KrrModel m = fit(make(KernelFamily::laplacian_radial, 2), WeightVector::ones(2), x, y, 0.0);
  CHECK(m.beta()(0) == doctest::Approx(b0).epsilon(1e-13));
  CHECK(m.beta()(1) == doctest::Approx(b1).epsilon(1e-13));
}

TEST_CASE("fit: heavy ridge shrinks beta and predictions") {
  RngStream rng(1, 1);
  const Matrix x = sample_hypercube(20, 5, rng);
  const Vector y = sample_gaussian(20, 1, rng).col(0);
  const KrrModel m = fit(make(KernelFamily::gaussian_radial, 5, 2.0), WeightVector::ones(5), x, y, 1e12);
  CHECK(m.beta().norm() <= y.norm() / 1e12);
  CHECK(predict(m, x).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("interpolation and monotone shrinkage") {
  RngStream rng(2, 2);
  const Matrix x = sample_hypercube(100, 50, rng);
  const Vector y = sample_gaussian(100, 1, rng).col(0);
  KernelSpec s = make(KernelFamily::laplacian_radial, 50);
  s.bandwidth = median_bandwidth(x, WeightVector::ones(50));
  const KrrModel m = fit(s, WeightVector::ones(50), x, y, 1e-12);
  CHECK(test_mse(m, x, y) <= 1e-8);

  double prev = INFINITY;
  for (double lambda : {1e-6, 1e-3, 1e-1, 1.0, 10.0, 1e3}) {
    const double norm = fit(s, WeightVector::ones(50), x, y, lambda).beta().norm();
    CHECK(norm <= prev);
    prev = norm;
  }
}

TEST_CASE("predict: zero beta, single-point kernel sum") {
  RngStream rng(3, 3);
  const Matrix x = sample_gaussian(8, 3, rng);
  const WeightVector w(Vector::Constant(3, 0.7));
  const KernelSpec s = make(KernelFamily::polynomial_inner, 3);
  const KrrModel zero(s, w, x, Vector::Zero(8), 0.1, 0.0);
  CHECK(predict(zero, x).norm() == 0.0);
  CHECK(predict_gradient(zero, x).norm() == 0.0);

  const KrrModel m = fit(s, w, x, sample_gaussian(8, 1, rng).col(0), 0.1);
  const Vector z = sample_gaussian(1, 3, rng).row(0).transpose();
  double direct = 0.0;
  for (Eigen::Index k = 0; k < 8; ++k) direct += m.beta()(k) * kernel_value(s, z, x.row(k).transpose(), w);
  CHECK(predict(m, z.transpose())(0) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("predict_gradient: linear predictor has constant gradient") {
  RngStream rng(4, 4);
  const Matrix x = sample_gaussian(10, 4, rng);
  const KrrModel m = fit(make(KernelFamily::linear_inner, 4), WeightVector::ones(4), x,
                         sample_gaussian(10, 1, rng).col(0), 0.5);
  const Vector expect = x.transpose() * m.beta() / 4.0;
  const Matrix g = predict_gradient(m, sample_gaussian(6, 4, rng));
  for (Eigen::Index r = 0; r < 6; ++r) CHECK((g.row(r).transpose() - expect).norm() < 1e-13);
}

TEST_CASE("predict_gradient matches central differences") {
  RngStream rng(5, 5);
  for (KernelFamily f : {KernelFamily::gaussian_radial, KernelFamily::exponential_inner,
                         KernelFamily::polynomial_inner, KernelFamily::laplacian_radial}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix x = sample_gaussian(50, 20, rng);
      const Vector y = sample_gaussian(50, 1, rng).col(0);
      Vector w = sample_gaussian(1, 20, rng).row(0).transpose().cwiseAbs();
      w.array() += 0.1;
      const KrrModel m = fit(make(f, 20, 4.0), WeightVector(w), x, y, 1e-3);
      const Matrix z = sample_gaussian(10, 20, rng);
      const Matrix fd = oracle::finite_difference_gradient(m, z);
      CHECK((predict_gradient(m, z) - fd).norm() <= 1e-5 * fd.norm());
    }
  }
}

TEST_CASE("gradient agrees with the slope-matrix form for inner-product kernels") {
  // Coordinate weight r = (1/(n d²)) ‖K′ Diag(x_r) β‖² with K′_ab = g′(⟨x_a, x_b⟩/d).
  RngStream rng(6, 6);
  const Eigen::Index n = 25, d = 6;
  const Matrix x = sample_gaussian(n, d, rng);
  const Vector y = sample_gaussian(n, 1, rng).col(0);
  const KrrModel m = fit(make(KernelFamily::exponential_inner, d), WeightVector::ones(d), x, y, 0.1);
  const Matrix kp = (x * x.transpose() / static_cast<double>(d)).array().exp().matrix();
  const Matrix g = predict_gradient(m, x);
  for (Eigen::Index r = 0; r < d; ++r) {
    const double via_gradient = g.col(r).squaredNorm() / static_cast<double>(n);
    const double via_matrix =
        (kp * x.col(r).asDiagonal() * m.beta()).squaredNorm() / static_cast<double>(n * d * d);
    CHECK(via_gradient == doctest::Approx(via_matrix).epsilon(1e-8));
  }
}

TEST_CASE("test_mse examples and errors") {
  Matrix x(2, 1);
  x << 1, -1;
  Vector y(2);
  y << 1, -1;
  const KrrModel zero(make(KernelFamily::linear_inner, 1), WeightVector::ones(1), x, Vector::Zero(2), 0.0, 0.0);
  CHECK(test_mse(zero, x, y) == 1.0);
  // Two points, linear kernel, λ = 0: K = [[1,-1],[-1,1]] is singular, so use
  // λ = 1: β = (K + I)⁻¹y = y/3, f̂(x) = x·(β₀ − β₁) = 2x/3, MSE = (1/3)².
  const KrrModel m = fit(make(KernelFamily::linear_inner, 1), WeightVector::ones(1), x, y, 1.0);
  CHECK(test_mse(m, x, y) == doctest::Approx(1.0 / 9.0).epsilon(1e-13));
  CHECK(test_mse(fit(make(KernelFamily::linear_inner, 1), WeightVector::ones(1), x, y, 0.0), x, y) < 1e-12);
  CHECK_THROWS_AS(test_mse(m, x, Vector::Zero(3)), DimensionMismatch);
  CHECK_THROWS_AS(predict(m, Matrix::Zero(2, 2)), DimensionMismatch);
  CHECK_THROWS_AS(fit(make(KernelFamily::linear_inner, 1), WeightVector::ones(1), x, y, -1.0), ConfigError);
  CHECK_THROWS_AS(fit(make(KernelFamily::linear_inner, 1), WeightVector::ones(1), x, Vector::Zero(3), 1.0),
                  DimensionMismatch);
}
