#include <doctest.h>

#include <cmath>

#include "irkm/data_io.hpp"
#include "irkm/kernels.hpp"
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

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

const KernelFamily kAll[] = {KernelFamily::laplacian_radial, KernelFamily::gaussian_radial,
                             KernelFamily::exponential_inner, KernelFamily::polynomial_inner,
                             KernelFamily::linear_inner};

}  // namespace

TEST_CASE("family names round-trip and unknown names are config errors") {
  for (KernelFamily f : kAll) CHECK(kernel_family_from_string(to_string(f)) == f);
  CHECK_THROWS_AS(kernel_family_from_string("cosine"), ConfigError);
}

TEST_CASE("spec validation") {
  KernelSpec s = make(KernelFamily::gaussian_radial, 3, 0.0);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = make(KernelFamily::polynomial_inner, 3);
  s.degree = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = make(KernelFamily::exponential_inner, 3);
  s.scale = -1;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_AS(WeightVector(vec({1.0, -0.1})), NonnegViolation);
}

TEST_CASE("kernel_value examples") {
  const WeightVector w(vec({0.3, 2.0}));
  const Vector x = vec({0.4, -1.2});
  CHECK(kernel_value(make(KernelFamily::laplacian_radial, 2), x, x, w) == 1.0);

  const Vector z = vec({1.0, 0.5});
  for (KernelFamily f : kAll) {
    const KernelSpec s = make(f, 2, 1.7);
    const double weighted = kernel_value(s, x, z, WeightVector::ones(2));
    const double plain = f == KernelFamily::laplacian_radial  ? std::exp(-(x - z).norm() / 1.7)
                         : f == KernelFamily::gaussian_radial ? std::exp(-(x - z).squaredNorm() / (2 * 1.7 * 1.7))
                         : f == KernelFamily::exponential_inner ? std::exp(x.dot(z) / 2)
                         : f == KernelFamily::polynomial_inner  ? std::pow(1.0 + x.dot(z) / 2, 2)
                                                                : x.dot(z) / 2;
    CHECK(weighted == doctest::Approx(plain).epsilon(1e-14));
  }
  CHECK(kernel_value(make(KernelFamily::linear_inner, 2), vec({1, 1}), vec({1, -1}), WeightVector::ones(2)) == 0.0);
  CHECK_THROWS_AS(kernel_value(make(KernelFamily::linear_inner, 3), x, z, w), DimensionMismatch);
}

TEST_CASE("gram examples") {
  Matrix one(1, 3);
  one << 0.2, -0.7, 1.1;
  for (KernelFamily f : {KernelFamily::laplacian_radial, KernelFamily::gaussian_radial}) {
    CHECK(gram(make(f, 3), one, one, WeightVector::ones(3))(0, 0) == 1.0);
  }
  const Matrix g = gram(make(KernelFamily::linear_inner, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                        WeightVector::ones(2));
  CHECK((g - 0.5 * Matrix::Identity(2, 2)).norm() == 0.0);

  Matrix x(1, 2), z(1, 2);
  x << 1, 1;
  z << 0, 0;  // distance √2
  CHECK(gram(make(KernelFamily::gaussian_radial, 2), x, z, WeightVector::ones(2))(0, 0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("gram(X,X) is exactly symmetric and PSD up to rounding") {
  RngStream rng(4, 4);
  const Matrix x = sample_gaussian(60, 7, rng);
  const WeightVector w(sample_gaussian(1, 7, rng).row(0).transpose().cwiseAbs());
  for (KernelFamily f : {KernelFamily::laplacian_radial, KernelFamily::gaussian_radial,
                         KernelFamily::exponential_inner, KernelFamily::polynomial_inner}) {
    const Matrix k = gram(make(f, 7, 2.0), x, x, w);
    CHECK(k == k.transpose());
    CHECK(sorted_eigenvalues(SymmetricMatrix(k)).minCoeff() >= -1e-8 * 60);
  }
}

TEST_CASE("matrix weights: Diag(w) and rotation identities") {
  RngStream rng(5, 5);
  const Matrix x = sample_gaussian(10, 4, rng);
  const Matrix z = sample_gaussian(8, 4, rng);
  const Vector wv = vec({0.5, 1.5, 0.2, 2.0});
  const Matrix u = random_rotation(4, rng);
  const WeightMatrix rotated(SymmetricMatrix(u.transpose() * wv.asDiagonal() * u));
  for (KernelFamily f : kAll) {
    const KernelSpec s = make(f, 4, 1.3);
    CHECK((gram(s, x, z, WeightMatrix::identity(4)) - gram(s, x, z, WeightVector::ones(4))).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK((gram(s, x, z, WeightMatrix(SymmetricMatrix::diagonal(wv))) - gram(s, x, z, WeightVector(wv)))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    // K_M(x, z) = K_w(Ux, Uz) with M = UᵀDiag(w)U.
    const Matrix lhs = gram(s, x, z, rotated);
    const Matrix rhs = gram(s, x * u.transpose(), z * u.transpose(), WeightVector(wv));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("kernel_input_gradient examples") {
  const Vector x = vec({1.0, 0.0}), z = vec({0.0, 0.0});
  const Vector g = kernel_input_gradient(make(KernelFamily::gaussian_radial, 2), x, z, WeightVector::ones(2));
  CHECK(g(0) == doctest::Approx(-std::exp(-0.5)).epsilon(1e-14));
  CHECK(g(1) == 0.0);
  for (KernelFamily f : {KernelFamily::laplacian_radial, KernelFamily::gaussian_radial}) {
    CHECK(kernel_input_gradient(make(f, 2), x, x, WeightVector::ones(2)).norm() == 0.0);
  }
  const Vector zz = vec({0.3, -2.0});
  CHECK((kernel_input_gradient(make(KernelFamily::linear_inner, 2), x, zz, WeightVector::ones(2)) - zz / 2.0)
            .norm() < 1e-15);
}

TEST_CASE("kernel_input_gradient matches central differences") {
  RngStream rng(6, 6);
  const WeightVector w(vec({0.7, 1.3, 0.4, 1.0, 2.2}));
  for (KernelFamily f : kAll) {
    const KernelSpec s = make(f, 5, 1.9);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector x = sample_gaussian(1, 5, rng).row(0).transpose();
      const Vector z = sample_gaussian(1, 5, rng).row(0).transpose();
      Vector fd(5);
      for (int j = 0; j < 5; ++j) {
        Vector xp = x, xm = x;
        xp(j) += 1e-5;
        xm(j) -= 1e-5;
        fd(j) = (kernel_value(s, xp, z, w) - kernel_value(s, xm, z, w)) / 2e-5;
      }
      const Vector g = kernel_input_gradient(s, x, z, w);
      CHECK((g - fd).norm() <= 1e-5 * std::max(fd.norm(), 1e-3));
    }
  }
}

TEST_CASE("weight_derivative_gram examples") {
  Matrix same(3, 2);
  same << 1, 2, 1, 2, 1, 2;
  CHECK(weight_derivative_gram(make(KernelFamily::laplacian_radial, 2), same, WeightVector::ones(2), 0)
            .matrix()
            .norm() == 0.0);

  RngStream rng(7, 7);
  const Matrix x = sample_gaussian(6, 3, rng);
  const Matrix lin = weight_derivative_gram(make(KernelFamily::linear_inner, 3), x, WeightVector::ones(3), 1).matrix();
  CHECK((lin - x.col(1) * x.col(1).transpose() / 3.0).norm() < 1e-14);

  Matrix one(1, 3);
  one << 0.5, -1.0, 2.0;
  const Vector w = vec({1.0, 0.5, 2.0});
  const double k = std::exp((w.array() * one.row(0).transpose().array().square()).sum() / 3.0);
  const double got =
      weight_derivative_gram(make(KernelFamily::exponential_inner, 3), one, WeightVector(w), 2).matrix()(0, 0);
  CHECK(got == doctest::Approx(4.0 * k / 3.0).epsilon(1e-13));

  CHECK_THROWS_AS(weight_derivative_gram(make(KernelFamily::linear_inner, 3), x, WeightVector::ones(3), 3),
                  IndexOutOfRange);
}

TEST_CASE("weight_derivative_gram matches finite differences in w") {
  RngStream rng(8, 8);
  const Matrix x = sample_gaussian(15, 4, rng);
  const Vector w = vec({0.8, 1.2, 0.5, 1.7});
  for (KernelFamily f : kAll) {
    const KernelSpec s = make(f, 4, 1.5);
    for (Eigen::Index j = 0; j < 4; ++j) {
      const Matrix fd = oracle::finite_difference_weight_derivative(s, x, w, j);
      const Matrix an = weight_derivative_gram(s, x, WeightVector(w), j).matrix();
      const Matrix scale = fd.cwiseAbs().cwiseMax(1e-3 * fd.cwiseAbs().maxCoeff());
      CHECK(((an - fd).cwiseAbs().array() / scale.array()).maxCoeff() <= 1e-4);
    }
  }
}

TEST_CASE("inner-product weight derivatives are PSD") {
  RngStream rng(9, 9);
  const Matrix x = sample_gaussian(30, 5, rng);
  for (KernelFamily f : {KernelFamily::exponential_inner, KernelFamily::polynomial_inner, KernelFamily::linear_inner}) {
    for (Eigen::Index j = 0; j < 5; ++j) {
      const SymmetricMatrix a = weight_derivative_gram(make(f, 5), x, WeightVector::ones(5), j);
      CHECK(sorted_eigenvalues(a).minCoeff() >= -1e-8 * 30);
    }
  }
}

TEST_CASE("matrix_weight_derivative examples and consistency") {
  RngStream rng(10, 10);
  const Matrix x = sample_gaussian(7, 3, rng);
  const Matrix lin =
      matrix_weight_derivative(make(KernelFamily::linear_inner, 3), x, WeightMatrix::identity(3), 0, 2).matrix();
  const Matrix expect = (x.col(0) * x.col(2).transpose() + x.col(2) * x.col(0).transpose()) / 6.0;
  CHECK((lin - expect).norm() < 1e-14);

  const Vector w = vec({0.6, 1.4, 1.0});
  for (KernelFamily f : kAll) {
    const KernelSpec s = make(f, 3, 1.2);
    const WeightMatrix m(SymmetricMatrix::diagonal(w));
    for (Eigen::Index j = 0; j < 3; ++j) {
      CHECK((matrix_weight_derivative(s, x, m, j, j).matrix() - weight_derivative_gram(s, x, WeightVector(w), j).matrix())
                .cwiseAbs()
                .maxCoeff() < 1e-10);
    }
    CHECK((matrix_weight_derivative(s, x, WeightMatrix::identity(3), 0, 1).matrix() -
           matrix_weight_derivative(s, x, WeightMatrix::identity(3), 1, 0).matrix())
              .norm() == 0.0);
  }
}

TEST_CASE("median_bandwidth") {
  Matrix x(3, 1);
  x << 0, 1, 3;  // distances 1, 2, 3
  CHECK(median_bandwidth(x, WeightVector::ones(1)) == doctest::Approx(2.0));
  CHECK(median_bandwidth(x, WeightVector(vec({4.0}))) == doctest::Approx(4.0));
  CHECK(median_bandwidth(Matrix::Ones(5, 2), WeightVector::ones(2)) == 1.0);
}
