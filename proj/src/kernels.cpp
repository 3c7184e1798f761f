#include "irkm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace irkm {

namespace {

constexpr std::string_view kFamilyNames[] = {"laplacian_radial", "gaussian_radial",
                                             "exponential_inner", "polynomial_inner",
                                             "linear_inner"};

void require_cols(const Matrix& x, Eigen::Index d, const char* what) {
  if (x.cols() != d) {
    throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(d) +
                            " columns, got " + std::to_string(x.cols()));
  }
}

void require_spec_dim(const KernelSpec& spec, const Weight& w) {
  if (weight_dim(w) != spec.dim) {
    throw DimensionMismatch("weight dimension " + std::to_string(weight_dim(w)) +
                            " does not match kernel dimension " + std::to_string(spec.dim));
  }
}

bool same_rows(const Matrix& x, const Matrix& z) {
  return &x == &z || (x.rows() == z.rows() && x.cols() == z.cols() && x == z);
}

// P entry from a distance (radial) or normalized inner product (inner).
double slope_entry(const KernelSpec& spec, double arg) {
  if (!spec.is_radial()) return spec.profile_derivative(arg) / static_cast<double>(spec.dim);
  if (spec.family == KernelFamily::gaussian_radial) {
    return -spec.profile(arg) / (spec.bandwidth * spec.bandwidth);
  }
  // Laplacian: k'(r)/r is unbounded at r = 0; the self-pair subgradient is 0.
  if (arg == 0.0) return 0.0;
  return spec.profile_derivative(arg) / arg;
}

void mirror_upper(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = i + 1; k < m.cols(); ++k) m(k, i) = m(i, k);
  }
}

}  // namespace

std::string_view to_string(KernelFamily family) {
  return kFamilyNames[static_cast<int>(family)];
}

KernelFamily kernel_family_from_string(std::string_view name) {
  for (int i = 0; i < 5; ++i) {
    if (kFamilyNames[i] == name) return static_cast<KernelFamily>(i);
  }
  throw ConfigError("kernel.family", "unknown kernel family '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
  if (dim < 1) throw ConfigError("kernel.dim", "ambient dimension must be >= 1");
  if (is_radial() && !(bandwidth > 0.0 && std::isfinite(bandwidth))) {
    throw ConfigError("kernel.sigma", "bandwidth must be positive");
  }
  if (family == KernelFamily::exponential_inner && !(scale > 0.0)) {
    throw ConfigError("kernel.scale", "scale must be positive");
  }
  if (family == KernelFamily::polynomial_inner) {
    if (degree < 1) throw ConfigError("kernel.degree", "degree must be >= 1");
    if (offset < 0.0) throw ConfigError("kernel.offset", "offset must be >= 0");
  }
}

double KernelSpec::profile(double arg) const {
  switch (family) {
    case KernelFamily::laplacian_radial:
      return std::exp(-arg / bandwidth);
    case KernelFamily::gaussian_radial:
      return std::exp(-arg * arg / (2.0 * bandwidth * bandwidth));
    case KernelFamily::exponential_inner:
      return std::exp(scale * arg);
    case KernelFamily::polynomial_inner:
      return std::pow(offset + arg, degree);
    case KernelFamily::linear_inner:
      return arg;
  }
  return 0.0;
}

double KernelSpec::profile_derivative(double arg) const {
  switch (family) {
    case KernelFamily::laplacian_radial:
      return -std::exp(-arg / bandwidth) / bandwidth;
    case KernelFamily::gaussian_radial:
      return -arg / (bandwidth * bandwidth) * std::exp(-arg * arg / (2.0 * bandwidth * bandwidth));
    case KernelFamily::exponential_inner:
      return scale * std::exp(scale * arg);
    case KernelFamily::polynomial_inner:
      return degree * std::pow(offset + arg, degree - 1);
    case KernelFamily::linear_inner:
      return 1.0;
  }
  return 0.0;
}

WeightVector::WeightVector(Vector w) : w_(std::move(w)) {
  if (w_.size() == 0) throw DimensionMismatch("WeightVector: empty");
  for (Eigen::Index i = 0; i < w_.size(); ++i) {
    if (!(w_(i) >= 0.0) || !std::isfinite(w_(i))) {
      throw NonnegViolation("WeightVector: entry " + std::to_string(i) + " is negative or not finite");
    }
  }
  sqrt_w_ = w_.cwiseSqrt();
}

WeightMatrix::WeightMatrix(SymmetricMatrix m) : m_(std::move(m)), sqrt_m_(psd_sqrt(m_)) {
  if (m_.dim() == 0) throw DimensionMismatch("WeightMatrix: empty");
}

Eigen::Index weight_dim(const Weight& weight) {
  return std::visit([](const auto& w) { return w.dim(); }, weight);
}

namespace detail {

Matrix apply_weight(const Matrix& x, const Weight& w) {
  if (x.cols() != weight_dim(w)) {
    throw DimensionMismatch("input has " + std::to_string(x.cols()) + " columns, weight has dimension " +
                            std::to_string(weight_dim(w)));
  }
  return right_multiply_sqrt(x, w);
}

Matrix right_multiply_sqrt(const Matrix& rows, const Weight& w) {
  if (const auto* vec = std::get_if<WeightVector>(&w)) {
    return rows * vec->sqrt_values().asDiagonal();
  }
  return rows * std::get<WeightMatrix>(w).sqrt_matrix().matrix();
}

Matrix squared_distances(const Matrix& u, const Matrix& v, bool symmetric) {
  const Vector un = u.rowwise().squaredNorm();
  const Vector vn = v.rowwise().squaredNorm();
  Matrix sq = -2.0 * (u * v.transpose());
  sq.colwise() += un;
  sq.rowwise() += vn.transpose();
  for (Eigen::Index i = 0; i < sq.rows(); ++i) {
    for (Eigen::Index k = symmetric ? i : 0; k < sq.cols(); ++k) {
      // Cancellation makes tiny entries unreliable; recompute them directly so
      // coincident points give exact zeros.
      if (sq(i, k) <= 1e-10 * (un(i) + vn(k))) sq(i, k) = (u.row(i) - v.row(k)).squaredNorm();
      if (symmetric) sq(k, i) = sq(i, k);
    }
  }
  return sq;
}

Matrix transformed_gram(const KernelSpec& spec, const Matrix& u, const Matrix& v, bool symmetric) {
  Matrix k;
  if (spec.is_radial()) {
    k = squared_distances(u, v, symmetric).unaryExpr([&](double s) { return spec.profile(std::sqrt(s)); });
  } else {
    const double d = static_cast<double>(spec.dim);
    k = (u * v.transpose()).unaryExpr([&](double ip) { return spec.profile(ip / d); });
  }
  if (symmetric) mirror_upper(k);
  return k;
}

Matrix transformed_slope(const KernelSpec& spec, const Matrix& u, const Matrix& v, bool symmetric) {
  Matrix p;
  if (spec.is_radial()) {
    p = squared_distances(u, v, symmetric).unaryExpr([&](double s) { return slope_entry(spec, std::sqrt(s)); });
  } else {
    const double d = static_cast<double>(spec.dim);
    p = (u * v.transpose()).unaryExpr([&](double ip) { return slope_entry(spec, ip / d); });
  }
  if (symmetric) mirror_upper(p);
  return p;
}

}  // namespace detail

double kernel_value(const KernelSpec& spec, const Vector& x, const Vector& z, const Weight& w) {
  require_spec_dim(spec, w);
  if (x.size() != spec.dim || z.size() != spec.dim) throw DimensionMismatch("kernel_value: input length");
  const Matrix u = detail::apply_weight(x.transpose(), w);
  const Matrix v = detail::apply_weight(z.transpose(), w);
  return detail::transformed_gram(spec, u, v, false)(0, 0);
}

Vector kernel_input_gradient(const KernelSpec& spec, const Vector& x, const Vector& z,
                             const Weight& w) {
  require_spec_dim(spec, w);
  if (x.size() != spec.dim || z.size() != spec.dim) {
    throw DimensionMismatch("kernel_input_gradient: input length");
  }
  const Matrix u = detail::apply_weight(x.transpose(), w);
  const Matrix v = detail::apply_weight(z.transpose(), w);
  const double p = detail::transformed_slope(spec, u, v, false)(0, 0);
  const Matrix direction = spec.is_radial() ? Matrix(u - v) : v;
  return (p * detail::right_multiply_sqrt(direction, w)).transpose();
}

Matrix gram(const KernelSpec& spec, const Matrix& x, const Matrix& z, const Weight& w) {
  require_spec_dim(spec, w);
  require_cols(x, spec.dim, "gram");
  require_cols(z, spec.dim, "gram");
  const bool symmetric = same_rows(x, z);
  const Matrix u = detail::apply_weight(x, w);
  if (symmetric) return detail::transformed_gram(spec, u, u, true);
  return detail::transformed_gram(spec, u, detail::apply_weight(z, w), false);
}

SymmetricMatrix weight_derivative_gram(const KernelSpec& spec, const Matrix& x,
                                       const WeightVector& w, Eigen::Index j) {
  require_spec_dim(spec, w);
  require_cols(x, spec.dim, "weight_derivative_gram");
  if (j < 0 || j >= spec.dim) {
    throw IndexOutOfRange("weight_derivative_gram: coordinate " + std::to_string(j) + " outside [0, " +
                          std::to_string(spec.dim) + ")");
  }
  const Matrix u = detail::apply_weight(x, w);
  Matrix p = detail::transformed_slope(spec, u, u, true);
  const Vector col = x.col(j);
  if (spec.is_radial()) {
    for (Eigen::Index a = 0; a < p.rows(); ++a) {
      for (Eigen::Index b = 0; b < p.cols(); ++b) {
        const double delta = col(a) - col(b);
        p(a, b) *= 0.5 * delta * delta;
      }
    }
  } else {
    p = col.asDiagonal() * p * col.asDiagonal();
  }
  return SymmetricMatrix(p);
}

SymmetricMatrix matrix_weight_derivative(const KernelSpec& spec, const Matrix& x,
                                         const WeightMatrix& m, Eigen::Index i, Eigen::Index j) {
  require_spec_dim(spec, m);
  require_cols(x, spec.dim, "matrix_weight_derivative");
  if (i < 0 || j < 0 || i >= spec.dim || j >= spec.dim) {
    throw IndexOutOfRange("matrix_weight_derivative: index outside [0, " + std::to_string(spec.dim) + ")");
  }
  const Matrix u = detail::apply_weight(x, m);
  Matrix p = detail::transformed_slope(spec, u, u, true);
  const Vector xi = x.col(i);
  const Vector xj = x.col(j);
  for (Eigen::Index a = 0; a < p.rows(); ++a) {
    for (Eigen::Index b = 0; b < p.cols(); ++b) {
      if (spec.is_radial()) {
        p(a, b) *= 0.5 * (xi(a) - xi(b)) * (xj(a) - xj(b));
      } else {
        p(a, b) *= 0.5 * (xi(a) * xj(b) + xj(a) * xi(b));
      }
    }
  }
  return SymmetricMatrix(p);
}

double median_bandwidth(const Matrix& x, const Weight& w, Eigen::Index max_points) {
  const Eigen::Index n = std::min<Eigen::Index>(x.rows(), max_points);
  if (n < 2) return 1.0;
  const Matrix u = detail::apply_weight(x.topRows(n), w);
  const Matrix sq = detail::squared_distances(u, u, true);
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) dist.push_back(std::sqrt(sq(a, b)));
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double median = dist[mid];
  if (dist.size() % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  return median > 0.0 ? median : 1.0;
}

}  // namespace irkm
