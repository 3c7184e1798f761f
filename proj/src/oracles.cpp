#include "irkm/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace irkm::oracle {

namespace {

// Vertex with bit i of `mask` set ↦ x_i = −1.
Vector vertex(int d, std::uint32_t mask) {
  Vector x(d);
  for (int i = 0; i < d; ++i) x(i) = (mask >> i) & 1U ? -1.0 : 1.0;
  return x;
}

void require_small(int d) {
  if (d < 1 || d > 20) throw DimensionMismatch("oracle enumeration needs 1 <= d <= 20");
}

// f at every vertex, indexed by mask.
std::vector<double> value_table(const FourierPolynomial& f) {
  require_small(f.dim());
  const std::uint32_t count = 1U << f.dim();
  std::vector<double> table(count);
  for (std::uint32_t m = 0; m < count; ++m) table[m] = eval_fourier(f, vertex(f.dim(), m));
  return table;
}

double chi(std::uint32_t subset_mask, std::uint32_t point_mask) {
  return std::popcount(subset_mask & point_mask) % 2 ? -1.0 : 1.0;
}

// Values of f_{≤p}: all 2^d coefficients from averaging f·χ_S, then
// resynthesis from the low-degree ones.
std::vector<double> truncated_table(const FourierPolynomial& f, int p) {
  std::vector<double> values = value_table(f);
  if (p < 0) return values;
  const std::uint32_t count = static_cast<std::uint32_t>(values.size());
  std::vector<double> coeff(count, 0.0);
  for (std::uint32_t s = 0; s < count; ++s) {
    if (std::popcount(s) > p) continue;
    double acc = 0.0;
    for (std::uint32_t m = 0; m < count; ++m) acc += values[m] * chi(s, m);
    coeff[s] = acc / count;
  }
  std::vector<double> out(count, 0.0);
  for (std::uint32_t m = 0; m < count; ++m) {
    double acc = 0.0;
    for (std::uint32_t s = 0; s < count; ++s) {
      if (coeff[s] != 0.0) acc += coeff[s] * chi(s, m);
    }
    out[m] = acc;
  }
  return out;
}

std::uint32_t to_mask(const Subset& s) {
  std::uint32_t mask = 0;
  for (int i : s) mask |= 1U << i;
  return mask;
}

// Largest count of new coordinates along the given term order.
int leap_along(const std::vector<std::uint32_t>& order) {
  std::uint32_t covered = 0;
  int worst = 0;
  for (std::uint32_t t : order) {
    worst = std::max(worst, std::popcount(t & ~covered));
    covered |= t;
  }
  return worst;
}

int brute_leap_masks(std::vector<std::uint32_t> terms) {
  if (terms.empty()) return 0;
  if (terms.size() > 9) throw TooManyTerms("brute-force leap limited to 9 terms");
  std::sort(terms.begin(), terms.end());
  int best = 32;
  do {
    best = std::min(best, leap_along(terms));
  } while (std::next_permutation(terms.begin(), terms.end()));
  return best;
}

std::vector<std::uint32_t> nonconstant_masks(const FourierPolynomial& f) {
  std::vector<std::uint32_t> out;
  for (const auto& [s, c] : f.terms()) {
    if (!s.empty()) out.push_back(to_mask(s));
  }
  return out;
}

std::pair<double, double> mean_and_stderr(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

double closed_form_hermite_derivative(int k, double x) {
  switch (k) {
    case 0: return 0.0;
    case 1: return 1.0;
    case 2: return 2.0 * x / std::sqrt(2.0);
    case 3: return (3.0 * x * x - 3.0) / std::sqrt(6.0);
    case 4: return (4.0 * x * x * x - 12.0 * x) / std::sqrt(24.0);
    case 5: return (5.0 * x * x * x * x - 30.0 * x * x + 15.0) / std::sqrt(120.0);
    default: throw Error("closed-form Hermite derivative limited to degree 5");
  }
}

}  // namespace

void for_each_vertex(int d, const std::function<void(const Vector&)>& visit) {
  require_small(d);
  for (std::uint32_t m = 0; m < (1U << d); ++m) visit(vertex(d, m));
}

double enumerated_coordinate_weight(const FourierPolynomial& f, int j, int p) {
  if (j < 0 || j >= f.dim()) throw IndexOutOfRange("oracle: coordinate out of range");
  const std::vector<double> g = truncated_table(f, p);
  const std::uint32_t bit = 1U << j;
  double acc = 0.0;
  for (std::uint32_t m = 0; m < g.size(); ++m) {
    // x_j = +1 has the bit clear.
    const double diff = (g[m & ~bit] - g[m | bit]) / 2.0;
    acc += diff * diff;
  }
  return acc / static_cast<double>(g.size());
}

double enumerated_fourier_coefficient(const FourierPolynomial& f, const Subset& s) {
  const std::vector<double> values = value_table(f);
  const std::uint32_t smask = to_mask(s);
  double acc = 0.0;
  for (std::uint32_t m = 0; m < values.size(); ++m) acc += values[m] * chi(smask, m);
  return acc / static_cast<double>(values.size());
}

double enumerated_second_moment(const FourierPolynomial& f) {
  const std::vector<double> values = value_table(f);
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return acc / static_cast<double>(values.size());
}

double enumerated_discrete_derivative_mean(const FourierPolynomial& f, const Subset& s) {
  std::vector<double> g = value_table(f);
  for (int j : s) {
    const std::uint32_t bit = 1U << j;
    std::vector<double> next(g.size());
    for (std::uint32_t m = 0; m < g.size(); ++m) next[m] = (g[m & ~bit] - g[m | bit]) / 2.0;
    g = std::move(next);
  }
  return std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
}

int brute_force_leap(const FourierPolynomial& f) { return brute_leap_masks(nonconstant_masks(f)); }

bool brute_force_is_maximal(const FourierPolynomial& f, const FourierPolynomial& component, int k) {
  for (const auto& [s, c] : component.terms()) {
    if (f.coefficient(s) != c) return false;
  }
  std::vector<std::uint32_t> kept = nonconstant_masks(component);
  if (brute_leap_masks(kept) > k) return false;
  for (const auto& [s, c] : f.terms()) {
    if (s.empty() || component.coefficient(s) != 0.0) continue;
    std::vector<std::uint32_t> grown = kept;
    grown.push_back(to_mask(s));
    if (brute_leap_masks(grown) <= k) return false;
  }
  return true;
}

Matrix finite_difference_gradient(const KrrModel& model, const Matrix& z, double h) {
  Matrix g(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    Matrix plus = z, minus = z;
    plus.col(j).array() += h;
    minus.col(j).array() -= h;
    g.col(j) = (predict(model, plus) - predict(model, minus)) / (2.0 * h);
  }
  return g;
}

Matrix finite_difference_weight_derivative(const KernelSpec& spec, const Matrix& x, const Vector& w,
                                           Eigen::Index j, double h) {
  Vector wp = w, wm = w;
  wp(j) += h;
  wm(j) -= h;
  if (wm(j) < 0.0) throw NonnegViolation("finite difference would leave the nonnegative orthant");
  return (gram(spec, x, x, WeightVector(wp)) - gram(spec, x, x, WeightVector(wm))) / (2.0 * h);
}

double explicit_quadratic_form(const Vector& beta, const Matrix& a) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) acc += beta(i) * beta(k) * a(i, k);
  }
  return acc;
}

double closed_form_hermite(int k, double x) {
  switch (k) {
    case 0: return 1.0;
    case 1: return x;
    case 2: return (x * x - 1.0) / std::sqrt(2.0);
    case 3: return (x * x * x - 3.0 * x) / std::sqrt(6.0);
    case 4: return (x * x * x * x - 6.0 * x * x + 3.0) / std::sqrt(24.0);
    case 5: return (x * x * x * x * x - 10.0 * x * x * x + 15.0 * x) / std::sqrt(120.0);
    default: throw Error("closed-form Hermite limited to degree 5");
  }
}

std::pair<double, double> monte_carlo_hermite_inner(int j, int k, int samples, RngStream& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(static_cast<std::size_t>(samples));
  for (double& s : v) {
    const double x = normal(rng);
    s = closed_form_hermite(j, x) * closed_form_hermite(k, x);
  }
  return mean_and_stderr(v);
}

std::pair<double, double> monte_carlo_hermite_weight(const HermitePolynomial& f, int r, int samples,
                                                     RngStream& rng) {
  std::normal_distribution<double> normal;
  const int d = f.dim();
  std::vector<double> v(static_cast<std::size_t>(samples));
  Vector x(d);
  for (double& s : v) {
    for (int i = 0; i < d; ++i) x(i) = normal(rng);
    double deriv = 0.0;
    for (const auto& [alpha, c] : f.terms()) {
      if (std::accumulate(alpha.begin(), alpha.end(), 0) > 2) continue;
      double term = c * closed_form_hermite_derivative(alpha[r], x(r));
      for (int i = 0; i < d && term != 0.0; ++i) {
        if (i != r) term *= closed_form_hermite(alpha[i], x(i));
      }
      deriv += term;
    }
    s = deriv * deriv;
  }
  return mean_and_stderr(v);
}

FourierPolynomial random_sparse_polynomial(int d, int terms, int max_degree, RngStream& rng) {
  std::uniform_int_distribution<int> degree(0, std::min(max_degree, d));
  std::uniform_real_distribution<double> coeff(0.25, 2.0);
  std::bernoulli_distribution negative(0.5);
  FourierPolynomial f(d);
  std::set<Subset> seen;
  for (int guard = 0; static_cast<int>(seen.size()) < terms && guard < 100 * terms; ++guard) {
    std::vector<int> idx(static_cast<std::size_t>(d));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    Subset s(idx.begin(), idx.begin() + degree(rng));
    std::sort(s.begin(), s.end());
    if (!seen.insert(s).second) continue;
    const double c = coeff(rng);
    f.add_term(s, negative(rng) ? -c : c);
  }
  return f;
}

}  // namespace irkm::oracle
