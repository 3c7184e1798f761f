#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "irkm/numerics.hpp"

namespace irkm {

/// Sorted, duplicate-free list of 0-based coordinate indices.
using Subset = std::vector<int>;

/// Multilinear polynomial Σ_S b_S Π_{i∈S} x_i in the Fourier-Walsh basis.
/// No zero coefficients are stored.
class FourierPolynomial {
 public:
  explicit FourierPolynomial(int dim = 1);
  FourierPolynomial(int dim, const std::map<Subset, double>& terms);

  /// Adds c·x^S (accumulating onto an existing term). S is sorted here;
  /// repeated indices or indices outside [0, dim) are rejected.
  void add_term(Subset s, double coefficient);

  int dim() const { return dim_; }
  const std::map<Subset, double>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  int degree() const;
  /// b_S, zero when absent.
  double coefficient(const Subset& s) const;

  bool operator==(const FourierPolynomial&) const = default;

 private:
  double coefficient_or_zero(const Subset& s) const;

  int dim_;
  std::map<Subset, double> terms_;
};

/// Text form "c * x1*x2 + x3 - c" (variables 1-based).
std::string to_string(const FourierPolynomial& f);

/// Valid for any real x, not only ±1.
double eval_fourier(const FourierPolynomial& f, const Vector& x);
Vector eval_fourier(const FourierPolynomial& f, const Matrix& x);

/// ∇f at x (f is multilinear, so ∂_j drops x_j from every term containing j).
Vector gradient_fourier(const FourierPolynomial& f, const Vector& x);

/// Terms with |S| ≤ p.
FourierPolynomial truncate(const FourierPolynomial& f, int p);
/// Terms with |S| == p.
FourierPolynomial slice(const FourierPolynomial& f, int p);

/// E(∂_j f_{≤p})² = Σ_{S∋j, |S|≤p} b_S². No p means no truncation.
double coordinate_weight(const FourierPolynomial& f, int j, std::optional<int> p = std::nullopt);

/// D_S f: supersets T ⊇ S become T \ S, every other term vanishes.
FourierPolynomial discrete_derivative(const FourierPolynomial& f, const Subset& s);

/// E[D_S f], which equals b_S.
double discrete_derivative_expectation(const FourierPolynomial& f, const Subset& s);

/// Smallest k such that the non-constant terms can be ordered with each one
/// adding at most k coordinates not covered by its predecessors. At most 20
/// non-constant terms.
int leap_complexity(const FourierPolynomial& f);

/// Largest sub-polynomial with leap complexity ≤ k.
FourierPolynomial max_leap_component(const FourierPolynomial& f, int k);

/// Orthonormal (probabilists') Hermite polynomial h_k at x.
double hermite_eval(int k, double x);
/// Π_i h_{α_i}(x_i).
double hermite_eval_multi(const std::vector<int>& alpha, const Vector& x);

/// Σ_α b_α h_α(x) over multi-indices α ∈ ℕ^d.
class HermitePolynomial {
 public:
  explicit HermitePolynomial(int dim);

  void add_term(std::vector<int> alpha, double coefficient);

  int dim() const { return dim_; }
  const std::map<std::vector<int>, double>& terms() const { return terms_; }
  double coefficient(const std::vector<int>& alpha) const;
  double eval(const Vector& x) const;

 private:
  double coefficient_or_zero(const std::vector<int>& alpha) const;

  int dim_;
  std::map<std::vector<int>, double> terms_;
};

/// E(∂_r f_{≤p})² for p ∈ {1, 2}:
///   p = 1: b_{e_r}²
///   p = 2: b_{e_r}² + 2 b_{2e_r}² + Σ_{j≠r} b_{e_j+e_r}²
double hermite_coordinate_weight(const HermitePolynomial& f, int r, int p);

}  // namespace irkm
