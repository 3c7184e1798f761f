#pragma once

// Reference computations used only for verification. Each one takes a
// different route from the production code it is checked against:
// enumeration instead of coefficient sums, finite differences instead of
// analytic derivatives, permutations instead of state search.

#include <functional>

#include "irkm/data_io.hpp"
#include "irkm/krr.hpp"
#include "irkm/orthopoly.hpp"

namespace irkm::oracle {

/// Calls visit(x) for every x ∈ {±1}^d (d ≤ 20).
void for_each_vertex(int d, const std::function<void(const Vector&)>& visit);

/// E over {±1}^d of [(f(x^{j→1}) − f(x^{j→−1}))/2]² with f truncated to
/// degree p first (p < 0: no truncation). Truncation is done by enumerating
/// Fourier coefficients ⟨f, x^S⟩, not by reading stored terms.
double enumerated_coordinate_weight(const FourierPolynomial& f, int j, int p = -1);

/// ⟨f, x^S⟩ over the full hypercube.
double enumerated_fourier_coefficient(const FourierPolynomial& f, const Subset& s);

/// E[f²] over the full hypercube.
double enumerated_second_moment(const FourierPolynomial& f);

/// E[D_S f] with D_S applied as iterated finite differences on function values.
double enumerated_discrete_derivative_mean(const FourierPolynomial& f, const Subset& s);

/// Minimum over all orderings of the non-constant terms of the largest
/// number of new coordinates introduced by a single term (m ≤ 9).
int brute_force_leap(const FourierPolynomial& f);

/// True when `component` is a sub-polynomial of f with brute-force leap ≤ k
/// and adding any one missing term of f pushes the brute-force leap above k.
/// (If a larger admissible sub-polynomial existed, its first term outside the
/// component could be appended on its own, so single-term checks suffice.)
bool brute_force_is_maximal(const FourierPolynomial& f, const FourierPolynomial& component, int k);

/// Central differences of f̂ with step h, one row per point of z.
Matrix finite_difference_gradient(const KrrModel& model, const Matrix& z, double h = 1e-5);

/// Central difference of K_w(X,X) in w_j.
Matrix finite_difference_weight_derivative(const KernelSpec& spec, const Matrix& x, const Vector& w,
                                           Eigen::Index j, double h = 1e-6);

/// Σ_ab β_a β_b A_ab by explicit double loop.
double explicit_quadratic_form(const Vector& beta, const Matrix& a);

/// Closed-form orthonormal Hermite h_k for k ≤ 5 (no recurrence).
double closed_form_hermite(int k, double x);

/// Hermite Gram entry ⟨h_j, h_k⟩ under N(0,1) by Monte Carlo (j, k ≤ 5);
/// returns {mean, standard error}.
std::pair<double, double> monte_carlo_hermite_inner(int j, int k, int samples, RngStream& rng);

/// E(∂_r f_{≤2})² by Monte Carlo using closed-form Hermite derivatives;
/// terms of total degree > 2 are dropped.
std::pair<double, double> monte_carlo_hermite_weight(const HermitePolynomial& f, int r, int samples,
                                                     RngStream& rng);

/// Random sparse Fourier polynomial with the given number of terms.
FourierPolynomial random_sparse_polynomial(int d, int terms, int max_degree, RngStream& rng);

}  // namespace irkm::oracle
