#pragma once

#include "irkm/krr.hpp"

namespace irkm {

/// (1/n) Σ_i [∇f̂(x_i)]^⊙2 over the rows of x_eval. No safeguard.
Vector empirical_sq_gradient_weights(const KrrModel& model, const Matrix& x_eval);

/// D_j(w) = βᵀ ∂K_w(X,X)/∂w_j β for every j, without the 1/n factor.
/// Requires a model fitted with a WeightVector.
Vector dn_vector(const KrrModel& model);

/// Average gradient outer product (1/n) Σ_i ∇f̂(x_i)∇f̂(x_i)ᵀ.
SymmetricMatrix agop(const KrrModel& model, const Matrix& x_eval);

/// D(M)_{ij} = βᵀ ∂K_M(X,X)/∂M_{ij} β. Accepts either weight kind; a
/// WeightVector is treated as Diag(w).
SymmetricMatrix dn_matrix(const KrrModel& model);

/// d·(v + ε·1)/‖v + ε·1‖₁.
WeightVector safeguard_normalize(const Vector& v, double eps_s);

/// (1 − α)·w1 + α·w2.
WeightVector mix(const WeightVector& w1, const WeightVector& w2, double alpha);

/// d·(M + εI)/tr(M + εI).
WeightMatrix safeguard_normalize_matrix(const SymmetricMatrix& m, double eps_s);

WeightMatrix mix_matrix(const WeightMatrix& m1, const WeightMatrix& m2, double alpha);

}  // namespace irkm
