#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "irkm/data_io.hpp"
#include "irkm/estimators.hpp"

namespace irkm {

struct TrainConfig {
  double alpha = 0.5;
  /// Safeguard ε_s; unset means d^(-3/4).
  std::optional<double> eps_s;
  int steps = 20;
  double lambda = 1e-3;
  KernelSpec kernel;
  /// Median-heuristic bandwidth, recomputed every step under the current weights.
  bool auto_bandwidth = true;
  Eigen::Index n_per_step = 100;
  bool resample = true;
  /// Stop after this many consecutive steps without a test-MSE improvement; 0 disables.
  int early_stop_patience = 3;
  std::uint64_t seed = 0;
  /// Eigenspace rank tracked by rfm_run.
  int top_k = 4;

  void validate() const;
  double safeguard() const;
};

struct StepRecord {
  int step = 0;
  double test_mse = 0.0;
  /// Weight vector used for this step's fit (IRKM), or the eigenvalues of M (RFM), nonincreasing.
  Vector weights;
  /// Pre-safeguard estimators: (1/n)Σ∇f̂^⊙2 and (1/n)D(w)⊙w. For RFM, eigenvalues
  /// of the AGOP and of (1/n)√M D(M) √M.
  Vector w1_raw;
  Vector w2_raw;
  double sigma = 0.0;
  double jitter = 0.0;
  double wall_ms = 0.0;
  /// RFM with a ground-truth AGOP only.
  std::optional<double> agop_error;
  std::optional<double> principal_angle;
};

struct TrainTrace {
  std::vector<StepRecord> steps;
  int best_step = 0;  // 1-based
  double best_test_mse = 0.0;

  const StepRecord& best() const { return steps.at(static_cast<std::size_t>(best_step - 1)); }
};

struct TrainResult {
  KrrModel model;  // best test-MSE model
  TrainTrace trace;
};

/// Iteratively reweighted kernel machine with vector weights.
TrainResult irkm_run(const TrainConfig& config, DataSource& source, const Dataset& test_set);

/// Matrix-weighted variant driven by the AGOP and the DN matrix. When
/// truth_agop is given, each step records the relative AGOP error and the
/// largest principal angle between top-k eigenspaces.
TrainResult rfm_run(const TrainConfig& config, DataSource& source, const Dataset& test_set,
                    const std::optional<SymmetricMatrix>& truth_agop = std::nullopt);

struct BaselineResult {
  KrrModel model;
  double test_mse;
  double sigma;
};

/// Single unweighted fit.
BaselineResult krr_baseline(const TrainConfig& config, const Dataset& train, const Dataset& test_set);

}  // namespace irkm
