#include "irkm/trainers.hpp"

#include <chrono>
#include <cmath>

namespace irkm {

namespace {

using Clock = std::chrono::steady_clock;

KernelSpec calibrated(const TrainConfig& config, const Matrix& x, const Weight& weight) {
  KernelSpec spec = config.kernel;
  spec.dim = x.cols();
  if (config.auto_bandwidth && spec.is_radial()) spec.bandwidth = median_bandwidth(x, weight);
  return spec;
}

Dataset draw_batch(const TrainConfig& config, DataSource& source, int step) {
  Dataset batch = source.draw(config.resample ? static_cast<std::uint64_t>(step) : 1);
  if (batch.size() == 0) throw EmptyDataSource("data source returned an empty batch");
  if (batch.dim() != config.kernel.dim) {
    throw DimensionMismatch("data source dimension " + std::to_string(batch.dim()) +
                            " != kernel dimension " + std::to_string(config.kernel.dim));
  }
  return batch;
}

void require_test_set(const TrainConfig& config, const Dataset& test_set) {
  if (test_set.size() == 0) throw EmptyDataSource("test set is empty");
  if (test_set.dim() != config.kernel.dim) throw DimensionMismatch("test set dimension != kernel dimension");
}

// Tracks the best model and the early-stopping counter.
class BestTracker {
 public:
  explicit BestTracker(int patience) : patience_(patience) {}

  /// Returns true when training should stop.
  bool update(const KrrModel& model, double mse, int step) {
    if (!best_ || mse < best_mse_) {
      best_.emplace(model);
      best_mse_ = mse;
      best_step_ = step;
      stale_ = 0;
    } else {
      ++stale_;
    }
    return patience_ > 0 && stale_ >= patience_;
  }

  TrainResult finish(TrainTrace trace) && {
    trace.best_step = best_step_;
    trace.best_test_mse = best_mse_;
    return TrainResult{std::move(*best_), std::move(trace)};
  }

 private:
  int patience_;
  std::optional<KrrModel> best_;
  double best_mse_ = 0.0;
  int best_step_ = 0;
  int stale_ = 0;
};

// Projection onto the PSD cone (eigenvalues clamped at 0).
SymmetricMatrix psd_part(const SymmetricMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.matrix());
  const Vector clamped = eig.eigenvalues().cwiseMax(0.0);
  return SymmetricMatrix(eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose());
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

void TrainConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "must lie in [0, 1]");
  if (eps_s && !(*eps_s > 0.0 && std::isfinite(*eps_s))) throw ConfigError("eps_s", "must be > 0");
  if (steps < 1) throw ConfigError("T", "must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda", "must be >= 0");
  if (n_per_step < 1) throw ConfigError("n", "must be >= 1");
  if (early_stop_patience < 0) throw ConfigError("early_stop_patience", "must be >= 0");
  if (!auto_bandwidth || !kernel.is_radial()) kernel.validate();
}

double TrainConfig::safeguard() const {
  return eps_s ? *eps_s : std::pow(static_cast<double>(kernel.dim), -0.75);
}

TrainResult irkm_run(const TrainConfig& config, DataSource& source, const Dataset& test_set) {
  config.validate();
  require_test_set(config, test_set);
  const Eigen::Index d = config.kernel.dim;
  const double eps = config.safeguard();

  WeightVector w = WeightVector::ones(d);
  TrainTrace trace;
  BestTracker best(config.early_stop_patience);
  for (int t = 1; t <= config.steps; ++t) {
    const auto start = Clock::now();
    const Dataset batch = draw_batch(config, source, t);
    const KernelSpec spec = calibrated(config, batch.x, w);
    const KrrModel model = fit(spec, w, batch.x, batch.y, config.lambda);

    StepRecord rec;
    rec.step = t;
    rec.weights = w.values();
    rec.sigma = spec.bandwidth;
    rec.jitter = model.jitter_used();
    rec.test_mse = test_mse(model, test_set.x, test_set.y);

    const double n = static_cast<double>(batch.size());
    rec.w1_raw = empirical_sq_gradient_weights(model, batch.x);
    rec.w2_raw = (dn_vector(model).array() * w.values().array() / n).matrix();
    // Radial kernels can give slightly negative DN entries; the safeguard
    // operates on the nonnegative part.
    const WeightVector w1 = safeguard_normalize(rec.w1_raw, eps);
    const WeightVector w2 = safeguard_normalize(rec.w2_raw.cwiseMax(0.0), eps);
    const bool stop = best.update(model, rec.test_mse, t);
    w = mix(w1, w2, config.alpha);
    rec.wall_ms = elapsed_ms(start);
    trace.steps.push_back(std::move(rec));
    if (stop) break;
  }
  return std::move(best).finish(std::move(trace));
}

TrainResult rfm_run(const TrainConfig& config, DataSource& source, const Dataset& test_set,
                    const std::optional<SymmetricMatrix>& truth_agop) {
  config.validate();
  if (config.top_k < 1 || config.top_k > config.kernel.dim) throw ConfigError("top_k", "must lie in [1, d]");
  require_test_set(config, test_set);
  const Eigen::Index d = config.kernel.dim;
  const double eps = config.safeguard();
  std::optional<Subspace> truth_space;
  if (truth_agop) {
    if (truth_agop->dim() != d) throw DimensionMismatch("rfm_run: ground-truth AGOP dimension != d");
    truth_space.emplace(top_k_eigenspace(*truth_agop, config.top_k));
  }

  WeightMatrix m = WeightMatrix::identity(d);
  TrainTrace trace;
  BestTracker best(config.early_stop_patience);
  for (int t = 1; t <= config.steps; ++t) {
    const auto start = Clock::now();
    const Dataset batch = draw_batch(config, source, t);
    const KernelSpec spec = calibrated(config, batch.x, m);
    const KrrModel model = fit(spec, m, batch.x, batch.y, config.lambda);

    StepRecord rec;
    rec.step = t;
    rec.weights = sorted_eigenvalues(m.matrix());
    rec.sigma = spec.bandwidth;
    rec.jitter = model.jitter_used();
    rec.test_mse = test_mse(model, test_set.x, test_set.y);

    const double n = static_cast<double>(batch.size());
    const SymmetricMatrix grad_outer = agop(model, batch.x);
    const Matrix& root = m.sqrt_matrix().matrix();
    const SymmetricMatrix dn_term(root * dn_matrix(model).matrix() * root / n);
    rec.w1_raw = sorted_eigenvalues(grad_outer);
    rec.w2_raw = sorted_eigenvalues(dn_term);
    if (truth_agop) {
      rec.agop_error = relative_matrix_error(grad_outer, *truth_agop);
      rec.principal_angle = principal_angle(top_k_eigenspace(grad_outer, config.top_k), *truth_space);
    }
    const WeightMatrix m1 = safeguard_normalize_matrix(grad_outer, eps);
    const WeightMatrix m2 = safeguard_normalize_matrix(psd_part(dn_term), eps);
    const bool stop = best.update(model, rec.test_mse, t);
    m = mix_matrix(m1, m2, config.alpha);
    rec.wall_ms = elapsed_ms(start);
    trace.steps.push_back(std::move(rec));
    if (stop) break;
  }
  return std::move(best).finish(std::move(trace));
}

BaselineResult krr_baseline(const TrainConfig& config, const Dataset& train, const Dataset& test_set) {
  config.validate();
  require_test_set(config, test_set);
  if (train.size() == 0) throw EmptyDataSource("krr_baseline: no training points");
  const WeightVector w = WeightVector::ones(config.kernel.dim);
  const KernelSpec spec = calibrated(config, train.x, w);
  KrrModel model = fit(spec, w, train.x, train.y, config.lambda);
  const double mse = test_mse(model, test_set.x, test_set.y);
  return BaselineResult{std::move(model), mse, spec.bandwidth};
}

}  // namespace irkm
