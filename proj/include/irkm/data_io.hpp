#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "irkm/orthopoly.hpp"

namespace irkm {

/// Counter-based generator: output i of stream (seed, id) is a hash of
/// (seed, id, i). Streams never share state, so drawing from one cannot
/// perturb another.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stream purposes; combined with an index into a 64-bit stream id.
enum class StreamPurpose : std::uint64_t {
  train_inputs = 1,
  train_noise = 2,
  test_inputs = 3,
  test_noise = 4,
  rotation = 5,
  calibration = 6,
};

RngStream substream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index = 0);

struct Dataset {
  Matrix x;
  Vector y;
  std::string source;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }
};

enum class Distribution { hypercube, gaussian };

/// Ground-truth target f(Ux) + N(0, σ²) noise.
struct TargetSpec {
  FourierPolynomial f;
  std::optional<Matrix> rotation;
  double noise_sigma = 0.0;

  void validate() const;
};

Matrix sample_hypercube(Eigen::Index n, Eigen::Index d, RngStream& rng);
Matrix sample_gaussian(Eigen::Index n, Eigen::Index d, RngStream& rng);
Matrix sample(Distribution dist, Eigen::Index n, Eigen::Index d, RngStream& rng);

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, R diagonal made positive).
Matrix random_rotation(Eigen::Index d, RngStream& rng);

/// Noiseless target values f(Ux_i).
Vector target_values(const TargetSpec& target, const Matrix& x);
Vector label(const TargetSpec& target, const Matrix& x, RngStream& rng);

/// ∇_x f(Ux) = Uᵀ ∇f(Ux).
Vector target_gradient(const TargetSpec& target, const Vector& x);

/// (1/m) Σ ∇f(x_i)∇f(x_i)ᵀ over the rows of x.
SymmetricMatrix target_agop(const TargetSpec& target, const Matrix& x);

enum class Normalization { none, zscore, minus_one_one };

struct CsvSchema {
  std::string label_column;
  std::vector<std::string> feature_columns;  // empty: every column except the label
  Normalization normalization = Normalization::zscore;
};

/// Headered RFC-4180 CSV. Normalization statistics come from the loaded rows;
/// zscore uses the population std and falls back to 1 when it is below 1e-12.
Dataset load_csv(const std::string& path, const CsvSchema& schema);

/// Parses CSV text into rows of fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Supplies the training batch for each step (steps are 1-based).
class DataSource {
 public:
  virtual ~DataSource() = default;
  virtual Dataset draw(std::uint64_t step) = 0;
  virtual Eigen::Index dim() const = 0;
};

/// Unlimited synthetic source: step t uses substreams (seed, t).
class SyntheticSource : public DataSource {
 public:
  SyntheticSource(Distribution dist, TargetSpec target, Eigen::Index n, std::uint64_t seed);
  Dataset draw(std::uint64_t step) override;
  Eigen::Index dim() const override { return target_.f.dim(); }

 private:
  Distribution dist_;
  TargetSpec target_;
  Eigen::Index n_;
  std::uint64_t seed_;
};

/// Returns the same batch every step.
class FixedSource : public DataSource {
 public:
  explicit FixedSource(Dataset data);
  Dataset draw(std::uint64_t step) override;
  Eigen::Index dim() const override { return data_.dim(); }

 private:
  Dataset data_;
};

/// Cycles through a finite pool, n rows per step.
class PoolSource : public DataSource {
 public:
  PoolSource(Dataset pool, Eigen::Index n);
  Dataset draw(std::uint64_t step) override;
  Eigen::Index dim() const override { return pool_.dim(); }

 private:
  Dataset pool_;
  Eigen::Index n_;
};

/// Fresh test set from the test substreams of seed.
Dataset make_test_set(Distribution dist, const TargetSpec& target, Eigen::Index m, std::uint64_t seed);

}  // namespace irkm
