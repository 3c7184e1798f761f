#pragma once

// Experiment configs, single runs, sweeps and the target-expression parser
// behind the command-line tool.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "irkm/trainers.hpp"

namespace irkm {

/// Parses "2*x1 - x2 + x1*x3 + 0.5". Variables are 1-based in the text and
/// 0-based in the result; dim is the largest index seen unless given.
FourierPolynomial parse_target(std::string_view text, std::optional<int> dim = std::nullopt);

enum class Method { krr, irkm, rfm };
std::string_view to_string(Method m);

struct KernelConfig {
  KernelFamily family = KernelFamily::laplacian_radial;
  std::optional<double> sigma;  // unset: median heuristic
  int degree = 2;
  double offset = 1.0;
  double scale = 1.0;

  bool operator==(const KernelConfig&) const = default;
};

struct CsvConfig {
  std::string train;
  std::string test;
  std::string label;
  std::vector<std::string> features;  // empty: every non-label column
  Normalization normalization = Normalization::zscore;

  bool operator==(const CsvConfig&) const = default;
};

struct ExperimentConfig {
  Method method = Method::irkm;
  std::string distribution = "hypercube";  // hypercube | gaussian | csv
  int d = 0;
  std::vector<Eigen::Index> n;
  std::vector<double> n_exponents;
  int steps = 20;
  double alpha = 0.5;
  std::optional<double> eps_s;  // unset: d^(-3/4)
  double lambda = 1e-3;
  KernelConfig kernel;
  std::string target;
  bool rotation = false;
  double noise_sigma = 0.1;
  std::vector<std::uint64_t> seeds{0};
  std::optional<Eigen::Index> test_size;  // unset: min(10n, 10000)
  bool resample = true;
  std::string out_dir = "runs";
  int early_stop_patience = 3;
  int top_k = 4;
  /// Monte-Carlo sample count for the RFM ground-truth AGOP (0 disables).
  int agop_samples = 100000;
  /// Training draws come from a fixed pool of this size instead of fresh samples.
  std::optional<Eigen::Index> pool_size;
  /// wall_ms in trace.jsonl; off by default so traces are byte-reproducible.
  bool trace_wall_ms = false;
  std::optional<CsvConfig> csv;

  bool operator==(const ExperimentConfig&) const = default;

  /// Sample sizes after expanding exponents (n = round(d^δ)), in config order.
  std::vector<Eigen::Index> sample_sizes() const;
};

/// Strict parse: unknown keys and ill-typed values raise ConfigError naming the key.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical form with every key explicit (keys sorted); config_from_json(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& c);

std::string version_string();

struct RunOutcome {
  Method method = Method::irkm;
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
  TrainTrace trace;
  double final_test_mse = 0.0;
  /// Unweighted KRR on the first training batch (not set for method krr).
  std::optional<double> baseline_test_mse;
  /// Classification accuracy at threshold 0.5, CSV data with labels in {0, 1} only.
  std::optional<double> test_accuracy;
};

/// One training run for a given n and seed. Pure: writes nothing.
RunOutcome run_experiment(const ExperimentConfig& config, Eigen::Index n, std::uint64_t seed);

/// One JSON line per step, keys in fixed order.
std::string trace_jsonl(const TrainTrace& trace, Method method, bool wall_ms);
nlohmann::ordered_json summary_json(const ExperimentConfig& config, const RunOutcome& outcome);

/// Writes trace.jsonl, timing.jsonl and summary.json into dir.
void write_run_artifacts(const std::filesystem::path& dir, const ExperimentConfig& config,
                         const RunOutcome& outcome);

struct SweepRow {
  std::string method;
  int d = 0;
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
  int step_best = 0;
  double test_mse = 0.0;
};

struct PlotRow {
  std::string method;
  Eigen::Index n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single run
  int count = 0;
};

std::vector<PlotRow> aggregate(const std::vector<SweepRow>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string plotdata_csv(const std::vector<PlotRow>& rows);

/// IRKM_THREADS if set and positive, else hardware concurrency (at least 1).
unsigned thread_budget();

/// `irkm run`: needs exactly one sample size and one seed. Writes into
/// out_dir and returns it.
std::filesystem::path cmd_run(const ExperimentConfig& config);

/// `irkm sweep`: every (n, seed) pair, in parallel, each in
/// out_dir/n<n>_seed<seed>/; then sweep.csv and plotdata.csv in out_dir.
/// Rows are ordered by n (config order), then seed. The per-run KRR baseline
/// is in each summary.json; sweep method krr for a baseline curve.
std::vector<SweepRow> cmd_sweep(const ExperimentConfig& config);

}  // namespace irkm
