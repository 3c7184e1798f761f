// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--strict] [criterion ids...]
//
// Exit status is 0 when every selected criterion ran to completion, whatever
// its verdict; --strict also turns any FAIL into exit status 1. The report is
// also written to acceptance_report.txt in the working directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "irkm/experiments.hpp"
#include "irkm/oracles.hpp"

using namespace irkm;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool passed = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

KernelSpec make_spec(KernelFamily family, Eigen::Index d, double sigma) {
  KernelSpec s;
  s.family = family;
  s.dim = d;
  s.bandwidth = sigma;
  return s;
}

ExperimentConfig synthetic(Method method, int d, const std::string& target, Eigen::Index n, int steps) {
  ExperimentConfig c;
  c.method = method;
  c.distribution = "hypercube";
  c.d = d;
  c.n = {n};
  c.steps = steps;
  c.alpha = 0.5;
  c.lambda = 1e-3;
  c.kernel.family = KernelFamily::laplacian_radial;
  c.target = target;
  c.noise_sigma = 0.1;
  return c;
}

const char* kTarget7 = "x1 + x2 + x3 + x1*x2*x3";
const char* kTarget8 = "x1 + x2 + x1*x2*x3 + x1*x2*x3*x4";

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Criterion-8 runs are shared with the α-ablation.
std::map<std::pair<double, std::uint64_t>, RunOutcome> hierarchical_runs;

const RunOutcome& hierarchical(double alpha, std::uint64_t seed) {
  auto key = std::make_pair(alpha, seed);
  auto it = hierarchical_runs.find(key);
  if (it == hierarchical_runs.end()) {
    ExperimentConfig c = synthetic(Method::irkm, 100, kTarget8, 500, 15);
    c.alpha = alpha;
    it = hierarchical_runs.emplace(key, run_experiment(c, 500, seed)).first;
  }
  return it->second;
}

Verdict coordinate_weights() {
  const auto start = Clock::now();
  RngStream rng(101, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 10;
    const FourierPolynomial f = oracle::random_sparse_polynomial(d, 1 + trial % 8, std::min(d, 5), rng);
    for (int j = 0; j < d; ++j) {
      worst = std::max(worst, std::abs(coordinate_weight(f, j) - oracle::enumerated_coordinate_weight(f, j)));
      for (int p = 0; p <= 3; ++p) {
        worst = std::max(worst, std::abs(coordinate_weight(f, j, p) - oracle::enumerated_coordinate_weight(f, j, p)));
      }
    }
  }
  const double t = seconds_since(start);
  return {worst <= 1e-10 && t < 10.0, fmt("max |diff| %.2e over 100 polynomials, %.2f s", worst, t)};
}

Verdict leap_oracle() {
  const auto start = Clock::now();
  RngStream rng(102, 0);
  int mismatched = 0, not_maximal = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const FourierPolynomial f = oracle::random_sparse_polynomial(8, 1 + trial % 7, 5, rng);
    if (leap_complexity(f) != oracle::brute_force_leap(f)) ++mismatched;
    for (int k = 0; k <= 5; ++k) {
      if (!oracle::brute_force_is_maximal(f, max_leap_component(f, k), k)) ++not_maximal;
    }
  }
  const double t = seconds_since(start);
  return {mismatched == 0 && not_maximal == 0 && t < 30.0,
          fmt("%g leap mismatches, %g non-maximal components over 200 polynomials, %.2f s", mismatched, not_maximal,
              t)};
}

Verdict leap_examples() {
  const int a = leap_complexity(parse_target("x1 + x2 + x1*x2*x3 + x1*x2*x3*x4"));
  const int b = leap_complexity(parse_target("x1*x2 + x1*x2*x3*x4"));
  const FourierPolynomial l1 = max_leap_component(parse_target("x1 + x2 + x1*x2*x3 + x3*x4*x6"), 1);
  const bool component_ok = l1 == parse_target("x1 + x2 + x1*x2*x3", 6);
  return {a == 1 && b == 2 && component_ok,
          "leaps " + std::to_string(a) + ", " + std::to_string(b) + "; L1 = " + to_string(l1)};
}

Verdict numerical_gradients() {
  const auto start = Clock::now();
  RngStream rng(104, 0);
  double worst_grad = 0.0, worst_w = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const KernelFamily family = trial % 2 ? KernelFamily::exponential_inner : KernelFamily::gaussian_radial;
    const Matrix x = sample_gaussian(50, 20, rng);
    const Vector y = sample_gaussian(50, 1, rng).col(0);
    Vector w = sample_gaussian(1, 20, rng).row(0).transpose().cwiseAbs();
    w.array() += 0.1;
    const KernelSpec spec = make_spec(family, 20, std::sqrt(20.0));
    const KrrModel m = fit(spec, WeightVector(w), x, y, 1e-3);
    const Matrix z = sample_gaussian(10, 20, rng);
    const Matrix fd = oracle::finite_difference_gradient(m, z);
    worst_grad = std::max(worst_grad, (predict_gradient(m, z) - fd).norm() / fd.norm());
    for (Eigen::Index j : {Eigen::Index{0}, Eigen::Index{trial % 20}}) {
      const Matrix fdw = oracle::finite_difference_weight_derivative(spec, x, w, j);
      const Matrix an = weight_derivative_gram(spec, x, WeightVector(w), j).matrix();
      worst_w = std::max(worst_w, (an - fdw).norm() / std::max(fdw.norm(), 1e-300));
    }
  }
  const double t = seconds_since(start);
  return {worst_grad <= 1e-5 && worst_w <= 1e-4 && t < 20.0,
          fmt("gradient rel err %.2e, weight-derivative rel err %.2e, %.2f s", worst_grad, worst_w, t)};
}

Verdict estimator_identities() {
  RngStream rng(105, 0);
  double worst_dn = 0.0, worst_diag = 0.0, worst_dn_diag = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const KernelFamily family = trial % 2 ? KernelFamily::exponential_inner : KernelFamily::polynomial_inner;
    const Matrix x = sample_gaussian(20, 6, rng);
    Vector w = sample_gaussian(1, 6, rng).row(0).transpose().cwiseAbs();
    w.array() += 0.1;
    const KrrModel m = fit(make_spec(family, 6, 1.0), WeightVector(w), x, sample_gaussian(20, 1, rng).col(0), 1e-2);
    const Vector dn = dn_vector(m);
    worst_dn = std::max(worst_dn, -dn.minCoeff() / m.beta().squaredNorm());

    const Vector sq = empirical_sq_gradient_weights(m, x);
    worst_diag = std::max(worst_diag, (agop(m, x).matrix().diagonal() - sq).cwiseAbs().maxCoeff() /
                                          std::max(sq.cwiseAbs().maxCoeff(), 1e-300));

    const KrrModel mm(m.spec(), WeightMatrix(SymmetricMatrix::diagonal(w)), x, m.beta(), m.lambda(), 0.0);
    worst_dn_diag = std::max(worst_dn_diag, (dn_matrix(mm).matrix().diagonal() - dn).cwiseAbs().maxCoeff() /
                                                std::max(dn.cwiseAbs().maxCoeff(), 1e-300));
  }
  return {worst_dn <= 1e-8 && worst_diag <= 1e-10 && worst_dn_diag <= 1e-8,
          fmt("min DN / |beta|^2 %.2e, AGOP diag err %.2e, DN diag err %.2e", -worst_dn, worst_diag, worst_dn_diag)};
}

Verdict interpolation() {
  RngStream rng(106, 0);
  Matrix x = sample_hypercube(100, 50, rng);
  const Vector y = sample_gaussian(100, 1, rng).col(0);
  KernelSpec s = make_spec(KernelFamily::laplacian_radial, 50, 1.0);
  s.bandwidth = median_bandwidth(x, WeightVector::ones(50));
  const KrrModel m = fit(s, WeightVector::ones(50), x, y, 1e-12);
  const double train_mse = test_mse(m, x, y);
  std::vector<double> norms;
  for (double lambda : {1e-3, 1e-1, 10.0}) norms.push_back(fit(s, WeightVector::ones(50), x, y, lambda).beta().norm());
  const bool monotone = norms[0] >= norms[1] && norms[1] >= norms[2];
  return {train_mse <= 1e-8 && monotone,
          fmt("train MSE %.2e, |beta| %.4g >= %.4g >= %.4g", train_mse, norms[0], norms[1], norms[2])};
}

Verdict coordinate_identification() {
  const auto start = Clock::now();
  int identified = 0;
  std::ostringstream detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ExperimentConfig c = synthetic(Method::irkm, 100, kTarget7, 300, 10);
    const RunOutcome o = run_experiment(c, 300, seed);
    const Vector& w = o.trace.best().weights;
    const double ratio = w.head(3).minCoeff() / w.tail(97).maxCoeff();
    const bool half = o.final_test_mse <= 0.5 * *o.baseline_test_mse;
    if (ratio >= 3.0 && half) ++identified;
    detail << (seed ? "; " : "") << "seed " << seed << ": ratio " << fmt("%.2f", ratio) << ", mse "
           << fmt("%.3f/%.3f", o.final_test_mse, *o.baseline_test_mse);
  }
  const double t = seconds_since(start);
  return {identified >= 4 && t < 120.0,
          std::to_string(identified) + "/5 seeds (" + detail.str() + "), " + fmt("%.1f s", t)};
}

Verdict hierarchical_learning() {
  const auto start = Clock::now();
  int ok = 0;
  std::ostringstream detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RunOutcome& o = hierarchical(0.5, seed);
    const Vector& w = o.trace.best().weights;
    const double med = median(std::vector<double>(w.data() + 4, w.data() + w.size()));
    const double r3 = w(2) / med, r4 = w(3) / med;
    const bool pass = r3 >= 3.0 && r4 >= 3.0 && o.final_test_mse < *o.baseline_test_mse;
    ok += pass;
    detail << (seed ? "; " : "") << "seed " << seed << ": x3 " << fmt("%.2f", r3) << ", x4 " << fmt("%.2f", r4)
           << ", mse " << fmt("%.3f/%.3f", o.final_test_mse, *o.baseline_test_mse);
  }
  const double t = seconds_since(start);
  return {ok >= 4 && t < 300.0, std::to_string(ok) + "/5 seeds (" + detail.str() + "), " + fmt("%.1f s", t)};
}

ExperimentConfig rotated_config() {
  ExperimentConfig c = synthetic(Method::rfm, 60, kTarget8, 1500, 25);
  c.distribution = "gaussian";
  c.rotation = true;
  c.early_stop_patience = 0;
  c.agop_samples = 100000;
  return c;
}

Verdict rotated_rfm() {
  const auto start = Clock::now();
  int ok = 0;
  std::ostringstream detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RunOutcome o = run_experiment(rotated_config(), 1500, seed);
    const auto& steps = o.trace.steps;
    std::vector<double> avg;
    for (std::size_t i = 4; i < steps.size(); ++i) {
      double s = 0.0;
      for (std::size_t k = i - 4; k <= i; ++k) s += *steps[k].agop_error;
      avg.push_back(s / 5.0);
    }
    bool monotone = !avg.empty();
    for (std::size_t i = 1; i < avg.size(); ++i) monotone = monotone && avg[i] <= avg[i - 1];
    const double first = *steps.front().principal_angle, last = *steps.back().principal_angle;
    const bool pass = monotone && last * 2.0 <= first;
    ok += pass;
    detail << (seed ? "; " : "") << "seed " << seed << ": agop err " << fmt("%.3f->%.3f", avg.front(), avg.back())
           << (monotone ? " monotone" : " not monotone") << ", angle " << fmt("%.3f->%.3f", first, last);
  }
  const double t = seconds_since(start);
  return {ok >= 3 && t < 900.0, std::to_string(ok) + "/5 seeds (" + detail.str() + "), " + fmt("%.1f s", t)};
}

Verdict alpha_ablation() {
  double half = 0.0, zero = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    half += hierarchical(0.5, seed).final_test_mse / 5.0;
    zero += hierarchical(0.0, seed).final_test_mse / 5.0;
  }
  return {half <= zero, fmt("mean test MSE %.4f at alpha=1/2, %.4f at alpha=0", half, zero)};
}

Verdict determinism() {
  const ExperimentConfig c7 = synthetic(Method::irkm, 100, kTarget7, 300, 10);
  ExperimentConfig c9 = rotated_config();
  c9.steps = 5;  // prefix of the criterion-9 run, to keep the rerun cheap
  int identical = 0;
  for (std::uint64_t seed : {0, 1}) {
    const std::string a = trace_jsonl(run_experiment(c7, 300, seed).trace, Method::irkm, false);
    const std::string b = trace_jsonl(run_experiment(c7, 300, seed).trace, Method::irkm, false);
    identical += a == b && !a.empty();
  }
  const std::string a = trace_jsonl(run_experiment(c9, 1500, 0).trace, Method::rfm, false);
  const std::string b = trace_jsonl(run_experiment(c9, 1500, 0).trace, Method::rfm, false);
  identical += a == b && !a.empty();
  return {identical == 3, std::to_string(identical) + "/3 reruns byte-identical (criterion 7 seeds 0-1, criterion 9 seed 0)"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "coordinate weights vs enumeration", coordinate_weights},
      {2, "leap complexity vs brute force", leap_oracle},
      {3, "worked leap examples", leap_examples},
      {4, "numerical gradients", numerical_gradients},
      {5, "estimator identities", estimator_identities},
      {6, "interpolation and shrinkage", interpolation},
      {7, "coordinate identification", coordinate_identification},
      {8, "hierarchical learning", hierarchical_learning},
      {9, "rotated RFM", rotated_rfm},
      {10, "alpha ablation", alpha_ablation},
      {11, "determinism", determinism},
  };
  bool strict = false;
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) {
      strict = true;
    } else {
      selected.insert(std::atoi(argv[i]));
    }
  }

  std::ofstream report("acceptance_report.txt");
  auto emit = [&report](const std::string& line) {
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    report << line << '\n' << std::flush;
  };

  int passed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    ++ran;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      emit("ERROR " + std::to_string(c.id) + " " + c.name + ": " + e.what());
      return 2;
    }
    passed += v.passed;
    char id[8];
    std::snprintf(id, sizeof id, "%2d", c.id);
    emit(std::string(v.passed ? "PASS " : "FAIL ") + id + " " + c.name + ": " + v.detail);
  }
  emit(std::to_string(passed) + "/" + std::to_string(ran) + " criteria passed");
  return strict && passed != ran ? 1 : 0;
}
