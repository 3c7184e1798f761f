#include "irkm/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "irkm/experiments.hpp"
#include "irkm/oracles.hpp"

namespace irkm {

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

Outcome within(double err, double tol) { return {err <= tol, "max err " + sci(err) + " (tol " + sci(tol) + ")"}; }

double rel_error(const Matrix& a, const Matrix& b) {
  const double denom = std::max(b.norm(), 1e-300);
  return (a - b).norm() / denom;
}

KrrModel random_model(KernelFamily family, Eigen::Index n, Eigen::Index d, RngStream& rng) {
  KernelSpec spec;
  spec.family = family;
  spec.dim = d;
  spec.bandwidth = std::sqrt(static_cast<double>(d));
  const Matrix x = sample_gaussian(n, d, rng);
  const Vector y = sample_gaussian(n, 1, rng).col(0);
  Vector w = sample_gaussian(1, d, rng).row(0).transpose().cwiseAbs();
  w.array() += 0.2;
  return fit(spec, WeightVector(w), x, y, 1e-2);
}

Outcome check_coordinate_weights(RngStream& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 7;
    const FourierPolynomial f = oracle::random_sparse_polynomial(d, 1 + trial % 6, 4, rng);
    for (int j = 0; j < d; ++j) {
      for (int p : {-1, 1, 2, 3}) {
        const double fast = p < 0 ? coordinate_weight(f, j) : coordinate_weight(f, j, p);
        worst = std::max(worst, std::abs(fast - oracle::enumerated_coordinate_weight(f, j, p)));
      }
    }
  }
  return within(worst, 1e-10);
}

Outcome check_fourier_identities(RngStream& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 3 + trial % 6;
    const FourierPolynomial f = oracle::random_sparse_polynomial(d, 2 + trial % 5, 3, rng);
    double parseval = 0.0;
    for (const auto& [s, c] : f.terms()) {
      parseval += c * c;
      worst = std::max(worst, std::abs(oracle::enumerated_fourier_coefficient(f, s) - c));
      worst = std::max(worst, std::abs(discrete_derivative_expectation(f, s) -
                                       oracle::enumerated_discrete_derivative_mean(f, s)));
    }
    worst = std::max(worst, std::abs(parseval - oracle::enumerated_second_moment(f)));
  }
  return within(worst, 1e-10);
}

Outcome check_leap(RngStream& rng) {
  int mismatches = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const FourierPolynomial f = oracle::random_sparse_polynomial(6, 1 + trial % 6, 4, rng);
    const int leap = leap_complexity(f);
    if (leap != oracle::brute_force_leap(f)) ++mismatches;
    for (int k = 0; k <= 4; ++k) {
      if (!oracle::brute_force_is_maximal(f, max_leap_component(f, k), k)) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 60 polynomials"};
}

Outcome check_leap_examples() {
  const bool a = leap_complexity(parse_target("x1 + x2 + x1*x2*x3 + x1*x2*x3*x4")) == 1;
  const bool b = leap_complexity(parse_target("x1*x2 + x1*x2*x3*x4")) == 2;
  const FourierPolynomial f = parse_target("x1 + x2 + x1*x2*x3 + x3*x4*x6");
  const bool c = max_leap_component(f, 1) == parse_target("x1 + x2 + x1*x2*x3", 6);
  return {a && b && c, std::string("leap1 ") + (a ? "ok" : "bad") + ", leap2 " + (b ? "ok" : "bad") +
                           ", component " + (c ? "ok" : "bad")};
}

Outcome check_hermite(RngStream& rng) {
  double worst_z = 0.0;
  for (int j = 0; j <= 4; ++j) {
    for (int k = j; k <= 4; ++k) {
      const auto [mean, se] = oracle::monte_carlo_hermite_inner(j, k, 100000, rng);
      worst_z = std::max(worst_z, std::abs(mean - (j == k ? 1.0 : 0.0)) / se);
    }
  }
  double worst_rec = 0.0;
  for (double x : {-2.5, -0.3, 0.0, 1.1, 3.0}) {
    for (int k = 0; k <= 4; ++k) {
      worst_rec = std::max(worst_rec, std::abs(hermite_eval(k, x) - oracle::closed_form_hermite(k, x)));
    }
  }
  HermitePolynomial f(3);
  f.add_term({1, 0, 0}, 0.8);
  f.add_term({2, 0, 0}, -0.5);
  f.add_term({1, 1, 0}, 0.7);
  f.add_term({0, 1, 1}, 1.2);
  f.add_term({3, 0, 0}, 0.9);
  double weight_z = 0.0;
  for (int r = 0; r < 3; ++r) {
    const auto [mean, se] = oracle::monte_carlo_hermite_weight(f, r, 100000, rng);
    weight_z = std::max(weight_z, std::abs(mean - hermite_coordinate_weight(f, r, 2)) / std::max(se, 1e-12));
  }
  const bool ok = worst_z < 5.0 && weight_z < 5.0 && worst_rec < 1e-12;
  return {ok, "gram z " + sci(worst_z) + ", weight z " + sci(weight_z) + ", closed form " + sci(worst_rec)};
}

Outcome check_gradient(const VerifyOptions& opt, RngStream& rng) {
  double worst = 0.0;
  for (KernelFamily family : {KernelFamily::gaussian_radial, KernelFamily::exponential_inner,
                              KernelFamily::polynomial_inner, KernelFamily::laplacian_radial}) {
    for (int trial = 0; trial < 2; ++trial) {
      const KrrModel model = random_model(family, 30, 8, rng);
      const Matrix z = sample_gaussian(5, 8, rng);
      worst = std::max(worst, rel_error(opt.gradient(model, z), oracle::finite_difference_gradient(model, z)));
    }
  }
  return within(worst, 1e-5);
}

Outcome check_linear_gradient(const VerifyOptions& opt, RngStream& rng) {
  KernelSpec spec;
  spec.family = KernelFamily::linear_inner;
  spec.dim = 6;
  const Matrix x = sample_gaussian(12, 6, rng);
  const Vector y = sample_gaussian(12, 1, rng).col(0);
  Vector w(6);
  w << 0.5, 1.0, 1.5, 2.0, 0.25, 3.0;
  const KrrModel model = fit(spec, WeightVector(w), x, y, 0.1);
  // f̂(z) = Σ_k β_k ⟨w⊙x_k, z⟩/d, so ∇f̂ = w ⊙ Xᵀβ / d everywhere.
  const Vector expected = w.cwiseProduct(x.transpose() * model.beta()) / 6.0;
  const Matrix z = sample_gaussian(3, 6, rng);
  const Matrix g = opt.gradient(model, z);
  double worst = 0.0;
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    worst = std::max(worst, (g.row(r).transpose() - expected).norm() / expected.norm());
  }
  return within(worst, 1e-12);
}

Outcome check_weight_derivative(RngStream& rng) {
  double worst = 0.0;
  for (KernelFamily family : {KernelFamily::gaussian_radial, KernelFamily::laplacian_radial,
                              KernelFamily::exponential_inner, KernelFamily::polynomial_inner}) {
    KernelSpec spec;
    spec.family = family;
    spec.dim = 5;
    spec.bandwidth = 2.0;
    const Matrix x = sample_gaussian(12, 5, rng);
    Vector w = Vector::Constant(5, 1.0) + 0.5 * sample_gaussian(1, 5, rng).row(0).transpose().cwiseAbs();
    for (Eigen::Index j = 0; j < 5; ++j) {
      const Matrix fd = oracle::finite_difference_weight_derivative(spec, x, w, j);
      worst = std::max(worst, rel_error(weight_derivative_gram(spec, x, WeightVector(w), j).matrix(), fd));
    }
    // Matrix form along the symmetric direction (E_ij + E_ji)/2.
    Matrix m = Matrix::Identity(5, 5);
    m(0, 1) = m(1, 0) = 0.2;
    m(2, 2) = 1.5;
    for (auto [i, j] : {std::pair<int, int>{0, 1}, {2, 2}, {1, 4}}) {
      Matrix e = Matrix::Zero(5, 5);
      e(i, j) += 0.5;
      e(j, i) += 0.5;
      const double h = 1e-6;
      const Matrix fd = (gram(spec, x, x, WeightMatrix(SymmetricMatrix(m + h * e))) -
                         gram(spec, x, x, WeightMatrix(SymmetricMatrix(m - h * e)))) /
                        (2.0 * h);
      worst = std::max(
          worst, rel_error(matrix_weight_derivative(spec, x, WeightMatrix(SymmetricMatrix(m)), i, j).matrix(), fd));
    }
  }
  return within(worst, 1e-4);
}

Outcome check_dn(RngStream& rng) {
  double worst = 0.0;
  double worst_neg = 0.0;
  for (KernelFamily family : {KernelFamily::exponential_inner, KernelFamily::polynomial_inner,
                              KernelFamily::gaussian_radial, KernelFamily::laplacian_radial}) {
    const KrrModel model = random_model(family, 20, 6, rng);
    const Vector dn = dn_vector(model);
    const auto& w = std::get<WeightVector>(model.weight());
    for (Eigen::Index j = 0; j < 6; ++j) {
      const double explicit_form = oracle::explicit_quadratic_form(
          model.beta(), weight_derivative_gram(model.spec(), model.x_train(), w, j).matrix());
      worst = std::max(worst, std::abs(dn(j) - explicit_form) / std::max(1.0, std::abs(explicit_form)));
    }
    if (!model.spec().is_radial()) {
      worst_neg = std::max(worst_neg, -dn.minCoeff() / model.beta().squaredNorm());
    }
    const Vector diag = dn_matrix(model).matrix().diagonal();
    worst = std::max(worst, (diag - dn).cwiseAbs().maxCoeff() / std::max(1.0, dn.cwiseAbs().maxCoeff()));
    const Matrix x_eval = sample_gaussian(15, 6, rng);
    worst = std::max(worst, (agop(model, x_eval).matrix().diagonal() -
                             empirical_sq_gradient_weights(model, x_eval))
                                .cwiseAbs()
                                .maxCoeff());
  }
  const bool ok = worst <= 1e-8 && worst_neg <= 1e-8;
  return {ok, "identity err " + sci(worst) + ", worst negative DN/|b|^2 " + sci(worst_neg)};
}

Outcome check_linear_algebra() {
  Matrix a(2, 2);
  a << 4.0, 2.0, 2.0, 3.0;
  Vector b(2);
  b << 2.0, 1.0;
  // By hand: det = 8, x = (3·2 − 2·1, −2·2 + 4·1)/8 = (0.5, 0).
  const SpdSolution sol = solve_spd(SymmetricMatrix(a), b);
  double err = std::abs(sol.x(0, 0) - 0.5) + std::abs(sol.x(1, 0));
  const SymmetricMatrix s = psd_sqrt(SymmetricMatrix(a));
  err = std::max(err, (s.matrix() * s.matrix() - a).cwiseAbs().maxCoeff());
  Matrix singular = Matrix::Ones(3, 3);
  const SpdSolution ridge = solve_spd(SymmetricMatrix(singular), Vector::Ones(3));
  const bool escalated = ridge.jitter_used > 0.0 && ridge.x.allFinite();
  Matrix basis = Matrix::Zero(4, 2);
  basis(0, 0) = basis(1, 1) = 1.0;
  err = std::max(err, principal_angle(Subspace(basis), Subspace(basis)));
  return {err <= 1e-12 && escalated, "err " + sci(err) + (escalated ? ", jitter escalates" : ", no escalation")};
}

Outcome check_interpolation_shrinkage(RngStream& rng) {
  const Matrix x = sample_hypercube(80, 30, rng);
  const Vector y = sample_gaussian(80, 1, rng).col(0);
  KernelSpec spec;
  spec.dim = 30;
  spec.bandwidth = median_bandwidth(x, WeightVector::ones(30));
  const KrrModel interp = fit(spec, WeightVector::ones(30), x, y, 1e-12);
  const double train_mse = test_mse(interp, x, y);
  double prev = INFINITY;
  bool monotone = true;
  for (double lambda : {1e-3, 1e-1, 10.0}) {
    const double norm = fit(spec, WeightVector::ones(30), x, y, lambda).beta().norm();
    monotone = monotone && norm <= prev;
    prev = norm;
  }
  return {train_mse <= 1e-8 && monotone,
          "train mse " + sci(train_mse) + (monotone ? ", |b| nonincreasing" : ", |b| increased")};
}

Outcome check_safeguard(RngStream& rng) {
  const Vector v = sample_gaussian(1, 10, rng).row(0).transpose().cwiseAbs();
  const WeightVector w = safeguard_normalize(v, 0.1);
  bool ok = std::abs(w.values().sum() - 10.0) < 1e-12 && (w.values().array() > 0.0).all();
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      if (v(a) < v(b) && !(w.values()(a) < w.values()(b))) ok = false;
    }
  }
  const WeightVector m = mix(w, WeightVector::ones(10), 0.5);
  ok = ok && std::abs(m.values().sum() - 10.0) < 1e-12;
  return {ok, ok ? "sum d, order kept" : "normalization broken"};
}

Outcome check_sampling(RngStream& rng) {
  // Labels of the four-term target on all eight vertices.
  TargetSpec target{parse_target("x1 + x2 + x3 + x1*x2*x3"), std::nullopt, 0.0};
  Matrix x(8, 3);
  int r = 0;
  oracle::for_each_vertex(3, [&](const Vector& v) { x.row(r++) = v.transpose(); });
  RngStream noise(1, 1);
  const Vector y = label(target, x, noise);
  int fours = 0, zeros = 0, neg_fours = 0;
  for (Eigen::Index i = 0; i < 8; ++i) {
    const double expect = x(i, 0) + x(i, 1) + x(i, 2) + x(i, 0) * x(i, 1) * x(i, 2);
    if (y(i) != expect) return {false, "label mismatch at vertex " + std::to_string(i)};
    fours += y(i) == 4.0;
    zeros += y(i) == 0.0;
    neg_fours += y(i) == -4.0;
  }
  // Independent streams: interleaving draws must not change either sequence.
  RngStream a1(5, 1), a2(5, 1), b(5, 2);
  bool independent = true;
  for (int i = 0; i < 100; ++i) {
    b();
    independent = independent && a1() == a2();
  }
  RngStream rot = substream(3, StreamPurpose::rotation);
  const Matrix u = random_rotation(12, rot);
  const double orth = (u.transpose() * u - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff();
  (void)rng;
  const bool ok = fours == 1 && neg_fours == 1 && zeros == 6 && independent && orth < 1e-12;
  return {ok, "pattern " + std::to_string(neg_fours) + "/" + std::to_string(zeros) + "/" + std::to_string(fours) +
                  ", rotation orth err " + sci(orth)};
}

Outcome check_determinism() {
  TrainConfig config;
  config.kernel.dim = 8;
  config.steps = 3;
  config.n_per_step = 40;
  config.early_stop_patience = 0;
  const TargetSpec target{parse_target("x1 + x2*x3", 8), std::nullopt, 0.1};
  const Dataset test = make_test_set(Distribution::hypercube, target, 100, 11);
  SyntheticSource s1(Distribution::hypercube, target, 40, 11);
  SyntheticSource s2(Distribution::hypercube, target, 40, 11);
  const std::string a = trace_jsonl(irkm_run(config, s1, test).trace, Method::irkm, false);
  const std::string b = trace_jsonl(irkm_run(config, s2, test).trace, Method::irkm, false);
  return {a == b, a == b ? "identical traces" : "traces differ"};
}

Outcome check_parser() {
  const FourierPolynomial f = parse_target("x1 + x2 + x3 + x1*x2*x3");
  bool ok = f.size() == 4 && f.coefficient({0, 1, 2}) == 1.0;
  const FourierPolynomial g = parse_target("2*x1 - x2");
  ok = ok && g.coefficient({0}) == 2.0 && g.coefficient({1}) == -1.0 && g.size() == 2;
  try {
    parse_target("x1*x1");
    ok = false;
  } catch (const DuplicateVariable&) {
  }
  ok = ok && parse_target(to_string(g)) == g;
  return {ok, ok ? "examples parse" : "parser mismatch"};
}

}  // namespace

std::vector<VerifyCheck> run_verification(const VerifyOptions& options) {
  using Clock = std::chrono::steady_clock;
  RngStream rng(options.seed, 0xFEEDULL);
  std::vector<std::pair<std::string, std::function<Outcome()>>> suite = {
      {"coordinate weight vs enumeration", [&] { return check_coordinate_weights(rng); }},
      {"fourier coefficients / parseval", [&] { return check_fourier_identities(rng); }},
      {"leap vs brute force + maximality", [&] { return check_leap(rng); }},
      {"leap worked examples", [&] { return check_leap_examples(); }},
      {"hermite orthonormality + weights", [&] { return check_hermite(rng); }},
      {"input gradient vs finite diff", [&] { return check_gradient(options, rng); }},
      {"linear kernel gradient closed form", [&] { return check_linear_gradient(options, rng); }},
      {"weight derivative vs finite diff", [&] { return check_weight_derivative(rng); }},
      {"DN / AGOP identities", [&] { return check_dn(rng); }},
      {"spd solve / sqrt / angles", [&] { return check_linear_algebra(); }},
      {"interpolation + shrinkage", [&] { return check_interpolation_shrinkage(rng); }},
      {"safeguard normalization", [&] { return check_safeguard(rng); }},
      {"labels / streams / rotation", [&] { return check_sampling(rng); }},
      {"trainer determinism", [&] { return check_determinism(); }},
      {"target parser", [&] { return check_parser(); }},
  };
  std::vector<VerifyCheck> out;
  for (auto& [name, fn] : suite) {
    VerifyCheck c;
    c.name = name;
    const auto start = Clock::now();
    try {
      const Outcome o = fn();
      c.passed = o.passed;
      c.detail = o.detail;
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = std::string("threw: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    out.push_back(std::move(c));
  }
  return out;
}

std::string format_report(const std::vector<VerifyCheck>& checks) {
  std::ostringstream os;
  int passed = 0;
  for (const VerifyCheck& c : checks) {
    char line[256];
    std::snprintf(line, sizeof line, "%-4s  %-36s %7.2fs  ", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.seconds);
    os << line << c.detail << "\n";
    passed += c.passed;
  }
  os << passed << "/" << checks.size() << " checks passed\n";
  return os.str();
}

}  // namespace irkm
