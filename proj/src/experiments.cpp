#include "irkm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#ifndef IRKM_VERSION
#define IRKM_VERSION "0.1.0"
#endif

namespace irkm {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Target expressions

namespace {

class TargetParser {
 public:
  explicit TargetParser(std::string_view text) : s_(text) {}

  std::vector<std::pair<Subset, double>> parse() {
    std::vector<std::pair<Subset, double>> terms;
    skip_ws();
    if (at_end()) throw ParseError("empty expression", pos_);
    double sign = 1.0;
    if (accept_minus()) {
      sign = -1.0;
    } else if (peek() == '+') {
      ++pos_;
    }
    while (true) {
      skip_ws();
      auto term = parse_term();
      term.second *= sign;
      terms.push_back(std::move(term));
      skip_ws();
      if (at_end()) break;
      if (accept_minus()) {
        sign = -1.0;
      } else if (peek() == '+') {
        ++pos_;
        sign = 1.0;
      } else {
        throw ParseError(std::string("expected '+' or '-', found '") + peek() + "'", pos_);
      }
    }
    return terms;
  }

  int max_index() const { return max_index_; }

 private:
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }

  void skip_ws() {
    while (!at_end() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) {
      ++pos_;
    }
  }

  // ASCII '-' or U+2212 MINUS SIGN.
  bool accept_minus() {
    if (peek() == '-') {
      ++pos_;
      return true;
    }
    if (s_.substr(pos_, 3) == "\xE2\x88\x92") {
      pos_ += 3;
      return true;
    }
    return false;
  }

  std::pair<Subset, double> parse_term() {
    double coef = 1.0;
    if (peek() != 'x') {
      coef = parse_number();
      skip_ws();
      if (peek() != '*') return {Subset{}, coef};
      ++pos_;
      skip_ws();
    }
    Subset vars;
    std::map<int, std::size_t> seen;
    while (true) {
      const std::size_t start = pos_;
      const int v = parse_var();
      if (seen.count(v)) throw DuplicateVariable("x" + std::to_string(v + 1), start);
      seen[v] = start;
      vars.push_back(v);
      skip_ws();
      if (peek() != '*') break;
      ++pos_;
      skip_ws();
    }
    return {vars, coef};
  }

  double parse_number() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                         s_[pos_] == 'e' || s_[pos_] == 'E' ||
                         ((s_[pos_] == '+' || s_[pos_] == '-') && pos_ > start &&
                          (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E')))) {
      ++pos_;
    }
    if (pos_ == start) throw ParseError("expected a coefficient or variable", start);
    double value = 0.0;
    const char* first = s_.data() + start;
    const char* last = s_.data() + pos_;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
      throw ParseError("malformed number", start);
    }
    return value;
  }

  int parse_var() {
    const std::size_t start = pos_;
    if (peek() != 'x') throw ParseError("expected variable 'x<k>'", start);
    ++pos_;
    const std::size_t digits = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ == digits) throw ParseError("variable needs an index", start);
    int index = 0;
    const auto [ptr, ec] = std::from_chars(s_.data() + digits, s_.data() + pos_, index);
    if (ec != std::errc() || index < 1) throw ParseError("variable index must be >= 1", start);
    max_index_ = std::max(max_index_, index);
    return index - 1;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int max_index_ = 0;
};

}  // namespace

FourierPolynomial parse_target(std::string_view text, std::optional<int> dim) {
  TargetParser parser(text);
  const auto terms = parser.parse();
  int d = std::max(parser.max_index(), 1);
  if (dim) {
    if (parser.max_index() > *dim) {
      throw ParseError("variable x" + std::to_string(parser.max_index()) + " exceeds dimension " +
                           std::to_string(*dim),
                       0);
    }
    d = *dim;
  }
  FourierPolynomial f(d);
  for (const auto& [s, c] : terms) f.add_term(s, c);
  return f;
}

// ---------------------------------------------------------------------------
// Config

std::string_view to_string(Method m) {
  switch (m) {
    case Method::krr: return "krr";
    case Method::irkm: return "irkm";
    case Method::rfm: return "rfm";
  }
  return "?";
}

namespace {

Method method_from_string(const std::string& s) {
  if (s == "krr") return Method::krr;
  if (s == "irkm") return Method::irkm;
  if (s == "rfm") return Method::rfm;
  throw ConfigError("method", "expected one of krr, irkm, rfm; got '" + s + "'");
}

std::string_view normalization_name(Normalization n) {
  switch (n) {
    case Normalization::none: return "none";
    case Normalization::zscore: return "zscore";
    case Normalization::minus_one_one: return "minus_one_one";
  }
  return "?";
}

Normalization normalization_from_string(const std::string& s) {
  if (s == "none") return Normalization::none;
  if (s == "zscore") return Normalization::zscore;
  if (s == "minus_one_one") return Normalization::minus_one_one;
  throw ConfigError("csv.normalization", "expected none, zscore or minus_one_one");
}

constexpr std::string_view kSafeguardRule = "d^-0.75";

// Typed access to one JSON object; rejects keys that were never asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "config" : prefix_, "expected an object");
  }

  std::string key(const std::string& k) const { return prefix_.empty() ? k : prefix_ + "." + k; }

  const json* find(const std::string& k) {
    known_.insert(k);
    const auto it = j_.find(k);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  double number(const std::string& k, double fallback) {
    const json* v = find(k);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(key(k), "expected a number");
    return v->get<double>();
  }

  std::int64_t integer(const std::string& k, std::int64_t fallback) {
    const json* v = find(k);
    if (!v) return fallback;
    return as_integer(*v, key(k));
  }

  bool boolean(const std::string& k, bool fallback) {
    const json* v = find(k);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(key(k), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& k, const std::string& fallback) {
    const json* v = find(k);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(key(k), "expected a string");
    return v->get<std::string>();
  }

  void reject_unknown() const {
    for (const auto& [k, v] : j_.items()) {
      if (!known_.count(k)) throw ConfigError(key(k), "unknown key");
    }
  }

  static std::int64_t as_integer(const json& v, const std::string& name) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<std::int64_t>(x);
    }
    throw ConfigError(name, "expected an integer");
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> known_;
};

KernelConfig kernel_from_json(const json& j) {
  ObjectReader r(j, "kernel");
  KernelConfig k;
  try {
    k.family = kernel_family_from_string(r.string("family", std::string(to_string(k.family))));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("kernel.family", e.what());
  }
  if (const json* s = r.find("sigma")) {
    if (s->is_string()) {
      if (s->get<std::string>() != "auto") throw ConfigError("kernel.sigma", "expected a number or \"auto\"");
    } else if (s->is_number()) {
      k.sigma = s->get<double>();
      if (!(*k.sigma > 0.0) || !std::isfinite(*k.sigma)) throw ConfigError("kernel.sigma", "must be > 0");
    } else {
      throw ConfigError("kernel.sigma", "expected a number or \"auto\"");
    }
  }
  k.degree = static_cast<int>(r.integer("degree", k.degree));
  if (k.degree < 1) throw ConfigError("kernel.degree", "must be >= 1");
  k.offset = r.number("offset", k.offset);
  if (!(k.offset >= 0.0) || !std::isfinite(k.offset)) throw ConfigError("kernel.offset", "must be >= 0");
  k.scale = r.number("scale", k.scale);
  if (!(k.scale > 0.0) || !std::isfinite(k.scale)) throw ConfigError("kernel.scale", "must be > 0");
  r.reject_unknown();
  return k;
}

CsvConfig csv_from_json(const json& j) {
  ObjectReader r(j, "csv");
  CsvConfig c;
  c.train = r.string("train", "");
  if (c.train.empty()) throw ConfigError("csv.train", "required");
  c.test = r.string("test", "");
  if (c.test.empty()) throw ConfigError("csv.test", "required");
  c.label = r.string("label", "");
  if (c.label.empty()) throw ConfigError("csv.label", "required");
  if (const json* f = r.find("features")) {
    if (!f->is_array()) throw ConfigError("csv.features", "expected a list of column names");
    for (const json& name : *f) {
      if (!name.is_string()) throw ConfigError("csv.features", "expected a list of column names");
      c.features.push_back(name.get<std::string>());
    }
  }
  c.normalization = normalization_from_string(r.string("normalization", "zscore"));
  r.reject_unknown();
  return c;
}

template <typename T>
bool positive_finite(T x) {
  return x > 0 && std::isfinite(static_cast<double>(x));
}

}  // namespace

std::vector<Eigen::Index> ExperimentConfig::sample_sizes() const {
  std::vector<Eigen::Index> out = n;
  for (double delta : n_exponents) {
    out.push_back(static_cast<Eigen::Index>(std::llround(std::pow(static_cast<double>(d), delta))));
  }
  return out;
}

ExperimentConfig config_from_json(const json& j) {
  ObjectReader r(j, "");
  ExperimentConfig c;
  c.method = method_from_string(r.string("method", "irkm"));
  c.distribution = r.string("distribution", c.distribution);
  if (c.distribution != "hypercube" && c.distribution != "gaussian" && c.distribution != "csv") {
    throw ConfigError("distribution", "expected hypercube, gaussian or csv");
  }
  const bool csv = c.distribution == "csv";
  c.d = static_cast<int>(r.integer("d", 0));
  if (c.d < 0 || (!csv && c.d < 1)) throw ConfigError("d", "must be >= 1");

  if (const json* n = r.find("n")) {
    if (n->is_array()) {
      for (const json& v : *n) c.n.push_back(ObjectReader::as_integer(v, "n"));
    } else {
      c.n.push_back(ObjectReader::as_integer(*n, "n"));
    }
    for (Eigen::Index v : c.n) {
      if (v < 1) throw ConfigError("n", "sample sizes must be >= 1");
    }
  }
  if (const json* e = r.find("n_exponents")) {
    if (!e->is_array()) throw ConfigError("n_exponents", "expected a list of numbers");
    for (const json& v : *e) {
      if (!v.is_number() || !positive_finite(v.get<double>())) {
        throw ConfigError("n_exponents", "exponents must be positive numbers");
      }
      c.n_exponents.push_back(v.get<double>());
    }
  }
  if (!c.n.empty() && !c.n_exponents.empty()) throw ConfigError("n_exponents", "give n or n_exponents, not both");
  if (!csv && c.n.empty() && c.n_exponents.empty()) throw ConfigError("n", "required (or n_exponents)");
  if (csv && !c.n_exponents.empty()) throw ConfigError("n_exponents", "not supported for csv data");
  for (Eigen::Index v : c.sample_sizes()) {
    if (v < 1) throw ConfigError("n_exponents", "expands to a sample size below 1");
  }

  c.steps = static_cast<int>(r.integer("T", c.steps));
  if (c.steps < 1) throw ConfigError("T", "must be >= 1");
  c.alpha = r.number("alpha", c.alpha);
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw ConfigError("alpha", "must lie in [0, 1]");
  if (const json* e = r.find("eps_s")) {
    if (e->is_string()) {
      if (e->get<std::string>() != kSafeguardRule) throw ConfigError("eps_s", "expected a number or \"d^-0.75\"");
    } else if (e->is_number()) {
      c.eps_s = e->get<double>();
      if (!positive_finite(*c.eps_s)) throw ConfigError("eps_s", "must be > 0");
    } else {
      throw ConfigError("eps_s", "expected a number or \"d^-0.75\"");
    }
  }
  c.lambda = r.number("lambda", c.lambda);
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw ConfigError("lambda", "must be >= 0");
  if (const json* k = r.find("kernel")) c.kernel = kernel_from_json(*k);

  c.target = r.string("target", "");
  if (!csv) {
    if (c.target.empty()) throw ConfigError("target", "required for synthetic data");
    try {
      parse_target(c.target, c.d);
    } catch (const ParseError& e) {
      throw ConfigError("target", e.what());
    }
  }
  c.rotation = r.boolean("rotation", c.rotation);
  if (csv && c.rotation) throw ConfigError("rotation", "not supported for csv data");
  c.noise_sigma = r.number("noise_sigma", c.noise_sigma);
  if (!(c.noise_sigma >= 0.0) || !std::isfinite(c.noise_sigma)) throw ConfigError("noise_sigma", "must be >= 0");

  if (const json* s = r.find("seeds")) {
    if (!s->is_array() || s->empty()) throw ConfigError("seeds", "expected a non-empty list of integers");
    c.seeds.clear();
    for (const json& v : *s) {
      if (v.is_number_unsigned()) {
        c.seeds.push_back(v.get<std::uint64_t>());
      } else {
        const std::int64_t x = ObjectReader::as_integer(v, "seeds");
        if (x < 0) throw ConfigError("seeds", "seeds must be >= 0");
        c.seeds.push_back(static_cast<std::uint64_t>(x));
      }
    }
  }
  if (r.find("test_size")) {
    c.test_size = r.integer("test_size", 0);
    if (*c.test_size < 1) throw ConfigError("test_size", "must be >= 1");
    if (csv) throw ConfigError("test_size", "not used for csv data");
  }
  c.resample = r.boolean("resample", c.resample);
  c.out_dir = r.string("out_dir", c.out_dir);
  if (c.out_dir.empty()) throw ConfigError("out_dir", "must not be empty");
  c.early_stop_patience = static_cast<int>(r.integer("early_stop_patience", c.early_stop_patience));
  if (c.early_stop_patience < 0) throw ConfigError("early_stop_patience", "must be >= 0");
  c.top_k = static_cast<int>(r.integer("top_k", c.top_k));
  if (c.top_k < 1 || (c.method == Method::rfm && c.d > 0 && c.top_k > c.d)) {
    throw ConfigError("top_k", "must lie in [1, d]");
  }
  c.agop_samples = static_cast<int>(r.integer("agop_samples", c.agop_samples));
  if (c.agop_samples < 0) throw ConfigError("agop_samples", "must be >= 0");
  if (r.find("pool_size")) {
    c.pool_size = r.integer("pool_size", 0);
    if (*c.pool_size < 1) throw ConfigError("pool_size", "must be >= 1");
    if (csv) throw ConfigError("pool_size", "csv data is already a finite pool");
  }
  c.trace_wall_ms = r.boolean("trace_wall_ms", c.trace_wall_ms);
  if (const json* s = r.find("csv")) c.csv = csv_from_json(*s);
  if (csv && !c.csv) throw ConfigError("csv", "required when distribution is csv");
  if (!csv && c.csv) throw ConfigError("csv", "only valid when distribution is csv");
  r.reject_unknown();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

json to_json(const ExperimentConfig& c) {
  ordered k;
  k["family"] = std::string(to_string(c.kernel.family));
  k["sigma"] = c.kernel.sigma ? ordered(*c.kernel.sigma) : ordered("auto");
  k["degree"] = c.kernel.degree;
  k["offset"] = c.kernel.offset;
  k["scale"] = c.kernel.scale;

  ordered j;
  j["method"] = std::string(to_string(c.method));
  j["distribution"] = c.distribution;
  j["d"] = c.d;
  j["n"] = c.n;
  j["n_exponents"] = c.n_exponents;
  j["T"] = c.steps;
  j["alpha"] = c.alpha;
  j["eps_s"] = c.eps_s ? ordered(*c.eps_s) : ordered(std::string(kSafeguardRule));
  j["lambda"] = c.lambda;
  j["kernel"] = k;
  j["target"] = c.target;
  j["rotation"] = c.rotation;
  j["noise_sigma"] = c.noise_sigma;
  j["seeds"] = c.seeds;
  j["test_size"] = c.test_size ? ordered(*c.test_size) : ordered(nullptr);
  j["resample"] = c.resample;
  j["out_dir"] = c.out_dir;
  j["early_stop_patience"] = c.early_stop_patience;
  j["top_k"] = c.top_k;
  j["agop_samples"] = c.agop_samples;
  j["pool_size"] = c.pool_size ? ordered(*c.pool_size) : ordered(nullptr);
  j["trace_wall_ms"] = c.trace_wall_ms;
  if (c.csv) {
    ordered s;
    s["train"] = c.csv->train;
    s["test"] = c.csv->test;
    s["label"] = c.csv->label;
    s["features"] = c.csv->features;
    s["normalization"] = std::string(normalization_name(c.csv->normalization));
    j["csv"] = s;
  } else {
    j["csv"] = nullptr;
  }
  return json::parse(j.dump());
}

std::string version_string() { return IRKM_VERSION; }

// ---------------------------------------------------------------------------
// Runs

namespace {

struct Problem {
  std::unique_ptr<DataSource> source;
  Dataset test;
  std::optional<TargetSpec> target;
  std::optional<Distribution> dist;
  bool csv = false;
};

Problem build_problem(const ExperimentConfig& c, Eigen::Index n, std::uint64_t seed) {
  Problem p;
  if (c.distribution == "csv") {
    p.csv = true;
    const CsvSchema schema{c.csv->label, c.csv->features, c.csv->normalization};
    Dataset train = load_csv(c.csv->train, schema);
    p.test = load_csv(c.csv->test, schema);
    if (c.d > 0 && train.dim() != c.d) {
      throw ConfigError("d", "config says " + std::to_string(c.d) + " but the data has " +
                                 std::to_string(train.dim()) + " features");
    }
    if (n <= 0 || n >= train.size()) {
      p.source = std::make_unique<FixedSource>(std::move(train));
    } else if (c.resample) {
      p.source = std::make_unique<PoolSource>(std::move(train), n);
    } else {
      Dataset head{train.x.topRows(n), train.y.head(n), train.source};
      p.source = std::make_unique<FixedSource>(std::move(head));
    }
    return p;
  }

  p.dist = c.distribution == "gaussian" ? Distribution::gaussian : Distribution::hypercube;
  TargetSpec target{parse_target(c.target, c.d), std::nullopt, c.noise_sigma};
  if (c.rotation) {
    RngStream rot = substream(seed, StreamPurpose::rotation);
    target.rotation = random_rotation(c.d, rot);
  }
  const Eigen::Index m = c.test_size ? *c.test_size : std::min<Eigen::Index>(10 * n, 10000);
  p.test = make_test_set(*p.dist, target, m, seed);
  if (c.pool_size) {
    // Step 0 is never requested by the trainers, so its draw is free to seed the pool.
    Dataset pool = SyntheticSource(*p.dist, target, *c.pool_size, seed).draw(0);
    p.source = std::make_unique<PoolSource>(std::move(pool), n);
  } else {
    p.source = std::make_unique<SyntheticSource>(*p.dist, target, n, seed);
  }
  p.target = std::move(target);
  return p;
}

TrainConfig train_config(const ExperimentConfig& c, Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
  TrainConfig t;
  t.alpha = c.alpha;
  t.eps_s = c.eps_s;
  t.steps = c.steps;
  t.lambda = c.lambda;
  t.kernel.family = c.kernel.family;
  t.kernel.bandwidth = c.kernel.sigma.value_or(1.0);
  t.kernel.scale = c.kernel.scale;
  t.kernel.degree = c.kernel.degree;
  t.kernel.offset = c.kernel.offset;
  t.kernel.dim = d;
  t.auto_bandwidth = !c.kernel.sigma;
  t.n_per_step = n;
  t.resample = c.resample;
  t.early_stop_patience = c.early_stop_patience;
  t.seed = seed;
  t.top_k = c.top_k;
  return t;
}

std::optional<double> binary_accuracy(const KrrModel& model, const Dataset& test) {
  if (!(test.y.array() == 0.0 || test.y.array() == 1.0).all()) return std::nullopt;
  const Vector pred = predict(model, test.x);
  const double hits = ((pred.array() >= 0.5).cast<double>() == test.y.array()).cast<double>().sum();
  return hits / static_cast<double>(test.size());
}

void require_finite(const TrainTrace& trace) {
  for (const StepRecord& s : trace.steps) {
    if (!std::isfinite(s.test_mse)) {
      throw NumericalFailure("non-finite test MSE at step " + std::to_string(s.step));
    }
  }
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config, Eigen::Index n, std::uint64_t seed) {
  Problem p = build_problem(config, n, seed);
  if (n <= 0) n = p.source->draw(1).size();
  const Eigen::Index d = p.source->dim();
  const TrainConfig tc = train_config(config, d, n, seed);
  if (config.method == Method::rfm && tc.top_k > d) throw ConfigError("top_k", "must lie in [1, d]");

  RunOutcome out;
  out.method = config.method;
  out.n = n;
  out.seed = seed;
  std::optional<KrrModel> model;
  if (config.method == Method::krr) {
    const Dataset batch = p.source->draw(1);
    BaselineResult base = krr_baseline(tc, batch, p.test);
    StepRecord rec;
    rec.step = 1;
    rec.test_mse = base.test_mse;
    rec.weights = Vector::Ones(d);
    rec.sigma = base.sigma;
    rec.jitter = base.model.jitter_used();
    out.trace.steps.push_back(rec);
    out.trace.best_step = 1;
    out.trace.best_test_mse = base.test_mse;
    model.emplace(std::move(base.model));
  } else {
    std::optional<SymmetricMatrix> truth;
    if (config.method == Method::rfm && p.target && config.agop_samples > 0) {
      RngStream cal = substream(seed, StreamPurpose::calibration);
      truth = target_agop(*p.target, sample(*p.dist, config.agop_samples, d, cal));
    }
    TrainResult result = config.method == Method::irkm ? irkm_run(tc, *p.source, p.test)
                                                       : rfm_run(tc, *p.source, p.test, truth);
    out.trace = std::move(result.trace);
    model.emplace(std::move(result.model));
    out.baseline_test_mse = krr_baseline(tc, p.source->draw(1), p.test).test_mse;
  }
  require_finite(out.trace);
  out.final_test_mse = out.trace.best_test_mse;
  if (p.csv) out.test_accuracy = binary_accuracy(*model, p.test);
  return out;
}

std::string trace_jsonl(const TrainTrace& trace, Method method, bool wall_ms) {
  std::string out;
  for (const StepRecord& s : trace.steps) {
    ordered j;
    j["step"] = s.step;
    j["test_mse"] = s.test_mse;
    const std::vector<double> weights(s.weights.data(), s.weights.data() + s.weights.size());
    j[method == Method::rfm ? "eigvals" : "weights"] = weights;
    j["w1_raw"] = std::vector<double>(s.w1_raw.data(), s.w1_raw.data() + s.w1_raw.size());
    j["w2_raw"] = std::vector<double>(s.w2_raw.data(), s.w2_raw.data() + s.w2_raw.size());
    j["sigma"] = s.sigma;
    j["jitter"] = s.jitter;
    if (s.agop_error) j["agop_error"] = *s.agop_error;
    if (s.principal_angle) j["principal_angle"] = *s.principal_angle;
    if (wall_ms) j["wall_ms"] = s.wall_ms;
    out += j.dump();
    out += '\n';
  }
  return out;
}

ordered summary_json(const ExperimentConfig& config, const RunOutcome& o) {
  const StepRecord& best = o.trace.best();
  ordered j;
  j["version"] = version_string();
  j["method"] = std::string(to_string(o.method));
  j["seed"] = o.seed;
  j["n"] = o.n;
  j["d"] = best.weights.size();
  j["best_step"] = o.trace.best_step;
  j["best_test_mse"] = o.trace.best_test_mse;
  j["final_test_mse"] = o.final_test_mse;
  j["last_step_test_mse"] = o.trace.steps.back().test_mse;
  j["steps_run"] = o.trace.steps.size();
  j["baseline_test_mse"] = o.baseline_test_mse ? ordered(*o.baseline_test_mse) : ordered(nullptr);
  j["test_accuracy"] = o.test_accuracy ? ordered(*o.test_accuracy) : ordered(nullptr);
  j[o.method == Method::rfm ? "best_eigvals" : "best_weights"] =
      std::vector<double>(best.weights.data(), best.weights.data() + best.weights.size());
  j["config"] = ordered::parse(to_json(config).dump());
  return j;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace

void write_run_artifacts(const std::filesystem::path& dir, const ExperimentConfig& config,
                         const RunOutcome& outcome) {
  std::filesystem::create_directories(dir);
  write_file(dir / "trace.jsonl", trace_jsonl(outcome.trace, outcome.method, config.trace_wall_ms));
  std::string timing;
  for (const StepRecord& s : outcome.trace.steps) {
    ordered t;
    t["step"] = s.step;
    t["wall_ms"] = s.wall_ms;
    timing += t.dump() + "\n";
  }
  write_file(dir / "timing.jsonl", timing);
  write_file(dir / "summary.json", summary_json(config, outcome).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Sweeps

std::vector<PlotRow> aggregate(const std::vector<SweepRow>& rows) {
  std::vector<PlotRow> out;
  std::vector<std::vector<double>> values;
  for (const SweepRow& r : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const PlotRow& p) { return p.method == r.method && p.n == r.n; });
    if (it == out.end()) {
      out.push_back(PlotRow{r.method, r.n, 0.0, 0.0, 0});
      values.emplace_back();
      it = out.end() - 1;
    }
    values[static_cast<std::size_t>(it - out.begin())].push_back(r.test_mse);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& v = values[i];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out[i].mean = mean;
    out[i].stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    out[i].count = static_cast<int>(v.size());
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "method,d,n,seed,step_best,test_mse\n";
  for (const SweepRow& r : rows) {
    out += r.method + "," + std::to_string(r.d) + "," + std::to_string(r.n) + "," + std::to_string(r.seed) +
           "," + std::to_string(r.step_best) + "," + format_double(r.test_mse) + "\n";
  }
  return out;
}

std::string plotdata_csv(const std::vector<PlotRow>& rows) {
  std::string out = "method,n,mean_test_mse,std_test_mse,count\n";
  for (const PlotRow& r : rows) {
    out += r.method + "," + std::to_string(r.n) + "," + format_double(r.mean) + "," +
           format_double(r.stddev) + "," + std::to_string(r.count) + "\n";
  }
  return out;
}

unsigned thread_budget() {
  unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("IRKM_THREADS"); env && *env) {
    unsigned cap = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec != std::errc() || ptr != s.data() + s.size() || cap == 0) {
      throw ConfigError("IRKM_THREADS", "must be a positive integer");
    }
    return cap;
  }
  return hw;
}

std::filesystem::path cmd_run(const ExperimentConfig& config) {
  const auto sizes = config.sample_sizes();
  if (sizes.size() > 1) throw ConfigError("n", "run takes a single sample size; use sweep for grids");
  if (config.seeds.size() != 1) throw ConfigError("seeds", "run takes a single seed; use sweep for several");
  const RunOutcome outcome = run_experiment(config, sizes.empty() ? 0 : sizes.front(), config.seeds.front());
  const std::filesystem::path dir(config.out_dir);
  write_run_artifacts(dir, config, outcome);
  return dir;
}

std::vector<SweepRow> cmd_sweep(const ExperimentConfig& config) {
  std::vector<Eigen::Index> sizes = config.sample_sizes();
  if (sizes.empty()) sizes.push_back(0);  // csv: whole training file
  struct Task {
    Eigen::Index n;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (Eigen::Index n : sizes) {
    for (std::uint64_t s : config.seeds) tasks.push_back({n, s});
  }
  const std::filesystem::path root(config.out_dir);
  std::vector<std::optional<RunOutcome>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const Task& t = tasks[i];
        RunOutcome o = run_experiment(config, t.n, t.seed);
        write_run_artifacts(root / ("n" + std::to_string(t.n) + "_seed" + std::to_string(t.seed)), config, o);
        results[i] = std::move(o);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks.size();
      }
    }
  };
  const unsigned threads = std::min<std::size_t>(thread_budget(), tasks.size());
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<SweepRow> rows;
  for (const auto& r : results) {
    const int d = static_cast<int>(r->trace.steps.front().weights.size());
    rows.push_back({std::string(to_string(r->method)), d, r->n, r->seed, r->trace.best_step, r->final_test_mse});
  }
  std::filesystem::create_directories(root);
  write_file(root / "sweep.csv", sweep_csv(rows));
  write_file(root / "plotdata.csv", plotdata_csv(aggregate(rows)));
  return rows;
}

}  // namespace irkm
