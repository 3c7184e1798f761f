#include "irkm/orthopoly.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>

namespace irkm {

namespace {

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Non-constant terms with coordinates remapped to a dense range, as bitsets.
struct LeapTerms {
  std::vector<Subset> sets;
  std::vector<std::vector<std::uint64_t>> bits;
  std::size_t words = 0;
};

LeapTerms leap_terms(const FourierPolynomial& f) {
  LeapTerms lt;
  std::map<int, int> remap;
  for (const auto& [s, c] : f.terms()) {
    if (s.empty()) continue;
    lt.sets.push_back(s);
    for (int i : s) remap.emplace(i, static_cast<int>(remap.size()));
  }
  lt.words = (remap.size() + 63) / 64;
  for (const auto& s : lt.sets) {
    std::vector<std::uint64_t> b(lt.words, 0);
    for (int i : s) {
      const int r = remap.at(i);
      b[static_cast<std::size_t>(r / 64)] |= std::uint64_t{1} << (r % 64);
    }
    lt.bits.push_back(std::move(b));
  }
  return lt;
}

int new_coordinates(const std::vector<std::uint64_t>& term, const std::vector<std::uint64_t>& cover) {
  int count = 0;
  for (std::size_t w = 0; w < term.size(); ++w) count += std::popcount(term[w] & ~cover[w]);
  return count;
}

// Depth-first reachability over sets of used terms. A state's cover depends
// only on the set, so each mask is expanded at most once.
bool leap_feasible(const LeapTerms& lt, int k) {
  const std::size_t m = lt.sets.size();
  const std::uint32_t full = m == 32 ? ~0u : (std::uint32_t{1} << m) - 1;
  std::vector<bool> visited(std::size_t{1} << m, false);
  std::function<bool(std::uint32_t, const std::vector<std::uint64_t>&)> visit =
      [&](std::uint32_t mask, const std::vector<std::uint64_t>& cover) -> bool {
    if (mask == full) return true;
    for (std::size_t t = 0; t < m; ++t) {
      const std::uint32_t next = mask | (std::uint32_t{1} << t);
      if (next == mask || visited[next]) continue;
      if (new_coordinates(lt.bits[t], cover) > k) continue;
      visited[next] = true;
      std::vector<std::uint64_t> grown = cover;
      for (std::size_t w = 0; w < grown.size(); ++w) grown[w] |= lt.bits[t][w];
      if (visit(next, grown)) return true;
    }
    return false;
  };
  visited[0] = true;
  return visit(0, std::vector<std::uint64_t>(lt.words, 0));
}

}  // namespace

FourierPolynomial::FourierPolynomial(int dim) : dim_(dim) {
  if (dim < 1) throw DimensionMismatch("FourierPolynomial: dimension must be >= 1");
}

FourierPolynomial::FourierPolynomial(int dim, const std::map<Subset, double>& terms)
    : FourierPolynomial(dim) {
  for (const auto& [s, c] : terms) add_term(s, c);
}

void FourierPolynomial::add_term(Subset s, double coefficient) {
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
    throw DimensionMismatch("FourierPolynomial: repeated coordinate in a term");
  }
  if (!s.empty() && (s.front() < 0 || s.back() >= dim_)) {
    throw IndexOutOfRange("FourierPolynomial: coordinate outside [0, " + std::to_string(dim_) + ")");
  }
  const double total = coefficient + coefficient_or_zero(s);
  if (total == 0.0) {
    terms_.erase(s);
  } else {
    terms_[std::move(s)] = total;
  }
}

double FourierPolynomial::coefficient_or_zero(const Subset& s) const {
  const auto it = terms_.find(s);
  return it == terms_.end() ? 0.0 : it->second;
}

double FourierPolynomial::coefficient(const Subset& s) const {
  Subset sorted = s;
  std::sort(sorted.begin(), sorted.end());
  return coefficient_or_zero(sorted);
}

int FourierPolynomial::degree() const {
  int deg = 0;
  for (const auto& [s, c] : terms_) deg = std::max(deg, static_cast<int>(s.size()));
  return deg;
}

std::string to_string(const FourierPolynomial& f) {
  if (f.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [s, c] : f.terms()) {
    if (first) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    first = false;
    const double mag = std::abs(c);
    std::string vars;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) vars += "*";
      vars += "x" + std::to_string(s[i] + 1);
    }
    if (s.empty()) {
      out += format_number(mag);
    } else if (mag == 1.0) {
      out += vars;
    } else {
      out += format_number(mag) + " * " + vars;
    }
  }
  return out;
}

double eval_fourier(const FourierPolynomial& f, const Vector& x) {
  if (x.size() != f.dim()) throw DimensionMismatch("eval_fourier: input length != dimension");
  double sum = 0.0;
  for (const auto& [s, c] : f.terms()) {
    double mono = c;
    for (int i : s) mono *= x(i);
    sum += mono;
  }
  return sum;
}

Vector eval_fourier(const FourierPolynomial& f, const Matrix& x) {
  if (x.cols() != f.dim()) throw DimensionMismatch("eval_fourier: input columns != dimension");
  Vector out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) = eval_fourier(f, Vector(x.row(r).transpose()));
  return out;
}

Vector gradient_fourier(const FourierPolynomial& f, const Vector& x) {
  if (x.size() != f.dim()) throw DimensionMismatch("gradient_fourier: input length != dimension");
  Vector g = Vector::Zero(f.dim());
  for (const auto& [s, c] : f.terms()) {
    for (int j : s) {
      double mono = c;
      for (int i : s) {
        if (i != j) mono *= x(i);
      }
      g(j) += mono;
    }
  }
  return g;
}

FourierPolynomial truncate(const FourierPolynomial& f, int p) {
  FourierPolynomial out(f.dim());
  for (const auto& [s, c] : f.terms()) {
    if (static_cast<int>(s.size()) <= p) out.add_term(s, c);
  }
  return out;
}

FourierPolynomial slice(const FourierPolynomial& f, int p) {
  FourierPolynomial out(f.dim());
  for (const auto& [s, c] : f.terms()) {
    if (static_cast<int>(s.size()) == p) out.add_term(s, c);
  }
  return out;
}

double coordinate_weight(const FourierPolynomial& f, int j, std::optional<int> p) {
  if (j < 0 || j >= f.dim()) {
    throw IndexOutOfRange("coordinate_weight: coordinate " + std::to_string(j) + " outside [0, " +
                          std::to_string(f.dim()) + ")");
  }
  if (p && *p < 0) throw NegativeDegree("coordinate_weight: truncation degree must be >= 0");
  double sum = 0.0;
  for (const auto& [s, c] : f.terms()) {
    if (p && static_cast<int>(s.size()) > *p) continue;
    if (std::binary_search(s.begin(), s.end(), j)) sum += c * c;
  }
  return sum;
}

FourierPolynomial discrete_derivative(const FourierPolynomial& f, const Subset& s) {
  Subset sorted = s;
  std::sort(sorted.begin(), sorted.end());
  for (int i : sorted) {
    if (i < 0 || i >= f.dim()) {
      throw IndexOutOfRange("discrete_derivative: coordinate " + std::to_string(i) + " outside [0, " +
                            std::to_string(f.dim()) + ")");
    }
  }
  FourierPolynomial out(f.dim());
  for (const auto& [t, c] : f.terms()) {
    if (!std::includes(t.begin(), t.end(), sorted.begin(), sorted.end())) continue;
    Subset rest;
    std::set_difference(t.begin(), t.end(), sorted.begin(), sorted.end(), std::back_inserter(rest));
    out.add_term(std::move(rest), c);
  }
  return out;
}

double discrete_derivative_expectation(const FourierPolynomial& f, const Subset& s) {
  return discrete_derivative(f, s).coefficient({});
}

int leap_complexity(const FourierPolynomial& f) {
  const LeapTerms lt = leap_terms(f);
  if (lt.sets.size() > 20) {
    throw TooManyTerms("leap_complexity: " + std::to_string(lt.sets.size()) +
                       " non-constant terms, at most 20 supported");
  }
  if (lt.sets.empty()) return 0;
  int lo = 0;
  int hi = 0;
  for (const auto& s : lt.sets) hi = std::max(hi, static_cast<int>(s.size()));
  // Feasibility is monotone in k and always holds at the largest term size.
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (leap_feasible(lt, mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

FourierPolynomial max_leap_component(const FourierPolynomial& f, int k) {
  // Whether a term can be added depends only on the current cover, and a
  // larger cover never disqualifies a term that was addable before. So the
  // order of additions does not matter: every valid ordering of any leap-≤k
  // sub-polynomial can be replayed on top of the closure, hence the closure
  // contains all of them and is the unique maximal leap-≤k component.
  FourierPolynomial out(f.dim());
  std::vector<bool> taken;
  std::vector<std::pair<Subset, double>> terms(f.terms().begin(), f.terms().end());
  taken.assign(terms.size(), false);
  std::vector<bool> cover(static_cast<std::size_t>(f.dim()), false);
  bool grown = true;
  while (grown) {
    grown = false;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (taken[t]) continue;
      const auto& s = terms[t].first;
      const auto fresh = std::count_if(s.begin(), s.end(), [&](int i) { return !cover[static_cast<std::size_t>(i)]; });
      if (fresh > k) continue;
      taken[t] = true;
      grown = true;
      for (int i : s) cover[static_cast<std::size_t>(i)] = true;
      out.add_term(s, terms[t].second);
    }
  }
  return out;
}

double hermite_eval(int k, double x) {
  if (k < 0) throw NegativeDegree("hermite_eval: degree " + std::to_string(k));
  // h_{j+1} = (x h_j − √j h_{j−1}) / √(j+1)
  double prev = 0.0;
  double cur = 1.0;
  for (int j = 0; j < k; ++j) {
    const double next = (x * cur - std::sqrt(static_cast<double>(j)) * prev) / std::sqrt(j + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite_eval_multi(const std::vector<int>& alpha, const Vector& x) {
  if (static_cast<Eigen::Index>(alpha.size()) != x.size()) {
    throw DimensionMismatch("hermite_eval_multi: multi-index length != input length");
  }
  double prod = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] != 0) prod *= hermite_eval(alpha[i], x(static_cast<Eigen::Index>(i)));
  }
  return prod;
}

HermitePolynomial::HermitePolynomial(int dim) : dim_(dim) {
  if (dim < 1) throw DimensionMismatch("HermitePolynomial: dimension must be >= 1");
}

void HermitePolynomial::add_term(std::vector<int> alpha, double coefficient) {
  if (static_cast<int>(alpha.size()) != dim_) {
    throw DimensionMismatch("HermitePolynomial: multi-index length != dimension");
  }
  for (int a : alpha) {
    if (a < 0) throw NegativeDegree("HermitePolynomial: negative multi-index entry");
  }
  const double total = coefficient + coefficient_or_zero(alpha);
  if (total == 0.0) {
    terms_.erase(alpha);
  } else {
    terms_[std::move(alpha)] = total;
  }
}

double HermitePolynomial::coefficient(const std::vector<int>& alpha) const {
  return coefficient_or_zero(alpha);
}

double HermitePolynomial::coefficient_or_zero(const std::vector<int>& alpha) const {
  const auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

double HermitePolynomial::eval(const Vector& x) const {
  double sum = 0.0;
  for (const auto& [alpha, c] : terms_) sum += c * hermite_eval_multi(alpha, x);
  return sum;
}

double hermite_coordinate_weight(const HermitePolynomial& f, int r, int p) {
  if (p < 1 || p > 2) {
    throw UnsupportedP("hermite_coordinate_weight: closed form only for p in {1, 2}, got " +
                       std::to_string(p));
  }
  if (r < 0 || r >= f.dim()) throw IndexOutOfRange("hermite_coordinate_weight: coordinate out of range");
  std::vector<int> alpha(static_cast<std::size_t>(f.dim()), 0);
  alpha[static_cast<std::size_t>(r)] = 1;
  const double linear = f.coefficient(alpha);
  double total = linear * linear;
  if (p == 1) return total;
  alpha[static_cast<std::size_t>(r)] = 2;
  const double square = f.coefficient(alpha);
  total += 2.0 * square * square;
  alpha[static_cast<std::size_t>(r)] = 1;
  for (int j = 0; j < f.dim(); ++j) {
    if (j == r) continue;
    alpha[static_cast<std::size_t>(j)] = 1;
    const double cross = f.coefficient(alpha);
    total += cross * cross;
    alpha[static_cast<std::size_t>(j)] = 0;
  }
  return total;
}

}  // namespace irkm
