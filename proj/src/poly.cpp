#include "sepdec/poly.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace sepdec {

int degree(const Monomial& m) {
  int d = 0;
  for (int e : m) d += e;
  return d;
}

bool monomial_less(const Monomial& a, const Monomial& b) {
  const int da = degree(a), db = degree(b);
  if (da != db) return da < db;
  // Within a degree: lexicographic, variable 1 most significant, larger
  // exponent first (x1^2 before x1 x2 before x2^2).
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return false;
}

namespace {

void enumerate_degree(int nvars, int t, int pos, Monomial& cur,
                      std::vector<Monomial>& out) {
  if (pos == nvars - 1) {
    cur[pos] = t;
    out.push_back(cur);
    cur[pos] = 0;
    return;
  }
  for (int e = t; e >= 0; --e) {
    cur[pos] = e;
    enumerate_degree(nvars, t - e, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace

std::vector<Monomial> monomial_basis(int nvars, int d) {
  if (nvars < 1 || d < 0) throw std::invalid_argument("monomial_basis: need nvars >= 1, d >= 0");
  std::vector<Monomial> out;
  out.reserve(static_cast<size_t>(binomial(nvars + d, d)));
  Monomial cur(nvars, 0);
  for (int t = 0; t <= d; ++t) enumerate_degree(nvars, t, 0, cur, out);
  return out;
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

MonomialBasis::MonomialBasis(int nvars, int deg)
    : nvars_(nvars), deg_(deg), list_(monomial_basis(nvars, deg)) {
  for (int i = 0; i < static_cast<int>(list_.size()); ++i) index_[list_[i]] = i;
}

int MonomialBasis::index_of(const Monomial& m) const {
  auto it = index_.find(m);
  if (it == index_.end()) throw std::invalid_argument("MonomialBasis: exponent not in basis");
  return it->second;
}

const MonomialBasis& basis_for(int nvars, int deg) {
  static std::mutex mu;
  static std::unordered_map<std::int64_t, std::unique_ptr<MonomialBasis>> cache;
  const std::int64_t key = static_cast<std::int64_t>(nvars) * 1000 + deg;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<MonomialBasis>(nvars, deg)).first;
  }
  return *it->second;
}

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  p.add_term(Monomial(nvars, 0), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int j) {
  Polynomial p(nvars);
  Monomial m(nvars, 0);
  m.at(j) = 1;
  p.add_term(m, 1.0);
  return p;
}

Polynomial Polynomial::monomial(int nvars, const Monomial& m, double c) {
  if (static_cast<int>(m.size()) != nvars) throw std::invalid_argument("Polynomial::monomial: exponent length mismatch");
  Polynomial p(nvars);
  p.add_term(m, c);
  return p;
}

int Polynomial::total_degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, degree(m));
  return d;
}

void Polynomial::add_term(const Monomial& m, double c) {
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < 1e-15) terms_.erase(it);
}

void Polynomial::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) < 1e-15) it = terms_.erase(it);
    else ++it;
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& q) {
  if (nvars_ != q.nvars_) throw std::invalid_argument("Polynomial: nvars mismatch");
  for (const auto& [m, c] : q.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& q) {
  if (nvars_ != q.nvars_) throw std::invalid_argument("Polynomial: nvars mismatch");
  for (const auto& [m, c] : q.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  for (auto& [m, c] : terms_) c *= s;
  prune();
  return *this;
}

Polynomial operator*(const Polynomial& p, const Polynomial& q) {
  if (p.nvars_ != q.nvars_) throw std::invalid_argument("Polynomial: nvars mismatch");
  Polynomial r(p.nvars_);
  Monomial sum(p.nvars_, 0);
  for (const auto& [ma, ca] : p.terms_) {
    for (const auto& [mb, cb] : q.terms_) {
      for (int i = 0; i < p.nvars_; ++i) sum[i] = ma[i] + mb[i];
      r.add_term(sum, ca * cb);
    }
  }
  r.prune();
  return r;
}

double evaluate(const Polynomial& p, const Eigen::VectorXd& x) {
  if (x.size() != p.nvars_) throw std::invalid_argument("evaluate: point length mismatch");
  double acc = 0;
  for (const auto& [m, c] : p.terms_) {
    double t = c;
    for (int i = 0; i < p.nvars_; ++i) {
      for (int e = 0; e < m[i]; ++e) t *= x[i];
    }
    acc += t;
  }
  return acc;
}

std::string Polynomial::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& [m, c] : terms_) {
    os << c << " *";
    for (int i = 0; i < nvars_; ++i) {
      if (m[i] > 0) os << " x" << (i + 1) << "^" << m[i];
    }
    os << "\n";
  }
  return os.str();
}

namespace {

// Explicit Box-Muller so the stream is deterministic across standard
// library implementations (std::normal_distribution is not).
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : eng_(seed) {}
  double next() {
    if (have_) {
      have_ = false;
      return cached_;
    }
    double u1 = 0;
    while (u1 <= 0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(2.0 * M_PI * u2);
    have_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  double uniform() {
    return (eng_() >> 11) * 0x1.0p-53;
  }
  std::mt19937_64 eng_;
  bool have_ = false;
  double cached_ = 0;
};

}  // namespace

Polynomial random_sos(int nvars, int d, std::uint64_t seed) {
  if (d % 2 != 0 || d < 0) throw std::invalid_argument("random_sos: degree must be even and nonnegative");
  const auto& half = basis_for(nvars, d / 2);
  NormalStream rng(seed);
  Polynomial f(nvars);
  for (int j = 0; j < half.size(); ++j) {
    Polynomial q(nvars);
    for (int i = 0; i < half.size(); ++i) q.add_term(half[i], rng.next());
    f += q * q;
  }
  return f;
}

}  // namespace sepdec
