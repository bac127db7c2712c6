#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sepdec {

/// Exponent vector of a monomial x1^a1 ... xn^an.
using Monomial = std::vector<int>;

int degree(const Monomial& m);

/// Graded ordering: lower total degree first; ties broken lexicographically
/// with variable 1 most significant and the larger exponent first, so for
/// two variables the degree-1 monomials appear as x1, x2.
bool monomial_less(const Monomial& a, const Monomial& b);

/// All monomials in `nvars` variables of total degree <= d, in the order
/// above. The degree-<=t monomials always form a prefix of the degree-<=d
/// list, so truncating a moment vector is a head() operation.
std::vector<Monomial> monomial_basis(int nvars, int d);

std::int64_t binomial(int n, int k);

/// Monomial basis plus an index lookup. Instances are immutable; use
/// basis_for() to share them between threads.
class MonomialBasis {
 public:
  MonomialBasis(int nvars, int deg);

  int nvars() const { return nvars_; }
  int deg() const { return deg_; }
  int size() const { return static_cast<int>(list_.size()); }
  const Monomial& operator[](int i) const { return list_[i]; }
  const std::vector<Monomial>& list() const { return list_; }

  /// Position of an exponent vector; throws if it is not in the basis.
  int index_of(const Monomial& m) const;

 private:
  int nvars_;
  int deg_;
  std::vector<Monomial> list_;
  std::map<Monomial, int> index_;
};

/// Shared immutable basis cache keyed by (nvars, deg).
const MonomialBasis& basis_for(int nvars, int deg);

/// Sparse real polynomial in a fixed number of variables. Coefficients
/// below 1e-15 are pruned after arithmetic.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}
  static Polynomial constant(int nvars, double c);
  static Polynomial variable(int nvars, int j);
  static Polynomial monomial(int nvars, const Monomial& m, double c);

  int nvars() const { return nvars_; }
  const std::map<Monomial, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int total_degree() const;

  void add_term(const Monomial& m, double c);

  Polynomial& operator+=(const Polynomial& q);
  Polynomial& operator-=(const Polynomial& q);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial p, const Polynomial& q) { return p += q; }
  friend Polynomial operator-(Polynomial p, const Polynomial& q) { return p -= q; }
  friend Polynomial operator*(Polynomial p, double s) { return p *= s; }
  friend Polynomial operator*(const Polynomial& p, const Polynomial& q);

  double operator()(const Eigen::VectorXd& x) const { return evaluate(*this, x); }

  /// One term per line, "coeff * x1^a1 x2^a2 ...".
  std::string to_string() const;

  friend double evaluate(const Polynomial& p, const Eigen::VectorXd& x);

 private:
  void prune();
  int nvars_ = 0;
  std::map<Monomial, double> terms_;
};

double evaluate(const Polynomial& p, const Eigen::VectorXd& x);

/// Generic sum-of-squares polynomial of degree at most d (even): the full
/// Gram construction F = sum_j q_j^2 over the complete degree-d/2 basis with
/// seeded standard-normal coefficients. Deterministic for a fixed seed.
Polynomial random_sos(int nvars, int d, std::uint64_t seed);

}  // namespace sepdec
