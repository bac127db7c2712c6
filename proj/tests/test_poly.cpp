#include "doctest.h"

#include <random>

#include "sepdec/poly.hpp"

#include "oracles.hpp"

using namespace sepdec;

TEST_CASE("monomial basis order and sizes") {
  const auto b21 = monomial_basis(2, 1);
  REQUIRE(b21.size() == 3);
  CHECK(b21[0] == Monomial{0, 0});
  CHECK(b21[1] == Monomial{1, 0});
  CHECK(b21[2] == Monomial{0, 1});

  CHECK(monomial_basis(4, 3).size() == 35);   // C(7,3)
  CHECK(monomial_basis(8, 3).size() == 165);  // C(11,3)
  CHECK(binomial(7, 3) == 35);
  CHECK(binomial(11, 3) == 165);
}

TEST_CASE("basis is strictly increasing and index lookup inverts position") {
  const MonomialBasis& basis = basis_for(3, 4);
  CHECK(basis.size() == binomial(7, 4));
  for (int i = 0; i + 1 < basis.size(); ++i) {
    CHECK(monomial_less(basis[i], basis[i + 1]));
  }
  for (int i = 0; i < basis.size(); ++i) {
    CHECK(basis.index_of(basis[i]) == i);
  }
  CHECK_THROWS_AS(basis.index_of(Monomial{5, 0, 0}), std::invalid_argument);
}

TEST_CASE("degree-truncated bases are prefixes") {
  const MonomialBasis& big = basis_for(4, 6);
  const MonomialBasis& small = basis_for(4, 4);
  for (int i = 0; i < small.size(); ++i) CHECK(big[i] == small[i]);
}

TEST_CASE("polynomial evaluation") {
  Polynomial p = Polynomial::constant(1, 3.0);
  p.add_term(Monomial{2}, 2.0);
  CHECK(evaluate(p, Eigen::VectorXd::Zero(1)) == doctest::Approx(3.0));

  Polynomial q = Polynomial::variable(2, 0) * Polynomial::variable(2, 1);
  Eigen::VectorXd x(2);
  x << 2, 5;
  CHECK(evaluate(q, x) == doctest::Approx(10.0));
  CHECK_THROWS_AS(evaluate(q, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("polynomial arithmetic merges and prunes") {
  Polynomial a = Polynomial::variable(2, 0);
  Polynomial b = a;
  b *= -1.0;
  Polynomial zero = a + b;
  CHECK(zero.is_zero());
  Polynomial prod = (a + Polynomial::constant(2, 1.0)) * (a - Polynomial::constant(2, 1.0));
  // x^2 - 1
  CHECK(prod.terms().size() == 2);
  CHECK(prod.total_degree() == 2);
}

TEST_CASE("random_sos is deterministic, nonnegative, of full degree") {
  const Polynomial f1 = random_sos(3, 4, 42);
  const Polynomial f2 = random_sos(3, 4, 42);
  CHECK(f1.terms() == f2.terms());
  const Polynomial g = random_sos(3, 4, 43);
  CHECK(f1.terms() != g.terms());

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd x(3);
    for (int i = 0; i < 3; ++i) x[i] = 4 * oracles::uniform(rng) - 2;
    CHECK(evaluate(f1, x) >= 0.0);
  }

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(random_sos(2, 6, seed).total_degree() == 6);
  }
  CHECK_THROWS_AS(random_sos(2, 3, 0), std::invalid_argument);
}
