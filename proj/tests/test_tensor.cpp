#include "doctest.h"

#include <random>

#include "sepdec/states.hpp"
#include "sepdec/tensor.hpp"

#include "oracles.hpp"

using namespace sepdec;

namespace {

Eigen::VectorXcd basis_vector(const PartyDims& dims, const std::vector<int>& idx) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dims.hilbert_size());
  v[dims.flatten(idx)] = 1.0;
  return v;
}

StateEnsemble random_ensemble(const PartyDims& dims, int terms, std::mt19937_64& rng) {
  std::vector<std::pair<double, Eigen::VectorXcd>> ts;
  double sum = 0;
  std::vector<double> w(terms);
  for (auto& p : w) {
    p = 0.1 + oracles::uniform(rng);
    sum += p;
  }
  for (int i = 0; i < terms; ++i) {
    ts.emplace_back(w[i] / sum, random_unit_vector(dims.hilbert_size(), rng));
  }
  return StateEnsemble(dims, std::move(ts));
}

}  // namespace

TEST_CASE("flatten is lexicographic with party 1 slowest") {
  const PartyDims dims({2, 3, 2});
  CHECK(dims.flatten({0, 0, 0}) == 0);
  CHECK(dims.flatten({0, 0, 1}) == 1);
  CHECK(dims.flatten({0, 1, 0}) == 2);
  CHECK(dims.flatten({1, 0, 0}) == 6);
  for (int f = 0; f < dims.hilbert_size(); ++f) CHECK(dims.flatten(dims.unflatten(f)) == f);
  CHECK_THROWS_AS(dims.flatten({0, 3, 0}), std::invalid_argument);
  CHECK_THROWS_AS(PartyDims({2, 0}), std::invalid_argument);
}

TEST_CASE("rank-one projector ensemble") {
  const PartyDims dims({2, 2, 2});
  const StateEnsemble e(dims, {{1.0, basis_vector(dims, {0, 0, 0})}});
  const HermitianTensor H = ensemble_to_tensor(e);
  CHECK(H.entry({0, 0, 0}, {0, 0, 0}) == Complex(1, 0));
  CHECK(H.matrix().cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("ghz/w mixture entries") {
  const HermitianTensor H = ghz_w_mixture();
  CHECK(std::abs(H.entry({0, 0, 0}, {1, 1, 1}) - Complex(0.125, 0)) <= 1e-15);
  CHECK(std::abs(H.entry({0, 0, 1}, {0, 0, 1}) - Complex(0.125, 0)) <= 1e-15);
  CHECK(H.trace() == doctest::Approx(1.0));
}

TEST_CASE("classical mixture is diagonal") {
  const PartyDims dims({2});
  const StateEnsemble e(dims, {{0.5, basis_vector(dims, {0})}, {0.5, basis_vector(dims, {1})}});
  const HermitianTensor H = ensemble_to_tensor(e);
  CHECK(H.matrix().isApprox(0.5 * Eigen::MatrixXcd::Identity(2, 2)));
}

TEST_CASE("ensemble invariants are enforced") {
  const PartyDims dims({2});
  CHECK_THROWS_AS(StateEnsemble(dims, {{0.9, basis_vector(dims, {0})}}), std::invalid_argument);
  CHECK_THROWS_AS(StateEnsemble(dims, {{1.0, 2.0 * basis_vector(dims, {0})}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(StateEnsemble(dims, {{1.0, Eigen::VectorXcd::Ones(3)}}),
                  std::invalid_argument);
}

TEST_CASE("density_to_tensor basics") {
  CHECK(density_to_tensor(0.5 * Eigen::MatrixXcd::Identity(2, 2), PartyDims({2}))
            .matrix()
            .isApprox(0.5 * Eigen::MatrixXcd::Identity(2, 2)));

  // |Phi+><Phi+| for dims (2,2).
  const PartyDims dims({2, 2});
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
  phi[dims.flatten({0, 0})] = phi[dims.flatten({1, 1})] = 1 / std::sqrt(2.0);
  const HermitianTensor H = density_to_tensor(phi * phi.adjoint(), dims);
  CHECK(std::abs(H.entry({0, 0}, {0, 0}) - Complex(0.5, 0)) <= 1e-15);
  CHECK(std::abs(H.entry({0, 0}, {1, 1}) - Complex(0.5, 0)) <= 1e-15);
  CHECK(std::abs(H.entry({1, 1}, {0, 0}) - Complex(0.5, 0)) <= 1e-15);
  CHECK(std::abs(H.entry({1, 1}, {1, 1}) - Complex(0.5, 0)) <= 1e-15);

  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_WITH_AS(density_to_tensor(bad, PartyDims({2})).matrix().eval(),
                       doctest::Contains("asymmetry"), std::invalid_argument);
  CHECK_THROWS_AS(density_to_tensor(Eigen::MatrixXcd::Identity(3, 3), PartyDims({2})),
                  std::invalid_argument);
}

TEST_CASE("ensemble and density constructions agree") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const PartyDims dims(trial % 2 ? std::vector<int>{2, 3} : std::vector<int>{2, 2});
    const StateEnsemble e = random_ensemble(dims, 1 + trial % 4, rng);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dims.hilbert_size(), dims.hilbert_size());
    for (const auto& [p, chi] : e.terms()) rho += p * chi * chi.adjoint();
    const HermitianTensor from_density = density_to_tensor(rho, dims);
    const HermitianTensor from_ensemble = ensemble_to_tensor(e);
    CHECK(residual(from_density, from_ensemble) <= 1e-12);
    const auto rep = check_structure(from_ensemble, 1e-12);
    CHECK(rep.hermitian);
    CHECK(rep.max_hermitian_violation <= 1e-14);
    CHECK(rep.trace == doctest::Approx(1.0));
  }
}

TEST_CASE("check_structure classifies") {
  const auto ghz = check_structure(ghz_w_mixture(), 1e-12);
  CHECK(ghz.hermitian);
  CHECK(ghz.symmetric);
  CHECK(ghz.trace == doctest::Approx(1.0));

  HermitianTensor broken(PartyDims({2, 2}), Eigen::MatrixXcd::Zero(4, 4));
  broken.set_entry({0, 1}, {0, 0}, 1.0);
  CHECK_FALSE(check_structure(broken, 1e-12).hermitian);

  const auto iso = check_structure(isotropic_state(2, 0.5), 1e-12);
  CHECK(iso.symmetric);
  CHECK(iso.trace == doctest::Approx(1.0));
}

TEST_CASE("symmetrize averages the simultaneous permutation orbit") {
  std::mt19937_64 rng(17);
  const HermitianTensor H = ensemble_to_tensor(random_ensemble(PartyDims({2, 2}), 2, rng));
  const HermitianTensor S = symmetrize(H);
  CHECK(check_structure(S, 1e-12).symmetric);
  CHECK(residual(symmetrize(S), S) <= 1e-14);
  CHECK(S.trace() == doctest::Approx(H.trace()));
}

TEST_CASE("reduced index pairs") {
  CHECK(reduced_index_pairs(PartyDims({2, 2}), false).size() == 10);
  CHECK(reduced_index_pairs(PartyDims({2, 2}), true).size() == 6);
  CHECK(reduced_index_pairs(PartyDims({2}), false).size() == 3);
  CHECK(reduced_index_pairs(PartyDims({2}), true).size() == 3);
  CHECK_THROWS_AS(reduced_index_pairs(PartyDims({2, 3}), true), std::invalid_argument);

  // Every full pair has exactly one representative.
  for (const auto& dims : {PartyDims({2, 2}), PartyDims({2, 2, 2}), PartyDims({3, 3})}) {
    for (const bool symmetric : {false, true}) {
      const auto reduced = reduced_index_pairs(dims, symmetric);
      for (const auto& I : half_subscripts(dims)) {
        for (const auto& J : half_subscripts(dims)) {
          std::vector<int> a = I, b = J;
          if (symmetric) {
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
          }
          if (!(a <= b)) std::swap(a, b);
          int hits = 0;
          for (const auto& pr : reduced) {
            if (pr.first == a && pr.second == b) ++hits;
          }
          CHECK(hits == 1);
        }
      }
    }
  }
}

TEST_CASE("reconstruct basics") {
  Decomposition d;
  d.symmetric = false;
  Eigen::VectorXcd e1(2);
  e1 << 1, 0;
  d.atoms.push_back({1.0, {e1}});
  const HermitianTensor H = reconstruct(d, PartyDims({2}));
  CHECK(H.entry({0}, {0}) == Complex(1, 0));
  CHECK(H.entry({1}, {1}) == Complex(0, 0));

  CHECK(residual(H, reconstruct(d, PartyDims({2}))) == 0.0);
  CHECK_THROWS_AS(reconstruct(d, PartyDims({3})), std::invalid_argument);
}

TEST_CASE("printed two-term symmetric decomposition matches the bell mixture") {
  Decomposition d;
  d.symmetric = true;
  Eigen::VectorXcd u1(2), u2(2);
  u1 << Complex(-0.5992, -0.3754), Complex(-0.5992, -0.3754);
  u2 << Complex(-0.4303, 0.5611), Complex(0.4303, -0.5611);
  d.atoms.push_back({0.5, {u1}});
  d.atoms.push_back({0.5, {u2}});
  CHECK(residual(reconstruct(d, PartyDims({2, 2})), bell_mixture()) <= 1e-3);
}

TEST_CASE("printed three-term symmetric decomposition matches the ghz/w mixture") {
  Decomposition d;
  d.symmetric = true;
  Eigen::VectorXcd u1(2), u2(2), u3(2);
  u1 << Complex(0.1222, -0.6965), Complex(0.1222, -0.6965);
  u2 << Complex(0.5293, 0.4689), Complex(0.1414, -0.6928);
  u3 << Complex(-0.4830, -0.5165), Complex(0.6888, -0.1601);
  for (const auto& u : {u1, u2, u3}) d.atoms.push_back({1.0 / 3.0, {u}});
  CHECK(residual(reconstruct(d, PartyDims({2, 2, 2})), ghz_w_mixture()) <= 1e-3);
}

TEST_CASE("real atoms give a real tensor") {
  std::mt19937_64 rng(23);
  Decomposition d;
  d.symmetric = false;
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXcd u = random_unit_vector(2, rng).real().cast<Complex>();
    u.normalize();
    Eigen::VectorXcd v = random_unit_vector(2, rng).real().cast<Complex>();
    v.normalize();
    d.atoms.push_back({0.5 + oracles::uniform(rng), {u, v}});
  }
  CHECK(reconstruct(d, PartyDims({2, 2})).matrix().imag().cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("residual is a metric") {
  std::mt19937_64 rng(29);
  const PartyDims dims({2, 2});
  const HermitianTensor A = ensemble_to_tensor(random_ensemble(dims, 2, rng));
  const HermitianTensor B = ensemble_to_tensor(random_ensemble(dims, 2, rng));
  const HermitianTensor C = ensemble_to_tensor(random_ensemble(dims, 3, rng));
  CHECK(residual(A, A) == 0.0);
  CHECK(residual(A, B) == doctest::Approx(residual(B, A)));
  CHECK(residual(A, C) <= residual(A, B) + residual(B, C) + 1e-14);
  CHECK(residual(A, B) > 0.0);

  const HermitianTensor d10(PartyDims({2}), Eigen::Vector2cd(1, 0).asDiagonal());
  const HermitianTensor d01(PartyDims({2}), Eigen::Vector2cd(0, 1).asDiagonal());
  CHECK(residual(d10, d01) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(residual(A, d10), std::invalid_argument);
}
