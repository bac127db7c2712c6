#include "doctest.h"

#include <random>

#include "sepdec/extract.hpp"
#include "sepdec/states.hpp"

#include "oracles.hpp"

using namespace sepdec;

namespace {

// Match recovered atoms to reference atoms up to permutation.
double atom_set_distance(const AtomicMeasure& got,
                         const std::vector<AtomicMeasure::Atom>& want) {
  if (got.atoms.size() != want.size()) return 1e30;
  std::vector<bool> used(want.size(), false);
  double worst = 0;
  for (const auto& g : got.atoms) {
    double best = 1e30;
    int pick = -1;
    for (size_t j = 0; j < want.size(); ++j) {
      if (used[j]) continue;
      const double d = std::max((g.point - want[j].point).lpNorm<Eigen::Infinity>(),
                                std::abs(g.weight - want[j].weight));
      if (d < best) {
        best = d;
        pick = static_cast<int>(j);
      }
    }
    used[pick] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST_CASE("a single Dirac mass is flat at every order") {
  std::mt19937_64 rng(1);
  const VariableLayout layout = VariableLayout::symmetric(2, 2);
  const auto atoms = oracles::random_k_atoms(layout, 1, rng);
  const auto y = oracles::forward_moments(atoms, 4, 6);
  for (int t : {1, 2, 3}) {
    const FlatWitness w = is_flat(y, t, 1e-6);
    CHECK(w.flat);
    CHECK(w.rank_r == 1);
  }
  CHECK_THROWS_AS(is_flat(y, 0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(is_flat(y, 4, 1e-6), std::invalid_argument);
}

TEST_CASE("two atoms: not flat at t=1, flat at t=2") {
  std::vector<AtomicMeasure::Atom> atoms(2);
  atoms[0].weight = atoms[1].weight = 0.5;
  atoms[0].point = Eigen::Vector2d(1, 0);
  atoms[1].point = Eigen::Vector2d(0, 1);
  const auto y = oracles::forward_moments(atoms, 2, 4);
  const FlatWitness w1 = is_flat(y, 1, 1e-6);
  CHECK_FALSE(w1.flat);
  CHECK(w1.rank_tminus1 == 1);
  CHECK(w1.rank_r == 2);
  const FlatWitness w2 = is_flat(y, 2, 1e-6);
  CHECK(w2.flat);
  CHECK(w2.rank_r == 2);
}

TEST_CASE("rank threshold is relative to the largest singular value") {
  // M_1 with singular values (1, 1e-3, 1e-12).
  TruncatedMomentSequence y;
  y.nvars = 2;
  y.degree = 2;
  y.values = Eigen::VectorXd::Zero(basis_for(2, 2).size());
  y.values[basis_for(2, 2).index_of(Monomial{0, 0})] = 1.0;
  y.values[basis_for(2, 2).index_of(Monomial{2, 0})] = 1e-3;
  y.values[basis_for(2, 2).index_of(Monomial{0, 2})] = 1e-12;
  const FlatWitness w = is_flat(y, 1, 1e-6);
  CHECK(w.rank_r == 2);
}

TEST_CASE("extraction recovers a Dirac mass") {
  std::mt19937_64 rng(2);
  const VariableLayout layout = VariableLayout::symmetric(2, 2);
  const auto atoms = oracles::random_k_atoms(layout, 1, rng);
  const auto y = oracles::forward_moments(atoms, 4, 2);
  const FlatWitness w = is_flat(y, 1, 1e-6);
  REQUIRE(w.flat);
  const AtomicMeasure mu = extract_atoms(y, 1, w, layout, 99);
  REQUIRE(mu.atoms.size() == 1);
  CHECK((mu.atoms[0].point - atoms[0].point).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(mu.atoms[0].weight == doctest::Approx(atoms[0].weight).epsilon(1e-8));
}

TEST_CASE("extraction recovers the two-point measure") {
  std::vector<AtomicMeasure::Atom> atoms(2);
  atoms[0].weight = atoms[1].weight = 0.5;
  atoms[0].point = Eigen::Vector2d(1, 0);
  atoms[1].point = Eigen::Vector2d(0, 1);
  const auto y = oracles::forward_moments(atoms, 2, 4);
  const FlatWitness w = is_flat(y, 2, 1e-6);
  REQUIRE(w.flat);
  const VariableLayout layout = VariableLayout::symmetric(1, 1);
  const AtomicMeasure mu = extract_atoms(y, 2, w, layout, 5);
  CHECK(atom_set_distance(mu, atoms) <= 1e-8);

  FlatWitness not_flat = w;
  not_flat.flat = false;
  CHECK_THROWS_AS(extract_atoms(y, 2, not_flat, layout, 5), std::invalid_argument);
}

TEST_CASE("extraction roundtrip on random sphere measures") {
  std::mt19937_64 rng(3);
  const VariableLayout layout = VariableLayout::symmetric(2, 2);
  for (int trial = 0; trial < 25; ++trial) {
    const int r = 1 + trial % 4;
    const auto atoms = oracles::random_k_atoms(layout, r, rng);
    const auto y = oracles::forward_moments(atoms, 4, 4);
    const FlatWitness w = is_flat(y, 2, 1e-6);
    REQUIRE(w.flat);
    REQUIRE(w.rank_r == r);
    const AtomicMeasure mu = extract_atoms(y, 2, w, layout, 1000 + trial);
    CHECK(atom_set_distance(mu, atoms) <= 1e-6);
    for (const auto& atom : mu.atoms) {
      CHECK(std::abs(atom.point.norm() - 1.0) <= 1e-14);
      CHECK(atom.weight > 0);
    }
  }
}

TEST_CASE("extraction roundtrip on partitioned product measures") {
  std::mt19937_64 rng(4);
  const VariableLayout layout = VariableLayout::partitioned(PartyDims({2, 3}));
  for (int trial = 0; trial < 10; ++trial) {
    const int r = 1 + trial % 3;
    const auto atoms = oracles::random_k_atoms(layout, r, rng);
    const auto y = oracles::forward_moments(atoms, layout.nvars(), 4);
    const FlatWitness w = is_flat(y, 2, 1e-6);
    REQUIRE(w.flat);
    const AtomicMeasure mu = extract_atoms(y, 2, w, layout, 2000 + trial);
    CHECK(atom_set_distance(mu, atoms) <= 1e-6);
  }
}

TEST_CASE("atoms_to_decomposition on a basis atom") {
  const VariableLayout layout = VariableLayout::symmetric(2, 2);
  AtomicMeasure mu;
  mu.atoms.push_back({1.0, Eigen::Vector4d(1, 0, 0, 0)});
  // Target: |e1 e1><e1 e1| on two qubits.
  Decomposition ref;
  ref.symmetric = true;
  Eigen::VectorXcd e1(2);
  e1 << 1, 0;
  ref.atoms.push_back({1.0, {e1}});
  const HermitianTensor H = reconstruct(ref, PartyDims({2, 2}));
  const Decomposition dec = atoms_to_decomposition(mu, layout, H);
  REQUIRE(dec.atoms.size() == 1);
  CHECK(dec.atoms[0].weight == doctest::Approx(1.0));
  CHECK((dec.atoms[0].vectors[0] - e1).norm() <= 1e-12);
  CHECK(dec.residual <= 1e-12);
}

TEST_CASE("full measure-to-decomposition roundtrip") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const bool symmetric = trial % 2 == 0;
    const PartyDims dims = symmetric ? PartyDims({2, 2}) : PartyDims({2, 3});
    const VariableLayout layout =
        symmetric ? VariableLayout::symmetric(2, 2) : VariableLayout::partitioned(dims);
    const int r = 1 + trial % 3;
    const auto atoms = oracles::random_k_atoms(layout, r, rng);

    Decomposition truth;
    truth.symmetric = symmetric;
    for (const auto& a : atoms) {
      truth.atoms.push_back({a.weight, layout.party_vectors(a.point)});
    }
    const HermitianTensor H = reconstruct(truth, dims);

    AtomicMeasure mu;
    for (const auto& a : atoms) mu.atoms.push_back(a);
    const Decomposition dec = atoms_to_decomposition(mu, layout, H);
    CHECK(dec.residual <= 1e-9);
    double wsum = 0;
    for (const auto& a : dec.atoms) {
      wsum += a.weight;
      for (const auto& u : a.vectors) CHECK(std::abs(u.norm() - 1.0) <= 1e-12);
    }
    CHECK(wsum == doctest::Approx(H.trace()).epsilon(1e-6));
  }
}

TEST_CASE("reconstruct is invariant under per-party phase rotations") {
  std::mt19937_64 rng(8);
  const PartyDims dims({2, 2});
  Decomposition d;
  d.symmetric = false;
  for (int i = 0; i < 2; ++i) {
    d.atoms.push_back(
        {0.5, {random_unit_vector(2, rng), random_unit_vector(2, rng)}});
  }
  Decomposition rotated = d;
  for (auto& atom : rotated.atoms) {
    for (auto& u : atom.vectors) {
      u *= std::exp(Complex(0, 2 * M_PI * oracles::uniform(rng)));
    }
  }
  CHECK(residual(reconstruct(d, dims), reconstruct(rotated, dims)) <= 1e-12);
}

TEST_CASE("nnls solves small nonnegative systems") {
  Eigen::MatrixXd A(3, 2);
  A << 1, 0, 0, 1, 1, 1;
  const Eigen::VectorXd b3 = Eigen::Vector3d(1, -2, 0);
  const Eigen::MatrixXd G = A.transpose() * A;
  const Eigen::VectorXd g = A.transpose() * b3;
  const Eigen::VectorXd x = nnls_from_normal(G, g);
  CHECK(x[1] == doctest::Approx(0.0));
  CHECK(x[0] >= 0);
  // Against the unconstrained optimum restricted to the active set.
  CHECK(x[0] == doctest::Approx(0.5));
}
