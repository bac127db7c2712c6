#include "doctest.h"

#include <random>

#include "sepdec/driver.hpp"
#include "sepdec/states.hpp"

#include "oracles.hpp"

using namespace sepdec;

TEST_CASE("bell mixture has a two-term symmetric decomposition") {
  CertifyOptions opt;
  opt.mode = Mode::Symmetric;
  opt.seed = 1;
  const Certificate cert = certify(bell_mixture(), opt);
  REQUIRE(cert.verdict == Verdict::Separable);
  CHECK(cert.decomposition.rank() == 2);
  for (const auto& atom : cert.decomposition.atoms) {
    CHECK(atom.weight == doctest::Approx(0.5).epsilon(2e-3));
  }
  CHECK(cert.residual <= 1e-6);
}

TEST_CASE("isotropic state at the separable boundary has no symmetric decomposition") {
  CertifyOptions opt;
  opt.mode = Mode::Symmetric;
  const Certificate cert = certify(isotropic_state(2, 0.5), opt);
  REQUIRE(cert.verdict == Verdict::NotSeparable);
  CHECK(cert.margin > 0);
}

TEST_CASE("pure product state certifies at the first level with one atom") {
  Decomposition d;
  d.symmetric = false;
  Eigen::VectorXcd e1(2);
  e1 << 1, 0;
  d.atoms.push_back({1.0, {e1, e1}});
  const HermitianTensor H = reconstruct(d, PartyDims({2, 2}));

  CertifyOptions opt;
  opt.mode = Mode::Partitioned;
  const Certificate cert = certify(H, opt);
  REQUIRE(cert.verdict == Verdict::Separable);
  CHECK(cert.level_k == 3);
  CHECK(cert.decomposition.rank() == 1);
  CHECK(cert.residual <= 1e-6);
}

TEST_CASE("runs are deterministic for a fixed seed") {
  CertifyOptions opt;
  opt.mode = Mode::Symmetric;
  opt.seed = 7;
  const Certificate a = certify(bell_mixture(), opt);
  const Certificate b = certify(bell_mixture(), opt);
  REQUIRE(a.verdict == b.verdict);
  REQUIRE(a.decomposition.rank() == b.decomposition.rank());
  for (int i = 0; i < a.decomposition.rank(); ++i) {
    CHECK(a.decomposition.atoms[i].weight ==
          doctest::Approx(b.decomposition.atoms[i].weight).epsilon(1e-8));
  }
  CHECK(a.residual == doctest::Approx(b.residual).epsilon(1e-8));
}

TEST_CASE("option validation") {
  CertifyOptions opt;
  opt.mode = Mode::Symmetric;
  opt.d_override = 5;
  CHECK_THROWS_AS(certify(bell_mixture(), opt), std::invalid_argument);
  opt.d_override = 4;  // below 2m+2 for m=2
  CHECK_THROWS_AS(certify(bell_mixture(), opt), std::invalid_argument);
  opt.d_override = 0;
  opt.k_max = 2;
  CHECK_THROWS_AS(certify(bell_mixture(), opt), std::invalid_argument);
  opt.k_max = -1;
  opt.rank_tol = 0;
  CHECK_THROWS_AS(certify(bell_mixture(), opt), std::invalid_argument);

  CertifyOptions sym;
  sym.mode = Mode::Symmetric;
  std::mt19937_64 rng(4);
  const HermitianTensor nonsym =
      ensemble_to_tensor(random_product_ensemble(PartyDims({2, 2}), 2, rng));
  CHECK_THROWS_AS(certify(nonsym, sym), std::invalid_argument);
}

TEST_CASE("certificates carry level diagnostics") {
  CertifyOptions opt;
  opt.mode = Mode::Symmetric;
  const Certificate cert = certify(bell_mixture(), opt);
  REQUIRE_FALSE(cert.levels.empty());
  CHECK(cert.levels.front().k == 3);
  CHECK(cert.levels.front().moment_count == 210);
  CHECK(cert.levels.front().block_dim == 35);
  CHECK(cert.d == 6);
  CHECK(cert.flat_t >= 1);
}
