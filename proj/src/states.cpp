#include "sepdec/states.hpp"

#include <cmath>

namespace sepdec {

Eigen::VectorXcd random_unit_vector(int n, std::mt19937_64& rng) {
  auto uniform = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) {
    double u1 = 0;
    while (u1 <= 0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = Complex(r * std::cos(2 * M_PI * u2), r * std::sin(2 * M_PI * u2));
  }
  v.normalize();
  return v;
}

namespace {

Eigen::VectorXcd kron(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  Eigen::VectorXcd out(a.size() * b.size());
  for (int i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

Eigen::VectorXcd kron_power(const Eigen::VectorXcd& u, int m) {
  Eigen::VectorXcd out = u;
  for (int k = 1; k < m; ++k) out = kron(out, u);
  return out;
}

}  // namespace

HermitianTensor ghz_w_mixture() {
  const PartyDims dims({2, 2, 2});
  Eigen::VectorXcd ghz = Eigen::VectorXcd::Zero(8);
  ghz[dims.flatten({0, 0, 0})] = 1 / std::sqrt(2.0);
  ghz[dims.flatten({1, 1, 1})] = 1 / std::sqrt(2.0);
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(8);
  w[dims.flatten({0, 0, 1})] = 1 / std::sqrt(3.0);
  w[dims.flatten({0, 1, 0})] = 1 / std::sqrt(3.0);
  w[dims.flatten({1, 0, 0})] = 1 / std::sqrt(3.0);
  Eigen::VectorXcd wt = Eigen::VectorXcd::Zero(8);
  wt[dims.flatten({1, 1, 0})] = 1 / std::sqrt(3.0);
  wt[dims.flatten({1, 0, 1})] = 1 / std::sqrt(3.0);
  wt[dims.flatten({0, 1, 1})] = 1 / std::sqrt(3.0);
  return ensemble_to_tensor(StateEnsemble(dims, {{0.25, ghz}, {0.375, w}, {0.375, wt}}));
}

HermitianTensor bell_mixture() {
  const PartyDims dims({2, 2});
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
  phi[dims.flatten({0, 0})] = 1 / std::sqrt(2.0);
  phi[dims.flatten({1, 1})] = 1 / std::sqrt(2.0);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
  psi[dims.flatten({0, 1})] = 1 / std::sqrt(2.0);
  psi[dims.flatten({1, 0})] = 1 / std::sqrt(2.0);
  return ensemble_to_tensor(StateEnsemble(dims, {{0.5, phi}, {0.5, psi}}));
}

HermitianTensor isotropic_state(int n, double F) {
  const PartyDims dims({n, n});
  const int N = n * n;
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(N);
  for (int i = 0; i < n; ++i) phi[dims.flatten({i, i})] = 1 / std::sqrt(double(n));
  const Eigen::MatrixXcd proj = phi * phi.adjoint();
  Eigen::MatrixXcd rho =
      (1.0 - F) / (N - 1) * (Eigen::MatrixXcd::Identity(N, N) - proj) + F * proj;
  return density_to_tensor(rho, dims);
}

HermitianTensor symmetrized_product_pair(int n, std::mt19937_64& rng) {
  const PartyDims dims({n, n});
  const Eigen::VectorXcd a = random_unit_vector(n, rng);
  const Eigen::VectorXcd b = random_unit_vector(n, rng);
  return ensemble_to_tensor(
      StateEnsemble(dims, {{0.5, kron(a, b)}, {0.5, kron(b, a)}}));
}

HermitianTensor seven_term_two_qubit() {
  const std::vector<std::pair<Complex, Complex>> amps = {
      {{0.1865, -0.0210}, {0.7198, 0.6684}},
      {{0.3857, 0.5437}, {0.4330, 0.6067}},
      {{0.5296, 0.6557}, {0.3881, 0.3800}},
      {{-0.0967, 0.8886}, {0.0243, 0.4477}},
      {{0.7262, 0.4409}, {0.1067, 0.5166}},
      {{-0.1165, 0.4494}, {0.8815, -0.0864}},
      {{0.9394, 0.0557}, {0.2231, 0.2544}},
  };
  const PartyDims dims({2, 2});
  std::vector<std::pair<double, Eigen::VectorXcd>> terms;
  for (const auto& [c0, c1] : amps) {
    Eigen::VectorXcd u(2);
    u << c0, c1;
    u.normalize();
    terms.emplace_back(1.0 / 7.0, kron(u, u));
  }
  return ensemble_to_tensor(StateEnsemble(dims, std::move(terms)));
}

namespace {

std::vector<double> random_weights(int r, std::mt19937_64& rng) {
  std::vector<double> p(r);
  double sum = 0;
  for (double& w : p) {
    w = 0.1 + (rng() >> 11) * 0x1.0p-53;
    sum += w;
  }
  for (double& w : p) w /= sum;
  return p;
}

}  // namespace

StateEnsemble random_symmetric_product_ensemble(int n, int m, int r,
                                                std::mt19937_64& rng) {
  const PartyDims dims(std::vector<int>(m, n));
  const auto p = random_weights(r, rng);
  std::vector<std::pair<double, Eigen::VectorXcd>> terms;
  for (int i = 0; i < r; ++i) {
    terms.emplace_back(p[i], kron_power(random_unit_vector(n, rng), m));
  }
  return StateEnsemble(dims, std::move(terms));
}

StateEnsemble random_product_ensemble(const PartyDims& dims, int r,
                                      std::mt19937_64& rng) {
  const auto p = random_weights(r, rng);
  std::vector<std::pair<double, Eigen::VectorXcd>> terms;
  for (int i = 0; i < r; ++i) {
    Eigen::VectorXcd chi = random_unit_vector(dims.dim(0), rng);
    for (int k = 1; k < dims.parties(); ++k) {
      chi = kron(chi, random_unit_vector(dims.dim(k), rng));
    }
    terms.emplace_back(p[i], std::move(chi));
  }
  return StateEnsemble(dims, std::move(terms));
}

}  // namespace sepdec
