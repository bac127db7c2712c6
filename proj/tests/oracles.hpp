#pragma once

// Independent reference computations for the tests. Everything here is the
// straight-line definition, kept free of the production code paths it is
// used to check.

#include <complex>
#include <random>
#include <vector>

#include "sepdec/extract.hpp"
#include "sepdec/layout.hpp"
#include "sepdec/moment.hpp"

namespace oracles {

using sepdec::AtomicMeasure;
using sepdec::Complex;
using sepdec::Monomial;
using sepdec::TruncatedMomentSequence;

// Moments of sum_i lambda_i delta_{x_i} computed term by term.
inline TruncatedMomentSequence forward_moments(const std::vector<AtomicMeasure::Atom>& atoms,
                                               int nvars, int degree) {
  const auto& basis = sepdec::basis_for(nvars, degree);
  TruncatedMomentSequence y;
  y.nvars = nvars;
  y.degree = degree;
  y.values = Eigen::VectorXd::Zero(basis.size());
  for (int a = 0; a < basis.size(); ++a) {
    for (const auto& atom : atoms) {
      double v = atom.weight;
      for (int j = 0; j < nvars; ++j) {
        for (int e = 0; e < basis[a][j]; ++e) v *= atom.point[j];
      }
      y.values[a] += v;
    }
  }
  return y;
}

inline double uniform(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

inline double gaussian(std::mt19937_64& rng) {
  double u1 = 0;
  while (u1 <= 0) u1 = uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * M_PI * uniform(rng));
}

// Random point of K: every party block normalized to the unit sphere.
inline Eigen::VectorXd random_k_point(const sepdec::VariableLayout& layout,
                                      std::mt19937_64& rng) {
  Eigen::VectorXd x(layout.nvars());
  for (int i = 0; i < x.size(); ++i) x[i] = gaussian(rng);
  for (int k = 0; k < layout.blocks(); ++k) {
    const auto [first, last] = layout.block(k);
    x.segment(first, last - first).normalize();
  }
  return x;
}

inline std::vector<AtomicMeasure::Atom> random_k_atoms(const sepdec::VariableLayout& layout,
                                                       int r, std::mt19937_64& rng) {
  std::vector<AtomicMeasure::Atom> atoms(r);
  for (auto& atom : atoms) {
    atom.weight = 0.2 + uniform(rng);
    atom.point = random_k_point(layout, rng);
  }
  return atoms;
}

// P_IJ evaluated directly in complex arithmetic from the layout's blocks.
inline Complex direct_pij(const sepdec::VariableLayout& layout, const std::vector<int>& I,
                          const std::vector<int>& J, const Eigen::VectorXd& x) {
  const auto u = layout.party_vectors(x);
  Complex p = 1.0;
  for (size_t k = 0; k < I.size(); ++k) {
    const auto& uk = layout.mode() == sepdec::Mode::Symmetric ? u[0] : u[k];
    p *= uk[I[k]] * std::conj(uk[J[k]]);
  }
  return p;
}

// Smallest eigenvalue of the partial transpose over the second party;
// negative means entangled (two-qubit/qubit-qutrit: exact criterion).
inline double ppt_min_eigenvalue(const sepdec::HermitianTensor& H) {
  const auto& dims = H.dims();
  const int n1 = dims.dim(0), n2 = dims.dim(1);
  Eigen::MatrixXcd pt(n1 * n2, n1 * n2);
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n2; ++i2)
      for (int j1 = 0; j1 < n1; ++j1)
        for (int j2 = 0; j2 < n2; ++j2)
          pt(i1 * n2 + i2, j1 * n2 + j2) = H.entry({i1, j2}, {j1, i2});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(pt, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

// Greedy minimal matching of two atom sets compared through their
// phase-invariant projectors u u^H (per party), plus weight differences.
inline double decomposition_distance(const sepdec::Decomposition& a,
                                     const sepdec::Decomposition& b) {
  if (a.atoms.size() != b.atoms.size()) return 1e30;
  const int r = static_cast<int>(a.atoms.size());
  std::vector<bool> used(r, false);
  double worst = 0;
  for (int i = 0; i < r; ++i) {
    double best = 1e30;
    int pick = -1;
    for (int j = 0; j < r; ++j) {
      if (used[j]) continue;
      double d = std::abs(a.atoms[i].weight - b.atoms[j].weight);
      for (size_t k = 0; k < a.atoms[i].vectors.size(); ++k) {
        const auto& ua = a.atoms[i].vectors[k];
        const auto& ub = b.atoms[j].vectors[k];
        d = std::max(d, (ua * ua.adjoint() - ub * ub.adjoint()).cwiseAbs().maxCoeff());
      }
      if (d < best) {
        best = d;
        pick = j;
      }
    }
    used[pick] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace oracles
