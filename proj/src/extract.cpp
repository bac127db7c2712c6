#include "sepdec/extract.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sepdec {

namespace {

int numeric_rank(const Eigen::VectorXd& singulars, double rank_tol) {
  if (singulars.size() == 0) return 0;
  const double cut = rank_tol * singulars.maxCoeff();
  int r = 0;
  for (int i = 0; i < singulars.size(); ++i) {
    if (singulars[i] > cut) ++r;
  }
  return r;
}

}  // namespace

FlatWitness is_flat(const TruncatedMomentSequence& y, int t, double rank_tol) {
  if (t < 1) throw std::invalid_argument("is_flat: t must be >= 1");
  if (y.degree < 2 * t) throw std::invalid_argument("is_flat: moment degree below 2t");
  const TruncatedMomentSequence z = y.truncated(2 * t);
  const Eigen::MatrixXd Mt = moment_matrix(z, t);
  const Eigen::MatrixXd Mtm1 = moment_matrix(z, t - 1);
  Eigen::BDCSVD<Eigen::MatrixXd> svd_t(Mt);
  Eigen::BDCSVD<Eigen::MatrixXd> svd_tm1(Mtm1);
  FlatWitness w;
  w.t = t;
  w.singular_values = svd_t.singularValues();
  w.tolerance = rank_tol;
  w.rank_r = numeric_rank(w.singular_values, rank_tol);
  w.rank_tminus1 = numeric_rank(svd_tm1.singularValues(), rank_tol);
  w.flat = w.rank_r == w.rank_tminus1 && w.rank_r > 0;
  return w;
}

namespace {

struct SchurResult {
  bool ok = false;
  Eigen::MatrixXd q;
};

// Orthogonal triangularization of a random convex combination of the
// multiplication matrices. Fails when the combination has complex or
// clustered eigenvalues, in which case the caller retries.
SchurResult try_schur(const std::vector<Eigen::MatrixXd>& Nj, std::mt19937_64& rng) {
  const int r = Nj.front().rows();
  Eigen::VectorXd coeff(Nj.size());
  for (auto& c : coeff.reshaped()) {
    // Box-Muller as in random_sos, for cross-platform determinism.
    double u1 = 0;
    while (u1 <= 0) u1 = (rng() >> 11) * 0x1.0p-53;
    const double u2 = (rng() >> 11) * 0x1.0p-53;
    c = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  coeff = coeff.cwiseAbs();
  coeff /= coeff.sum();
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(r, r);
  for (size_t j = 0; j < Nj.size(); ++j) N += coeff[j] * Nj[j];

  Eigen::RealSchur<Eigen::MatrixXd> schur(N);
  if (schur.info() != Eigen::Success) return {};
  const Eigen::MatrixXd& T = schur.matrixT();
  const double scale = std::max(1.0, T.cwiseAbs().maxCoeff());
  for (int i = 0; i + 1 < r; ++i) {
    if (std::abs(T(i + 1, i)) > 1e-9 * scale) return {};  // complex pair
  }
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      if (std::abs(T(i, i) - T(j, j)) < 1e-7 * scale) return {};  // clustered
    }
  }
  return {true, schur.matrixU()};
}

}  // namespace

AtomicMeasure extract_atoms(const TruncatedMomentSequence& z, int t,
                            const FlatWitness& witness,
                            const VariableLayout& layout, std::uint64_t seed,
                            double atom_tol) {
  if (!witness.flat) throw std::invalid_argument("extract_atoms: sequence is not flat");
  if (z.nvars != layout.nvars()) throw std::invalid_argument("extract_atoms: layout does not match moment variables");
  const int nvars = z.nvars;
  const int r = witness.rank_r;
  const Eigen::MatrixXd Mt = moment_matrix(z, t);
  const auto& basis_t = basis_for(nvars, t);
  const int low_count = basis_for(nvars, t - 1).size();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Mt);
  if (eig.info() != Eigen::Success) throw std::runtime_error("extract_atoms: eigendecomposition failed");
  // Rank-r factor M_t ~ V V', dominant eigenpairs (ascending order in Eigen).
  const int s = Mt.rows();
  Eigen::MatrixXd V(s, r);
  for (int i = 0; i < r; ++i) {
    const int k = s - 1 - i;
    if (eig.eigenvalues()[k] <= 0) throw std::runtime_error("extract_atoms: moment matrix not PSD at rank r");
    V.col(i) = eig.eigenvectors().col(k) * std::sqrt(eig.eigenvalues()[k]);
  }

  // Pivot monomials of degree <= t-1 whose rows of V are best conditioned.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivot_qr(V.topRows(low_count).transpose());
  if (pivot_qr.rank() < r) {
    throw std::runtime_error("extract_atoms: low-degree rows do not span the factor");
  }
  std::vector<int> pivots(r);
  for (int i = 0; i < r; ++i) pivots[i] = pivot_qr.colsPermutation().indices()[i];

  Eigen::MatrixXd Wp(r, r);
  for (int i = 0; i < r; ++i) Wp.row(i) = V.row(pivots[i]);
  // Column echelon form Vbar = V * inv(Wp): rows at the pivot monomials
  // become the identity.
  const Eigen::MatrixXd Vbar =
      Wp.transpose().fullPivLu().solve(V.transpose()).transpose();

  std::vector<Eigen::MatrixXd> Nj(nvars, Eigen::MatrixXd(r, r));
  for (int j = 0; j < nvars; ++j) {
    for (int i = 0; i < r; ++i) {
      Monomial shifted = basis_t[pivots[i]];
      shifted[j] += 1;
      Nj[j].row(i) = Vbar.row(basis_t.index_of(shifted));
    }
  }

  std::mt19937_64 rng(seed);
  SchurResult schur;
  for (int attempt = 0; attempt < 5 && !schur.ok; ++attempt) schur = try_schur(Nj, rng);
  if (!schur.ok) {
    throw std::runtime_error("extract_atoms: could not separate the joint eigenvalues");
  }

  AtomicMeasure mu;
  mu.atoms.resize(r);
  for (int i = 0; i < r; ++i) {
    Eigen::VectorXd x(nvars);
    for (int j = 0; j < nvars; ++j) {
      x[j] = schur.q.col(i).dot(Nj[j] * schur.q.col(i));
    }
    mu.atoms[i].point = std::move(x);
  }

  // Weights from the moment equations, least squares over all of z.
  const auto& full = basis_for(nvars, z.degree);
  Eigen::MatrixXd vander(full.size(), r);
  for (int a = 0; a < full.size(); ++a) {
    for (int i = 0; i < r; ++i) {
      double v = 1.0;
      for (int j = 0; j < nvars; ++j) {
        for (int e = 0; e < full[a][j]; ++e) v *= mu.atoms[i].point[j];
      }
      vander(a, i) = v;
    }
  }
  const Eigen::VectorXd lambda = vander.colPivHouseholderQr().solve(z.values);
  for (int i = 0; i < r; ++i) {
    if (!(lambda[i] > 0)) {
      throw std::runtime_error("extract_atoms: nonpositive weight in recovered measure");
    }
    mu.atoms[i].weight = lambda[i];
  }

  // Atoms must already lie on K up to atom_tol; then land them exactly.
  const auto constraints = sphere_constraints(layout);
  for (auto& atom : mu.atoms) {
    for (const auto& h : constraints) {
      if (std::abs(evaluate(h, atom.point)) > atom_tol) {
        throw std::runtime_error("extract_atoms: atom violates the sphere constraints");
      }
    }
    for (int k = 0; k < layout.blocks(); ++k) {
      const auto [first, last] = layout.block(k);
      atom.point.segment(first, last - first).normalize();
    }
  }
  return mu;
}

Eigen::VectorXd nnls_from_normal(const Eigen::MatrixXd& G, const Eigen::VectorXd& g) {
  const int n = static_cast<int>(g.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff());

  for (int outer = 0; outer < 10 * n + 10; ++outer) {
    const Eigen::VectorXd w = g - G * x;
    int best = -1;
    double wbest = tol;
    for (int i = 0; i < n; ++i) {
      if (!passive[i] && w[i] > wbest) {
        wbest = w[i];
        best = i;
      }
    }
    if (best < 0) break;
    passive[best] = true;

    for (int inner = 0; inner < 10 * n + 10; ++inner) {
      std::vector<int> idx;
      for (int i = 0; i < n; ++i) {
        if (passive[i]) idx.push_back(i);
      }
      Eigen::MatrixXd Gp(idx.size(), idx.size());
      Eigen::VectorXd gp(idx.size());
      for (size_t a = 0; a < idx.size(); ++a) {
        gp[a] = g[idx[a]];
        for (size_t b = 0; b < idx.size(); ++b) Gp(a, b) = G(idx[a], idx[b]);
      }
      const Eigen::VectorXd s = Gp.ldlt().solve(gp);
      if ((s.array() > 0).all()) {
        x.setZero();
        for (size_t a = 0; a < idx.size(); ++a) x[idx[a]] = s[a];
        break;
      }
      double alpha = 1.0;
      for (size_t a = 0; a < idx.size(); ++a) {
        if (s[a] <= 0) alpha = std::min(alpha, x[idx[a]] / (x[idx[a]] - s[a]));
      }
      for (size_t a = 0; a < idx.size(); ++a) {
        x[idx[a]] += alpha * (s[a] - x[idx[a]]);
        if (x[idx[a]] <= tol) {
          passive[idx[a]] = false;
          x[idx[a]] = 0;
        }
      }
    }
  }
  return x;
}

Decomposition atoms_to_decomposition(const AtomicMeasure& mu,
                                     const VariableLayout& layout,
                                     const HermitianTensor& H) {
  if (mu.atoms.empty()) throw std::invalid_argument("atoms_to_decomposition: empty measure");
  const PartyDims& dims = H.dims();
  Decomposition dec;
  dec.symmetric = layout.mode() == Mode::Symmetric;

  std::vector<Decomposition::Atom> atoms;
  for (const auto& atom : mu.atoms) {
    if (atom.point.size() != layout.nvars()) {
      throw std::invalid_argument("atoms_to_decomposition: point dimension mismatch");
    }
    Decomposition::Atom out;
    out.weight = atom.weight;
    for (auto& u : layout.party_vectors(atom.point)) {
      u.normalize();
      for (int i = 0; i < u.size(); ++i) {
        if (std::abs(u[i]) > 1e-8) {
          u *= std::conj(u[i]) / std::abs(u[i]);
          break;
        }
      }
      out.vectors.push_back(std::move(u));
    }
    atoms.push_back(std::move(out));
  }

  // Refit the weights against the tensor itself; the measure's weights carry
  // relaxation noise, the tensor is the ground truth.
  const int r = static_cast<int>(atoms.size());
  std::vector<Eigen::MatrixXcd> rank_one;
  for (const auto& a : atoms) {
    Decomposition single;
    single.symmetric = dec.symmetric;
    single.atoms = {Decomposition::Atom{1.0, a.vectors}};
    rank_one.push_back(reconstruct(single, dims).matrix());
  }
  Eigen::MatrixXd G(r, r);
  Eigen::VectorXd g(r);
  for (int i = 0; i < r; ++i) {
    g[i] = (rank_one[i].adjoint() * H.matrix()).trace().real();
    for (int j = 0; j < r; ++j) {
      G(i, j) = (rank_one[i].adjoint() * rank_one[j]).trace().real();
    }
  }
  const Eigen::VectorXd lambda = nnls_from_normal(G, g);
  const double drop = 1e-10 * std::max(1.0, std::abs(H.trace()));
  for (int i = 0; i < r; ++i) {
    if (lambda[i] > drop) {
      atoms[i].weight = lambda[i];
      dec.atoms.push_back(std::move(atoms[i]));
    }
  }
  if (dec.atoms.empty()) {
    throw std::runtime_error("atoms_to_decomposition: weight refit is inconsistent with the tensor");
  }
  dec.residual = residual(reconstruct(dec, dims), H);
  return dec;
}

}  // namespace sepdec
