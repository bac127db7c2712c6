#include "sepdec/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

namespace sepdec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One stored entry of a PSD block: upper-triangle cell (r, c) with its
// moment index. gather_weight carries the off-diagonal doubling so that
// trace inner products and adjoints are plain sums over these entries.
struct Cell {
  int r, c, mom;
  double coeff, gather_weight;
};

struct Block {
  int dim = 0;
  std::vector<Cell> cells;                    // upper triangle
  std::vector<std::vector<int>> by_moment;    // moment -> indices into cells
};

Block make_block(const SymbolicMatrix& sym, int num_moments) {
  Block b;
  b.dim = sym.dim;
  for (int r = 0; r < sym.dim; ++r) {
    for (int c = r; c < sym.dim; ++c) {
      for (const auto& [mom, coeff] : sym.cell(r, c).terms) {
        b.cells.push_back({r, c, mom, coeff, (r == c ? 1.0 : 2.0) * coeff});
      }
    }
  }
  b.by_moment.assign(num_moments, {});
  for (size_t i = 0; i < b.cells.size(); ++i) b.by_moment[b.cells[i].mom].push_back(i);
  return b;
}

Eigen::MatrixXd block_apply(const Block& b, const Eigen::VectorXd& y) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(b.dim, b.dim);
  for (const auto& cell : b.cells) M(cell.r, cell.c) += cell.coeff * y[cell.mom];
  M.triangularView<Eigen::StrictlyLower>() = M.transpose();
  return M;
}

void block_adjoint(const Block& b, const Eigen::MatrixXd& Z, Eigen::VectorXd& out) {
  for (const auto& cell : b.cells) out[cell.mom] += cell.gather_weight * Z(cell.r, cell.c);
}

Eigen::MatrixXd sym(const Eigen::MatrixXd& M) { return 0.5 * (M + M.transpose()); }

double frob_inner(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  return (A.cwiseProduct(B)).sum();
}

// Nesterov-Todd scaling of a PSD pair (S, Z): R'ZR = inv(R) S inv(R)' =
// diag(lambda), computed from eigenfactors and the SVD of Lz'Ls.
struct Scaling {
  Eigen::MatrixXd R, Rinv, T, Tinv;
  Eigen::VectorXd lambda;
  bool ok = false;
};

Scaling compute_scaling(const Eigen::MatrixXd& S, const Eigen::MatrixXd& Z) {
  Scaling sc;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ez(Z);
  if (es.info() != Eigen::Success || ez.info() != Eigen::Success) return sc;
  const double fs = es.eigenvalues().maxCoeff() * 1e-15;
  const double fz = ez.eigenvalues().maxCoeff() * 1e-15;
  if (!(fs > 0) || !(fz > 0)) return sc;
  Eigen::MatrixXd Ls =
      es.eigenvectors() * es.eigenvalues().cwiseMax(fs).cwiseSqrt().asDiagonal();
  Eigen::MatrixXd Lz =
      ez.eigenvectors() * ez.eigenvalues().cwiseMax(fz).cwiseSqrt().asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Lz.transpose() * Ls,
                                     Eigen::ComputeFullU | Eigen::ComputeFullV);
  sc.lambda = svd.singularValues();
  if (sc.lambda.minCoeff() <= 0) return sc;
  const Eigen::VectorXd isql = sc.lambda.cwiseSqrt().cwiseInverse();
  sc.R = Ls * svd.matrixV() * isql.asDiagonal();
  sc.Rinv = isql.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
  sc.T = sc.R * sc.R.transpose();
  sc.Tinv = sc.Rinv.transpose() * sc.Rinv;
  sc.ok = true;
  return sc;
}

// Largest step with lambda + alpha * Mtilde >= 0, from the scaled direction.
double max_step_scaled(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& Mtilde) {
  const Eigen::VectorXd isql = lambda.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd G = isql.asDiagonal() * Mtilde * isql.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym(G), Eigen::EigenvaluesOnly);
  const double emin = eig.eigenvalues().minCoeff();
  return emin < 0 ? 1.0 / (-emin) : kInf;
}

}  // namespace

std::vector<SolverRow> solver_rows(const SdpProblem& problem) {
  std::vector<SolverRow> rows;
  for (const auto& eq : problem.equalities) rows.push_back({eq.form, eq.rhs, eq.label});
  // Cells of a localizing matrix repeat the same functional many times
  // (cell (b, g) only depends on b+g); keep one row each.
  std::map<std::vector<std::pair<int, double>>, bool> seen;
  for (size_t z = 0; z < problem.zero_blocks.size(); ++z) {
    const auto& B = problem.zero_blocks[z];
    for (int r = 0; r < B.dim; ++r) {
      for (int c = r; c < B.dim; ++c) {
        const LinearForm& f = B.cell(r, c);
        if (f.terms.empty()) continue;
        if (seen.emplace(f.terms, true).second) {
          std::ostringstream os;
          os << "zero[" << z << "](" << r << "," << c << ")";
          rows.push_back({f, 0.0, os.str()});
        }
      }
    }
  }
  return rows;
}

double verify_certificate(const SdpProblem& problem,
                          const InfeasibilityCertificate& certificate) {
  const auto rows = solver_rows(problem);
  if (certificate.row_multipliers.size() != static_cast<Eigen::Index>(rows.size())) {
    throw std::invalid_argument("verify_certificate: multiplier count does not match row count");
  }
  if (certificate.psd_duals.size() != problem.psd_blocks.size()) {
    throw std::invalid_argument("verify_certificate: dual block count mismatch");
  }
  if (!certificate.row_multipliers.allFinite()) {
    throw std::invalid_argument("verify_certificate: non-finite multipliers");
  }

  Eigen::VectorXd mu = certificate.row_multipliers;
  std::vector<Eigen::MatrixXd> W = certificate.psd_duals;
  const double scale = mu.norm();
  if (scale > 0) {
    mu /= scale;
    for (auto& Wb : W) Wb /= scale;
  }

  Eigen::VectorXd defect = Eigen::VectorXd::Zero(problem.num_moments);
  double lhs = 0.0;
  for (size_t i = 0; i < rows.size(); ++i) {
    lhs += mu[i] * rows[i].rhs;
    for (const auto& [idx, c] : rows[i].form.terms) defect[idx] += mu[i] * c;
  }
  for (size_t b = 0; b < W.size(); ++b) {
    const auto& B = problem.psd_blocks[b];
    if (W[b].rows() != B.dim || W[b].cols() != B.dim || !W[b].allFinite()) {
      throw std::invalid_argument("verify_certificate: malformed dual block");
    }
    // Clip the dual block onto the PSD cone so the refutation only ever
    // charges genuinely nonnegative weight against M(y).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym(W[b]));
    Eigen::MatrixXd Wplus = eig.eigenvectors() *
                            eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
                            eig.eigenvectors().transpose();
    for (int r = 0; r < B.dim; ++r) {
      for (int c = r; c < B.dim; ++c) {
        for (const auto& [idx, coeff] : B.cell(r, c).terms) {
          defect[idx] += (r == c ? 1.0 : 2.0) * coeff * Wplus(r, c);
        }
      }
    }
  }
  const double bound = problem.y_inf_bound > 0 ? problem.y_inf_bound : 1e3;
  return lhs - defect.lpNorm<1>() * bound;
}

namespace {

// Orthogonal reduction of the equality system A y = b: particular solution,
// null-space basis, consistency residual, and least-squares solves against
// A' for certificate multipliers.
struct EqualityReduction {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd y0;
  Eigen::MatrixXd null_basis;  // N x (N - rank), orthonormal columns
  int rank = 0;
  double residual_inf = 0.0;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;  // of A'

  void compute() {
    const Eigen::Index N = A.cols(), p = A.rows();
    if (p == 0) {
      y0 = Eigen::VectorXd::Zero(N);
      null_basis = Eigen::MatrixXd::Identity(N, N);
      rank = 0;
      residual_inf = 0.0;
      return;
    }
    qr.setThreshold(1e-10);
    qr.compute(A.transpose());
    rank = static_cast<int>(qr.rank());

    // Least-squares particular solution: its residual is orthogonal to
    // range(A), so an inconsistent system hands us a Farkas vector directly.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    cod.setThreshold(1e-10);
    y0 = cod.solve(b);
    residual_inf = (A * y0 - b).lpNorm<Eigen::Infinity>();

    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(N, N - rank);
    E.bottomRows(N - rank).setIdentity();
    null_basis = qr.householderQ() * E;
  }

  // Least-squares solution of A' mu = g.
  Eigen::VectorXd lstsq_At(const Eigen::VectorXd& g) const {
    const Eigen::Index p = A.rows();
    if (p == 0) return Eigen::VectorXd();
    Eigen::VectorXd qg = qr.householderQ().transpose() * g;
    Eigen::VectorXd t = Eigen::VectorXd::Zero(p);
    t.head(rank) = qr.matrixQR()
                       .topLeftCorner(rank, rank)
                       .triangularView<Eigen::Upper>()
                       .solve(qg.head(rank));
    return qr.colsPermutation() * t;
  }
};

struct Workspace {
  const SdpProblem* problem = nullptr;
  std::vector<SolverRow> rows;
  std::vector<Block> blocks;
  EqualityReduction eq;
  Eigen::VectorXd c_tilde;           // objective on the null-space coordinates, scaled
  double obj_scale = 1.0;            // c_tilde was divided by this
  std::vector<Eigen::MatrixXd> h;    // per block: M_b(y0)
  double c_offset = 0.0;             // c' y0
  double norm_h = 0.0, norm_c = 0.0;
  int nv = 0;      // null-space dimension
  double nu = 0.0; // sum of block dimensions
  Eigen::LLT<Eigen::MatrixXd> gram_llt;  // of G'G, for dual restoration

  Eigen::VectorXd moments_of(const Eigen::VectorXd& v) const {
    return eq.y0 + eq.null_basis * v;
  }
  // G v = -M(N v), per block.
  std::vector<Eigen::MatrixXd> G_apply(const Eigen::VectorXd& v) const {
    const Eigen::VectorXd w = eq.null_basis * v;
    std::vector<Eigen::MatrixXd> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) out.push_back(-block_apply(b, w));
    return out;
  }
  // G' Z = -N' M*(Z).
  Eigen::VectorXd G_adjoint(const std::vector<Eigen::MatrixXd>& Z) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(problem->num_moments);
    for (size_t b = 0; b < blocks.size(); ++b) block_adjoint(blocks[b], Z[b], g);
    return -(eq.null_basis.transpose() * g);
  }
  Eigen::VectorXd adjoint_full(const std::vector<Eigen::MatrixXd>& Z) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(problem->num_moments);
    for (size_t b = 0; b < blocks.size(); ++b) block_adjoint(blocks[b], Z[b], g);
    return g;
  }
};

// H = G' (W'W)^-1 G restricted to the null-space coordinates, assembled from
// Hfull[j,l] = <E_j, Tinv E_l Tinv> and two projections.
Eigen::MatrixXd build_kkt(const Workspace& ws, const std::vector<Scaling>& sc) {
  const int N = ws.problem->num_moments;
  Eigen::MatrixXd Hfull = Eigen::MatrixXd::Zero(N, N);
  for (size_t bi = 0; bi < ws.blocks.size(); ++bi) {
    const Block& b = ws.blocks[bi];
    const Eigen::MatrixXd& U = sc[bi].Tinv;
    Eigen::MatrixXd F(b.dim, b.dim);
    for (int l = 0; l < N; ++l) {
      const auto& owned = b.by_moment[l];
      if (owned.empty()) continue;
      F.setZero();
      for (int ci : owned) {
        const Cell& cell = b.cells[ci];
        if (cell.r == cell.c) {
          F.selfadjointView<Eigen::Lower>().rankUpdate(U.col(cell.r), cell.coeff);
        } else {
          F.selfadjointView<Eigen::Lower>().rankUpdate(U.col(cell.r), U.col(cell.c),
                                                       cell.coeff);
        }
      }
      F.triangularView<Eigen::StrictlyUpper>() = F.transpose();
      for (const Cell& cell : b.cells) {
        Hfull(cell.mom, l) += cell.gather_weight * F(cell.r, cell.c);
      }
    }
  }
  const Eigen::MatrixXd tmp = Hfull * ws.eq.null_basis;
  return ws.eq.null_basis.transpose() * tmp;
}

struct Direction {
  Eigen::VectorXd dx;
  std::vector<Eigen::MatrixXd> dZ, dS;
  double dtau = 0.0, dkappa = 0.0;
};

struct IterationKkt {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::MatrixXd H;
  Eigen::VectorXd vx;
  std::vector<Eigen::MatrixXd> vZ;
  double denom = 0.0;
};

Eigen::MatrixXd inv_scaling_apply(const Scaling& sc, const Eigen::MatrixXd& X) {
  return sym(sc.Tinv * X * sc.Tinv);
}

Eigen::VectorXd refined_solve(const Eigen::LLT<Eigen::MatrixXd>& llt,
                              const Eigen::MatrixXd& H, const Eigen::VectorXd& rhs) {
  Eigen::VectorXd x = llt.solve(rhs);
  x += llt.solve(rhs - H * x);
  return x;
}

Direction newton_step(const Workspace& ws, const std::vector<Scaling>& sc,
                      const IterationKkt& kkt, double tau, double kappa,
                      const Eigen::VectorXd& f1,
                      const std::vector<Eigen::MatrixXd>& F3,
                      const std::vector<Eigen::MatrixXd>& r5, double f4, double f6) {
  const size_t nb = ws.blocks.size();
  std::vector<Eigen::MatrixXd> C(nb), UCU(nb);
  for (size_t b = 0; b < nb; ++b) {
    C[b] = F3[b] - sc[b].R * r5[b] * sc[b].R.transpose();
    UCU[b] = inv_scaling_apply(sc[b], C[b]);
  }
  Direction d;
  const Eigen::VectorXd ux = refined_solve(kkt.llt, kkt.H, f1 + ws.G_adjoint(UCU));
  auto Gux = ws.G_apply(ux);
  std::vector<Eigen::MatrixXd> uZ(nb);
  double h_uZ = 0.0;
  for (size_t b = 0; b < nb; ++b) {
    uZ[b] = inv_scaling_apply(sc[b], Gux[b] - C[b]);
    h_uZ += frob_inner(ws.h[b], uZ[b]);
  }
  d.dtau = (f4 - f6 / tau - ws.c_tilde.dot(ux) - h_uZ) / kkt.denom;
  d.dx = ux + d.dtau * kkt.vx;
  d.dZ.resize(nb);
  d.dS.resize(nb);
  // Recover the slack step from the linear equation rather than the scaled
  // one: the conic residual then contracts to machine precision and the
  // conditioning error lands in the (benign) centering equation.
  auto Gdx = ws.G_apply(d.dx);
  for (size_t b = 0; b < nb; ++b) {
    d.dZ[b] = sym(uZ[b] + d.dtau * kkt.vZ[b]);
    d.dS[b] = sym(F3[b] + ws.h[b] * d.dtau - Gdx[b]);
  }
  d.dkappa = (f6 - kappa * d.dtau) / tau;
  return d;
}

Direction refined_direction(const Workspace& ws, const std::vector<Scaling>& sc,
                            const IterationKkt& kkt, double tau, double kappa,
                            const Eigen::VectorXd& f1,
                            const std::vector<Eigen::MatrixXd>& F3,
                            const std::vector<Eigen::MatrixXd>& r5, double f4,
                            double f6) {
  const size_t nb = ws.blocks.size();
  Direction d = newton_step(ws, sc, kkt, tau, kappa, f1, F3, r5, f4, f6);

  // Correct the linear equations only: their defects are evaluated through
  // well-conditioned products, while the scaled complementarity defect would
  // push endgame conditioning noise back into the step.
  std::vector<Eigen::MatrixXd> d3(nb), d5(nb);
  for (size_t b = 0; b < nb; ++b) {
    d5[b] = Eigen::MatrixXd::Zero(ws.blocks[b].dim, ws.blocks[b].dim);
  }
  double defect = kInf;
  for (int round = 0; round < 3; ++round) {
    const Eigen::VectorXd d1 = f1 - (ws.G_adjoint(d.dZ) + ws.c_tilde * d.dtau);
    auto Gdx = ws.G_apply(d.dx);
    double h_dZ = 0.0, dnorm = d1.norm();
    for (size_t b = 0; b < nb; ++b) {
      d3[b] = F3[b] - (Gdx[b] + d.dS[b] - ws.h[b] * d.dtau);
      dnorm = std::max(dnorm, d3[b].norm());
      h_dZ += frob_inner(ws.h[b], d.dZ[b]);
    }
    const double d4 = f4 - (ws.c_tilde.dot(d.dx) + h_dZ + d.dkappa);
    const double d6 = f6 - (tau * d.dkappa + kappa * d.dtau);
    dnorm = std::max({dnorm, std::abs(d4), std::abs(d6)});
    if (std::getenv("SEPDEC_DEBUG_REFINE")) {
      fprintf(stderr, "    refine round %d defect %.3e (d1 %.3e)\n", round, dnorm, d1.norm());
    }
    if (!(dnorm < 0.5 * defect)) break;
    defect = dnorm;

    const Direction corr = newton_step(ws, sc, kkt, tau, kappa, d1, d3, d5, d4, d6);
    d.dx += corr.dx;
    d.dtau += corr.dtau;
    d.dkappa += corr.dkappa;
    for (size_t b = 0; b < nb; ++b) {
      d.dZ[b] += corr.dZ[b];
      d.dS[b] += corr.dS[b];
    }
  }
  return d;
}

SdpSolution finish_optimal(const Workspace& ws, const Eigen::VectorXd& v, double tau,
                           const std::vector<Eigen::MatrixXd>& Z, int iter,
                           double dres, double gap) {
  SdpSolution sol;
  sol.status = SdpStatus::Optimal;
  sol.iterations = iter;
  const Eigen::VectorXd y = ws.moments_of(v / tau);
  sol.y.nvars = ws.problem->nvars;
  sol.y.degree = 2 * ws.problem->relax_order;
  sol.y.values = y;
  sol.objective_value = ws.problem->objective.dot(y);
  sol.dual_residual = dres;
  sol.duality_gap = gap;
  double hz = 0.0;
  for (size_t b = 0; b < ws.blocks.size(); ++b) hz += frob_inner(ws.h[b], Z[b]);
  sol.dual_objective = -hz / tau * ws.obj_scale + ws.c_offset;
  double eqres = 0.0;
  for (const auto& row : ws.rows) eqres = std::max(eqres, std::abs(row.form.apply(y) - row.rhs));
  sol.primal_residual = eqres;
  for (const auto& b : ws.blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block_apply(b, y),
                                                       Eigen::EigenvaluesOnly);
    sol.block_min_eigenvalues.push_back(eig.eigenvalues().minCoeff());
  }
  sol.message = "converged";
  return sol;
}

// Build a certificate from a dual cone point W with <M(y0), W> < 0 and
// N' M*(W) ~= 0: the row multipliers are the least-squares pullback of
// -M*(W) through A'.
SdpSolution finish_infeasible(const Workspace& ws, std::vector<Eigen::MatrixXd> W,
                              int iter, const char* how) {
  InfeasibilityCertificate cert;
  cert.psd_duals = std::move(W);
  const Eigen::VectorXd mw = ws.adjoint_full(cert.psd_duals);
  cert.row_multipliers = ws.eq.lstsq_At(-mw);
  const double scale = cert.row_multipliers.norm();
  if (scale > 0) {
    cert.row_multipliers /= scale;
    for (auto& Wb : cert.psd_duals) Wb /= scale;
  }
  cert.margin = verify_certificate(*ws.problem, cert);

  SdpSolution sol;
  sol.iterations = iter;
  sol.certificate = std::move(cert);
  if (sol.certificate.margin > 0) {
    sol.status = SdpStatus::Infeasible;
    sol.message = how;
  } else {
    sol.status = SdpStatus::Unknown;
    sol.message = std::string(how) + ", but certificate margin is not positive";
  }
  return sol;
}

SdpSolution linear_inconsistency(const Workspace& ws) {
  InfeasibilityCertificate cert;
  for (const auto& b : ws.blocks) cert.psd_duals.push_back(Eigen::MatrixXd::Zero(b.dim, b.dim));
  Eigen::VectorXd r = ws.eq.b - ws.eq.A * ws.eq.y0;
  cert.row_multipliers = r / r.norm();
  cert.margin = verify_certificate(*ws.problem, cert);
  SdpSolution sol;
  sol.certificate = std::move(cert);
  if (sol.certificate.margin > 0) {
    sol.status = SdpStatus::Infeasible;
    sol.message = "equality rows are inconsistent";
  } else {
    sol.status = SdpStatus::Unknown;
    sol.message = "equality rows look inconsistent but the certificate did not verify";
  }
  return sol;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolveOptions& options) {
  problem.validate();

  Workspace ws;
  ws.problem = &problem;
  ws.rows = solver_rows(problem);
  for (const auto& sym_block : problem.psd_blocks) {
    ws.blocks.push_back(make_block(sym_block, problem.num_moments));
  }

  const int N = problem.num_moments;
  const int p = static_cast<int>(ws.rows.size());
  ws.eq.A = Eigen::MatrixXd::Zero(p, N);
  ws.eq.b = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < p; ++i) {
    for (const auto& [idx, c] : ws.rows[i].form.terms) ws.eq.A(i, idx) = c;
    ws.eq.b[i] = ws.rows[i].rhs;
  }
  ws.eq.compute();

  if (ws.eq.residual_inf > 1e-9 * (1.0 + ws.eq.b.lpNorm<Eigen::Infinity>())) {
    return linear_inconsistency(ws);
  }

  ws.nv = static_cast<int>(ws.eq.null_basis.cols());
  ws.c_tilde = ws.eq.null_basis.transpose() * problem.objective;
  ws.obj_scale = std::max(1.0, ws.c_tilde.norm());
  ws.c_tilde /= ws.obj_scale;
  ws.c_offset = problem.objective.dot(ws.eq.y0);
  for (const auto& b : ws.blocks) {
    ws.h.push_back(block_apply(b, ws.eq.y0));
    ws.nu += b.dim;
  }
  double h2 = 0.0;
  for (const auto& hb : ws.h) h2 += hb.squaredNorm();
  ws.norm_h = std::sqrt(h2);
  ws.norm_c = ws.c_tilde.norm();
  {
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(N);
    for (const auto& blk : ws.blocks) {
      for (const auto& cell : blk.cells) gamma[cell.mom] += cell.gather_weight * cell.coeff;
    }
    const Eigen::MatrixXd gram = ws.eq.null_basis.transpose() *
                                 gamma.asDiagonal() * ws.eq.null_basis;
    ws.gram_llt.compute(gram);
  }

  const double tol = options.feas_tol;

  if (ws.nv == 0) {
    // The equality rows pin the moment vector; only PSD membership is left.
    double worst = 0.0;
    int worst_block = 0;
    std::vector<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>> eigs;
    for (size_t b = 0; b < ws.blocks.size(); ++b) {
      eigs.emplace_back(ws.h[b]);
      if (eigs.back().eigenvalues().minCoeff() < worst) {
        worst = eigs.back().eigenvalues().minCoeff();
        worst_block = static_cast<int>(b);
      }
    }
    if (worst >= -tol) {
      SdpSolution sol;
      sol.status = SdpStatus::Optimal;
      sol.y.nvars = problem.nvars;
      sol.y.degree = 2 * problem.relax_order;
      sol.y.values = ws.eq.y0;
      sol.objective_value = ws.c_offset;
      sol.dual_objective = ws.c_offset;
      for (auto& e : eigs) sol.block_min_eigenvalues.push_back(e.eigenvalues().minCoeff());
      sol.message = "moment vector fully determined by the equality rows";
      return sol;
    }
    std::vector<Eigen::MatrixXd> W;
    for (size_t b = 0; b < ws.blocks.size(); ++b) {
      if (static_cast<int>(b) == worst_block) {
        const Eigen::VectorXd vmin = eigs[b].eigenvectors().col(0);
        W.push_back(vmin * vmin.transpose());
      } else {
        W.push_back(Eigen::MatrixXd::Zero(ws.blocks[b].dim, ws.blocks[b].dim));
      }
    }
    return finish_infeasible(ws, std::move(W), 0, "pinned moment vector violates positivity");
  }

  // Homogeneous self-dual iteration.
  const size_t nb = ws.blocks.size();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ws.nv);
  std::vector<Eigen::MatrixXd> S, Z;
  for (const auto& b : ws.blocks) {
    S.push_back(Eigen::MatrixXd::Identity(b.dim, b.dim));
    Z.push_back(Eigen::MatrixXd::Identity(b.dim, b.dim));
  }
  double tau = 1.0, kappa = 1.0;

  // Pull Z back onto the affine dual-feasibility set G'Z = -c tau when the
  // correction is small and keeps every block PSD; the dual residual is then
  // genuinely zero rather than noise-limited.
  auto restore_dual = [&](std::vector<Eigen::MatrixXd>& ZZ, double tt) {
    if (ws.gram_llt.info() != Eigen::Success) return;
    const Eigen::VectorXd rho = -(ws.G_adjoint(ZZ) + ws.c_tilde * tt);
    const Eigen::VectorXd w = ws.gram_llt.solve(rho);
    auto dZ = ws.G_apply(w);
    double znorm = 0, dnorm = 0;
    for (size_t b = 0; b < nb; ++b) {
      znorm += ZZ[b].squaredNorm();
      dnorm += dZ[b].squaredNorm();
    }
    if (!(dnorm <= 1e-2 * znorm)) return;
    std::vector<Eigen::MatrixXd> cand(nb);
    for (size_t b = 0; b < nb; ++b) {
      cand[b] = sym(ZZ[b] + dZ[b]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cand[b]);
      const double lo = eig.eigenvalues().minCoeff();
      const double scale = std::max(1e-300, eig.eigenvalues().cwiseAbs().maxCoeff());
      if (lo < -1e-6 * scale) return;  // too indefinite, leave the iterate alone
      if (lo <= 0) {
        cand[b] = eig.eigenvectors() *
                  eig.eigenvalues().cwiseMax(1e-14 * scale).asDiagonal() *
                  eig.eigenvectors().transpose();
      }
    }
    for (size_t b = 0; b < nb; ++b) ZZ[b] = cand[b];
  };

  struct Metrics {
    bool finite = false;
    double mu = 0, gap = 0, hz = 0, cx = 0, r_tau = 0;
    double pres = 0, dres = 0, relgap = 0, pinfres = kInf, dinfres = kInf;
    double score() const { return std::max({pres, dres, relgap}); }
  };
  auto measure = [&](const Eigen::VectorXd& vv, const std::vector<Eigen::MatrixXd>& SS,
                     const std::vector<Eigen::MatrixXd>& ZZ, double tt, double kk,
                     Eigen::VectorXd* r_dual, std::vector<Eigen::MatrixXd>* Rpri) {
    Metrics m;
    const Eigen::VectorXd GtZ = ws.G_adjoint(ZZ);
    *r_dual = GtZ + ws.c_tilde * tt;
    auto Gv = ws.G_apply(vv);
    Rpri->resize(nb);
    double rpri2 = 0.0, ray2 = 0.0;
    for (size_t b = 0; b < nb; ++b) {
      (*Rpri)[b] = Gv[b] + SS[b] - ws.h[b] * tt;
      rpri2 += (*Rpri)[b].squaredNorm();
      ray2 += (Gv[b] + SS[b]).squaredNorm();
      m.hz += frob_inner(ws.h[b], ZZ[b]);
      m.gap += frob_inner(SS[b], ZZ[b]);
    }
    m.cx = ws.c_tilde.dot(vv);
    m.r_tau = m.cx + m.hz + kk;
    m.mu = (m.gap + tt * kk) / (ws.nu + 1.0);
    m.pres = std::sqrt(rpri2) / (tt * (1.0 + ws.norm_h));
    m.dres = r_dual->norm() / (tt * (1.0 + ws.norm_c));
    m.relgap = (m.gap / (tt * tt)) / std::max(1.0, std::abs(m.cx / tt));
    if (m.hz < 0) m.pinfres = GtZ.norm() / (-m.hz) / std::max(1.0, ws.norm_c);
    if (m.cx < 0) m.dinfres = std::sqrt(ray2) / (-m.cx) / std::max(1.0, ws.norm_h);
    m.finite = std::isfinite(m.mu) && std::isfinite(m.pres) && std::isfinite(m.dres) &&
               std::isfinite(m.relgap);
    return m;
  };

  auto try_infeasible = [&](const std::vector<Eigen::MatrixXd>& ZZ, double hz,
                            int iter) -> SdpSolution {
    std::vector<Eigen::MatrixXd> W;
    for (size_t b = 0; b < nb; ++b) W.push_back(sym(ZZ[b] / (-hz)));
    return finish_infeasible(ws, std::move(W), iter, "dual ray certifies infeasibility");
  };

  // Interior-point endgames are noise-limited; keep the best iterate and
  // fall back to it when progress stops.
  Eigen::VectorXd best_v = v;
  std::vector<Eigen::MatrixXd> best_S = S, best_Z = Z;
  double best_tau = tau, best_kappa = kappa, best_score = kInf;
  int best_iter = 0;

  if (options.log) *options.log << "iter,mu,primal_res,dual_res,gap\n";

  int small_steps = 0;
  for (int iter = 0; iter <= options.max_iter; ++iter) {
    Eigen::VectorXd r_dual;
    std::vector<Eigen::MatrixXd> Rpri;
    const Metrics m = measure(v, S, Z, tau, kappa, &r_dual, &Rpri);

    if (options.log) {
      *options.log << iter << "," << m.mu << "," << m.pres << "," << m.dres << ","
                   << m.gap / (tau * tau) << "\n";
    }

    if (m.finite && m.score() < best_score) {
      best_score = m.score();
      best_v = v;
      best_S = S;
      best_Z = Z;
      best_tau = tau;
      best_kappa = kappa;
      best_iter = iter;
    }

    if (m.finite) {
      if (m.pres <= tol && m.dres <= tol && m.relgap <= tol) {
        return finish_optimal(ws, v, tau, Z, iter, m.dres,
                              m.gap / (tau * tau) * ws.obj_scale);
      }
      if (m.pinfres <= tol) {
        SdpSolution sol = try_infeasible(Z, m.hz, iter);
        if (sol.status == SdpStatus::Infeasible) return sol;
      }
      if (m.dinfres <= tol) {
        SdpSolution sol;
        sol.status = SdpStatus::Unknown;
        sol.iterations = iter;
        sol.message = "objective ray suggests an unbounded problem";
        return sol;
      }
    }

    const bool stalled = iter - best_iter >= options.stall_window || small_steps >= 5;
    if (!m.finite || tau < 1e-12 || iter == options.max_iter || stalled) {
      // Judge the run by its best iterate.
      Eigen::VectorXd rd;
      std::vector<Eigen::MatrixXd> rp;
      const Metrics mb = measure(best_v, best_S, best_Z, best_tau, best_kappa, &rd, &rp);
      if (mb.finite && mb.pres <= tol && mb.dres <= tol && mb.relgap <= tol) {
        return finish_optimal(ws, best_v, best_tau, best_Z, iter, mb.dres,
                              mb.gap / (best_tau * best_tau) * ws.obj_scale);
      }
      if (mb.finite && mb.pinfres <= 100 * tol) {
        SdpSolution sol = try_infeasible(best_Z, mb.hz, iter);
        if (sol.status == SdpStatus::Infeasible) return sol;
      }
      SdpSolution sol;
      sol.status = SdpStatus::Unknown;
      sol.iterations = iter;
      std::ostringstream os;
      os << "no convergence (best pres " << mb.pres << ", dres " << mb.dres
         << ", relgap " << mb.relgap << ", pinfres " << mb.pinfres << ", tau "
         << best_tau << ")";
      sol.message = os.str();
      if (mb.finite && best_tau > 1e-8 && mb.score() < 1e-4) {
        sol.y.nvars = problem.nvars;
        sol.y.degree = 2 * problem.relax_order;
        sol.y.values = ws.moments_of(best_v / best_tau);
        sol.near_solution = true;
      }
      return sol;
    }

    std::vector<Scaling> sc(nb);
    for (size_t b = 0; b < nb; ++b) {
      sc[b] = compute_scaling(S[b], Z[b]);
      if (!sc[b].ok) {
        SdpSolution sol;
        sol.status = SdpStatus::Unknown;
        sol.iterations = iter;
        sol.message = "scaling breakdown";
        return sol;
      }
    }

    IterationKkt kkt;
    kkt.H = build_kkt(ws, sc);
    Eigen::MatrixXd& H = kkt.H;
    const double base = 1.0 + H.trace() / ws.nv;
    for (int attempt = 0;; ++attempt) {
      kkt.llt.compute(H);
      if (kkt.llt.info() == Eigen::Success) break;
      if (attempt >= 3) {
        SdpSolution sol;
        sol.status = SdpStatus::Unknown;
        sol.iterations = iter;
        sol.message = "KKT factorization failed";
        return sol;
      }
      H.diagonal().array() += base * 1e-13 * std::pow(10.0, attempt);
    }
    std::vector<Eigen::MatrixXd> UhU(nb);
    for (size_t b = 0; b < nb; ++b) UhU[b] = inv_scaling_apply(sc[b], ws.h[b]);
    kkt.vx = refined_solve(kkt.llt, kkt.H, ws.G_adjoint(UhU) - ws.c_tilde);
    auto Gvx = ws.G_apply(kkt.vx);
    kkt.vZ.resize(nb);
    kkt.denom = -kappa / tau;
    for (size_t b = 0; b < nb; ++b) {
      kkt.vZ[b] = inv_scaling_apply(sc[b], Gvx[b] - ws.h[b]);
      kkt.denom += frob_inner(ws.h[b], kkt.vZ[b]);
    }
    kkt.denom += ws.c_tilde.dot(kkt.vx);

    // Affine probe.
    std::vector<Eigen::MatrixXd> F3(nb), r5(nb);
    for (size_t b = 0; b < nb; ++b) {
      F3[b] = -Rpri[b];
      r5[b] = Eigen::MatrixXd::Zero(ws.blocks[b].dim, ws.blocks[b].dim);
      r5[b].diagonal() = -sc[b].lambda;
    }
    Direction aff = refined_direction(ws, sc, kkt, tau, kappa, -r_dual, F3, r5,
                                      -m.r_tau, -tau * kappa);

    double astep = kInf;
    std::vector<Eigen::MatrixXd> dss(nb), dzs(nb);
    for (size_t b = 0; b < nb; ++b) {
      dss[b] = sym(sc[b].Rinv * aff.dS[b] * sc[b].Rinv.transpose());
      dzs[b] = sym(sc[b].R.transpose() * aff.dZ[b] * sc[b].R);
      astep = std::min(astep, max_step_scaled(sc[b].lambda, dss[b]));
      astep = std::min(astep, max_step_scaled(sc[b].lambda, dzs[b]));
    }
    if (aff.dtau < 0) astep = std::min(astep, -tau / aff.dtau);
    if (aff.dkappa < 0) astep = std::min(astep, -kappa / aff.dkappa);
    const double alpha_aff = std::min(1.0, astep);
    const double sigma = std::min(0.999, std::pow(1.0 - alpha_aff, 3.0));

    // Combined direction with Mehrotra correction.
    for (size_t b = 0; b < nb; ++b) {
      Eigen::MatrixXd rhs5 = Eigen::MatrixXd::Zero(ws.blocks[b].dim, ws.blocks[b].dim);
      rhs5.diagonal() = -sc[b].lambda.array().square().matrix();
      rhs5.diagonal().array() += sigma * m.mu;
      rhs5 -= 0.5 * (dss[b] * dzs[b] + dzs[b] * dss[b]);
      for (int i = 0; i < rhs5.rows(); ++i) {
        for (int j = 0; j < rhs5.cols(); ++j) {
          rhs5(i, j) *= 2.0 / (sc[b].lambda[i] + sc[b].lambda[j]);
        }
      }
      r5[b] = std::move(rhs5);
      F3[b] = -(1.0 - sigma) * Rpri[b];
    }
    Direction dir = refined_direction(
        ws, sc, kkt, tau, kappa, (-(1.0 - sigma)) * r_dual, F3, r5,
        -(1.0 - sigma) * m.r_tau,
        -tau * kappa + sigma * m.mu - aff.dtau * aff.dkappa);

    double mstep = kInf;
    for (size_t b = 0; b < nb; ++b) {
      mstep = std::min(mstep, max_step_scaled(sc[b].lambda,
                                              sym(sc[b].Rinv * dir.dS[b] *
                                                  sc[b].Rinv.transpose())));
      mstep = std::min(mstep, max_step_scaled(sc[b].lambda,
                                              sym(sc[b].R.transpose() * dir.dZ[b] *
                                                  sc[b].R)));
    }
    if (dir.dtau < 0) mstep = std::min(mstep, -tau / dir.dtau);
    if (dir.dkappa < 0) mstep = std::min(mstep, -kappa / dir.dkappa);
    const double alpha = std::min(1.0, 0.98 * mstep);
    small_steps = alpha < 1e-6 ? small_steps + 1 : 0;

    v += alpha * dir.dx;
    for (size_t b = 0; b < nb; ++b) {
      S[b] = sym(S[b] + alpha * dir.dS[b]);
      Z[b] = sym(Z[b] + alpha * dir.dZ[b]);
    }
    tau += alpha * dir.dtau;
    kappa += alpha * dir.dkappa;
    restore_dual(Z, tau);
  }

  SdpSolution sol;
  sol.status = SdpStatus::Unknown;
  sol.message = "iteration limit";
  return sol;
}

}  // namespace sepdec
