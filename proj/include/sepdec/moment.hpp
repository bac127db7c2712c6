#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sepdec/layout.hpp"
#include "sepdec/poly.hpp"
#include "sepdec/tensor.hpp"

namespace sepdec {

/// Real vector of would-be integrals of every monomial of degree <= degree,
/// indexed by monomial_basis(nvars, degree).
struct TruncatedMomentSequence {
  int nvars = 0;
  int degree = 0;
  Eigen::VectorXd values;

  const MonomialBasis& basis() const { return basis_for(nvars, degree); }
  double operator[](const Monomial& m) const { return values[basis().index_of(m)]; }

  /// Restriction to degree <= d. The graded basis order makes this a prefix.
  TruncatedMomentSequence truncated(int d) const;
};

/// Sparse linear functional over moment indices.
struct LinearForm {
  std::vector<std::pair<int, double>> terms;  // (moment index, coefficient), sorted

  void add(int idx, double coeff);
  double apply(const Eigen::VectorXd& y) const;
  bool operator==(const LinearForm&) const = default;
};

/// Matrix whose cells are linear forms in the moment vector; rows and
/// columns are labeled by the monomials of `basis_degree`. Only the upper
/// triangle is stored.
struct SymbolicMatrix {
  int dim = 0;
  int nvars = 0;
  int basis_degree = 0;
  std::vector<LinearForm> cells;  // row-major upper triangle, r <= c

  const LinearForm& cell(int r, int c) const;
  Eigen::MatrixXd materialize(const Eigen::VectorXd& y) const;
};

/// Moment matrix of order k as a symbolic matrix over the degree-2k moment
/// index set: cell (b, g) references the single moment b+g.
SymbolicMatrix symbolic_moment_matrix(int nvars, int k);

/// Localizing matrix of h at order k; rows/columns run over the basis of
/// degree k - ceil(deg(h)/2) and cell (b, g) holds sum_a h_a y_{a+b+g}.
SymbolicMatrix symbolic_localizing_matrix(const Polynomial& h, int k);

/// Equality-constrained PSD feasibility/optimization instance over the
/// moment vector.
struct SdpProblem {
  int nvars = 0;
  int relax_order = 0;  // k; moments run up to degree 2k
  int num_moments = 0;
  Eigen::VectorXd objective;

  struct EqualityRow {
    LinearForm form;
    double rhs = 0.0;
    std::string label;
  };
  std::vector<EqualityRow> equalities;
  std::vector<SymbolicMatrix> psd_blocks;
  std::vector<SymbolicMatrix> zero_blocks;

  /// Bound on |y_alpha| over the feasible set when known (> 0), used by the
  /// certificate check. The sphere constraints pin it to the tensor trace.
  double y_inf_bound = -1.0;

  void validate() const;
};

double riesz(const Polynomial& p, const TruncatedMomentSequence& y);

Eigen::MatrixXd moment_matrix(const TruncatedMomentSequence& y, int k);

Eigen::MatrixXd localizing_matrix(const Polynomial& h,
                                  const TruncatedMomentSequence& y, int k);

/// Level-k relaxation of the matching conditions for H in the given mode:
/// one Re row per reduced index pair, one Im row when the imaginary part
/// polynomial is nonzero, sphere localizing matrices as zero blocks, the
/// order-k moment matrix as the PSD block, and the Riesz coefficients of F
/// as the objective.
///
/// Symmetric mode requires a (within symmetry_tol) symmetric tensor; entries
/// are averaged over simultaneous party permutations first. Right-hand
/// sides are additionally checked across independent row/column permutations
/// of the half-subscripts: entries of a decomposable tensor cannot depend on
/// their order, so any mismatch is emitted as an extra, deliberately
/// conflicting row and surfaces as linear infeasibility with a certificate.
SdpProblem assemble_sdp(const HermitianTensor& H, Mode mode, int k,
                        const Polynomial& F, double symmetry_tol = 1e-8);

/// Sparse text dump (one line per nonzero) for cross-solver debugging.
void dump_sdp(const SdpProblem& problem, std::ostream& os);

}  // namespace sepdec
