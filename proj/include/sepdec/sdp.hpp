#pragma once

#include <string>
#include <vector>

#include "sepdec/moment.hpp"

namespace sepdec {

enum class SdpStatus { Optimal, Infeasible, Unknown };

/// Farkas-type refutation of the equality-constrained PSD system: row
/// multipliers mu and PSD matrices W per block with
///   sum_i mu_i a_i + sum_b M_b*(W_b) ~= 0  and  sum_i mu_i rhs_i > 0.
/// Rows are the problem's equality rows followed by the deduplicated
/// zero-block cell rows, in the order produced by solver_rows().
struct InfeasibilityCertificate {
  Eigen::VectorXd row_multipliers;
  std::vector<Eigen::MatrixXd> psd_duals;
  double margin = 0.0;
};

struct SolveOptions {
  double feas_tol = 1e-8;
  int max_iter = 200;
  /// Iterations without a best-score improvement before giving up.
  int stall_window = 10;
  bool verbose = false;
  std::ostream* log = nullptr;  // CSV iteration log when non-null
};

struct SdpSolution {
  SdpStatus status = SdpStatus::Unknown;
  TruncatedMomentSequence y;       // valid when Optimal (or near_solution)
  /// Unknown status may still carry the best iterate's moment vector; it is
  /// unconverged but can be screened by downstream residual checks.
  bool near_solution = false;
  double objective_value = 0.0;    // c'y when Optimal
  InfeasibilityCertificate certificate;  // valid when Infeasible
  int iterations = 0;
  double primal_residual = 0.0;    // equality residual of the returned y
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  double dual_objective = 0.0;
  std::vector<double> block_min_eigenvalues;  // of the PSD blocks at y
  std::string message;
};

struct SolverRow {
  LinearForm form;
  double rhs = 0.0;
  std::string label;
};

/// Equality system the solver actually works with: the problem's equality
/// rows followed by one row per distinct zero-block cell. Deterministic.
std::vector<SolverRow> solver_rows(const SdpProblem& problem);

/// Primal-dual interior-point solve on the homogeneous self-dual embedding
/// of the problem, after eliminating the equality rows through an
/// orthogonal null-space basis. Reports Optimal with the moment vector,
/// Infeasible with a verified certificate, or Unknown; it never guesses.
SdpSolution solve(const SdpProblem& problem, const SolveOptions& options = {});

/// Margin of an infeasibility certificate, using only the problem data and
/// eigenvalue computations: negative parts of W are clipped, the multipliers
/// are normalized, and the defect of the Farkas identity is charged against
/// the problem's moment bound. margin > 0 refutes feasibility.
double verify_certificate(const SdpProblem& problem,
                          const InfeasibilityCertificate& certificate);

}  // namespace sepdec
