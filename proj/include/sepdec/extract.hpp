#pragma once

#include <cstdint>

#include "sepdec/layout.hpp"
#include "sepdec/moment.hpp"

namespace sepdec {

/// Outcome of the rank test rank M_{t-1}(z) == rank M_t(z).
struct FlatWitness {
  int t = 0;
  int rank_r = 0;         // numeric rank of M_t
  int rank_tminus1 = 0;   // numeric rank of M_{t-1}
  Eigen::VectorXd singular_values;  // of M_t
  double tolerance = 0.0;
  bool flat = false;
};

/// Weighted Dirac atoms of a representing measure on K.
struct AtomicMeasure {
  struct Atom {
    double weight = 0.0;
    Eigen::VectorXd point;
  };
  std::vector<Atom> atoms;
};

/// Rank test on the truncation z = y|_{2t}. Numeric ranks use singular
/// values with threshold rank_tol relative to the largest one.
FlatWitness is_flat(const TruncatedMomentSequence& y, int t, double rank_tol);

/// Multiplication-matrix extraction of the unique r-atomic representing
/// measure of a flat truncation: factor M_t, select r pivot monomials of
/// degree <= t-1 by column-pivoted QR, build one multiplication matrix per
/// variable from the shifted rows, read the atom coordinates off a joint
/// Schur triangularization of a seeded random convex combination, and fit
/// the weights by least squares against the moments. Atoms are projected
/// onto K by renormalizing each party block. Repeated eigenvalues of the
/// combination trigger up to 5 retries with a fresh combination.
AtomicMeasure extract_atoms(const TruncatedMomentSequence& z, int t,
                            const FlatWitness& witness,
                            const VariableLayout& layout, std::uint64_t seed,
                            double atom_tol = 1e-6);

/// Turn measure atoms into a product-state decomposition of H: party vectors
/// are assembled from the layout's real/imaginary blocks and normalized, a
/// canonical per-party phase is applied (first nonzero component rotated to
/// the nonnegative real axis), and the weights are refitted by nonnegative
/// least squares against H. Zero-weight atoms are dropped; the achieved
/// Frobenius residual is stored in the result.
Decomposition atoms_to_decomposition(const AtomicMeasure& mu,
                                     const VariableLayout& layout,
                                     const HermitianTensor& H);

/// Nonnegative least squares min |A x - b| s.t. x >= 0 given the normal
/// matrix G = A'A and rhs g = A'b (Lawson-Hanson active set).
Eigen::VectorXd nnls_from_normal(const Eigen::MatrixXd& G, const Eigen::VectorXd& g);

}  // namespace sepdec
