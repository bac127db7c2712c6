#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sepdec {

using Complex = std::complex<double>;

/// Local dimensions (n_1, ..., n_m) of an m-partite system.
class PartyDims {
 public:
  PartyDims() = default;
  explicit PartyDims(std::vector<int> dims);

  int parties() const { return static_cast<int>(dims_.size()); }
  int dim(int k) const { return dims_.at(k); }
  const std::vector<int>& dims() const { return dims_; }
  /// Sum of local dimensions.
  int total_vars() const;
  /// Product of local dimensions (size of the joint Hilbert space).
  int hilbert_size() const;
  bool all_equal() const;

  /// Row-major flattening of a half-subscript, party 1 slowest.
  int flatten(const std::vector<int>& idx) const;
  std::vector<int> unflatten(int flat) const;

  bool operator==(const PartyDims& o) const { return dims_ == o.dims_; }

 private:
  std::vector<int> dims_;
};

/// All half-subscripts (i_1, ..., i_m), i_k in [0, n_k), in flattening order.
std::vector<std::vector<int>> half_subscripts(const PartyDims& dims);

/// Mixed state stored as a 2m-way conjugate-symmetric array. Entries are
/// addressed by half-subscript pairs (I, J); storage is the flattened
/// hilbert_size x hilbert_size complex matrix.
class HermitianTensor {
 public:
  HermitianTensor() = default;
  HermitianTensor(PartyDims dims, Eigen::MatrixXcd entries);

  const PartyDims& dims() const { return dims_; }
  const Eigen::MatrixXcd& matrix() const { return mat_; }
  Eigen::MatrixXcd& matrix() { return mat_; }

  Complex entry(const std::vector<int>& I, const std::vector<int>& J) const {
    return mat_(dims_.flatten(I), dims_.flatten(J));
  }
  void set_entry(const std::vector<int>& I, const std::vector<int>& J, Complex v) {
    mat_(dims_.flatten(I), dims_.flatten(J)) = v;
  }

  double trace() const { return mat_.trace().real(); }

 private:
  PartyDims dims_;
  Eigen::MatrixXcd mat_;
};

struct StructureReport {
  bool hermitian = false;
  bool symmetric = false;
  double trace = 0.0;
  double max_hermitian_violation = 0.0;
  double max_symmetric_violation = 0.0;
};

/// Ensemble form of a mixed state: weights p_i and flattened pure-state
/// amplitude arrays chi_i.
class StateEnsemble {
 public:
  StateEnsemble(PartyDims dims,
                std::vector<std::pair<double, Eigen::VectorXcd>> terms);

  const PartyDims& dims() const { return dims_; }
  const std::vector<std::pair<double, Eigen::VectorXcd>>& terms() const { return terms_; }

 private:
  PartyDims dims_;
  std::vector<std::pair<double, Eigen::VectorXcd>> terms_;
};

/// Weighted product-state atoms (lambda_i, u_i^(1..m)); in symmetric mode a
/// single vector per atom is used for every party.
struct Decomposition {
  bool symmetric = false;
  struct Atom {
    double weight = 0.0;
    std::vector<Eigen::VectorXcd> vectors;  // one per party, or one if symmetric
  };
  std::vector<Atom> atoms;
  /// Frobenius distance between the reconstructed tensor and the target it
  /// was fitted against; NaN until fitted.
  double residual = std::numeric_limits<double>::quiet_NaN();

  int rank() const { return static_cast<int>(atoms.size()); }
};

HermitianTensor ensemble_to_tensor(const StateEnsemble& e);

/// Reshape of a density matrix into half-subscript indexing. The input must
/// be Hermitian within `tol`; the result is exactly Hermitized by averaging.
HermitianTensor density_to_tensor(const Eigen::MatrixXcd& matrix,
                                  const PartyDims& dims, double tol = 1e-10);

StructureReport check_structure(const HermitianTensor& H, double tol);

/// Average the entries over simultaneous party permutations of (I, J).
/// Identity on exactly symmetric tensors.
HermitianTensor symmetrize(const HermitianTensor& H);

/// Representatives of the conjugate-symmetry classes of half-subscript
/// pairs: all (I, J) with I <= J lexicographically. In symmetric mode only
/// pairs with both I and J having non-decreasing components are kept (all
/// local dimensions must coincide). Output is ordered lexicographically.
std::vector<std::pair<std::vector<int>, std::vector<int>>>
reduced_index_pairs(const PartyDims& dims, bool symmetric);

HermitianTensor reconstruct(const Decomposition& d, const PartyDims& dims);

/// Frobenius distance over the full index set.
double residual(const HermitianTensor& A, const HermitianTensor& B);

}  // namespace sepdec
