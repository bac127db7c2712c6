#pragma once

#include "sepdec/poly.hpp"
#include "sepdec/tensor.hpp"

namespace sepdec {

enum class Mode { Symmetric, Partitioned };

/// Real coordinates for the product-state variables. Partitioned mode packs
/// party k's real parts into slots [L(k-1), L(k-1)+n_k) and its imaginary
/// parts into the following n_k slots; symmetric mode uses a single vector
/// with real parts first, imaginary parts second.
class VariableLayout {
 public:
  static VariableLayout symmetric(int n, int parties);
  static VariableLayout partitioned(const PartyDims& dims);
  static VariableLayout make(Mode mode, const PartyDims& dims);

  Mode mode() const { return mode_; }
  const PartyDims& dims() const { return dims_; }
  int parties() const { return dims_.parties(); }
  /// Number of complex entries across all party vectors (n).
  int n() const;
  /// Number of real optimization variables (2n).
  int nvars() const { return 2 * n(); }

  /// Slot of the real part of component i of party k's vector.
  int re_slot(int party, int i) const;
  /// Slot of the imaginary part of component i of party k's vector.
  int im_slot(int party, int i) const;
  /// [first, first+2*n_k) slot range of party k's block.
  std::pair<int, int> block(int party) const;
  int blocks() const { return mode_ == Mode::Symmetric ? 1 : parties(); }

  /// Assemble the complex party vectors from a real point.
  std::vector<Eigen::VectorXcd> party_vectors(const Eigen::VectorXd& x) const;

 private:
  VariableLayout(Mode mode, PartyDims dims) : mode_(mode), dims_(std::move(dims)) {}
  Mode mode_;
  PartyDims dims_;
};

/// Real and imaginary parts of the matching polynomial
/// P_IJ(x) = prod_k u^(k)_{i_k} * conj(u^(k))_{j_k}, with u built from the
/// layout's real/imaginary slots. Both parts are homogeneous of degree 2m.
std::pair<Polynomial, Polynomial> expand_pij(const VariableLayout& layout,
                                             const std::vector<int>& I,
                                             const std::vector<int>& J);

/// Unit-sphere constraints, one per block: |x_block|^2 - 1.
std::vector<Polynomial> sphere_constraints(const VariableLayout& layout);

}  // namespace sepdec
