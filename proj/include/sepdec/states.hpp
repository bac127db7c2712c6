#pragma once

#include <random>

#include "sepdec/tensor.hpp"

namespace sepdec {

/// Haar-ish random unit vector (normalized complex Gaussian).
Eigen::VectorXcd random_unit_vector(int n, std::mt19937_64& rng);

/// Three-qubit mixture of the GHZ state with the two W-type states,
/// weights (1/4, 3/8, 3/8). Symmetric and known to be separable.
HermitianTensor ghz_w_mixture();

/// Equal two-qubit mixture of the Bell states (|00>+|11>)/sqrt(2) and
/// (|01>+|10>)/sqrt(2).
HermitianTensor bell_mixture();

/// Bipartite isotropic state on C^n (x) C^n with fidelity F to the
/// maximally entangled state; separable exactly for F <= 1/n.
HermitianTensor isotropic_state(int n, double F);

/// Equal mixture of |ab><ab| and |ba><ba| for two random distinct local
/// states a, b in C^n: symmetric as a tensor, separable, but built from
/// non-symmetric products.
HermitianTensor symmetrized_product_pair(int n, std::mt19937_64& rng);

/// A fixed 7-term two-qubit mixture (1/7) sum |phi_k phi_k><phi_k phi_k|
/// over pinned pseudo-random local states; used to exercise rank shortening.
HermitianTensor seven_term_two_qubit();

/// sum p_i |u_i>^(x m) <u_i|^(x m) with random u_i in C^n and random
/// positive weights summing to one.
StateEnsemble random_symmetric_product_ensemble(int n, int m, int r,
                                                std::mt19937_64& rng);

/// sum p_i |u_i^(1) ... u_i^(m)><...| with independent random party vectors.
StateEnsemble random_product_ensemble(const PartyDims& dims, int r,
                                      std::mt19937_64& rng);

}  // namespace sepdec
