#include "sepdec/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sepdec {

PartyDims::PartyDims(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("PartyDims: need at least one party");
  for (int n : dims_) {
    if (n < 1) throw std::invalid_argument("PartyDims: local dimensions must be >= 1");
  }
}

int PartyDims::total_vars() const {
  return std::accumulate(dims_.begin(), dims_.end(), 0);
}

int PartyDims::hilbert_size() const {
  int p = 1;
  for (int n : dims_) p *= n;
  return p;
}

bool PartyDims::all_equal() const {
  return std::all_of(dims_.begin(), dims_.end(), [&](int n) { return n == dims_[0]; });
}

int PartyDims::flatten(const std::vector<int>& idx) const {
  if (idx.size() != dims_.size()) throw std::invalid_argument("PartyDims::flatten: index length mismatch");
  int flat = 0;
  for (size_t k = 0; k < dims_.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= dims_[k]) throw std::invalid_argument("PartyDims::flatten: index out of range");
    flat = flat * dims_[k] + idx[k];
  }
  return flat;
}

std::vector<int> PartyDims::unflatten(int flat) const {
  std::vector<int> idx(dims_.size());
  for (int k = parties() - 1; k >= 0; --k) {
    idx[k] = flat % dims_[k];
    flat /= dims_[k];
  }
  return idx;
}

std::vector<std::vector<int>> half_subscripts(const PartyDims& dims) {
  std::vector<std::vector<int>> out;
  out.reserve(dims.hilbert_size());
  for (int f = 0; f < dims.hilbert_size(); ++f) out.push_back(dims.unflatten(f));
  return out;
}

HermitianTensor::HermitianTensor(PartyDims dims, Eigen::MatrixXcd entries)
    : dims_(std::move(dims)), mat_(std::move(entries)) {
  const int N = dims_.hilbert_size();
  if (mat_.rows() != N || mat_.cols() != N) {
    throw std::invalid_argument("HermitianTensor: entry array size does not match dims");
  }
}

StateEnsemble::StateEnsemble(PartyDims dims,
                             std::vector<std::pair<double, Eigen::VectorXcd>> terms)
    : dims_(std::move(dims)), terms_(std::move(terms)) {
  if (terms_.empty()) throw std::invalid_argument("StateEnsemble: empty ensemble");
  double psum = 0;
  for (const auto& [p, chi] : terms_) {
    if (p <= 0) throw std::invalid_argument("StateEnsemble: weights must be positive");
    if (chi.size() != dims_.hilbert_size()) {
      std::ostringstream os;
      os << "StateEnsemble: amplitude array has " << chi.size()
         << " entries, expected " << dims_.hilbert_size();
      throw std::invalid_argument(os.str());
    }
    if (std::abs(chi.norm() - 1.0) > 1e-10) {
      throw std::invalid_argument("StateEnsemble: amplitudes must have unit norm");
    }
    psum += p;
  }
  if (std::abs(psum - 1.0) > 1e-10) {
    std::ostringstream os;
    os << "StateEnsemble: weights sum to " << psum << ", expected 1";
    throw std::invalid_argument(os.str());
  }
}

HermitianTensor ensemble_to_tensor(const StateEnsemble& e) {
  const int N = e.dims().hilbert_size();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(N, N);
  for (const auto& [p, chi] : e.terms()) {
    m.noalias() += p * chi * chi.adjoint();
  }
  return HermitianTensor(e.dims(), std::move(m));
}

HermitianTensor density_to_tensor(const Eigen::MatrixXcd& matrix,
                                  const PartyDims& dims, double tol) {
  const int N = dims.hilbert_size();
  if (matrix.rows() != N || matrix.cols() != N) {
    std::ostringstream os;
    os << "density_to_tensor: matrix is " << matrix.rows() << "x" << matrix.cols()
       << ", expected " << N << "x" << N;
    throw std::invalid_argument(os.str());
  }
  const double asym = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol) {
    std::ostringstream os;
    os << "density_to_tensor: matrix is not Hermitian (max asymmetry " << asym << ")";
    throw std::invalid_argument(os.str());
  }
  return HermitianTensor(dims, 0.5 * (matrix + matrix.adjoint()));
}

namespace {

std::vector<std::vector<int>> party_permutations(int m) {
  std::vector<int> p(m);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> all;
  do {
    all.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return all;
}

std::vector<int> permute(const std::vector<int>& idx, const std::vector<int>& p) {
  std::vector<int> out(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) out[k] = idx[p[k]];
  return out;
}

}  // namespace

StructureReport check_structure(const HermitianTensor& H, double tol) {
  StructureReport rep;
  const auto& M = H.matrix();
  rep.max_hermitian_violation = (M - M.adjoint()).cwiseAbs().maxCoeff();
  rep.hermitian = rep.max_hermitian_violation <= tol;
  rep.trace = M.trace().real();

  if (!H.dims().all_equal()) {
    rep.symmetric = false;
    return rep;
  }
  const auto subs = half_subscripts(H.dims());
  double worst = 0;
  for (const auto& p : party_permutations(H.dims().parties())) {
    for (const auto& I : subs) {
      const int fi = H.dims().flatten(I), fpi = H.dims().flatten(permute(I, p));
      for (const auto& J : subs) {
        const int fj = H.dims().flatten(J), fpj = H.dims().flatten(permute(J, p));
        worst = std::max(worst, std::abs(M(fi, fj) - M(fpi, fpj)));
      }
    }
  }
  rep.max_symmetric_violation = worst;
  rep.symmetric = worst <= tol;
  return rep;
}

HermitianTensor symmetrize(const HermitianTensor& H) {
  if (!H.dims().all_equal()) {
    throw std::invalid_argument("symmetrize: local dimensions differ");
  }
  const auto perms = party_permutations(H.dims().parties());
  const auto subs = half_subscripts(H.dims());
  const int N = H.dims().hilbert_size();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(N, N);
  for (const auto& p : perms) {
    std::vector<int> map(N);
    for (int f = 0; f < N; ++f) map[f] = H.dims().flatten(permute(subs[f], p));
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) out(i, j) += H.matrix()(map[i], map[j]);
    }
  }
  out /= static_cast<double>(perms.size());
  return HermitianTensor(H.dims(), std::move(out));
}

std::vector<std::pair<std::vector<int>, std::vector<int>>>
reduced_index_pairs(const PartyDims& dims, bool symmetric) {
  if (symmetric && !dims.all_equal()) {
    throw std::invalid_argument("reduced_index_pairs: symmetric mode needs equal local dimensions");
  }
  std::vector<std::vector<int>> subs = half_subscripts(dims);
  if (symmetric) {
    std::erase_if(subs, [](const std::vector<int>& I) {
      return !std::is_sorted(I.begin(), I.end());
    });
  }
  std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
  for (const auto& I : subs) {
    for (const auto& J : subs) {
      if (I <= J) pairs.emplace_back(I, J);
    }
  }
  return pairs;
}

namespace {

Eigen::VectorXcd product_amplitudes(const Decomposition::Atom& atom, bool symmetric,
                                    const PartyDims& dims) {
  const int m = dims.parties();
  Eigen::VectorXcd chi = Eigen::VectorXcd::Ones(1);
  for (int k = 0; k < m; ++k) {
    const Eigen::VectorXcd& u = symmetric ? atom.vectors.at(0) : atom.vectors.at(k);
    if (u.size() != dims.dim(k)) {
      throw std::invalid_argument("reconstruct: atom vector length does not match party dimension");
    }
    Eigen::VectorXcd next(chi.size() * u.size());
    for (int a = 0; a < chi.size(); ++a) {
      next.segment(a * u.size(), u.size()) = chi[a] * u;
    }
    chi = std::move(next);
  }
  return chi;
}

}  // namespace

HermitianTensor reconstruct(const Decomposition& d, const PartyDims& dims) {
  const int N = dims.hilbert_size();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(N, N);
  for (const auto& atom : d.atoms) {
    const Eigen::VectorXcd chi = product_amplitudes(atom, d.symmetric, dims);
    m.noalias() += atom.weight * chi * chi.adjoint();
  }
  return HermitianTensor(dims, std::move(m));
}

double residual(const HermitianTensor& A, const HermitianTensor& B) {
  if (!(A.dims() == B.dims())) throw std::invalid_argument("residual: dims mismatch");
  return (A.matrix() - B.matrix()).norm();
}

}  // namespace sepdec
