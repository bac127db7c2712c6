#include "sepdec/layout.hpp"

#include <stdexcept>

namespace sepdec {

VariableLayout VariableLayout::symmetric(int n, int parties) {
  return VariableLayout(Mode::Symmetric, PartyDims(std::vector<int>(parties, n)));
}

VariableLayout VariableLayout::partitioned(const PartyDims& dims) {
  return VariableLayout(Mode::Partitioned, dims);
}

VariableLayout VariableLayout::make(Mode mode, const PartyDims& dims) {
  if (mode == Mode::Symmetric) {
    if (!dims.all_equal()) {
      throw std::invalid_argument("VariableLayout: symmetric mode needs equal local dimensions");
    }
    return symmetric(dims.dim(0), dims.parties());
  }
  return partitioned(dims);
}

int VariableLayout::n() const {
  return mode_ == Mode::Symmetric ? dims_.dim(0) : dims_.total_vars();
}

std::pair<int, int> VariableLayout::block(int party) const {
  if (mode_ == Mode::Symmetric) return {0, 2 * n()};
  int off = 0;
  for (int k = 0; k < party; ++k) off += 2 * dims_.dim(k);
  return {off, off + 2 * dims_.dim(party)};
}

int VariableLayout::re_slot(int party, int i) const {
  if (mode_ == Mode::Symmetric) return i;
  return block(party).first + i;
}

int VariableLayout::im_slot(int party, int i) const {
  if (mode_ == Mode::Symmetric) return n() + i;
  return block(party).first + dims_.dim(party) + i;
}

std::vector<Eigen::VectorXcd> VariableLayout::party_vectors(const Eigen::VectorXd& x) const {
  if (x.size() != nvars()) throw std::invalid_argument("party_vectors: point length mismatch");
  std::vector<Eigen::VectorXcd> out;
  const int nb = blocks();
  for (int k = 0; k < nb; ++k) {
    const int nk = mode_ == Mode::Symmetric ? n() : dims_.dim(k);
    Eigen::VectorXcd u(nk);
    for (int i = 0; i < nk; ++i) {
      u[i] = Complex(x[re_slot(k, i)], x[im_slot(k, i)]);
    }
    out.push_back(std::move(u));
  }
  return out;
}

std::pair<Polynomial, Polynomial> expand_pij(const VariableLayout& layout,
                                             const std::vector<int>& I,
                                             const std::vector<int>& J) {
  const int m = layout.parties();
  if (static_cast<int>(I.size()) != m || static_cast<int>(J.size()) != m) {
    throw std::invalid_argument("expand_pij: half-subscript length mismatch");
  }
  const int nv = layout.nvars();
  Polynomial re = Polynomial::constant(nv, 1.0);
  Polynomial im(nv);
  for (int k = 0; k < m; ++k) {
    const int nk = layout.mode() == Mode::Symmetric ? layout.n() : layout.dims().dim(k);
    if (I[k] < 0 || I[k] >= nk || J[k] < 0 || J[k] >= nk) {
      throw std::invalid_argument("expand_pij: half-subscript out of range");
    }
    const int party = layout.mode() == Mode::Symmetric ? 0 : k;
    const Polynomial a = Polynomial::variable(nv, layout.re_slot(party, I[k]));
    const Polynomial b = Polynomial::variable(nv, layout.im_slot(party, I[k]));
    const Polynomial c = Polynomial::variable(nv, layout.re_slot(party, J[k]));
    const Polynomial d = Polynomial::variable(nv, layout.im_slot(party, J[k]));
    // (a + ib)(c - id): multiply into the accumulated real/imaginary parts.
    const Polynomial fr = a * c + b * d;
    const Polynomial fi = b * c - a * d;
    Polynomial new_re = re * fr - im * fi;
    Polynomial new_im = re * fi + im * fr;
    re = std::move(new_re);
    im = std::move(new_im);
  }
  return {std::move(re), std::move(im)};
}

std::vector<Polynomial> sphere_constraints(const VariableLayout& layout) {
  std::vector<Polynomial> out;
  const int nv = layout.nvars();
  for (int k = 0; k < layout.blocks(); ++k) {
    const auto [first, last] = layout.block(k);
    Polynomial h = Polynomial::constant(nv, -1.0);
    for (int s = first; s < last; ++s) {
      Monomial sq(nv, 0);
      sq[s] = 2;
      h.add_term(sq, 1.0);
    }
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace sepdec
