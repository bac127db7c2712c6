#include "sepdec/moment.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sepdec {

TruncatedMomentSequence TruncatedMomentSequence::truncated(int d) const {
  if (d > degree) throw std::invalid_argument("TruncatedMomentSequence: cannot extend by truncation");
  TruncatedMomentSequence out;
  out.nvars = nvars;
  out.degree = d;
  out.values = values.head(basis_for(nvars, d).size());
  return out;
}

void LinearForm::add(int idx, double coeff) {
  auto it = std::lower_bound(terms.begin(), terms.end(), idx,
                             [](const auto& t, int i) { return t.first < i; });
  if (it != terms.end() && it->first == idx) {
    it->second += coeff;
    if (it->second == 0.0) terms.erase(it);
  } else {
    terms.insert(it, {idx, coeff});
  }
}

double LinearForm::apply(const Eigen::VectorXd& y) const {
  double acc = 0;
  for (const auto& [i, c] : terms) acc += c * y[i];
  return acc;
}

const LinearForm& SymbolicMatrix::cell(int r, int c) const {
  if (r > c) std::swap(r, c);
  return cells[static_cast<size_t>(r) * dim - r * (r - 1) / 2 + (c - r)];
}

Eigen::MatrixXd SymbolicMatrix::materialize(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd M(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = r; c < dim; ++c) {
      M(r, c) = M(c, r) = cell(r, c).apply(y);
    }
  }
  return M;
}

SymbolicMatrix symbolic_moment_matrix(int nvars, int k) {
  const auto& rows = basis_for(nvars, k);
  const auto& full = basis_for(nvars, 2 * k);
  SymbolicMatrix M;
  M.dim = rows.size();
  M.nvars = nvars;
  M.basis_degree = k;
  M.cells.reserve(static_cast<size_t>(M.dim) * (M.dim + 1) / 2);
  Monomial sum(nvars, 0);
  for (int r = 0; r < M.dim; ++r) {
    for (int c = r; c < M.dim; ++c) {
      for (int i = 0; i < nvars; ++i) sum[i] = rows[r][i] + rows[c][i];
      LinearForm f;
      f.add(full.index_of(sum), 1.0);
      M.cells.push_back(std::move(f));
    }
  }
  return M;
}

SymbolicMatrix symbolic_localizing_matrix(const Polynomial& h, int k) {
  const int nvars = h.nvars();
  const int bdeg = k - (h.total_degree() + 1) / 2;
  if (bdeg < 0) throw std::invalid_argument("symbolic_localizing_matrix: order too low for deg(h)");
  const auto& rows = basis_for(nvars, bdeg);
  const auto& full = basis_for(nvars, 2 * k);
  SymbolicMatrix M;
  M.dim = rows.size();
  M.nvars = nvars;
  M.basis_degree = bdeg;
  M.cells.reserve(static_cast<size_t>(M.dim) * (M.dim + 1) / 2);
  Monomial sum(nvars, 0);
  for (int r = 0; r < M.dim; ++r) {
    for (int c = r; c < M.dim; ++c) {
      LinearForm f;
      for (const auto& [a, coeff] : h.terms()) {
        for (int i = 0; i < nvars; ++i) sum[i] = a[i] + rows[r][i] + rows[c][i];
        f.add(full.index_of(sum), coeff);
      }
      M.cells.push_back(std::move(f));
    }
  }
  return M;
}

void SdpProblem::validate() const {
  auto check_form = [&](const LinearForm& f, const char* where) {
    if (f.terms.empty()) throw std::invalid_argument(std::string("SdpProblem: empty linear form in ") + where);
    for (const auto& [i, c] : f.terms) {
      if (i < 0 || i >= num_moments) throw std::invalid_argument("SdpProblem: moment index out of range");
      if (!std::isfinite(c)) throw std::invalid_argument("SdpProblem: non-finite coefficient");
    }
  };
  if (num_moments <= 0) throw std::invalid_argument("SdpProblem: no moments");
  if (objective.size() != num_moments) throw std::invalid_argument("SdpProblem: objective length mismatch");
  if (psd_blocks.empty()) throw std::invalid_argument("SdpProblem: no PSD block");
  for (const auto& row : equalities) check_form(row.form, "equalities");
  for (const auto& B : psd_blocks) {
    for (const auto& f : B.cells) check_form(f, "psd_blocks");
  }
  for (const auto& B : zero_blocks) {
    for (const auto& f : B.cells) check_form(f, "zero_blocks");
  }
}

double riesz(const Polynomial& p, const TruncatedMomentSequence& y) {
  if (p.total_degree() > y.degree) throw std::invalid_argument("riesz: polynomial degree exceeds moment degree");
  const auto& basis = y.basis();
  double acc = 0;
  for (const auto& [m, c] : p.terms()) acc += c * y.values[basis.index_of(m)];
  return acc;
}

Eigen::MatrixXd moment_matrix(const TruncatedMomentSequence& y, int k) {
  if (y.degree < 2 * k) throw std::invalid_argument("moment_matrix: moment degree below 2k");
  return symbolic_moment_matrix(y.nvars, k).materialize(
      y.values.head(basis_for(y.nvars, 2 * k).size()));
}

Eigen::MatrixXd localizing_matrix(const Polynomial& h,
                                  const TruncatedMomentSequence& y, int k) {
  if (y.degree < 2 * k) throw std::invalid_argument("localizing_matrix: moment degree below 2k");
  return symbolic_localizing_matrix(h, k).materialize(
      y.values.head(basis_for(h.nvars(), 2 * k).size()));
}

namespace {

std::string pair_label(const char* part, const std::vector<int>& I, const std::vector<int>& J) {
  std::ostringstream os;
  os << part << "[(";
  for (size_t k = 0; k < I.size(); ++k) os << (k ? "," : "") << I[k] + 1;
  os << "),(";
  for (size_t k = 0; k < J.size(); ++k) os << (k ? "," : "") << J[k] + 1;
  os << ")]";
  return os.str();
}

LinearForm form_of(const Polynomial& p, const MonomialBasis& basis) {
  LinearForm f;
  for (const auto& [m, c] : p.terms()) f.add(basis.index_of(m), c);
  return f;
}

void add_matching_rows(SdpProblem& prob, const VariableLayout& layout,
                       const MonomialBasis& basis, const std::vector<int>& I,
                       const std::vector<int>& J, Complex value) {
  auto [R, T] = expand_pij(layout, I, J);
  SdpProblem::EqualityRow re;
  re.form = form_of(R, basis);
  re.rhs = value.real();
  re.label = pair_label("Re", I, J);
  prob.equalities.push_back(std::move(re));
  if (!T.is_zero()) {
    SdpProblem::EqualityRow im;
    im.form = form_of(T, basis);
    im.rhs = value.imag();
    im.label = pair_label("Im", I, J);
    prob.equalities.push_back(std::move(im));
  }
}

}  // namespace

SdpProblem assemble_sdp(const HermitianTensor& H, Mode mode, int k,
                        const Polynomial& F, double symmetry_tol) {
  const PartyDims& dims = H.dims();
  const int m = dims.parties();
  if (2 * k < 2 * m) throw std::invalid_argument("assemble_sdp: need 2k >= 2m");
  if (!F.is_zero() && F.total_degree() > 2 * k) {
    throw std::invalid_argument("assemble_sdp: objective degree exceeds 2k");
  }

  const VariableLayout layout = VariableLayout::make(mode, dims);
  HermitianTensor S = H;
  if (mode == Mode::Symmetric) {
    const auto rep = check_structure(H, symmetry_tol);
    if (!rep.hermitian || !rep.symmetric) {
      throw std::invalid_argument(
          "assemble_sdp: symmetric mode needs a (near-)symmetric Hermitian tensor");
    }
    S = symmetrize(H);
  }

  const int nvars = layout.nvars();
  if (F.nvars() != nvars) throw std::invalid_argument("assemble_sdp: objective variable count mismatch");
  const auto& basis = basis_for(nvars, 2 * k);

  SdpProblem prob;
  prob.nvars = nvars;
  prob.relax_order = k;
  prob.num_moments = basis.size();
  prob.objective = Eigen::VectorXd::Zero(basis.size());
  for (const auto& [mono, c] : F.terms()) prob.objective[basis.index_of(mono)] = c;

  const bool symmetric = mode == Mode::Symmetric;
  for (const auto& [I, J] : reduced_index_pairs(dims, symmetric)) {
    add_matching_rows(prob, layout, basis, I, J, S.entry(I, J));
  }

  if (symmetric) {
    // Entries of a symmetric decomposition depend only on the multisets of
    // I and J. A value that disagrees with its order-sorted representative
    // cannot be matched; emit it as an extra row so the conflict is carried
    // into the linear system.
    const auto subs = half_subscripts(dims);
    for (const auto& I : subs) {
      for (const auto& J : subs) {
        if (!(I <= J)) continue;
        std::vector<int> Is = I, Js = J;
        std::sort(Is.begin(), Is.end());
        std::sort(Js.begin(), Js.end());
        const Complex want = Is <= Js ? S.entry(Is, Js) : std::conj(S.entry(Js, Is));
        const Complex got = S.entry(I, J);
        if (std::abs(got - want) > symmetry_tol) {
          add_matching_rows(prob, layout, basis, I, J, got);
        }
      }
    }
  }

  for (const auto& h : sphere_constraints(layout)) {
    prob.zero_blocks.push_back(symbolic_localizing_matrix(h, k));
  }
  prob.psd_blocks.push_back(symbolic_moment_matrix(nvars, k));
  prob.y_inf_bound = std::abs(S.trace()) + 1e-6;
  prob.validate();
  return prob;
}

void dump_sdp(const SdpProblem& problem, std::ostream& os) {
  os.precision(17);
  os << "moments " << problem.num_moments << " nvars " << problem.nvars
     << " order " << problem.relax_order << "\n";
  for (int i = 0; i < problem.objective.size(); ++i) {
    if (problem.objective[i] != 0.0) os << "obj " << i << " " << problem.objective[i] << "\n";
  }
  for (size_t r = 0; r < problem.equalities.size(); ++r) {
    const auto& row = problem.equalities[r];
    for (const auto& [i, c] : row.form.terms) os << "eq " << r << " " << i << " " << c << "\n";
    os << "rhs " << r << " " << row.rhs << " # " << row.label << "\n";
  }
  auto dump_block = [&os](const char* kind, size_t b, const SymbolicMatrix& M) {
    for (int r = 0; r < M.dim; ++r) {
      for (int c = r; c < M.dim; ++c) {
        for (const auto& [i, coeff] : M.cell(r, c).terms) {
          os << kind << " " << b << " " << r << " " << c << " " << i << " " << coeff << "\n";
        }
      }
    }
  };
  for (size_t b = 0; b < problem.psd_blocks.size(); ++b) dump_block("psd", b, problem.psd_blocks[b]);
  for (size_t b = 0; b < problem.zero_blocks.size(); ++b) dump_block("zero", b, problem.zero_blocks[b]);
}

}  // namespace sepdec
