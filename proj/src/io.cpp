#include "sepdec/io.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace sepdec {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("state file: " + path + ": " + what);
}

Complex parse_complex(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail(path, "expected a two-element [re, im] array");
  }
  return Complex(j[0].get<double>(), j[1].get<double>());
}

json dump_complex(const Complex& c) { return json::array({c.real(), c.imag()}); }

}  // namespace

HermitianTensor parse_state_file(const std::string& path, bool rescale) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("state file: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(path, std::string("invalid JSON: ") + e.what());
  }

  if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].empty()) {
    fail(path, "dims: expected a non-empty array of positive integers");
  }
  std::vector<int> dims_vec;
  for (size_t k = 0; k < j["dims"].size(); ++k) {
    if (!j["dims"][k].is_number_integer() || j["dims"][k].get<int>() < 1) {
      fail(path, "dims[" + std::to_string(k) + "]: expected a positive integer");
    }
    dims_vec.push_back(j["dims"][k].get<int>());
  }
  const PartyDims dims(dims_vec);
  const int N = dims.hilbert_size();

  HermitianTensor H;
  if (j.contains("ensemble")) {
    if (!j["ensemble"].is_array() || j["ensemble"].empty()) {
      fail(path, "ensemble: expected a non-empty array");
    }
    std::vector<std::pair<double, Eigen::VectorXcd>> terms;
    for (size_t i = 0; i < j["ensemble"].size(); ++i) {
      const std::string where = "ensemble[" + std::to_string(i) + "]";
      const json& term = j["ensemble"][i];
      if (!term.contains("p") || !term["p"].is_number()) fail(path, where + ".p: expected a number");
      if (!term.contains("amplitudes") || !term["amplitudes"].is_array() ||
          static_cast<int>(term["amplitudes"].size()) != N) {
        fail(path, where + ".amplitudes: expected " + std::to_string(N) + " complex entries");
      }
      Eigen::VectorXcd chi(N);
      for (int a = 0; a < N; ++a) {
        chi[a] = parse_complex(term["amplitudes"][a],
                               where + ".amplitudes[" + std::to_string(a) + "]");
      }
      terms.emplace_back(term["p"].get<double>(), std::move(chi));
    }
    try {
      H = ensemble_to_tensor(StateEnsemble(dims, std::move(terms)));
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  } else if (j.contains("density")) {
    if (!j["density"].is_array() || static_cast<int>(j["density"].size()) != N) {
      fail(path, "density: expected a " + std::to_string(N) + "x" + std::to_string(N) + " matrix");
    }
    Eigen::MatrixXcd rho(N, N);
    for (int r = 0; r < N; ++r) {
      const json& row = j["density"][r];
      if (!row.is_array() || static_cast<int>(row.size()) != N) {
        fail(path, "density[" + std::to_string(r) + "]: expected " + std::to_string(N) + " entries");
      }
      for (int c = 0; c < N; ++c) {
        rho(r, c) = parse_complex(row[c], "density[" + std::to_string(r) + "][" +
                                              std::to_string(c) + "]");
      }
    }
    try {
      H = density_to_tensor(rho, dims);
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  } else {
    fail(path, "expected an \"ensemble\" or \"density\" field");
  }

  const double tr = H.trace();
  if (std::abs(tr - 1.0) > 1e-6) {
    if (rescale) {
      if (tr <= 0) fail(path, "nonpositive trace, cannot rescale");
      H.matrix() /= tr;
    } else {
      std::cerr << "warning: " << path << ": trace is " << tr
                << "; decomposition weights will sum to it (use rescale to normalize)"
                << std::endl;
    }
  }
  return H;
}

namespace {

json decomposition_to_json(const Decomposition& d) {
  json atoms = json::array();
  for (const auto& a : d.atoms) {
    json vecs = json::array();
    for (const auto& u : a.vectors) {
      json v = json::array();
      for (int i = 0; i < u.size(); ++i) v.push_back(dump_complex(u[i]));
      vecs.push_back(std::move(v));
    }
    atoms.push_back(json{{"weight", a.weight}, {"vectors", std::move(vecs)}});
  }
  return json{{"symmetric", d.symmetric}, {"atoms", std::move(atoms)}, {"residual", d.residual}};
}

Decomposition decomposition_from_json(const json& j) {
  Decomposition d;
  d.symmetric = j.at("symmetric").get<bool>();
  d.residual = j.at("residual").get<double>();
  for (const auto& ja : j.at("atoms")) {
    Decomposition::Atom a;
    a.weight = ja.at("weight").get<double>();
    for (const auto& jv : ja.at("vectors")) {
      Eigen::VectorXcd u(jv.size());
      for (size_t i = 0; i < jv.size(); ++i) u[i] = parse_complex(jv[i], "atom vector");
      a.vectors.push_back(std::move(u));
    }
    d.atoms.push_back(std::move(a));
  }
  return d;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (int r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXd M(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
  }
  return M;
}

// The soundness recheck intentionally re-derives the rank-one sums with
// plain loops instead of calling reconstruct().
double independent_residual(const Decomposition& d, const HermitianTensor& H) {
  const PartyDims& dims = H.dims();
  const int N = dims.hilbert_size();
  const auto subs = half_subscripts(dims);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(N, N);
  for (const auto& atom : d.atoms) {
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        Complex term = atom.weight;
        for (int k = 0; k < dims.parties(); ++k) {
          const auto& u = d.symmetric ? atom.vectors[0] : atom.vectors[k];
          term *= u[subs[i][k]] * std::conj(u[subs[j][k]]);
        }
        acc(i, j) += term;
      }
    }
  }
  return (acc - H.matrix()).norm();
}

std::string status_name(SdpStatus s) { return to_string(s); }

SdpStatus status_from_name(const std::string& s) {
  if (s == "optimal") return SdpStatus::Optimal;
  if (s == "infeasible") return SdpStatus::Infeasible;
  return SdpStatus::Unknown;
}

}  // namespace

std::string recheck_certificate(const Certificate& cert, const HermitianTensor& H) {
  if (cert.verdict == Verdict::Undetermined) return "";
  HermitianTensor S = H;
  if (cert.mode == Mode::Symmetric) {
    const auto rep = check_structure(H, 1e-8);
    if (!rep.hermitian || !rep.symmetric) return "state is not symmetric but the certificate is";
    S = symmetrize(H);
  }
  if (cert.verdict == Verdict::Separable) {
    for (const auto& a : cert.decomposition.atoms) {
      if (!(a.weight > 0)) return "decomposition has a nonpositive weight";
      for (const auto& u : a.vectors) {
        if (std::abs(u.norm() - 1.0) > 1e-9) return "decomposition vector is not unit";
      }
    }
    const double res = independent_residual(cert.decomposition, S);
    if (!(res <= cert.residual_tol + 1e-12)) {
      std::ostringstream os;
      os << "reconstruction residual " << res << " exceeds tolerance " << cert.residual_tol;
      return os.str();
    }
    return "";
  }
  // NotSeparable: the dual ray refutes the constraint system, which does not
  // depend on the objective; rebuild it with a zero objective.
  const VariableLayout layout = VariableLayout::make(cert.mode, S.dims());
  const SdpProblem problem =
      assemble_sdp(S, cert.mode, cert.level_k, Polynomial(layout.nvars()));
  double margin = 0;
  try {
    margin = verify_certificate(problem, cert.infeasibility);
  } catch (const std::invalid_argument& e) {
    return std::string("certificate is malformed: ") + e.what();
  }
  if (!(margin > 0)) {
    std::ostringstream os;
    os << "certificate margin " << margin << " is not positive";
    return os.str();
  }
  return "";
}

std::string certificate_to_json(const Certificate& cert) {
  json j;
  j["verdict"] = to_string(cert.verdict);
  j["mode"] = cert.mode == Mode::Symmetric ? "symmetric" : "partitioned";
  j["dims"] = cert.dims;
  j["level_k"] = cert.level_k;
  j["flat_t"] = cert.flat_t;
  j["seed"] = cert.seed;
  j["d"] = cert.d;
  j["tolerances"] = {
      {"rank_tol", cert.rank_tol}, {"feas_tol", cert.feas_tol}, {"residual_tol", cert.residual_tol}};
  if (std::isfinite(cert.residual)) j["residual"] = cert.residual;
  if (cert.verdict == Verdict::Separable) {
    j["decomposition"] = decomposition_to_json(cert.decomposition);
  }
  if (cert.verdict == Verdict::NotSeparable) {
    json inf;
    inf["margin"] = cert.infeasibility.margin;
    json mult = json::array();
    for (int i = 0; i < cert.infeasibility.row_multipliers.size(); ++i) {
      mult.push_back(cert.infeasibility.row_multipliers[i]);
    }
    inf["row_multipliers"] = std::move(mult);
    json duals = json::array();
    for (const auto& W : cert.infeasibility.psd_duals) duals.push_back(matrix_to_json(W));
    inf["psd_duals"] = std::move(duals);
    j["infeasibility"] = std::move(inf);
    j["margin"] = cert.margin;
  }
  json levels = json::array();
  for (const auto& lv : cert.levels) {
    levels.push_back(json{{"k", lv.k},
                          {"status", status_name(lv.status)},
                          {"iterations", lv.iterations},
                          {"moment_count", lv.moment_count},
                          {"block_dim", lv.block_dim},
                          {"seconds", lv.seconds},
                          {"flat_t", lv.flat_t},
                          {"note", lv.note}});
  }
  j["levels"] = std::move(levels);
  j["message"] = cert.message;
  j["total_seconds"] = cert.total_seconds;
  return j.dump(2);
}

Certificate certificate_from_json(const std::string& text) {
  const json j = json::parse(text);
  Certificate cert;
  const std::string verdict = j.at("verdict").get<std::string>();
  cert.verdict = verdict == "separable"    ? Verdict::Separable
                 : verdict == "not_separable" ? Verdict::NotSeparable
                                              : Verdict::Undetermined;
  cert.mode = j.at("mode").get<std::string>() == "symmetric" ? Mode::Symmetric
                                                             : Mode::Partitioned;
  cert.dims = j.at("dims").get<std::vector<int>>();
  cert.level_k = j.at("level_k").get<int>();
  cert.flat_t = j.at("flat_t").get<int>();
  cert.seed = j.at("seed").get<std::uint64_t>();
  cert.d = j.at("d").get<int>();
  cert.rank_tol = j.at("tolerances").at("rank_tol").get<double>();
  cert.feas_tol = j.at("tolerances").at("feas_tol").get<double>();
  cert.residual_tol = j.at("tolerances").at("residual_tol").get<double>();
  if (j.contains("residual")) cert.residual = j["residual"].get<double>();
  if (j.contains("decomposition")) {
    cert.decomposition = decomposition_from_json(j["decomposition"]);
  }
  if (j.contains("infeasibility")) {
    const json& inf = j["infeasibility"];
    cert.infeasibility.margin = inf.at("margin").get<double>();
    cert.margin = j.value("margin", cert.infeasibility.margin);
    const auto& mult = inf.at("row_multipliers");
    cert.infeasibility.row_multipliers.resize(mult.size());
    for (size_t i = 0; i < mult.size(); ++i) {
      cert.infeasibility.row_multipliers[i] = mult[i].get<double>();
    }
    for (const auto& W : inf.at("psd_duals")) {
      cert.infeasibility.psd_duals.push_back(matrix_from_json(W));
    }
  }
  for (const auto& lv : j.at("levels")) {
    LevelReport rep;
    rep.k = lv.at("k").get<int>();
    rep.status = status_from_name(lv.at("status").get<std::string>());
    rep.iterations = lv.at("iterations").get<int>();
    rep.moment_count = lv.at("moment_count").get<int>();
    rep.block_dim = lv.at("block_dim").get<int>();
    rep.seconds = lv.at("seconds").get<double>();
    rep.flat_t = lv.at("flat_t").get<int>();
    rep.note = lv.at("note").get<std::string>();
    cert.levels.push_back(std::move(rep));
  }
  cert.message = j.at("message").get<std::string>();
  cert.total_seconds = j.at("total_seconds").get<double>();
  return cert;
}

void write_certificate(const Certificate& cert, const std::string& path) {
  if (cert.tensor.matrix().size() > 0) {
    const std::string reason = recheck_certificate(cert, cert.tensor);
    if (!reason.empty()) {
      throw std::runtime_error("write_certificate: verdict failed its recheck: " + reason);
    }
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_certificate: cannot open " + path);
  out << certificate_to_json(cert) << "\n";
  if (!out) throw std::runtime_error("write_certificate: write failed for " + path);
}

Certificate read_certificate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_certificate: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return certificate_from_json(ss.str());
}

bool certificates_equal(const Certificate& a, const Certificate& b) {
  return certificate_to_json(a) == certificate_to_json(b);
}

}  // namespace sepdec
