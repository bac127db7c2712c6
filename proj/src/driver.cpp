#include "sepdec/driver.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace sepdec {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Separable: return "separable";
    case Verdict::NotSeparable: return "not_separable";
    default: return "undetermined";
  }
}

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    default: return "unknown";
  }
}

Certificate certify(const HermitianTensor& H, const CertifyOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();
  const PartyDims& dims = H.dims();
  const int m = dims.parties();

  int d = options.d_override > 0 ? options.d_override : 2 * (m + 1);
  if (d % 2 != 0 || d < 2 * m + 2) {
    throw std::invalid_argument("certify: objective degree must be even and >= 2m + 2");
  }
  const int k_max = options.k_max > 0 ? options.k_max : d / 2 + 3;
  if (k_max < d / 2) throw std::invalid_argument("certify: k_max below d/2");
  if (options.rank_tol <= 0 || options.feas_tol <= 0 || options.residual_tol <= 0) {
    throw std::invalid_argument("certify: tolerances must be positive");
  }

  Certificate cert;
  cert.mode = options.mode;
  cert.dims = dims.dims();
  cert.seed = options.seed;
  cert.d = d;
  cert.rank_tol = options.rank_tol;
  cert.feas_tol = options.feas_tol;
  cert.residual_tol = options.residual_tol;

  HermitianTensor S = H;
  if (options.mode == Mode::Symmetric) {
    const auto rep = check_structure(H, 1e-8);
    if (!rep.hermitian || !rep.symmetric) {
      throw std::invalid_argument("certify: symmetric mode needs a symmetric Hermitian tensor");
    }
    S = symmetrize(H);
  }
  cert.tensor = S;
  const VariableLayout layout = VariableLayout::make(options.mode, dims);

  // A positive rescaling keeps the minimizer (and genericity) and hands the
  // solver a unit-size objective.
  auto generic_objective = [&](std::uint64_t seed) {
    Polynomial F = random_sos(layout.nvars(), d, seed);
    double f_norm2 = 0;
    for (const auto& [mono, coeff] : F.terms()) f_norm2 += coeff * coeff;
    F *= 1.0 / std::max(1.0, std::sqrt(f_norm2));
    return F;
  };

  // Walk the flat truncations of a (possibly unconverged) moment vector;
  // the reconstruction residual is the gate, so a success is sound no
  // matter how the vector was obtained.
  auto try_extract = [&](const TruncatedMomentSequence& y, int k, LevelReport& level,
                         Decomposition* out) {
    for (int t = 1; t <= k; ++t) {
      const FlatWitness witness = is_flat(y, t, options.rank_tol);
      if (!witness.flat) continue;
      const TruncatedMomentSequence z = y.truncated(2 * t);
      const std::uint64_t ext_seed =
          options.seed * 1000003ull + static_cast<std::uint64_t>(k) * 101 + t;
      try {
        // Weak atoms are recovered with less accuracy than the default
        // sphere screen; the residual check below is the authoritative gate.
        const double atom_tol = std::max(1e-6, 100 * options.residual_tol);
        const AtomicMeasure mu = extract_atoms(z, t, witness, layout, ext_seed, atom_tol);
        Decomposition dec = atoms_to_decomposition(mu, layout, S);
        if (dec.residual <= options.residual_tol) {
          level.flat_t = t;
          *out = std::move(dec);
          return true;
        }
        // Numerical false flat; keep walking the truncations.
        std::ostringstream os;
        os << level.note << (level.note.empty() ? "" : "; ") << "t=" << t
           << " extracted with residual " << dec.residual;
        level.note = os.str();
      } catch (const std::runtime_error& e) {
        std::ostringstream os;
        os << level.note << (level.note.empty() ? "" : "; ") << "t=" << t << ": " << e.what();
        level.note = os.str();
      }
    }
    return false;
  };

  for (int k = d / 2; k <= k_max; ++k) {
    // An unsettled level is retried with a fresh generic objective before
    // giving up: both the hierarchy and the extraction only need some
    // generic objective to work.
    bool level_settled = false;
    for (int attempt = 0; attempt < 3; ++attempt) {
      LevelReport level;
      level.k = k;
      const auto t_level = std::chrono::steady_clock::now();

      const Polynomial F =
          generic_objective(options.seed + 7919ull * static_cast<std::uint64_t>(attempt));
      const SdpProblem problem = assemble_sdp(S, options.mode, k, F);
      level.moment_count = problem.num_moments;
      level.block_dim = problem.psd_blocks.front().dim;
      if (!options.dump_dir.empty()) {
        std::ostringstream name;
        name << options.dump_dir << "/sdp_k" << k << ".txt";
        std::ofstream os(name.str());
        dump_sdp(problem, os);
      }

      SolveOptions sopt;
      sopt.feas_tol = options.feas_tol;
      sopt.max_iter = options.max_iter;
      sopt.verbose = options.verbose;
      if (options.verbose) {
        std::cerr << "[certify] level k=" << k << " attempt " << attempt << ": "
                  << problem.num_moments << " moments, moment matrix "
                  << level.block_dim << "x" << level.block_dim << std::endl;
        sopt.log = &std::cerr;
      }
      const SdpSolution sol = solve(problem, sopt);
      level.status = sol.status;
      level.iterations = sol.iterations;

      if (sol.status == SdpStatus::Infeasible) {
        level.seconds = seconds_since(t_level);
        cert.levels.push_back(level);
        cert.verdict = Verdict::NotSeparable;
        cert.level_k = k;
        cert.infeasibility = sol.certificate;
        cert.margin = sol.certificate.margin;
        cert.message = sol.message;
        cert.total_seconds = seconds_since(t_start);
        return cert;
      }

      Decomposition dec;
      const bool have_y = sol.status == SdpStatus::Optimal || sol.near_solution;
      if (have_y && try_extract(sol.y, k, level, &dec)) {
        level.seconds = seconds_since(t_level);
        cert.levels.push_back(level);
        cert.verdict = Verdict::Separable;
        cert.level_k = k;
        cert.flat_t = level.flat_t;
        cert.decomposition = std::move(dec);
        cert.residual = cert.decomposition.residual;
        cert.total_seconds = seconds_since(t_start);
        return cert;
      }

      if (sol.status == SdpStatus::Unknown) {
        std::ostringstream os;
        os << level.note << (level.note.empty() ? "" : "; ") << sol.message;
        level.note = os.str();
      }
      level.seconds = seconds_since(t_level);
      cert.levels.push_back(level);
      if (sol.status == SdpStatus::Optimal) {
        level_settled = true;
        break;  // solved but nothing flat yet: escalate k
      }
      if (sol.status == SdpStatus::Unknown && !sol.near_solution) break;
    }
    if (!level_settled) {
      cert.verdict = Verdict::Undetermined;
      cert.level_k = k;
      cert.message = "solver could not settle level k=" + std::to_string(k) + ": " +
                     cert.levels.back().note;
      cert.total_seconds = seconds_since(t_start);
      return cert;
    }
  }

  cert.verdict = Verdict::Undetermined;
  cert.level_k = k_max;
  cert.message = "no flat truncation extracted up to k_max=" + std::to_string(k_max);
  cert.total_seconds = seconds_since(t_start);
  return cert;
}

}  // namespace sepdec
