#include <cstdio>
#include <iostream>
#include <random>

#include "CLI11.hpp"

#include "sepdec/io.hpp"
#include "sepdec/states.hpp"

namespace {

using namespace sepdec;

void print_summary(const Certificate& cert) {
  std::cout << "verdict: " << to_string(cert.verdict) << "\n";
  std::cout << "mode: " << (cert.mode == Mode::Symmetric ? "symmetric" : "partitioned")
            << ", level k=" << cert.level_k;
  if (cert.flat_t >= 0) std::cout << ", flat at t=" << cert.flat_t;
  std::cout << ", " << cert.total_seconds << " s\n";
  if (cert.verdict == Verdict::Separable) {
    std::cout << "decomposition: " << cert.decomposition.rank()
              << " terms, residual " << cert.residual << "\n";
    for (const auto& atom : cert.decomposition.atoms) {
      std::cout << "  weight " << atom.weight << ":";
      for (const auto& u : atom.vectors) {
        std::cout << " (";
        for (int i = 0; i < u.size(); ++i) {
          std::cout << (i ? ", " : "") << u[i].real()
                    << (u[i].imag() < 0 ? "" : "+") << u[i].imag() << "i";
        }
        std::cout << ")";
      }
      std::cout << "\n";
    }
  } else if (cert.verdict == Verdict::NotSeparable) {
    std::cout << "infeasibility margin: " << cert.margin << "\n";
  } else {
    std::cout << "note: " << cert.message << "\n";
  }
}

int run_certify(const std::string& state_path, CertifyOptions opt, bool rescale,
                const std::string& out_path) {
  HermitianTensor H;
  try {
    H = parse_state_file(state_path, rescale);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  }
  Certificate cert;
  try {
    cert = certify(H, opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  }
  print_summary(cert);
  if (!out_path.empty()) {
    write_certificate(cert, out_path);
    std::cout << "certificate written to " << out_path << "\n";
  }
  switch (cert.verdict) {
    case Verdict::Separable: return 0;
    case Verdict::NotSeparable: return 1;
    default: return 2;
  }
}

int run_verify(const std::string& cert_path, const std::string& state_path) {
  Certificate cert;
  HermitianTensor H;
  try {
    cert = read_certificate(cert_path);
    H = parse_state_file(state_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  }
  const std::string reason = recheck_certificate(cert, H);
  if (reason.empty()) {
    std::cout << "certificate checks out: " << to_string(cert.verdict) << "\n";
    return 0;
  }
  std::cout << "certificate REJECTED: " << reason << "\n";
  return 1;
}

struct BenchCase {
  std::string name;
  HermitianTensor state;
  Mode mode;
};

int run_bench(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<BenchCase> cases;
  cases.push_back({"ghz-w-mixture", ghz_w_mixture(), Mode::Symmetric});
  cases.push_back({"bell-mixture", bell_mixture(), Mode::Symmetric});
  const HermitianTensor pair_state = symmetrized_product_pair(2, rng);
  cases.push_back({"product-pair", pair_state, Mode::Symmetric});
  cases.push_back({"product-pair", pair_state, Mode::Partitioned});
  cases.push_back({"seven-term", seven_term_two_qubit(), Mode::Symmetric});
  const HermitianTensor iso_half = isotropic_state(2, 0.5);
  cases.push_back({"isotropic-0.5", iso_half, Mode::Symmetric});
  cases.push_back({"isotropic-0.5", iso_half, Mode::Partitioned});
  cases.push_back({"isotropic-1.0", isotropic_state(2, 1.0), Mode::Partitioned});

  std::printf("%-16s %-12s %-14s %4s %12s %3s %9s\n", "state", "mode", "verdict", "r",
              "resid/margin", "k", "seconds");
  for (const auto& c : cases) {
    CertifyOptions opt;
    opt.mode = c.mode;
    opt.seed = seed;
    const Certificate cert = certify(c.state, opt);
    const double quality = cert.verdict == Verdict::Separable ? cert.residual
                           : cert.verdict == Verdict::NotSeparable ? cert.margin
                                                                   : 0.0;
    std::printf("%-16s %-12s %-14s %4d %12.3e %3d %9.2f\n", c.name.c_str(),
                c.mode == Mode::Symmetric ? "symmetric" : "partitioned",
                to_string(cert.verdict),
                cert.verdict == Verdict::Separable ? cert.decomposition.rank() : 0,
                quality, cert.level_k, cert.total_seconds);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separability certification and product-state decomposition of "
               "multipartite mixed states via moment relaxations"};
  app.require_subcommand(1);

  std::string state_path, out_path, cert_path, dump_dir;
  CertifyOptions opt;
  bool symmetric = false, rescale = false;
  int d_override = 0;

  auto* certify_cmd = app.add_subcommand("certify", "decide separability of a state file");
  certify_cmd->add_option("state-file", state_path, "JSON state file")->required();
  certify_cmd->add_flag("--symmetric", symmetric, "look for a symmetric decomposition");
  certify_cmd->add_option("--k-max", opt.k_max, "highest relaxation order");
  certify_cmd->add_option("--seed", opt.seed, "seed for the generic objective and extraction");
  certify_cmd->add_option("--rank-tol", opt.rank_tol, "relative rank threshold");
  certify_cmd->add_option("--feas-tol", opt.feas_tol, "SDP feasibility tolerance");
  certify_cmd->add_option("--residual-tol", opt.residual_tol, "decomposition residual tolerance");
  certify_cmd->add_option("--d-override", d_override, "even objective degree >= 2m+2");
  certify_cmd->add_option("--out", out_path, "write the certificate JSON here");
  certify_cmd->add_option("--dump-sdp", dump_dir, "dump each relaxation to this directory");
  certify_cmd->add_flag("--verbose", opt.verbose, "iteration log to stderr");
  certify_cmd->add_flag("--rescale", rescale, "normalize a trace != 1 input");

  auto* verify_cmd = app.add_subcommand("verify", "re-check a certificate against a state file");
  verify_cmd->add_option("certificate", cert_path, "certificate JSON")->required();
  verify_cmd->add_option("state-file", state_path, "JSON state file")->required();

  std::uint64_t bench_seed = 1;
  auto* bench_cmd = app.add_subcommand("bench", "run the bundled states and print a table");
  bench_cmd->add_option("--seed", bench_seed, "seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (certify_cmd->parsed()) {
      opt.mode = symmetric ? Mode::Symmetric : Mode::Partitioned;
      opt.d_override = d_override;
      opt.dump_dir = dump_dir;
      return run_certify(state_path, opt, rescale, out_path);
    }
    if (verify_cmd->parsed()) return run_verify(cert_path, state_path);
    if (bench_cmd->parsed()) return run_bench(bench_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  }
  return 3;
}
