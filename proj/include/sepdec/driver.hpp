#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sepdec/extract.hpp"
#include "sepdec/sdp.hpp"

namespace sepdec {

struct CertifyOptions {
  Mode mode = Mode::Partitioned;
  std::uint64_t seed = 1;
  /// Highest relaxation order tried; -1 means d/2 + 3.
  int k_max = -1;
  double rank_tol = 1e-6;
  double feas_tol = 1e-8;
  double residual_tol = 1e-6;
  /// Even objective degree >= 2m + 2; 0 means 2(m+1).
  int d_override = 0;
  int max_iter = 200;
  bool verbose = false;
  /// When set, each relaxation is dumped to <dir>/sdp_k<k>.txt.
  std::string dump_dir;
};

enum class Verdict { Separable, NotSeparable, Undetermined };

struct LevelReport {
  int k = 0;
  SdpStatus status = SdpStatus::Unknown;
  int iterations = 0;
  int moment_count = 0;
  int block_dim = 0;
  double seconds = 0.0;
  int flat_t = -1;  // truncation that extracted, when any
  std::string note;
};

/// Final verdict record: a decomposition with its residual, an infeasibility
/// certificate with its margin, or an honest Undetermined.
struct Certificate {
  Verdict verdict = Verdict::Undetermined;
  Mode mode = Mode::Partitioned;
  std::vector<int> dims;
  int level_k = -1;
  int flat_t = -1;
  Decomposition decomposition;            // Separable
  InfeasibilityCertificate infeasibility; // NotSeparable
  double residual = std::numeric_limits<double>::quiet_NaN();
  double margin = 0.0;
  std::uint64_t seed = 0;
  int d = 0;
  double rank_tol = 0, feas_tol = 0, residual_tol = 0;
  std::vector<LevelReport> levels;
  std::string message;
  double total_seconds = 0.0;

  /// Tensor the verdict was issued for (symmetrized in symmetric mode).
  /// Carried for independent rechecking; not serialized.
  HermitianTensor tensor;
};

/// Decide (symmetric) decomposability of H by walking the relaxation
/// hierarchy: solve the level-k problem for a generic SOS objective;
/// infeasibility settles the question, otherwise try the flat truncations
/// t = 1..k and extract; escalate k when nothing extracts, up to k_max.
Certificate certify(const HermitianTensor& H, const CertifyOptions& options);

const char* to_string(Verdict v);
const char* to_string(SdpStatus s);

}  // namespace sepdec
