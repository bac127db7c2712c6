#pragma once

#include <string>

#include "sepdec/driver.hpp"

namespace sepdec {

/// Read a state file: {"dims": [...], "ensemble": [{"p": w, "amplitudes":
/// [[re, im], ...]}, ...]} or {"dims": [...], "density": [[[re, im], ...],
/// ...]}. Amplitudes are flattened lexicographically, party 1 slowest;
/// complex numbers are [re, im] pairs. Errors carry the offending field
/// path. A trace away from one is accepted with a warning (stderr) unless
/// rescale is set.
HermitianTensor parse_state_file(const std::string& path, bool rescale = false);

/// Serialize a certificate. Before writing, the verdict is re-checked
/// against cert.tensor through an independent code path: a Separable record
/// must reconstruct within its residual tolerance and a NotSeparable record
/// must carry a positive verified margin; a violation throws instead of
/// producing a misleading file.
void write_certificate(const Certificate& cert, const std::string& path);

/// Read a certificate back (without the tensor, which is not serialized).
Certificate read_certificate(const std::string& path);

std::string certificate_to_json(const Certificate& cert);
Certificate certificate_from_json(const std::string& text);

/// Fields-wise equality over everything that is serialized.
bool certificates_equal(const Certificate& a, const Certificate& b);

/// Independent recheck of a stored certificate against a state: Separable
/// certificates are reconstructed and compared, NotSeparable certificates
/// are re-verified against a freshly assembled constraint system at the
/// recorded level. Returns a human-readable failure reason, or empty on
/// success.
std::string recheck_certificate(const Certificate& cert, const HermitianTensor& H);

}  // namespace sepdec
