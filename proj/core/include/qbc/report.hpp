#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbc::verify {

/// Knobs for the receiver's statistical checks.
struct TestConfig {
  double significance = 1e-3;  // total false-rejection budget per session
  int theta_bins = 10;         // even; bins are folded in pairs around pi/2
  int p_bins = 5;
  int min_events_per_bin = 20;  // below this a folded pair is left out

  void validate() const {
    if (!(significance > 0.0 && significance < 1.0)) {
      throw std::invalid_argument("significance must lie in (0, 1), got " +
                                  std::to_string(significance));
    }
    if (theta_bins < 2 || theta_bins % 2 != 0) {
      throw std::invalid_argument("theta_bins must be even and >= 2, got " +
                                  std::to_string(theta_bins));
    }
    if (p_bins < 1) {
      throw std::invalid_argument("p_bins must be >= 1, got " +
                                  std::to_string(p_bins));
    }
    if (min_events_per_bin < 1) {
      throw std::invalid_argument("min_events_per_bin must be >= 1, got " +
                                  std::to_string(min_events_per_bin));
    }
  }
};

/// Outcome of the receiver's unveiling checks.  For a claimed bit of 1 the
/// statistical fields carry the asymmetry fit and the decay-count test; for
/// a claimed bit of 0 they are trivial and failed_qubit_indices lists the
/// positions whose measurement came back wrong.
struct VerificationReport {
  bool accepted = false;
  int bit_claimed = -1;

  /// Combined p-value; the session is accepted iff it reaches the
  /// configured significance.
  double p_value = 0.0;

  double fitted_kappa_amplitude = 0.0;
  double expected_kappa_amplitude = 0.0;
  double fitted_scale = 0.0;  // amplitude in units of the honest expectation
  double scale_sigma = 0.0;

  double count_p_value = 0.0;
  std::int64_t count_observed = 0;
  double count_expected = 0.0;

  std::vector<std::size_t> failed_qubit_indices;

  /// Human-readable reason when a session is rejected outside the normal
  /// statistical path (malformed evidence, undefined test, ...).
  std::string diagnostic;
};

}  // namespace qbc::verify
