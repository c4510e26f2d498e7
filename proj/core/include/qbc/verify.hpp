#pragma once

#include <cstdint>
#include <vector>

#include "qbc/decay.hpp"
#include "qbc/protocol.hpp"
#include "qbc/report.hpp"
#include "qbc/rng.hpp"

namespace qbc::verify {

/// One folded (theta, pi - theta) x momentum-band cell of the asymmetry
/// table.  `forward` is the bin on the theta < pi/2 side.
struct AsymmetryCell {
  int theta_pair = 0;  // index of the forward theta bin
  int p_bin = 0;
  double theta_low = 0.0;   // forward bin bounds
  double theta_high = 0.0;
  double p_low = 0.0;
  double p_high = 0.0;
  double mean_cos_theta = 0.0;  // solid-angle average of cos over the bin
  std::int64_t n_forward = 0;
  std::int64_t n_mirror = 0;
  double asymmetry = 0.0;  // (n_f - n_m) / (n_f + n_m)
  bool usable = false;     // pair population reached min_events_per_bin
};

struct AsymmetryTable {
  decay::AsymmetryHistogram histogram;
  std::vector<AsymmetryCell> cells;
};

/// Bin events against the receiver's preparation record.  Momentum edges
/// span [0, max observed |p|] unless a positive p_max override is given.
/// Throws std::invalid_argument on an empty event list or invalid indices.
AsymmetryTable asymmetry_histogram(
    const std::vector<protocol::QubitPreparation>& preparations,
    const std::vector<decay::DecayEvent>& events, const TestConfig& test,
    double p_max_override = 0.0);

/// Re-measure every returned qubit in its preparation basis; accept iff all
/// outcomes reproduce the prepared bits.  The stream supplies the
/// measurement randomness.
VerificationReport verify_bit0(
    const std::vector<protocol::QubitPreparation>& preparations,
    const protocol::Message& returned, RandomStream& rng);

/// Statistical checks on announced electron data: decay-count consistency
/// and a one-parameter amplitude fit of the folded asymmetry cells against
/// the parity-violation template.  Each subtest runs at significance/2.
VerificationReport verify_bit1(
    const std::vector<protocol::QubitPreparation>& preparations,
    const std::vector<decay::DecayEvent>& events,
    const decay::ParticleSpecies& species,
    const protocol::CommitmentConfig& config, const TestConfig& test);

/// Build the receiver's purified preparation of n_small qubits, push it
/// through the commit-phase action of every strategy for both bit values,
/// and return the largest trace distance any pair of reduced receiver
/// states exhibits.  Zero (to rounding) certifies concealment.
double concealing_audit(std::size_t n_small, RandomStream& rng);

/// Negative control: same audit but with a deliberately broken b = 0 action
/// that hands one qubit back early.  Returns a strictly positive distance.
double concealing_audit_leaky(std::size_t n_small, RandomStream& rng);

/// Fraction of seeded sessions of the given strategy that the receiver
/// rejects.
double detection_power(const protocol::AliceStrategy& strategy,
                       const protocol::CommitmentConfig& config,
                       const TestConfig& test, std::size_t trials);

}  // namespace qbc::verify
