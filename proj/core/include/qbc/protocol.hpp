#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qbc/decay.hpp"
#include "qbc/qcore.hpp"
#include "qbc/report.hpp"
#include "qbc/rng.hpp"

namespace qbc::protocol {

enum class Basis { Z, X };

/// One qubit on the receiver's ledger: drawn uniformly from the four
/// conjugate-basis states, remembered secretly until unveiling.
struct QubitPreparation {
  std::size_t index = 0;
  Basis basis = Basis::Z;
  int bit = 0;

  decay::Polarization polarization() const;
  qcore::StateVector state() const;
};

/// Session parameters.  Times are expressed in units of the qubit storage
/// bound T: the species lifetime is tau_over_T and unveiling happens at
/// unveil_over_T.
struct CommitmentConfig {
  std::size_t n_qubits = 1000;
  double tau_over_T = 10.0;
  double unveil_over_T = 2.0;
  decay::ParticleSpecies species = decay::neutron_species();
  std::uint64_t seed = 0;

  void validate() const;

  /// Copy of the species with the lifetime rescaled into protocol time
  /// units, so decay sampling and count checks share one clock.
  decay::ParticleSpecies species_in_protocol_units() const;
};

enum class StrategyKind {
  Honest0,          // hold the qubits, return them at unveiling
  Honest1,          // swap every qubit into a W particle immediately
  SwitchZeroToOne,  // hold, then swap late and fabricate the missing history
  SwitchOneToZero,  // swap immediately, then claim 0 and guess decayed qubits
  FabricateAll,     // never touch the qubits' spins; forge isotropic data
};

/// How SwitchOneToZero fills in a decayed qubit it can no longer return.
enum class GuessRule {
  RandomFromSet,     // uniform pick among the four preparation states
  PosteriorOptimal,  // best single state given the observed electron
};

struct AliceStrategy {
  StrategyKind kind = StrategyKind::Honest0;
  double switch_over_T = 1.0;  // swap moment for SwitchZeroToOne
  GuessRule guess_rule = GuessRule::RandomFromSet;

  static AliceStrategy honest0();
  static AliceStrategy honest1();
  static AliceStrategy switch_zero_to_one(double switch_over_T);
  static AliceStrategy switch_one_to_zero(GuessRule rule);
  static AliceStrategy fabricate_all();

  /// Short machine name: honest0, honest1, switch01, switch10,
  /// switch10-posterior, fabricate.
  std::string name() const;

  void validate(const CommitmentConfig& config) const;
};

/// Parse a strategy from its short machine name.
AliceStrategy strategy_from_name(const std::string& name);

// Messages exchanged on the wire.

struct QubitSequence {
  std::vector<qcore::StateVector> states;
};

struct UnveilBit {
  int bit = -1;
};

struct ReturnedQubits {
  std::vector<qcore::StateVector> states;
};

struct ElectronData {
  std::vector<decay::DecayEvent> events;
};

using Message = std::variant<QubitSequence, UnveilBit, ReturnedQubits,
                             ElectronData>;

/// Check that electron evidence refers to distinct qubit indices within
/// range; throws std::invalid_argument otherwise.
void validate_electron_data(const ElectronData& data, std::size_t n_qubits);

/// What the committer carries between the commit and unveil phases.
struct WParticleRecord {
  double decay_time = 0.0;  // on the protocol clock (commit happens at 0)
  bool decayed_before_unveil = false;
};

struct AliceInternalState {
  AliceStrategy strategy;
  std::size_t n_qubits = 0;
  double unveil_time = 0.0;

  /// Qubits still held (Honest0) or their remembered originals
  /// (SwitchOneToZero, for the ones that did not decay).
  std::vector<qcore::StateVector> held_states;

  /// One record per qubit for the strategies that create W particles.
  std::vector<WParticleRecord> w_records;

  /// Genuine measured electrons (strategies that really couple the spins).
  std::vector<decay::DecayEvent> measured_events;
};

struct TimedMessage {
  double time = 0.0;
  enum class Direction { BobToAlice, AliceToBob } direction =
      Direction::BobToAlice;
  Message message;
};

/// Complete record of one session: the wire traffic plus both parties'
/// private ledgers and the receiver's verdict.
struct SessionTranscript {
  CommitmentConfig config;
  AliceStrategy strategy;
  std::vector<QubitPreparation> preparations;      // receiver's secret
  std::vector<TimedMessage> messages;              // wire traffic, in order
  std::vector<decay::DecayEvent> committer_decay_log;
  verify::VerificationReport report;
};

/// Receiver's commit-phase move: draw n preparations and the matching qubit
/// message.
std::pair<std::vector<QubitPreparation>, Message> bob_prepare_qubits(
    std::size_t n, RandomStream& rng);

/// Committer's commit-phase move under the given strategy.
AliceInternalState alice_commit(const AliceStrategy& strategy,
                                const Message& qubits,
                                const CommitmentConfig& config,
                                RandomStream& rng);

/// Committer's unveiling move at `time` (>= the configured unveil time):
/// the claimed bit plus the supporting payload.
std::pair<Message, Message> alice_unveil(AliceInternalState& state,
                                         const CommitmentConfig& config,
                                         double time, RandomStream& rng);

/// Best single-qubit state to return for a decayed qubit, given the
/// observed electron: maximizes the expected pass probability of the
/// receiver's conjugate-basis check under the emission-law posterior.
qcore::StateVector decay_posterior_guess(const decay::DecayEvent& event,
                                         const decay::ParticleSpecies& species);

/// Run one full session: prepare, commit, unveil, verify.
SessionTranscript run_session(const CommitmentConfig& config,
                              const AliceStrategy& strategy,
                              const verify::TestConfig& test = {});

/// Canonical JSON rendering of a transcript (schema_version 1).  Emits the
/// same bytes for the same transcript on every run and platform.
std::string to_json_string(const SessionTranscript& transcript,
                           int indent = -1);

}  // namespace qbc::protocol
