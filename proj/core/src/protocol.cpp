#include "qbc/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "qbc/verify.hpp"

namespace qbc::protocol {

namespace {

constexpr double kPi = 3.14159265358979323846;

const QubitSequence& expect_qubit_sequence(const Message& msg) {
  const auto* seq = std::get_if<QubitSequence>(&msg);
  if (seq == nullptr) {
    throw std::invalid_argument("commit expects a qubit-sequence message");
  }
  return *seq;
}

/// The four conjugate-basis states, indexed as the strategies and the
/// posterior enumerate them.
const std::array<decay::Polarization, 4> kCandidateOrder = {
    decay::Polarization::PlusZ, decay::Polarization::MinusZ,
    decay::Polarization::PlusX, decay::Polarization::MinusX};

qcore::StateVector state_of(decay::Polarization p) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (p) {
    case decay::Polarization::PlusZ:
      return qcore::StateVector::qubit(1.0, 0.0);
    case decay::Polarization::MinusZ:
      return qcore::StateVector::qubit(0.0, 1.0);
    case decay::Polarization::PlusX:
      return qcore::StateVector::qubit(r, r);
    case decay::Polarization::MinusX:
      return qcore::StateVector::qubit(r, -r);
  }
  throw std::invalid_argument("unknown polarization");
}

/// Exponential decay time conditioned on landing inside [0, window].
double truncated_decay_time(double mean, double window, RandomStream& rng) {
  const double cap = -std::expm1(-window / mean);
  return -mean * std::log1p(-rng.uniform01() * cap);
}

}  // namespace

decay::Polarization QubitPreparation::polarization() const {
  if (basis == Basis::Z) {
    return bit == 0 ? decay::Polarization::PlusZ : decay::Polarization::MinusZ;
  }
  return bit == 0 ? decay::Polarization::PlusX : decay::Polarization::MinusX;
}

qcore::StateVector QubitPreparation::state() const {
  return state_of(polarization());
}

void CommitmentConfig::validate() const {
  if (n_qubits < 1) {
    throw std::invalid_argument("config field n_qubits must be >= 1");
  }
  if (!(tau_over_T > 0.0)) {
    throw std::invalid_argument("config field tau_over_T must be > 0, got " +
                                std::to_string(tau_over_T));
  }
  if (!(unveil_over_T > 0.0)) {
    throw std::invalid_argument(
        "config field unveil_over_T must be > 0, got " +
        std::to_string(unveil_over_T));
  }
  species.validate();
}

decay::ParticleSpecies CommitmentConfig::species_in_protocol_units() const {
  decay::ParticleSpecies s = species;
  s.mean_lifetime = tau_over_T;
  return s;
}

AliceStrategy AliceStrategy::honest0() { return {StrategyKind::Honest0}; }
AliceStrategy AliceStrategy::honest1() { return {StrategyKind::Honest1}; }

AliceStrategy AliceStrategy::switch_zero_to_one(double switch_over_T) {
  AliceStrategy s;
  s.kind = StrategyKind::SwitchZeroToOne;
  s.switch_over_T = switch_over_T;
  return s;
}

AliceStrategy AliceStrategy::switch_one_to_zero(GuessRule rule) {
  AliceStrategy s;
  s.kind = StrategyKind::SwitchOneToZero;
  s.guess_rule = rule;
  return s;
}

AliceStrategy AliceStrategy::fabricate_all() {
  return {StrategyKind::FabricateAll};
}

std::string AliceStrategy::name() const {
  switch (kind) {
    case StrategyKind::Honest0:
      return "honest0";
    case StrategyKind::Honest1:
      return "honest1";
    case StrategyKind::SwitchZeroToOne:
      return "switch01";
    case StrategyKind::SwitchOneToZero:
      return guess_rule == GuessRule::PosteriorOptimal ? "switch10-posterior"
                                                       : "switch10";
    case StrategyKind::FabricateAll:
      return "fabricate";
  }
  throw std::invalid_argument("unknown strategy kind");
}

void AliceStrategy::validate(const CommitmentConfig& config) const {
  if (kind == StrategyKind::SwitchZeroToOne) {
    if (!(switch_over_T > 0.0 && switch_over_T < config.unveil_over_T)) {
      throw std::invalid_argument(
          "strategy field switch_over_T must lie in (0, unveil_over_T), got " +
          std::to_string(switch_over_T));
    }
  }
}

AliceStrategy strategy_from_name(const std::string& name) {
  if (name == "honest0") return AliceStrategy::honest0();
  if (name == "honest1") return AliceStrategy::honest1();
  if (name == "switch01") return AliceStrategy::switch_zero_to_one(1.0);
  if (name == "switch10") {
    return AliceStrategy::switch_one_to_zero(GuessRule::RandomFromSet);
  }
  if (name == "switch10-posterior") {
    return AliceStrategy::switch_one_to_zero(GuessRule::PosteriorOptimal);
  }
  if (name == "fabricate") return AliceStrategy::fabricate_all();
  throw std::invalid_argument(
      "unknown strategy \"" + name +
      "\" (expected honest0, honest1, switch01, switch10, "
      "switch10-posterior, or fabricate)");
}

void validate_electron_data(const ElectronData& data, std::size_t n_qubits) {
  std::vector<bool> seen(n_qubits, false);
  for (const auto& e : data.events) {
    if (e.index >= n_qubits) {
      throw std::invalid_argument("electron event index " +
                                  std::to_string(e.index) +
                                  " outside [0, n_qubits)");
    }
    if (seen[e.index]) {
      throw std::invalid_argument("duplicate electron event index " +
                                  std::to_string(e.index));
    }
    seen[e.index] = true;
  }
}

std::pair<std::vector<QubitPreparation>, Message> bob_prepare_qubits(
    std::size_t n, RandomStream& rng) {
  if (n < 1) {
    throw std::invalid_argument("qubit count must be >= 1");
  }
  std::vector<QubitPreparation> preps;
  preps.reserve(n);
  QubitSequence seq;
  seq.states.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pick = static_cast<int>(rng.uniform_below(4));
    QubitPreparation prep;
    prep.index = i;
    prep.basis = pick < 2 ? Basis::Z : Basis::X;
    prep.bit = pick & 1;
    seq.states.push_back(prep.state());
    preps.push_back(prep);
  }
  return {std::move(preps), Message(std::move(seq))};
}

AliceInternalState alice_commit(const AliceStrategy& strategy,
                                const Message& qubits,
                                const CommitmentConfig& config,
                                RandomStream& rng) {
  const QubitSequence& seq = expect_qubit_sequence(qubits);
  if (seq.states.size() != config.n_qubits) {
    throw std::invalid_argument(
        "qubit sequence length " + std::to_string(seq.states.size()) +
        " does not match configured n_qubits " +
        std::to_string(config.n_qubits));
  }
  strategy.validate(config);

  const decay::ParticleSpecies species = config.species_in_protocol_units();
  const double unveil = config.unveil_over_T;

  AliceInternalState state;
  state.strategy = strategy;
  state.n_qubits = config.n_qubits;
  state.unveil_time = unveil;

  switch (strategy.kind) {
    case StrategyKind::Honest0:
      state.held_states = seq.states;
      break;

    case StrategyKind::Honest1:
    case StrategyKind::FabricateAll:
    case StrategyKind::SwitchOneToZero: {
      // Swap every qubit into a W immediately; the spins decay from t = 0.
      const bool record_momenta = strategy.kind != StrategyKind::FabricateAll;
      if (strategy.kind == StrategyKind::SwitchOneToZero) {
        state.held_states = seq.states;
      }
      state.w_records.resize(config.n_qubits);
      for (std::size_t i = 0; i < config.n_qubits; ++i) {
        const double t = decay::sample_decay_time(species, rng);
        auto& rec = state.w_records[i];
        rec.decay_time = t;
        rec.decayed_before_unveil = t <= unveil;
        if (rec.decayed_before_unveil && record_momenta) {
          const Eigen::Vector3d spin = qcore::bloch_vector(seq.states[i]);
          state.measured_events.push_back(
              {i, t, decay::sample_electron_momentum(spin, species, rng)});
        }
      }
      break;
    }

    case StrategyKind::SwitchZeroToOne: {
      // Hold until the switch, then swap; only decays landing in
      // (switch, unveil] produce genuine measurements.
      const double start = strategy.switch_over_T;
      state.w_records.resize(config.n_qubits);
      for (std::size_t i = 0; i < config.n_qubits; ++i) {
        const double t = start + decay::sample_decay_time(species, rng);
        auto& rec = state.w_records[i];
        rec.decay_time = t;
        rec.decayed_before_unveil = t <= unveil;
        if (rec.decayed_before_unveil) {
          const Eigen::Vector3d spin = qcore::bloch_vector(seq.states[i]);
          state.measured_events.push_back(
              {i, t, decay::sample_electron_momentum(spin, species, rng)});
        }
      }
      break;
    }
  }
  return state;
}

std::pair<Message, Message> alice_unveil(AliceInternalState& state,
                                         const CommitmentConfig& config,
                                         double time, RandomStream& rng) {
  if (time < config.unveil_over_T) {
    throw std::invalid_argument("cannot unveil at time " +
                                std::to_string(time) +
                                " before the unveil time " +
                                std::to_string(config.unveil_over_T));
  }
  const decay::ParticleSpecies species = config.species_in_protocol_units();
  const double unveil = config.unveil_over_T;

  switch (state.strategy.kind) {
    case StrategyKind::Honest0:
      return {Message(UnveilBit{0}),
              Message(ReturnedQubits{state.held_states})};

    case StrategyKind::Honest1:
      return {Message(UnveilBit{1}),
              Message(ElectronData{state.measured_events})};

    case StrategyKind::FabricateAll: {
      // The decay times are real; every momentum is forged isotropically.
      ElectronData data;
      for (std::size_t i = 0; i < state.w_records.size(); ++i) {
        const auto& rec = state.w_records[i];
        if (!rec.decayed_before_unveil) continue;
        data.events.push_back(
            {i, rec.decay_time,
             decay::fabricate_isotropic_event(species, rng)});
      }
      return {Message(UnveilBit{1}), Message(std::move(data))};
    }

    case StrategyKind::SwitchZeroToOne: {
      // Genuine events cover only (switch, unveil].  Each silent qubit is
      // assigned a forged event with just the probability that makes the
      // announced set an exact draw from the honest per-qubit decay law.
      const double tau = config.tau_over_T;
      const double p_full = -std::expm1(-unveil / tau);
      const double p_genuine =
          -std::expm1(-(unveil - state.strategy.switch_over_T) / tau);
      const double top_up = (p_full - p_genuine) / (1.0 - p_genuine);

      ElectronData data;
      auto genuine = state.measured_events.begin();
      for (std::size_t i = 0; i < state.w_records.size(); ++i) {
        if (state.w_records[i].decayed_before_unveil) {
          data.events.push_back(*genuine++);
        } else if (rng.uniform01() < top_up) {
          data.events.push_back(
              {i, truncated_decay_time(tau, unveil, rng),
               decay::fabricate_isotropic_event(species, rng)});
        }
      }
      return {Message(UnveilBit{1}), Message(std::move(data))};
    }

    case StrategyKind::SwitchOneToZero: {
      // Undecayed W's still hold the received spins coherently and are
      // swapped back; decayed ones are gone and must be guessed.
      ReturnedQubits returned;
      returned.states.reserve(state.n_qubits);
      auto event = state.measured_events.begin();
      for (std::size_t i = 0; i < state.n_qubits; ++i) {
        if (!state.w_records[i].decayed_before_unveil) {
          returned.states.push_back(state.held_states[i]);
          continue;
        }
        const decay::DecayEvent& ev = *event++;
        if (state.strategy.guess_rule == GuessRule::PosteriorOptimal) {
          returned.states.push_back(decay_posterior_guess(ev, species));
        } else {
          returned.states.push_back(
              state_of(kCandidateOrder[rng.uniform_below(4)]));
        }
      }
      return {Message(UnveilBit{0}), Message(std::move(returned))};
    }
  }
  throw std::invalid_argument("unknown strategy kind");
}

qcore::StateVector decay_posterior_guess(
    const decay::DecayEvent& event, const decay::ParticleSpecies& species) {
  const double p = event.electron_momentum.norm();
  if (p < 1e-300) {
    throw std::invalid_argument(
        "invalid event: zero-magnitude electron momentum");
  }
  const Eigen::Vector3d n = event.electron_momentum / p;
  const double kappa = species.kappa_of(p);

  // Posterior over the four candidates under the emission law; the Bloch
  // vectors sum to zero, so the normalizer is exactly 4.
  std::array<double, 4> posterior{};
  std::array<Eigen::Vector3d, 4> bloch{};
  for (int k = 0; k < 4; ++k) {
    bloch[k] = decay::axis_of(kCandidateOrder[k]);
    posterior[k] = (1.0 + kappa * bloch[k].dot(n)) / 4.0;
  }

  // The expected pass probability of a guess g against the posterior is
  // (1 + r_g . r_bar) / 2 with r_bar the posterior-mean Bloch vector, so
  // the optimum lies on the great circle through the two leading
  // candidates.  All candidates sit in the Z-X plane, hence so does that
  // circle (for an antipodal leading pair it is taken as the Z-X circle).
  Eigen::Vector3d r_bar = Eigen::Vector3d::Zero();
  for (int k = 0; k < 4; ++k) r_bar += posterior[k] * bloch[k];

  const auto objective = [&](double t) {
    return 0.5 * (1.0 + std::sin(t) * r_bar.x() + std::cos(t) * r_bar.z());
  };

  // 1-degree grid over the circle, then golden-section refinement inside
  // the winning bracket.
  const double step = kPi / 180.0;
  double best_t = 0.0, best_f = objective(0.0);
  for (int i = 1; i < 360; ++i) {
    const double t = i * step;
    const double f = objective(t);
    if (f > best_f) {
      best_f = f;
      best_t = t;
    }
  }
  double lo = best_t - step, hi = best_t + step;
  const double gold = 0.38196601125010515;
  double x1 = lo + gold * (hi - lo), x2 = hi - gold * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  for (int i = 0; i < 60; ++i) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = hi - gold * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = lo + gold * (hi - lo);
      f1 = objective(x1);
    }
  }
  const double t = 0.5 * (lo + hi);
  return qcore::StateVector::qubit(std::cos(t / 2.0), std::sin(t / 2.0));
}

SessionTranscript run_session(const CommitmentConfig& config,
                              const AliceStrategy& strategy,
                              const verify::TestConfig& test) {
  config.validate();
  test.validate();
  strategy.validate(config);

  RandomStream prep_rng(config.seed, {0});
  RandomStream alice_rng(config.seed, {1});
  RandomStream bob_rng(config.seed, {2});

  SessionTranscript transcript;
  transcript.config = config;
  transcript.strategy = strategy;

  auto [preps, qubit_msg] = bob_prepare_qubits(config.n_qubits, prep_rng);
  transcript.preparations = std::move(preps);

  AliceInternalState alice =
      alice_commit(strategy, qubit_msg, config, alice_rng);
  transcript.messages.push_back(
      {0.0, TimedMessage::Direction::BobToAlice, std::move(qubit_msg)});

  const double unveil = config.unveil_over_T;
  auto [bit_msg, payload] = alice_unveil(alice, config, unveil, alice_rng);
  const int bit = std::get<UnveilBit>(bit_msg).bit;
  transcript.messages.push_back(
      {unveil, TimedMessage::Direction::AliceToBob, std::move(bit_msg)});

  if (bit == 0) {
    transcript.report = verify::verify_bit0(transcript.preparations, payload,
                                            bob_rng);
  } else {
    const auto& data = std::get<ElectronData>(payload);
    transcript.report = verify::verify_bit1(
        transcript.preparations, data.events,
        config.species_in_protocol_units(), config, test);
  }
  transcript.messages.push_back(
      {unveil, TimedMessage::Direction::AliceToBob, std::move(payload)});

  transcript.committer_decay_log = std::move(alice.measured_events);
  return transcript;
}

}  // namespace qbc::protocol
