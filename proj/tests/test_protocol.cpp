#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <variant>
#include <vector>

#include "qbc/protocol.hpp"
#include "qbc/verify.hpp"

using namespace qbc;
using namespace qbc::protocol;

namespace {

constexpr double kPi = 3.14159265358979323846;

decay::ParticleSpecies mono09() {
  decay::ParticleSpecies s = decay::neutron_species();
  s.name = "mono09";
  s.asymmetry = 0.9;
  s.electron_mass_kev = 0.0;  // beta = 1 everywhere
  s.spectrum = decay::SpectrumMode::Monoenergetic;
  return s;
}

CommitmentConfig config_with(std::size_t n, std::uint64_t seed,
                             const decay::ParticleSpecies& species) {
  CommitmentConfig c;
  c.n_qubits = n;
  c.seed = seed;
  c.species = species;
  return c;
}

Eigen::Vector3d posterior_mean_bloch(const Eigen::Vector3d& direction,
                                     double kappa) {
  // Sum_k p_k r_k with p_k = (1 + kappa r_k.n)/4 over the four candidates
  // collapses to (kappa/2) times the Z-X projection of n.
  return 0.5 * kappa * Eigen::Vector3d(direction.x(), 0.0, direction.z());
}

}  // namespace

TEST_CASE("the four preparations map to four distinct conjugate states") {
  std::vector<qcore::StateVector> states;
  for (const Basis basis : {Basis::Z, Basis::X}) {
    for (const int bit : {0, 1}) {
      QubitPreparation prep{0, basis, bit};
      const qcore::StateVector psi = prep.state();
      const Eigen::Vector3d axis = decay::axis_of(prep.polarization());
      CHECK((qcore::bloch_vector(psi) - axis).norm() < 1e-12);
      states.push_back(psi);
    }
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      const double fidelity =
          std::abs(states[i].amplitudes().dot(states[j].amplitudes()));
      CHECK(fidelity < 1.0 - 1e-9);
    }
  }
}

TEST_CASE("receiver preparations are uniform over the four states") {
  RandomStream rng(41);
  const std::size_t n = 100000;
  auto [preps, msg] = bob_prepare_qubits(n, rng);
  REQUIRE(preps.size() == n);
  REQUIRE(std::get<QubitSequence>(msg).states.size() == n);

  std::array<int, 4> counts{};
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(preps[i].index == i);
    counts[2 * (preps[i].basis == Basis::X) + preps[i].bit] += 1;
    CHECK((std::get<QubitSequence>(msg).states[i].amplitudes() -
           preps[i].state().amplitudes())
              .norm() < 1e-15);
  }
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  for (const int c : counts) {
    CHECK(std::abs(c - 0.25 * n) < 4.0 * sigma);
  }
  CHECK_THROWS_AS(bob_prepare_qubits(0, rng), std::invalid_argument);
}

TEST_CASE("strategy names round-trip and bad names are spelled out") {
  for (const char* name : {"honest0", "honest1", "switch01", "switch10",
                           "switch10-posterior", "fabricate"}) {
    CHECK(strategy_from_name(name).name() == name);
  }
  CHECK_THROWS_WITH_AS(strategy_from_name("sneaky"),
                       doctest::Contains("sneaky"), std::invalid_argument);
}

TEST_CASE("config and strategy validation name the offending field") {
  CommitmentConfig c;
  c.tau_over_T = 0.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("tau_over_T"),
                       std::invalid_argument);
  c = CommitmentConfig{};
  c.unveil_over_T = -1.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("unveil_over_T"),
                       std::invalid_argument);

  const CommitmentConfig good;
  AliceStrategy s = AliceStrategy::switch_zero_to_one(good.unveil_over_T);
  CHECK_THROWS_WITH_AS(s.validate(good), doctest::Contains("switch_over_T"),
                       std::invalid_argument);
  s = AliceStrategy::switch_zero_to_one(1.0);
  CHECK_NOTHROW(s.validate(good));
}

TEST_CASE("electron evidence must use distinct in-range indices") {
  ElectronData data;
  data.events.push_back({3, 0.5, {1.0, 0.0, 0.0}});
  data.events.push_back({1, 0.7, {0.0, 1.0, 0.0}});
  CHECK_NOTHROW(validate_electron_data(data, 4));
  data.events.push_back({4, 0.2, {0.0, 0.0, 1.0}});
  CHECK_THROWS_WITH_AS(validate_electron_data(data, 4),
                       doctest::Contains("outside"), std::invalid_argument);
  data.events.back().index = 1;
  CHECK_THROWS_WITH_AS(validate_electron_data(data, 4),
                       doctest::Contains("duplicate"), std::invalid_argument);
}

TEST_CASE("holding strategy keeps the received qubits untouched") {
  RandomStream rng(43);
  const CommitmentConfig config = config_with(200, 1, mono09());
  auto [preps, msg] = bob_prepare_qubits(config.n_qubits, rng);
  AliceInternalState state =
      alice_commit(AliceStrategy::honest0(), msg, config, rng);
  REQUIRE(state.held_states.size() == config.n_qubits);
  CHECK(state.w_records.empty());
  CHECK(state.measured_events.empty());
  for (std::size_t i = 0; i < config.n_qubits; ++i) {
    CHECK((state.held_states[i].amplitudes() - preps[i].state().amplitudes())
              .norm() == 0.0);
  }

  auto [bit, payload] = alice_unveil(state, config, config.unveil_over_T, rng);
  CHECK(std::get<UnveilBit>(bit).bit == 0);
  CHECK(std::get<ReturnedQubits>(payload).states.size() == config.n_qubits);
  CHECK_THROWS_WITH_AS(
      alice_unveil(state, config, 0.5 * config.unveil_over_T, rng),
      doctest::Contains("before the unveil time"), std::invalid_argument);
}

TEST_CASE("commit rejects wrong message types and wrong lengths") {
  RandomStream rng(44);
  const CommitmentConfig config = config_with(10, 1, mono09());
  CHECK_THROWS_WITH_AS(
      alice_commit(AliceStrategy::honest1(), Message(UnveilBit{1}), config,
                   rng),
      doctest::Contains("qubit-sequence"), std::invalid_argument);
  auto [preps, msg] = bob_prepare_qubits(7, rng);
  CHECK_THROWS_WITH_AS(
      alice_commit(AliceStrategy::honest1(), msg, config, rng),
      doctest::Contains("n_qubits"), std::invalid_argument);
}

TEST_CASE("immediate swap produces the exponential decay census") {
  RandomStream rng(45);
  const CommitmentConfig config = config_with(100000, 1, mono09());
  auto [preps, msg] = bob_prepare_qubits(config.n_qubits, rng);
  AliceInternalState state =
      alice_commit(AliceStrategy::honest1(), msg, config, rng);
  REQUIRE(state.w_records.size() == config.n_qubits);

  const double p_full = 0.18126924692201818;  // 1 - exp(-u/tau) at 2/10
  std::size_t decayed = 0;
  for (const auto& rec : state.w_records) {
    CHECK(rec.decay_time > 0.0);
    CHECK(rec.decayed_before_unveil == (rec.decay_time <= 2.0));
    decayed += rec.decayed_before_unveil;
  }
  CHECK(state.measured_events.size() == decayed);
  const double sigma = std::sqrt(config.n_qubits * p_full * (1.0 - p_full));
  CHECK(std::abs(static_cast<double>(decayed) - config.n_qubits * p_full) <
        4.0 * sigma);

  // Genuine electrons remember the spin: mean cos(theta) = kappa / 3.
  double sum_cos = 0.0;
  for (const auto& ev : state.measured_events) {
    CHECK(ev.decay_time <= 2.0);
    sum_cos += std::cos(decay::compute_theta(
        preps[ev.index].polarization(), ev.electron_momentum));
  }
  const double kappa = 0.9;
  const double var = 1.0 / 3.0 - kappa * kappa / 9.0;
  CHECK(std::abs(sum_cos / decayed - kappa / 3.0) <
        4.0 * std::sqrt(var / decayed));

  auto [bit, payload] = alice_unveil(state, config, config.unveil_over_T, rng);
  CHECK(std::get<UnveilBit>(bit).bit == 1);
  CHECK(std::get<ElectronData>(payload).events.size() == decayed);
}

TEST_CASE("forging strategy never records genuine measurements") {
  RandomStream rng(46);
  const CommitmentConfig config = config_with(50000, 1, mono09());
  auto [preps, msg] = bob_prepare_qubits(config.n_qubits, rng);
  AliceInternalState state =
      alice_commit(AliceStrategy::fabricate_all(), msg, config, rng);
  CHECK(state.measured_events.empty());
  REQUIRE(state.w_records.size() == config.n_qubits);

  auto [bit, payload] = alice_unveil(state, config, config.unveil_over_T, rng);
  const auto& events = std::get<ElectronData>(payload).events;
  std::size_t decayed = 0;
  for (const auto& rec : state.w_records) decayed += rec.decayed_before_unveil;
  REQUIRE(events.size() == decayed);

  // Forged directions are isotropic about the spin axes.
  double sum_cos = 0.0;
  for (const auto& ev : events) {
    CHECK(ev.decay_time <= 2.0);
    sum_cos += std::cos(decay::compute_theta(
        preps[ev.index].polarization(), ev.electron_momentum));
  }
  CHECK(std::abs(sum_cos / events.size()) <
        4.0 / std::sqrt(3.0 * events.size()));
}

TEST_CASE("late-switch announcements reproduce the honest count law") {
  RandomStream rng(47);
  const CommitmentConfig config = config_with(1000000, 1, mono09());
  const AliceStrategy strategy = AliceStrategy::switch_zero_to_one(1.0);
  auto [preps, msg] = bob_prepare_qubits(config.n_qubits, rng);
  AliceInternalState state = alice_commit(strategy, msg, config, rng);

  // Holding until the switch, only decays in (switch, unveil] are genuine.
  const double p_genuine = 0.09516258196404048;  // 1 - exp(-0.1)
  const double p_full = 0.18126924692201818;     // 1 - exp(-0.2)
  for (const auto& ev : state.measured_events) {
    CHECK(ev.decay_time > 1.0);
    CHECK(ev.decay_time <= 2.0);
  }
  const double n = static_cast<double>(config.n_qubits);
  CHECK(std::abs(state.measured_events.size() - n * p_genuine) <
        4.0 * std::sqrt(n * p_genuine * (1.0 - p_genuine)));

  auto [bit, payload] = alice_unveil(state, config, config.unveil_over_T, rng);
  CHECK(std::get<UnveilBit>(bit).bit == 1);
  const auto& events = std::get<ElectronData>(payload).events;

  // The top-up makes the announced count an exact binomial draw at the
  // honest per-qubit decay probability.
  CHECK(std::abs(events.size() - n * p_full) <
        4.0 * std::sqrt(n * p_full * (1.0 - p_full)));

  // Genuine events ride along unmodified; forged ones fill [0, unveil] with
  // the truncated exponential law.  The genuine share is the dilution
  // factor of the one-unit genuine window inside the two-unit total.
  std::size_t genuine = 0, prev_index = 0;
  double forged_sum = 0.0, forged_sq = 0.0;
  std::size_t forged = 0;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& ev = events[k];
    if (k > 0) CHECK(ev.index > prev_index);
    prev_index = ev.index;
    CHECK(ev.decay_time <= 2.0);
    CHECK(ev.decay_time >= 0.0);
    if (state.w_records[ev.index].decayed_before_unveil) {
      ++genuine;
      CHECK(ev.decay_time ==
            doctest::Approx(state.w_records[ev.index].decay_time));
    } else {
      ++forged;
      forged_sum += ev.decay_time;
      forged_sq += ev.decay_time * ev.decay_time;
    }
  }
  CHECK(genuine == state.measured_events.size());
  const double dilution = 0.5249791874789402;
  const double share = static_cast<double>(genuine) / events.size();
  CHECK(std::abs(share - dilution) < 0.005);

  const double forged_mean = forged_sum / forged;
  const double forged_sd =
      std::sqrt(forged_sq / forged - forged_mean * forged_mean);
  const double truncated_mean =
      10.0 - 2.0 * std::exp(-0.2) / (1.0 - std::exp(-0.2));
  CHECK(std::abs(forged_mean - truncated_mean) <
        4.0 * forged_sd / std::sqrt(static_cast<double>(forged)));
}

TEST_CASE("reswap returns the exact originals for undecayed qubits") {
  RandomStream rng(48);
  const CommitmentConfig config = config_with(20000, 1, mono09());
  for (const GuessRule rule :
       {GuessRule::RandomFromSet, GuessRule::PosteriorOptimal}) {
    RandomStream local = rng.substream(
        {static_cast<std::uint64_t>(rule == GuessRule::PosteriorOptimal)});
    auto [preps, msg] = bob_prepare_qubits(config.n_qubits, local);
    AliceInternalState state = alice_commit(
        AliceStrategy::switch_one_to_zero(rule), msg, config, local);
    auto [bit, payload] =
        alice_unveil(state, config, config.unveil_over_T, local);
    CHECK(std::get<UnveilBit>(bit).bit == 0);
    const auto& returned = std::get<ReturnedQubits>(payload).states;
    REQUIRE(returned.size() == config.n_qubits);

    std::size_t decayed = 0;
    double guessed_fidelity = 0.0;
    for (std::size_t i = 0; i < returned.size(); ++i) {
      if (!state.w_records[i].decayed_before_unveil) {
        CHECK((returned[i].amplitudes() - preps[i].state().amplitudes())
                  .norm() == 0.0);
        continue;
      }
      ++decayed;
      guessed_fidelity +=
          std::norm(preps[i].state().amplitudes().dot(returned[i].amplitudes()));
      if (rule == GuessRule::RandomFromSet) {
        // The guess is one of the four preparation states.
        const Eigen::Vector3d r = qcore::bloch_vector(returned[i]);
        bool matches_candidate = false;
        for (const auto pol :
             {decay::Polarization::PlusZ, decay::Polarization::MinusZ,
              decay::Polarization::PlusX, decay::Polarization::MinusX}) {
          matches_candidate |= (r - decay::axis_of(pol)).norm() < 1e-12;
        }
        CHECK(matches_candidate);
      } else {
        // Posterior guesses live on the Z-X circle with real amplitudes.
        CHECK(std::abs(qcore::bloch_vector(returned[i]).y()) < 1e-12);
      }
    }
    REQUIRE(decayed > 1000);

    // Per decayed qubit the conjugate-coding pass rate is exactly 1/2 for
    // a uniform guess and 1/2 + kappa pi/16 for the posterior-led one.
    const double expect = rule == GuessRule::RandomFromSet
                              ? 0.5
                              : 0.5 + 0.9 * kPi / 16.0;
    CHECK(std::abs(guessed_fidelity / decayed - expect) <
          4.0 * 0.5 / std::sqrt(static_cast<double>(decayed)));
  }
}

TEST_CASE("posterior guess maximizes the expected pass probability") {
  const decay::ParticleSpecies species = mono09();
  const double p_max = species.max_momentum();

  // Electron along +z: the posterior favours +z, never -z.
  decay::DecayEvent ev{0, 0.5, Eigen::Vector3d(0.0, 0.0, p_max)};
  qcore::StateVector guess = decay_posterior_guess(ev, species);
  Eigen::Vector3d r = qcore::bloch_vector(guess);
  Eigen::Vector3d r_bar = posterior_mean_bloch({0.0, 0.0, 1.0}, 0.9);
  CHECK((r - r_bar.normalized()).norm() < 1e-6);

  // Electron along the diagonal: optimum splits the difference.
  const double inv = 1.0 / std::sqrt(2.0);
  ev.electron_momentum = Eigen::Vector3d(inv * p_max, 0.0, inv * p_max);
  guess = decay_posterior_guess(ev, species);
  CHECK(std::abs(guess[0].real() - std::cos(kPi / 8.0)) < 1e-6);
  CHECK(std::abs(guess[1].real() - std::sin(kPi / 8.0)) < 1e-6);

  // Against the closed-form oracle on random directions: optimal value is
  // (1 + |r_bar|)/2 attained along r_bar.
  RandomStream rng(49);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector3d dir = rng.unit_vector();
    ev.electron_momentum = dir * p_max;
    guess = decay_posterior_guess(ev, species);
    r = qcore::bloch_vector(guess);
    r_bar = posterior_mean_bloch(dir, 0.9);
    const double achieved = 0.5 * (1.0 + r.dot(r_bar));
    const double optimal = 0.5 * (1.0 + r_bar.norm());
    CHECK(achieved > optimal - 1e-9);
    CHECK(achieved <= 0.75 + 1e-12);  // |r_bar| <= kappa/2 <= 1/2
  }

  // Zero-magnitude momenta cannot be scored.
  ev.electron_momentum = Eigen::Vector3d::Zero();
  CHECK_THROWS_AS(decay_posterior_guess(ev, species), std::invalid_argument);
}

TEST_CASE("escape probability of the reswap cheat shrinks exponentially") {
  const double p_full = 0.18126924692201818;
  const std::size_t n_qubits = 20;
  const std::size_t trials = 1200;

  for (const GuessRule rule :
       {GuessRule::RandomFromSet, GuessRule::PosteriorOptimal}) {
    const double per_decayed_pass = rule == GuessRule::RandomFromSet
                                        ? 0.5
                                        : 0.5 + 0.9 * kPi / 16.0;
    const double escape_exact =
        std::pow(1.0 - p_full * (1.0 - per_decayed_pass),
                 static_cast<double>(n_qubits));

    std::size_t escapes = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      CommitmentConfig config = config_with(n_qubits, 1000 + t, mono09());
      const SessionTranscript transcript =
          run_session(config, AliceStrategy::switch_one_to_zero(rule));
      escapes += transcript.report.accepted;
    }
    const double rate = static_cast<double>(escapes) / trials;
    const double sigma =
        std::sqrt(escape_exact * (1.0 - escape_exact) / trials);
    CHECK(std::abs(rate - escape_exact) < 4.0 * sigma);
  }

  // Doubling the qubit count squares the escape probability.
  const double escape20 = std::pow(1.0 - p_full * 0.5, 20.0);
  CHECK(std::pow(1.0 - p_full * 0.5, 40.0) ==
        doctest::Approx(escape20 * escape20));
}

TEST_CASE("sessions are deterministic in the seed") {
  const CommitmentConfig config = config_with(500, 7, mono09());
  const AliceStrategy strategy = AliceStrategy::switch_zero_to_one(1.0);
  const SessionTranscript a = run_session(config, strategy);
  const SessionTranscript b = run_session(config, strategy);
  CHECK(to_json_string(a) == to_json_string(b));

  CommitmentConfig other = config;
  other.seed = 8;
  CHECK(to_json_string(run_session(other, strategy)) != to_json_string(a));
}

TEST_CASE("the commit phase is identical whatever the strategy") {
  // Concealment at the wire level: the receiver's record and the first
  // message cannot depend on the committer's later choices.
  const CommitmentConfig config = config_with(300, 11, mono09());
  const SessionTranscript hold = run_session(config, AliceStrategy::honest0());
  const SessionTranscript swap = run_session(config, AliceStrategy::honest1());
  const SessionTranscript forge =
      run_session(config, AliceStrategy::fabricate_all());

  REQUIRE(hold.preparations.size() == swap.preparations.size());
  for (std::size_t i = 0; i < hold.preparations.size(); ++i) {
    CHECK(hold.preparations[i].basis == swap.preparations[i].basis);
    CHECK(hold.preparations[i].bit == swap.preparations[i].bit);
    CHECK(hold.preparations[i].basis == forge.preparations[i].basis);
    CHECK(hold.preparations[i].bit == forge.preparations[i].bit);
  }
  const auto& first_hold = std::get<QubitSequence>(hold.messages[0].message);
  const auto& first_swap = std::get<QubitSequence>(swap.messages[0].message);
  for (std::size_t i = 0; i < first_hold.states.size(); ++i) {
    CHECK((first_hold.states[i].amplitudes() -
           first_swap.states[i].amplitudes())
              .norm() == 0.0);
  }
}

TEST_CASE("honest sessions are accepted and fully logged") {
  CommitmentConfig config = config_with(20000, 3, decay::neutron_species());
  const SessionTranscript hold = run_session(config, AliceStrategy::honest0());
  CHECK(hold.report.accepted);
  CHECK(hold.report.bit_claimed == 0);
  CHECK(hold.report.failed_qubit_indices.empty());
  CHECK(hold.committer_decay_log.empty());
  REQUIRE(hold.messages.size() == 3);
  CHECK(hold.messages[0].time == 0.0);
  CHECK(hold.messages[1].time == config.unveil_over_T);
  CHECK(hold.messages[2].time == config.unveil_over_T);
  CHECK(hold.messages[0].direction == TimedMessage::Direction::BobToAlice);
  CHECK(hold.messages[1].direction == TimedMessage::Direction::AliceToBob);

  const SessionTranscript swap = run_session(config, AliceStrategy::honest1());
  CHECK(swap.report.accepted);
  CHECK(swap.report.bit_claimed == 1);
  CHECK(swap.committer_decay_log.size() ==
        std::get<ElectronData>(swap.messages[2].message).events.size());
}
