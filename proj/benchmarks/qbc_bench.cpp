#include <benchmark/benchmark.h>

#include <vector>

#include "qbc/decay.hpp"
#include "qbc/harness.hpp"
#include "qbc/protocol.hpp"
#include "qbc/qcore.hpp"
#include "qbc/rng.hpp"
#include "qbc/verify.hpp"

using namespace qbc;

namespace {

decay::ParticleSpecies mono09() {
  decay::ParticleSpecies s = decay::neutron_species();
  s.name = "mono09";
  s.asymmetry = 0.9;
  s.electron_mass_kev = 0.0;
  s.spectrum = decay::SpectrumMode::Monoenergetic;
  return s;
}

protocol::CommitmentConfig session_config(std::size_t n) {
  protocol::CommitmentConfig config;
  config.n_qubits = n;
  config.species = mono09();
  config.seed = 12345;
  return config;
}

void BM_PhiloxUniform(benchmark::State& state) {
  RandomStream rng(1);
  double acc = 0.0;
  for (auto _ : state) {
    acc += rng.uniform01();
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_PhiloxUniform);

void BM_SampleMomentumAllowed(benchmark::State& state) {
  const decay::ParticleSpecies species = decay::neutron_species();
  RandomStream rng(2);
  const Eigen::Vector3d axis(0.0, 0.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        decay::sample_electron_momentum(axis, species, rng));
  }
}
BENCHMARK(BM_SampleMomentumAllowed);

void BM_SchmidtDecompose(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  RandomStream rng(3);
  const qcore::BipartiteState psi =
      qcore::random_bipartite_state(dim, dim, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qcore::schmidt_decompose(psi));
  }
}
BENCHMARK(BM_SchmidtDecompose)->Arg(4)->Arg(8)->Arg(16);

void BM_CheatUnitary(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  RandomStream rng(4);
  const qcore::BipartiteState psi0 =
      qcore::random_bipartite_state(dim, dim, rng);
  const qcore::UnitaryMatrix v = qcore::random_unitary(dim, rng);
  const qcore::BipartiteState psi1 =
      qcore::apply_local_unitary(v, psi0, qcore::Side::A);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qcore::construct_cheat_unitary(psi0, psi1));
  }
}
BENCHMARK(BM_CheatUnitary)->Arg(4)->Arg(8);

void BM_ConcealingAudit(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  RandomStream rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify::concealing_audit(n, rng));
  }
}
BENCHMARK(BM_ConcealingAudit)->Arg(1)->Arg(2)->Arg(3);

void BM_PosteriorGuess(benchmark::State& state) {
  const decay::ParticleSpecies species = mono09();
  RandomStream rng(6);
  const decay::DecayEvent event{
      0, 0.5,
      decay::sample_electron_momentum(Eigen::Vector3d(0, 0, 1), species, rng)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(protocol::decay_posterior_guess(event, species));
  }
}
BENCHMARK(BM_PosteriorGuess);

void BM_RunSession(benchmark::State& state) {
  const auto config = session_config(static_cast<std::size_t>(state.range(0)));
  const auto strategy = protocol::AliceStrategy::honest1();
  verify::TestConfig test;
  test.theta_bins = 4;
  test.p_bins = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(protocol::run_session(config, strategy, test));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunSession)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_VerifyBit1(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto config = session_config(n);
  const auto transcript =
      protocol::run_session(config, protocol::AliceStrategy::honest1());
  const auto species = config.species_in_protocol_units();
  const auto& events =
      std::get<protocol::ElectronData>(transcript.messages[2].message).events;
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify::verify_bit1(
        transcript.preparations, events, species, config,
        verify::TestConfig{}));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_VerifyBit1)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
