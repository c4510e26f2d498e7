#include "serialization.hpp"

#include "qbc/version.hpp"

namespace qbc::detail {

Json species_json(const decay::ParticleSpecies& s) {
  return Json{
      {"name", s.name},
      {"mean_lifetime", s.mean_lifetime},
      {"asymmetry", s.asymmetry},
      {"endpoint_kev", s.endpoint_kev},
      {"electron_mass_kev", s.electron_mass_kev},
      {"spectrum", s.spectrum == decay::SpectrumMode::Monoenergetic
                       ? "monoenergetic"
                       : "allowed"},
  };
}

Json config_json(const protocol::CommitmentConfig& c) {
  return Json{
      {"n_qubits", c.n_qubits},
      {"tau_over_T", c.tau_over_T},
      {"unveil_over_T", c.unveil_over_T},
      {"species", species_json(c.species)},
      {"seed", c.seed},
  };
}

Json strategy_json(const protocol::AliceStrategy& s) {
  Json j{{"name", s.name()}};
  if (s.kind == protocol::StrategyKind::SwitchZeroToOne) {
    j["switch_over_T"] = s.switch_over_T;
  }
  if (s.kind == protocol::StrategyKind::SwitchOneToZero) {
    j["guess_rule"] = s.guess_rule == protocol::GuessRule::PosteriorOptimal
                          ? "posterior-optimal"
                          : "random-from-set";
  }
  return j;
}

Json test_json(const verify::TestConfig& t) {
  return Json{
      {"significance", t.significance},
      {"theta_bins", t.theta_bins},
      {"p_bins", t.p_bins},
      {"min_events_per_bin", t.min_events_per_bin},
  };
}

Json report_json(const verify::VerificationReport& r) {
  return Json{
      {"accepted", r.accepted},
      {"bit_claimed", r.bit_claimed},
      {"p_value", r.p_value},
      {"fitted_kappa_amplitude", r.fitted_kappa_amplitude},
      {"expected_kappa_amplitude", r.expected_kappa_amplitude},
      {"fitted_scale", r.fitted_scale},
      {"scale_sigma", r.scale_sigma},
      {"count_p_value", r.count_p_value},
      {"count_observed", r.count_observed},
      {"count_expected", r.count_expected},
      {"failed_qubit_indices", r.failed_qubit_indices},
      {"diagnostic", r.diagnostic},
  };
}

Json event_json(const decay::DecayEvent& e) {
  return Json{
      {"index", e.index},
      {"decay_time", e.decay_time},
      {"electron_momentum",
       {e.electron_momentum.x(), e.electron_momentum.y(),
        e.electron_momentum.z()}},
  };
}

Json state_json(const qcore::StateVector& s) {
  Json amps = Json::array();
  for (int i = 0; i < s.dim(); ++i) {
    amps.push_back({s[i].real(), s[i].imag()});
  }
  return amps;
}

Json message_json(const protocol::Message& m) {
  return std::visit(
      [](const auto& payload) -> Json {
        using T = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<T, protocol::QubitSequence>) {
          Json states = Json::array();
          for (const auto& s : payload.states) states.push_back(state_json(s));
          return Json{{"type", "qubit_sequence"}, {"states", std::move(states)}};
        } else if constexpr (std::is_same_v<T, protocol::UnveilBit>) {
          return Json{{"type", "unveil_bit"}, {"bit", payload.bit}};
        } else if constexpr (std::is_same_v<T, protocol::ReturnedQubits>) {
          Json states = Json::array();
          for (const auto& s : payload.states) states.push_back(state_json(s));
          return Json{{"type", "returned_qubits"},
                      {"states", std::move(states)}};
        } else {
          Json events = Json::array();
          for (const auto& e : payload.events) events.push_back(event_json(e));
          return Json{{"type", "electron_data"}, {"events", std::move(events)}};
        }
      },
      m);
}

}  // namespace qbc::detail

namespace qbc::protocol {

std::string to_json_string(const SessionTranscript& transcript, int indent) {
  using detail::Json;
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "session_transcript";
  j["config"] = detail::config_json(transcript.config);
  j["strategy"] = detail::strategy_json(transcript.strategy);

  Json preps = Json::array();
  for (const auto& p : transcript.preparations) {
    preps.push_back(Json{{"index", p.index},
                         {"basis", p.basis == Basis::Z ? "Z" : "X"},
                         {"bit", p.bit}});
  }
  j["preparations"] = std::move(preps);

  Json messages = Json::array();
  for (const auto& tm : transcript.messages) {
    Json entry{{"time", tm.time},
               {"direction",
                tm.direction == TimedMessage::Direction::BobToAlice
                    ? "bob_to_alice"
                    : "alice_to_bob"}};
    entry.update(detail::message_json(tm.message));
    messages.push_back(std::move(entry));
  }
  j["messages"] = std::move(messages);

  Json log = Json::array();
  for (const auto& e : transcript.committer_decay_log) {
    log.push_back(detail::event_json(e));
  }
  j["committer_decay_log"] = std::move(log);
  j["report"] = detail::report_json(transcript.report);
  return j.dump(indent);
}

}  // namespace qbc::protocol
