#pragma once

#include <json.hpp>

#include "qbc/decay.hpp"
#include "qbc/protocol.hpp"
#include "qbc/qcore.hpp"
#include "qbc/report.hpp"

namespace qbc::detail {

using Json = nlohmann::ordered_json;

Json species_json(const decay::ParticleSpecies& s);
Json config_json(const protocol::CommitmentConfig& c);
Json strategy_json(const protocol::AliceStrategy& s);
Json test_json(const verify::TestConfig& t);
Json report_json(const verify::VerificationReport& r);
Json event_json(const decay::DecayEvent& e);
Json state_json(const qcore::StateVector& s);
Json message_json(const protocol::Message& m);

}  // namespace qbc::detail
