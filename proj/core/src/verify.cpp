#include "qbc/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace qbc::verify {

namespace {

double two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

/// Solid-angle average of cos(theta) over a polar band.
double mean_cos_band(double theta_low, double theta_high) {
  const double s2 = std::sin(theta_high) * std::sin(theta_high) -
                    std::sin(theta_low) * std::sin(theta_low);
  const double c = std::cos(theta_low) - std::cos(theta_high);
  return c > 0.0 ? s2 / (2.0 * c) : 0.0;
}

VerificationReport rejection(int bit, std::string why) {
  VerificationReport report;
  report.accepted = false;
  report.bit_claimed = bit;
  report.p_value = 0.0;
  report.diagnostic = std::move(why);
  return report;
}

}  // namespace

AsymmetryTable asymmetry_histogram(
    const std::vector<protocol::QubitPreparation>& preparations,
    const std::vector<decay::DecayEvent>& events, const TestConfig& test,
    double p_max_override) {
  test.validate();
  if (events.empty()) {
    throw std::invalid_argument("empty event list");
  }

  double p_max = p_max_override;
  if (p_max <= 0.0) {
    for (const auto& e : events) {
      p_max = std::max(p_max, e.electron_momentum.norm());
    }
  }
  if (p_max <= 0.0) {
    throw std::invalid_argument("no event carries nonzero momentum");
  }

  constexpr double kPi = 3.14159265358979323846;
  AsymmetryTable table;
  auto& hist = table.histogram;
  hist.theta_edges.resize(test.theta_bins + 1);
  for (int i = 0; i <= test.theta_bins; ++i) {
    hist.theta_edges[i] = kPi * i / test.theta_bins;
  }
  hist.p_edges.resize(test.p_bins + 1);
  for (int j = 0; j <= test.p_bins; ++j) {
    hist.p_edges[j] = p_max * j / test.p_bins;
  }
  hist.counts.assign(
      static_cast<std::size_t>(test.theta_bins) * test.p_bins, 0);

  for (const auto& e : events) {
    if (e.index >= preparations.size()) {
      throw std::invalid_argument("electron event index " +
                                  std::to_string(e.index) +
                                  " has no matching preparation");
    }
    const double theta = decay::compute_theta(
        preparations[e.index].polarization(), e.electron_momentum);
    hist.add(theta, e.electron_momentum.norm());
  }

  for (int tp = 0; tp < test.theta_bins / 2; ++tp) {
    const int mirror = test.theta_bins - 1 - tp;
    for (int pb = 0; pb < test.p_bins; ++pb) {
      AsymmetryCell cell;
      cell.theta_pair = tp;
      cell.p_bin = pb;
      cell.theta_low = hist.theta_edges[tp];
      cell.theta_high = hist.theta_edges[tp + 1];
      cell.p_low = hist.p_edges[pb];
      cell.p_high = hist.p_edges[pb + 1];
      cell.mean_cos_theta = mean_cos_band(cell.theta_low, cell.theta_high);
      cell.n_forward = hist.count(tp, pb);
      cell.n_mirror = hist.count(mirror, pb);
      const std::int64_t pair_total = cell.n_forward + cell.n_mirror;
      cell.usable = pair_total >= test.min_events_per_bin;
      cell.asymmetry =
          pair_total > 0
              ? static_cast<double>(cell.n_forward - cell.n_mirror) /
                    static_cast<double>(pair_total)
              : 0.0;
      table.cells.push_back(cell);
    }
  }
  return table;
}

VerificationReport verify_bit0(
    const std::vector<protocol::QubitPreparation>& preparations,
    const protocol::Message& returned, RandomStream& rng) {
  const auto* msg = std::get_if<protocol::ReturnedQubits>(&returned);
  if (msg == nullptr) {
    return rejection(0, "claimed 0 but did not return the qubits");
  }
  if (msg->states.size() != preparations.size()) {
    return rejection(0, "returned " + std::to_string(msg->states.size()) +
                            " qubits, expected " +
                            std::to_string(preparations.size()));
  }

  VerificationReport report;
  report.bit_claimed = 0;
  for (std::size_t i = 0; i < preparations.size(); ++i) {
    if (msg->states[i].dim() != 2) {
      return rejection(0, "returned state " + std::to_string(i) +
                              " is not a qubit");
    }
    // Projective check in the preparation basis.  A numerically exact
    // round trip must never fail, so certainty is snapped to 1.
    const qcore::Complex amp = preparations[i]
                                   .state()
                                   .amplitudes()
                                   .dot(msg->states[i].amplitudes());
    double match = std::norm(amp);
    if (match >= 1.0 - 1e-12) match = 1.0;
    if (!(rng.uniform01() < match)) {
      report.failed_qubit_indices.push_back(i);
    }
  }
  report.accepted = report.failed_qubit_indices.empty();
  report.p_value = report.accepted ? 1.0 : 0.0;
  if (!report.accepted) {
    report.diagnostic = std::to_string(report.failed_qubit_indices.size()) +
                        " qubit measurements contradicted the preparation";
  }
  return report;
}

VerificationReport verify_bit1(
    const std::vector<protocol::QubitPreparation>& preparations,
    const std::vector<decay::DecayEvent>& events,
    const decay::ParticleSpecies& species,
    const protocol::CommitmentConfig& config, const TestConfig& test) {
  test.validate();
  species.validate();
  const std::size_t n = preparations.size();

  if (events.empty()) {
    return rejection(1, "no electron events announced");
  }

  const double p_max = species.max_momentum();
  const double unveil = config.unveil_over_T;
  std::vector<bool> seen(n, false);
  for (const auto& e : events) {
    if (e.index >= n) {
      return rejection(1, "event index " + std::to_string(e.index) +
                              " outside the qubit range");
    }
    if (seen[e.index]) {
      return rejection(1, "duplicate event for qubit " +
                              std::to_string(e.index));
    }
    seen[e.index] = true;
    const double p = e.electron_momentum.norm();
    if (!(p > 0.0)) {
      return rejection(1, "event for qubit " + std::to_string(e.index) +
                              " has zero momentum");
    }
    if (p > p_max * (1.0 + 1e-9)) {
      return rejection(1, "event for qubit " + std::to_string(e.index) +
                              " exceeds the kinematic endpoint");
    }
    if (e.decay_time < 0.0 || e.decay_time > unveil) {
      return rejection(1, "event for qubit " + std::to_string(e.index) +
                              " lies outside the observation window");
    }
  }

  VerificationReport report;
  report.bit_claimed = 1;
  report.expected_kappa_amplitude = species.asymmetry;

  // Decay-count consistency: the announced multiplicity must be a plausible
  // binomial draw (continuity-corrected normal tail).
  const double p_decay = -std::expm1(-unveil / species.mean_lifetime);
  report.count_observed = static_cast<std::int64_t>(events.size());
  report.count_expected = static_cast<double>(n) * p_decay;
  const double count_var =
      static_cast<double>(n) * p_decay * (1.0 - p_decay);
  if (count_var > 0.0) {
    const double excess = std::max(
        0.0, std::abs(report.count_observed - report.count_expected) - 0.5);
    report.count_p_value = two_sided_p(excess / std::sqrt(count_var));
  } else {
    report.count_p_value =
        report.count_observed == std::llround(report.count_expected) ? 1.0
                                                                     : 0.0;
  }

  // Amplitude fit: weighted least squares of the folded asymmetry cells
  // against the parity template kappa(p) <cos theta>, one scale parameter.
  const AsymmetryTable table =
      asymmetry_histogram(preparations, events, test, p_max);
  std::vector<double> templates(table.cells.size(), 0.0);
  int usable = 0;
  double sum_nt2 = 0.0;
  for (std::size_t c = 0; c < table.cells.size(); ++c) {
    const auto& cell = table.cells[c];
    if (!cell.usable) continue;
    templates[c] = decay::mean_kappa_in_band(species, cell.p_low,
                                             cell.p_high) *
                   cell.mean_cos_theta;
    ++usable;
    sum_nt2 += static_cast<double>(cell.n_forward + cell.n_mirror) *
               templates[c] * templates[c];
  }
  if (usable == 0) {
    return rejection(1,
                     "no usable asymmetry cells (every folded pair is below "
                     "min_events_per_bin)");
  }
  if (sum_nt2 < 1e-12) {
    return rejection(1,
                     "asymmetry template vanishes (effective kappa is zero); "
                     "the amplitude test is undefined");
  }

  // Two passes: the first with raw counts as weights, the second with the
  // binomial variance evaluated at the fitted scale.
  double scale = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < table.cells.size(); ++c) {
      const auto& cell = table.cells[c];
      if (!cell.usable) continue;
      const double t = templates[c];
      const double var_term =
          1.0 - std::min(0.96, (scale * t) * (scale * t));
      const double w =
          static_cast<double>(cell.n_forward + cell.n_mirror) / var_term;
      num += w * cell.asymmetry * t;
      den += w * t * t;
    }
    scale = num / den;
    report.fitted_scale = scale;
    report.scale_sigma = 1.0 / std::sqrt(den);
  }
  report.fitted_kappa_amplitude = report.fitted_scale * species.asymmetry;

  const double z_scale = (report.fitted_scale - 1.0) / report.scale_sigma;
  const double p_scale = two_sided_p(z_scale);

  // Both subtests at significance/2, folded into one reportable p-value.
  report.p_value = std::min(1.0, 2.0 * std::min(p_scale,
                                                report.count_p_value));
  report.accepted = p_scale >= test.significance / 2.0 &&
                    report.count_p_value >= test.significance / 2.0;
  if (!report.accepted) {
    report.diagnostic =
        p_scale < test.significance / 2.0
            ? "asymmetry amplitude inconsistent with the honest template"
            : "announced event count inconsistent with the decay law";
  }
  return report;
}

namespace {

/// Purified preparation of n qubits: each sent qubit alpha_i is entangled
/// with a four-level receiver ancilla recording which conjugate-basis state
/// was sent.  Coefficient matrix rows index the alpha side, columns the
/// ancilla side.
qcore::BipartiteState purified_preparation(std::size_t n) {
  qcore::Matrix block(2, 4);
  for (int k = 0; k < 4; ++k) {
    protocol::QubitPreparation prep;
    prep.basis = k < 2 ? protocol::Basis::Z : protocol::Basis::X;
    prep.bit = k & 1;
    block.col(k) = prep.state().amplitudes() / 2.0;
  }
  qcore::Matrix m = block;
  for (std::size_t i = 1; i < n; ++i) m = qcore::kron(m, block);
  return qcore::BipartiteState(std::move(m));
}

/// Isometry modelling one W decay as seen from outside Alice's lab: the
/// emission along a random axis is a two-outcome instrument whose record
/// stays on Alice's side.  V: C^2 -> C^2 x C^2 (spin x record).
qcore::Matrix decay_isometry(double kappa, const Eigen::Vector3d& axis) {
  using qcore::Complex;
  qcore::Matrix sigma_n(2, 2);
  sigma_n << Complex(axis.z(), 0.0), Complex(axis.x(), -axis.y()),
      Complex(axis.x(), axis.y()), Complex(-axis.z(), 0.0);
  const qcore::Matrix id = qcore::Matrix::Identity(2, 2);
  // sqrt((I +- kappa n.sigma)/2) via the spin-projector decomposition.
  const qcore::Matrix proj_up = (id + sigma_n) / 2.0;
  const qcore::Matrix proj_dn = (id - sigma_n) / 2.0;
  const qcore::Matrix k_plus = std::sqrt((1.0 + kappa) / 2.0) * proj_up +
                               std::sqrt((1.0 - kappa) / 2.0) * proj_dn;
  const qcore::Matrix k_minus = std::sqrt((1.0 - kappa) / 2.0) * proj_up +
                                std::sqrt((1.0 + kappa) / 2.0) * proj_dn;
  qcore::Matrix v(4, 2);
  v.topRows(2) = k_plus;     // record |0>
  v.bottomRows(2) = k_minus; // record |1>
  return v;
}

/// Alpha-side action of swapping every qubit into a W and letting it decay,
/// with an independently drawn axis and asymmetry per qubit.
qcore::Matrix swap_and_decay_action(std::size_t n, RandomStream& rng) {
  qcore::Matrix action(1, 1);
  action(0, 0) = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d axis = rng.unit_vector();
    const double kappa = rng.uniform01();
    action = qcore::kron(action, decay_isometry(kappa, axis));
  }
  return action;
}

qcore::DensityMatrix receiver_state_after(const qcore::BipartiteState& phi,
                                          const qcore::Matrix& alpha_action) {
  qcore::Matrix m = alpha_action * phi.coefficients();
  m /= m.norm();
  return qcore::partial_trace(qcore::BipartiteState(std::move(m)),
                              qcore::Side::A);
}

}  // namespace

double concealing_audit(std::size_t n_small, RandomStream& rng) {
  if (n_small < 1) {
    throw std::invalid_argument("audit needs at least one qubit");
  }
  if (n_small > 3) {
    throw std::invalid_argument(
        "dimension overflow: the audit is limited to 3 qubits (receiver "
        "side 4^n must stay within the dense-state cap)");
  }
  const qcore::BipartiteState phi = purified_preparation(n_small);
  const std::size_t dim_a = std::size_t{1} << n_small;

  // One receiver state per strategy's pre-unveil action on Alice's side:
  // holding (identity) for the stored-qubit strategies, swap-and-decay for
  // the committed-to-1 and early-switch strategies, each with its own
  // instrument draw.
  std::vector<qcore::DensityMatrix> states;
  states.push_back(receiver_state_after(
      phi, qcore::Matrix::Identity(dim_a, dim_a)));           // Honest0 hold
  for (int variant = 0; variant < 4; ++variant) {             // Honest1,
    states.push_back(receiver_state_after(                    // SwitchZeroToOne,
        phi, swap_and_decay_action(n_small, rng)));           // SwitchOneToZero,
  }                                                           // FabricateAll

  double worst = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      worst = std::max(worst, qcore::trace_distance(states[i], states[j]));
    }
  }
  return worst;
}

double concealing_audit_leaky(std::size_t n_small, RandomStream& rng) {
  if (n_small < 1 || n_small > 2) {
    throw std::invalid_argument(
        "dimension overflow: the leaky audit is limited to 2 qubits");
  }
  const qcore::BipartiteState phi = purified_preparation(n_small);
  const std::size_t dim_a = std::size_t{1} << n_small;
  const std::size_t dim_b = std::size_t{1} << (2 * n_small);

  // Broken b = 0: the first sent qubit goes back to the receiver before
  // unveiling, so it moves from the alpha side to the beta side.  The
  // remaining alpha side is padded to dimension 2 when nothing is left.
  const std::size_t rest_dim = std::max<std::size_t>(2, dim_a / 2);
  qcore::Matrix leaked = qcore::Matrix::Zero(rest_dim, dim_b * 2);
  const qcore::Matrix& m = phi.coefficients();
  for (std::size_t a = 0; a < dim_a; ++a) {
    const std::size_t first = a >> (n_small - 1);  // leading qubit's bit
    const std::size_t rest = a & ((dim_a / 2) - 1);
    for (std::size_t b = 0; b < dim_b; ++b) {
      leaked(rest, b * 2 + first) = m(a, b);
    }
  }
  const qcore::DensityMatrix rho_leaky = qcore::partial_trace(
      qcore::BipartiteState(std::move(leaked)), qcore::Side::A);

  // Honest b = 1 with the receiver's extra slot empty.
  const qcore::DensityMatrix rho_committed =
      receiver_state_after(phi, swap_and_decay_action(n_small, rng));
  qcore::Matrix slot = qcore::Matrix::Zero(2, 2);
  slot(0, 0) = 1.0;
  return qcore::trace_distance(
      rho_leaky,
      qcore::DensityMatrix(qcore::kron(rho_committed.matrix(), slot)));
}

double detection_power(const protocol::AliceStrategy& strategy,
                       const protocol::CommitmentConfig& config,
                       const TestConfig& test, std::size_t trials) {
  if (trials < 1) {
    throw std::invalid_argument("detection power needs at least one trial");
  }
  std::size_t rejected = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    protocol::CommitmentConfig trial_config = config;
    trial_config.seed = RandomStream(config.seed, {7, t}).next_u64();
    const auto transcript =
        protocol::run_session(trial_config, strategy, test);
    if (!transcript.report.accepted) ++rejected;
  }
  return static_cast<double>(rejected) / static_cast<double>(trials);
}

}  // namespace qbc::verify
