#include "qbc/decay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace qbc::decay {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Largest value of the allowed spectrum on (0, p_max), found by golden
/// section (the density is unimodal), padded so it is a safe rejection
/// envelope.
double spectrum_peak(const ParticleSpecies& s) {
  const double gold = 0.38196601125010515;
  double lo = 0.0, hi = s.max_momentum();
  double x1 = lo + gold * (hi - lo), x2 = hi - gold * (hi - lo);
  double f1 = s.spectrum_density(x1), f2 = s.spectrum_density(x2);
  for (int i = 0; i < 80; ++i) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = hi - gold * (hi - lo);
      f2 = s.spectrum_density(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = lo + gold * (hi - lo);
      f1 = s.spectrum_density(x1);
    }
  }
  return 1.02 * std::max(f1, f2);
}

/// Inverse-CDF draw of cos(theta) from the density (1 + kappa c) / 2 on
/// [-1, 1].
double sample_cos_polar(double kappa, RandomStream& rng) {
  const double u = rng.uniform01();
  if (std::abs(kappa) < 1e-12) return 2.0 * u - 1.0;
  const double disc = (1.0 - kappa) * (1.0 - kappa) + 4.0 * kappa * u;
  return std::clamp((std::sqrt(disc) - 1.0) / kappa, -1.0, 1.0);
}

void orthonormal_frame(const Eigen::Vector3d& axis, Eigen::Vector3d& e1,
                       Eigen::Vector3d& e2) {
  const Eigen::Vector3d ref = std::abs(axis.x()) < 0.9
                                  ? Eigen::Vector3d::UnitX()
                                  : Eigen::Vector3d::UnitY();
  e1 = axis.cross(ref).normalized();
  e2 = axis.cross(e1);
}

Eigen::Vector3d checked_unit(const Eigen::Vector3d& v, const char* what) {
  const double n = v.norm();
  if (n < 1e-12) {
    throw std::invalid_argument(std::string("invalid ") + what +
                                ": zero-magnitude vector");
  }
  return v / n;
}

}  // namespace

double ParticleSpecies::max_momentum() const {
  return std::sqrt(endpoint_kev * (endpoint_kev + 2.0 * electron_mass_kev));
}

double ParticleSpecies::beta_of(double p) const {
  if (p <= 0.0) return 0.0;
  return p / std::hypot(p, electron_mass_kev);
}

double ParticleSpecies::kappa_of(double p) const {
  return asymmetry * beta_of(p);
}

double ParticleSpecies::spectrum_density(double p) const {
  if (p <= 0.0 || p >= max_momentum()) return 0.0;
  const double energy = std::hypot(p, electron_mass_kev);
  const double kinetic = energy - electron_mass_kev;
  const double room = endpoint_kev - kinetic;
  return p * p * room * room;
}

void ParticleSpecies::validate() const {
  if (!(mean_lifetime > 0.0)) {
    throw std::invalid_argument("species field mean_lifetime must be > 0, got " +
                                std::to_string(mean_lifetime));
  }
  if (!(std::abs(asymmetry) <= 1.0)) {
    throw std::invalid_argument("species field asymmetry must lie in [-1, 1], got " +
                                std::to_string(asymmetry));
  }
  if (!(endpoint_kev > 0.0)) {
    throw std::invalid_argument("species field endpoint_kev must be > 0, got " +
                                std::to_string(endpoint_kev));
  }
  if (!(electron_mass_kev >= 0.0)) {
    throw std::invalid_argument(
        "species field electron_mass_kev must be >= 0, got " +
        std::to_string(electron_mass_kev));
  }
}

ParticleSpecies neutron_species() {
  return ParticleSpecies{"neutron", 885.7, -0.117, 782.0, 511.0,
                         SpectrumMode::Allowed};
}

ParticleSpecies muon_species() {
  return ParticleSpecies{"muon", 2.2e-6, 1.0 / 3.0, 52320.0, 511.0,
                         SpectrumMode::Allowed};
}

ParticleSpecies cobalt60_species() {
  return ParticleSpecies{"cobalt60", 167255280.0, -1.0, 318.0, 511.0,
                         SpectrumMode::Allowed};
}

ParticleSpecies load_species(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open species file: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("species file " + path + ": " + e.what());
  }
  ParticleSpecies s;
  try {
    s.name = j.at("name").get<std::string>();
    s.mean_lifetime = j.at("mean_lifetime").get<double>();
    s.asymmetry = j.at("asymmetry").get<double>();
    s.endpoint_kev = j.at("endpoint_kev").get<double>();
    s.electron_mass_kev = j.at("electron_mass_kev").get<double>();
    if (j.contains("spectrum")) {
      const auto mode = j.at("spectrum").get<std::string>();
      if (mode == "allowed") {
        s.spectrum = SpectrumMode::Allowed;
      } else if (mode == "monoenergetic") {
        s.spectrum = SpectrumMode::Monoenergetic;
      } else {
        throw std::runtime_error(
            "species field spectrum must be \"allowed\" or "
            "\"monoenergetic\", got \"" +
            mode + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("species file " + path + ": " + e.what());
  }
  s.validate();
  return s;
}

Eigen::Vector3d axis_of(Polarization p) {
  switch (p) {
    case Polarization::PlusZ:
      return {0.0, 0.0, 1.0};
    case Polarization::MinusZ:
      return {0.0, 0.0, -1.0};
    case Polarization::PlusX:
      return {1.0, 0.0, 0.0};
    case Polarization::MinusX:
      return {-1.0, 0.0, 0.0};
  }
  throw std::invalid_argument("unknown polarization");
}

int AsymmetryHistogram::locate(const std::vector<double>& edges,
                               double value) {
  if (edges.size() < 2 || value < edges.front() || value > edges.back()) {
    return -1;
  }
  if (value == edges.back()) return static_cast<int>(edges.size()) - 2;
  const auto it = std::upper_bound(edges.begin(), edges.end(), value);
  return static_cast<int>(it - edges.begin()) - 1;
}

void AsymmetryHistogram::add(double theta, double p) {
  const int t = locate(theta_edges, theta);
  const int k = locate(p_edges, p);
  if (t < 0 || k < 0) return;
  ++counts[static_cast<std::size_t>(t) * p_bins() + k];
  ++total;
}

double sample_decay_time(const ParticleSpecies& species, RandomStream& rng) {
  return rng.exponential(species.mean_lifetime);
}

double sample_momentum_magnitude(const ParticleSpecies& species,
                                 RandomStream& rng) {
  const double p_max = species.max_momentum();
  if (species.spectrum == SpectrumMode::Monoenergetic) return p_max;
  const double envelope = spectrum_peak(species);
  for (;;) {
    const double p = rng.uniform01() * p_max;
    if (rng.uniform01() * envelope <= species.spectrum_density(p)) return p;
  }
}

Eigen::Vector3d sample_electron_momentum(const Eigen::Vector3d& spin_axis,
                                         const ParticleSpecies& species,
                                         RandomStream& rng) {
  const Eigen::Vector3d axis = checked_unit(spin_axis, "spin axis");
  const double p = sample_momentum_magnitude(species, rng);
  const double c = sample_cos_polar(species.kappa_of(p), rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  const double phi = 2.0 * kPi * rng.uniform01();
  Eigen::Vector3d e1, e2;
  orthonormal_frame(axis, e1, e2);
  return p * (c * axis + s * (std::cos(phi) * e1 + std::sin(phi) * e2));
}

Eigen::Vector3d sample_electron_momentum(Polarization polarization,
                                         const ParticleSpecies& species,
                                         RandomStream& rng) {
  return sample_electron_momentum(axis_of(polarization), species, rng);
}

Eigen::Vector3d fabricate_isotropic_event(const ParticleSpecies& species,
                                          RandomStream& rng) {
  const double p = sample_momentum_magnitude(species, rng);
  return p * rng.unit_vector();
}

double compute_theta(const Eigen::Vector3d& spin_axis,
                     const Eigen::Vector3d& momentum) {
  const double pn = momentum.norm();
  if (pn < 1e-300) {
    throw std::invalid_argument(
        "invalid event: zero-magnitude electron momentum");
  }
  const Eigen::Vector3d axis = checked_unit(spin_axis, "spin axis");
  return std::atan2(axis.cross(momentum).norm(), axis.dot(momentum));
}

double compute_theta(Polarization polarization,
                     const Eigen::Vector3d& momentum) {
  return compute_theta(axis_of(polarization), momentum);
}

double expected_decay_count(double n, const ParticleSpecies& species,
                            double t) {
  if (n < 0.0) {
    throw std::invalid_argument("particle count must be >= 0");
  }
  if (t < 0.0) {
    throw std::invalid_argument("observation time must be >= 0, got " +
                                std::to_string(t));
  }
  return n * -std::expm1(-t / species.mean_lifetime);
}

double dilution_factor(const ParticleSpecies& species, double genuine_window,
                       double total_window) {
  if (!(total_window > 0.0)) {
    throw std::invalid_argument("total window must be > 0, got " +
                                std::to_string(total_window));
  }
  if (genuine_window < 0.0 || genuine_window > total_window) {
    throw std::invalid_argument("genuine window must lie in [0, total]");
  }
  const double tau = species.mean_lifetime;
  return std::expm1(-genuine_window / tau) / std::expm1(-total_window / tau);
}

double decay_measurement_density(const qcore::StateVector& candidate,
                                 const Eigen::Vector3d& direction,
                                 double kappa) {
  if (candidate.dim() != 2) {
    throw std::invalid_argument("decay measurement density requires a qubit");
  }
  if (!(std::abs(kappa) <= 1.0)) {
    throw std::invalid_argument("kappa must lie in [-1, 1], got " +
                                std::to_string(kappa));
  }
  const Eigen::Vector3d n = checked_unit(direction, "emission direction");
  const double proj = qcore::bloch_vector(candidate).dot(n);
  return std::max(0.0, (1.0 + kappa * proj) / (4.0 * kPi));
}

double mean_kappa_in_band(const ParticleSpecies& species, double p_low,
                          double p_high) {
  if (!(p_low >= 0.0) || !(p_high > p_low)) {
    throw std::invalid_argument("momentum band must satisfy 0 <= low < high");
  }
  if (species.spectrum == SpectrumMode::Monoenergetic) {
    const double p = species.max_momentum();
    return (p > p_low && p <= p_high) ? species.kappa_of(p) : 0.0;
  }
  // Composite Simpson quadrature of kappa(p) against the spectrum weight.
  const int segments = 256;
  const double h = (p_high - p_low) / segments;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= segments; ++i) {
    const double p = p_low + h * i;
    const double w =
        species.spectrum_density(p) * ((i == 0 || i == segments) ? 1.0
                                       : (i % 2 == 1)            ? 4.0
                                                                 : 2.0);
    num += w * species.kappa_of(p);
    den += w;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace qbc::decay
