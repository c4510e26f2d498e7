#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbc/qcore.hpp"
#include "qbc/rng.hpp"

namespace qbc::decay {

enum class SpectrumMode {
  Allowed,         // dN/dp proportional to p^2 (Q - T(p))^2
  Monoenergetic,   // every electron carries the endpoint momentum
};

/// Physical parameters of the unstable spin-1/2 species used as the
/// information sink.  Momenta and energies are in keV; the lifetime is in
/// whatever time unit the caller works in (the presets use seconds).
struct ParticleSpecies {
  std::string name = "neutron";
  double mean_lifetime = 885.7;
  double asymmetry = -0.117;      // correlation coefficient, in [-1, 1]
  double endpoint_kev = 782.0;    // kinetic-energy endpoint Q
  double electron_mass_kev = 511.0;
  SpectrumMode spectrum = SpectrumMode::Allowed;

  /// Momentum at the kinetic endpoint, sqrt(Q^2 + 2 Q m).
  double max_momentum() const;
  /// Electron speed v/c at momentum p.
  double beta_of(double p) const;
  /// Effective angular asymmetry at momentum p: asymmetry * beta(p).
  double kappa_of(double p) const;
  /// Unnormalized momentum spectrum dN/dp; zero outside (0, max_momentum).
  double spectrum_density(double p) const;

  void validate() const;
};

ParticleSpecies neutron_species();
ParticleSpecies muon_species();
ParticleSpecies cobalt60_species();

/// Load a species from a JSON file with the same field names as the struct.
ParticleSpecies load_species(const std::string& path);

/// Spin direction a W particle can be prepared along: the z axis or the
/// conjugate x axis, either sign.
enum class Polarization { PlusZ, MinusZ, PlusX, MinusX };

Eigen::Vector3d axis_of(Polarization p);

/// One observed decay: which W fired, when, and the electron momentum (keV).
struct DecayEvent {
  std::size_t index = 0;
  double decay_time = 0.0;
  Eigen::Vector3d electron_momentum = Eigen::Vector3d::Zero();
};

/// Joint histogram of emission angle vs momentum magnitude.  Bin layout is
/// theta-major: counts[t * p_bins() + p].
struct AsymmetryHistogram {
  std::vector<double> theta_edges;  // ascending, spanning [0, pi]
  std::vector<double> p_edges;      // ascending, spanning (0, p_max]

  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  int theta_bins() const { return static_cast<int>(theta_edges.size()) - 1; }
  int p_bins() const { return static_cast<int>(p_edges.size()) - 1; }
  std::int64_t count(int theta_bin, int p_bin) const {
    return counts[static_cast<std::size_t>(theta_bin) * p_bins() + p_bin];
  }

  /// Locate a value's bin; the last bin includes its upper edge.  Returns -1
  /// when out of range.
  static int locate(const std::vector<double>& edges, double value);

  void add(double theta, double p);
};

/// Exponential decay time with the species' mean lifetime.
double sample_decay_time(const ParticleSpecies& species, RandomStream& rng);

/// Electron momentum from the parity-violating emission law
/// (1 + kappa(p) cos theta) / (4 pi) about the given spin axis, with the
/// magnitude drawn from the species' spectrum.
Eigen::Vector3d sample_electron_momentum(const Eigen::Vector3d& spin_axis,
                                         const ParticleSpecies& species,
                                         RandomStream& rng);
Eigen::Vector3d sample_electron_momentum(Polarization polarization,
                                         const ParticleSpecies& species,
                                         RandomStream& rng);

/// Momentum magnitude alone, from the species' spectrum.
double sample_momentum_magnitude(const ParticleSpecies& species,
                                 RandomStream& rng);

/// A forged electron momentum: genuine magnitude spectrum, isotropic
/// direction.  This is what a committer without the real spins can produce.
Eigen::Vector3d fabricate_isotropic_event(const ParticleSpecies& species,
                                          RandomStream& rng);

/// Angle between the preparation axis and an observed momentum, in [0, pi].
double compute_theta(Polarization polarization,
                     const Eigen::Vector3d& momentum);
double compute_theta(const Eigen::Vector3d& spin_axis,
                     const Eigen::Vector3d& momentum);

/// Expected number of decays of n particles within time t: n(1 - e^(-t/tau)).
double expected_decay_count(double n, const ParticleSpecies& species,
                            double t);

/// Fraction of the decays inside a total observation window that fall inside
/// the initial genuine window: (1 - e^(-g/tau)) / (1 - e^(-total/tau)).
double dilution_factor(const ParticleSpecies& species, double genuine_window,
                       double total_window);

/// Probability density for an electron to emerge along `direction` when the
/// decaying spin is in the qubit state `candidate`:
/// Tr[rho (1 + kappa n.sigma)] / (8 pi).
double decay_measurement_density(const qcore::StateVector& candidate,
                                 const Eigen::Vector3d& direction,
                                 double kappa);

/// Spectrum-weighted mean of kappa(p) over a momentum band, the expected
/// asymmetry amplitude for events binned into that band.
double mean_kappa_in_band(const ParticleSpecies& species, double p_low,
                          double p_high);

}  // namespace qbc::decay
