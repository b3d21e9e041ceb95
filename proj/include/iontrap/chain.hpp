#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "iontrap/constants.hpp"

// Static physics of the ion chain and the addressing optics: equilibrium
// positions, axial normal modes, Lamb-Dicke parameters, Gaussian-beam light
// shifts, crosstalk bounds and AOD switching figures of merit.

namespace iontrap::chain {

struct TrapSpec {
  int ion_count = 1;
  double axial_freq = hz_to_rad(1.0e6);  // rad/s
  double ion_mass = kSr88Mass;           // kg
  double ion_charge = kElementaryCharge; // C

  void validate() const;
  // Length scale l = (q^2 / (4 pi eps0 m nu^2))^(1/3) of the equilibrium problem.
  double length_scale() const;
};

struct IonChain {
  std::vector<double> positions;                  // m, strictly increasing
  std::vector<double> mode_freqs;                 // rad/s, ascending; [0] is COM
  std::vector<std::vector<double>> mode_vectors;  // mode_vectors[k][i], orthonormal rows
  std::vector<double> lamb_dicke;                 // per-ion eta for the selected mode
  int selected_mode = 0;
};

struct BeamModel {
  double wavelength = kQubitWavelength; // m
  double numerical_aperture = 0.19;
  double waist_radius = 0.0;            // m; 0 means diffraction limited from NA
  double quality_m2 = 1.0;              // M^2 >= 1
  double resonant_rabi = 0.0;           // rad/s
  double detuning = 0.0;                // rad/s
  double tail_amplitude = 0.0;          // additive 1/r^2 tail (aberration model)

  void validate() const;
  double nominal_waist() const;   // waist_radius, or diffraction limit if unset
  double effective_waist() const; // M^2-scaled
};

struct AODSpec {
  double spot_diameter = 1.1e-3;   // m
  double acoustic_velocity = 650.0; // m/s
  double bandwidth = 45.0e6;       // Hz
  bool xy_configuration = false;

  void validate() const;
};

struct CrosstalkReport {
  double r_res = 0.0;
  double r_ls = 0.0;
  double epsilon_bound = 0.0;
  std::map<std::pair<int, int>, double> pair_r_res;

  // Builds a report from a measured/derived resonant ratio; the identities
  // r_ls = r_res^2 and epsilon = 2 r_ls^2 hold exactly by construction.
  static CrosstalkReport from_r_res(double r_res);
};

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Equilibrium positions from the harmonic-plus-Coulomb force balance,
// damped Newton iteration to 1e-12 relative residual.
std::vector<double> equilibrium_positions(const TrapSpec& trap);

// Dimensionless positions u_i (positions / length_scale) for given N.
std::vector<double> scaled_equilibrium_positions(int n);

// Axial normal modes about the equilibrium. Returns ascending frequencies and
// orthonormal eigenvectors; mode 0 is the center-of-mass mode at exactly the
// axial frequency. Rejects position sets that are not an equilibrium.
void axial_normal_modes(const std::vector<double>& positions, const TrapSpec& trap,
                        std::vector<double>& mode_freqs,
                        std::vector<std::vector<double>>& mode_vectors);

// Light shift of an off-resonant beam, Omega_res^2 / Delta (sign of Delta).
double light_shift(const BeamModel& beam);

// Relative intensity of the addressing beam at distance r from its center.
// Pure Gaussian with the M^2-scaled waist by default; optional additive
// 1/r^2 tail normalized so the on-axis value stays 1.
double beam_intensity(double r, const BeamModel& beam);

// Per-pair resonant crosstalk ratios from the beam profile plus the exact
// derived identities.
CrosstalkReport crosstalk_map(const IonChain& chain, const BeamModel& beam);

struct AODFigures {
  double switch_time = 0.0;    // s
  double resolved_spots = 0.0; // dimensionless
};
AODFigures aod_figures(const AODSpec& aod);

// Full chain build: equilibrium, modes, and per-ion Lamb-Dicke parameters for
// the selected mode (default COM). beam_angle is the projection angle of the
// addressing k-vector onto the trap axis (0 = full projection; the paper does
// not state the geometry, so eta values are nominal).
IonChain build_chain(const TrapSpec& trap, double wavelength = kQubitWavelength,
                     double beam_angle = 0.0, int selected_mode = 0);

// One-dimensional root solve for the axial frequency that produces a given
// minimal inter-ion spacing at fixed ion count.
double solve_axial_freq_for_min_spacing(int ion_count, double min_spacing,
                                        double ion_mass = kSr88Mass,
                                        double ion_charge = kElementaryCharge);

double min_spacing(const std::vector<double>& positions);

}  // namespace iontrap::chain
