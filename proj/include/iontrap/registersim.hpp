#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "iontrap/constants.hpp"

// Qudit-register state-vector simulator. Each ion carries four levels:
//   0: |1>  = S1/2, m=+1/2   (bright, optical-qubit ground)
//   1: |0>  = D5/2, m=+3/2   (dark, optical-qubit excited)
//   2: |1~> = S1/2, m=-1/2
//   3: |0~> = D5/2, m=-3/2
// The optical qubit lives on (|1>,|0>); the hidden pair is (|0>,|0~>), fully
// inside the D manifold and decoupled from fluorescence and the gate laser.

namespace iontrap::reg {

using cplx = std::complex<double>;

inline constexpr int kLevels = 4;
inline constexpr int kL1 = 0, kL0 = 1, kL1h = 2, kL0h = 3;

struct LevelScheme {
  double s_sensitivity_mhz_per_g = 2.802;  // ground-manifold Zeeman slope
  double d_sensitivity_mhz_per_g = 1.68;   // D-manifold slope
  double d_lifetime = kDStateLifetime;     // s

  // Relative magnetic sensitivity of the optical pair |S,+1/2> vs |D,+3/2|.
  double optical_pair_sensitivity() const {
    return std::abs(0.5 * s_sensitivity_mhz_per_g - 1.5 * d_sensitivity_mhz_per_g);
  }
  // Hidden pair |D,+3/2> vs |D,-3/2>.
  double hidden_pair_sensitivity() const { return 3.0 * d_sensitivity_mhz_per_g; }
};

enum class Encoding { none, optical, hidden };

enum class NoiseKind { quasi_static, ornstein_uhlenbeck };

struct NoiseModel {
  bool enabled = true;
  double optical_coherence_time = 2e-3;  // s, Ramsey 1/e
  double hidden_coherence_time = 500e-6;
  NoiseKind kind = NoiseKind::quasi_static;
  double correlation_time = 0.7e-3;      // OU only
  uint64_t seed = 1;

  double prep_error = 1e-3;       // per-ion chance to start in |1~>
  double epsilon_hide = 0.0;      // depolarizing error per hide/unhide
  double bright_to_dark = 0.0;    // measurement knob, default off
  bool decay_enabled = true;      // dark->bright with 1-exp(-t/tauD)

  // Noise scale (rad/s) for the unit-variance common field, calibrated so a
  // Ramsey experiment on the encoding decays to 1/e at the configured time.
  double sigma(Encoding enc) const;

  static NoiseModel off() {
    NoiseModel m;
    m.enabled = false;
    m.prep_error = 0.0;
    m.decay_enabled = false;
    return m;
  }
};

// One shot's realization of the common-mode field. Quasi-static draws a
// single Gaussian per shot; the OU option evolves the stationary process in
// substeps. advance() returns the field integral over the window.
class NoisePath {
 public:
  NoisePath(const NoiseModel& model, uint64_t shot_seed);
  double advance(double duration);

 private:
  const NoiseModel model_;
  std::mt19937_64 rng_;
  double value_ = 0.0;
};

struct RegisterState {
  int ion_count = 0;
  std::vector<cplx> amplitudes;  // length 4^ion_count, ion 0 = least significant digit
  std::vector<std::pair<std::string, std::string>> classical_record;

  static RegisterState ground(int n_ions);  // |1...1>

  double norm() const;
  int level_of(size_t basis_index, int ion) const;
  double population(int ion, int level) const;
  double population_outside_levels(int ion, int la, int lb) const;
};

// --- universal gate set -----------------------------------------------------

// Global rotation exp(i(theta/2) sum_i sigma_phi_i) on every optical qubit;
// hidden levels untouched.
void apply_global(RegisterState& st, double phi, double theta);

// Global entangling operation exp(i(theta/2) sum_{i<j} sigma_phi_i sigma_phi_j)
// over the participant set. Participants with population outside the optical
// subspace beyond `tolerance` are rejected (ions hidden in the D pair or
// parked in |1~> are spectrally decoupled and must be excluded).
void apply_ms(RegisterState& st, double phi, double theta,
              const std::vector<int>& participants, double tolerance = 1e-9);

// Individual light-shift rotation exp(i(theta/2) Z_ion); optional crosstalk
// applies exp(i(theta*r_ls/2) Z) to nearest neighbours.
void apply_lightshift_z(RegisterState& st, int ion, double theta, double r_ls = 0.0);

// Individual sigma_phi rotation composed from the public set:
// U_G(0,pi/2) . U_i . U_G(0,-pi/2) sandwiched in z-shifts. Other ions see
// exactly the identity.
void apply_individual(RegisterState& st, int ion, double phi, double theta);

// Coherent map (|1>,|0>) -> (|0~>,|0>) and its exact inverse. epsilon_hide
// applies a random Pauli on the affected pair with that probability.
void hide(RegisterState& st, int ion, double epsilon_hide = 0.0,
          std::mt19937_64* rng = nullptr);
void unhide(RegisterState& st, int ion, double epsilon_hide = 0.0,
            std::mt19937_64* rng = nullptr);

struct MeasureOptions {
  double exposure = 1e-3;     // s
  bool decay_enabled = true;  // dark ion classified bright with 1-e^{-t/tau}
  double bright_to_dark = 0.0;
  double d_lifetime = kDStateLifetime;
};

// Projective state-selective fluorescence on a subset: bright (S manifold,
// bit 1) vs dark (D manifold, bit 0). Collapses the measured ions; the
// classified bits include the decay misclassification channel.
std::string measure_fluorescence(RegisterState& st, const std::vector<int>& ions,
                                 const MeasureOptions& opt, std::mt19937_64& rng,
                                 const std::string& label = "m");

// Quasi-static/OU dephasing over `duration`: each coherent pair acquires
// sigma(enc) * integral of the common field, applied to the pair's D-side
// level. CPMG level swaps invert the accumulated sign automatically.
void apply_dephasing(RegisterState& st, double duration, const NoiseModel& model,
                     NoisePath& path, const std::vector<Encoding>& encodings);

// D-manifold pi flip |0> <-> |0~> on the given ions (the CPMG pulse).
void d_manifold_flip(RegisterState& st, const std::vector<int>& ions);

struct EchoSchedule {
  int pulse_count = 4;          // total, even; split across the two windows
  double tau_exposure = 700e-6; // standalone window lengths
  double tau_readout = 600e-6;
  bool enabled = true;

  void validate() const;
};

// One echo window: CPMG pulses at (2k+1)/(2n) of the window, dephasing in the
// intervening segments. Pulses act on hidden ions only.
void cpmg_window(RegisterState& st, double window, int n_pulses,
                 const std::vector<int>& hidden_ions, const NoiseModel& model,
                 NoisePath& path, const std::vector<Encoding>& encodings);

// Applies the full double-CPMG schedule (both windows). Odd total pulse count
// is rejected: the net flip would corrupt the subsequent unhide.
void cpmg_echo(RegisterState& st, const EchoSchedule& schedule,
               const std::vector<int>& hidden_ions, const NoiseModel& model,
               NoisePath& path, const std::vector<Encoding>& encodings);

// Preparation with the optical-pumping error knob: each ion independently
// starts in |1~> with probability prep_error.
RegisterState prepare(int n_ions, double prep_error, std::mt19937_64& rng);

}  // namespace iontrap::reg
