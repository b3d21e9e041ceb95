#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "iontrap/gatedesign.hpp"

// Brute-force spin-boson simulator on a truncated Fock space: the ground-truth
// oracle for gate fidelities and population dynamics. Integrates the
// interaction-picture Hamiltonian with the full tone structure (only the
// optical-frequency rotating-wave approximation is made):
//
//   H(t) = -eta*Omega*M(t) * sum_i sigma_y_i (a e^{-i nu t} + a^dag e^{+i nu t})
//          [+ Omega*M(t) * sum_i sigma_x_i when the carrier is enabled]
//   M(t) = sum_j r_j cos((nu + n_j xi) t)
//
// Spin basis: bit 0 of the index is ion 0; bit value 0 means |1> (bright
// ground state), 1 means |0>. Echoed waveforms get the collective flip at the
// midpoint and the known net flip is compensated in the recorded frame.

namespace iontrap::oracle {

using cplx = std::complex<double>;

struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleConfig {
  int fock_cutoff = 20;        // headroom above the initial Fock level
  bool first_order_ld = true;  // false: exact displacement coupling (diagnostic)
  bool carrier_enabled = false;
  double thermal_nbar = 0.0;
  std::vector<double> time_grid;  // strictly increasing, starts after 0
  int steps_per_period = 96;      // RK4 steps per mode period
  unsigned threads = 0;

  void validate() const;
};

struct EvolveResult {
  int n_qubits = 0;
  std::vector<double> times;
  // populations[t][s]: probability of spin basis state s (motion traced out)
  std::vector<std::vector<double>> populations;
  // Thermal mixture terms at the final grid time, for downstream analysis.
  std::vector<double> weights;
  std::vector<int> fock_dims;                  // per-term Fock dimension
  std::vector<std::vector<cplx>> final_states; // per-term, s-major [s*dim+n]

  std::vector<double> final_populations() const { return populations.back(); }
};

// Thermal weights n^bar distribution truncated at cumulative 1 - 1e-6.
std::vector<std::pair<int, double>> thermal_mixture(double nbar, double tail = 1e-6);

// Evolves |1...1> x thermal(n̄) under the waveform drive, recording spin
// populations at each grid time. Retries with doubled Fock headroom if the
// truncation guard (top two levels > 1e-8) trips.
EvolveResult evolve(const gates::Waveform& wf, const gates::ModeSpec& mode, int n_qubits,
                    const OracleConfig& config);

// Single attempt without the auto-retry (throws TruncationError).
EvolveResult evolve_once(const gates::Waveform& wf, const gates::ModeSpec& mode,
                         int n_qubits, const OracleConfig& config);

// Overlap with (|11> + e^{i phase} |00>)/sqrt(2) after tracing out motion.
double bell_fidelity(const EvolveResult& result, double target_phase = kPi / 2.0);

// Reduced two-qubit density matrix (row-major 4x4) from the final states.
std::vector<cplx> reduced_pair_state(const EvolveResult& result);

struct ParityScan {
  std::vector<double> phases;
  std::vector<double> parity;
  double amplitude = 0.0;   // fitted oscillation amplitude at 2*phase
  double p_11 = 0.0;
  double p_00 = 0.0;
  double fidelity = 0.0;    // (populations + coherence)/2 estimator
};

// Parity <sigma_phi sigma_phi> versus analysis phase for a 2-qubit reduced
// state, plus the standard populations+coherence fidelity estimate.
ParityScan parity_scan_sim(const std::vector<cplx>& rho4x4,
                           const std::vector<double>& phases);

}  // namespace iontrap::oracle
