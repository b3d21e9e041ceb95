#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "iontrap/constants.hpp"

// Multi-tone entangling-gate synthesis and analytic evaluation: waveform
// construction, phase-space trajectory integrals, the closed-form fidelity of
// a pair gate, robust-coefficient solving and robustness scans.
//
// Conventions. The驱 drive tones sit at omega_j = nu + n_j*xi. The analytic
// displacement integrand is W(t) = sqrt(2)*eta*Omega*sum_j r_j exp(i n_j xi t)
// with G+iF its running integral and g = Re W; the accumulated phase is
// A = -int g F dt. Under this normalization the plain MS point (n=1, r=1,
// xi = 2 eta Omega) gives A = pi/2 and unit fidelity, and A + FG/2 equals four
// times the Magnus phase of the underlying spin-dependent force, which is what
// the fidelity formula consumes.

namespace iontrap::gates {

struct ModeSpec {
  double mode_freq = hz_to_rad(1.0e6);  // rad/s
  double lamb_dicke = 0.05;
  double thermal_occupation = 0.0;

  void validate() const;
};

struct Waveform {
  std::vector<int> harmonics;    // distinct nonzero n_j
  std::vector<double> weights;   // r_j, same length
  double detuning = 0.0;         // xi, rad/s
  double carrier_rabi = 0.0;     // Omega, rad/s (per-tone convention)
  double gate_time = 0.0;        // T = 2 pi / xi, before echo prolongation
  bool echo_midpoint = false;

  void validate() const;
  // sqrt(2) prolongation when the midpoint echo is on.
  double total_duration() const { return echo_midpoint ? gate_time * std::sqrt(2.0) : gate_time; }
  // Detuning actually rendered: the echoed drive runs two closed loops of the
  // same shape, each spanning half the prolonged duration.
  double rendered_detuning() const { return echo_midpoint ? detuning * std::sqrt(2.0) : detuning; }
};

Waveform make_waveform(std::vector<int> harmonics, std::vector<double> weights,
                       double detuning, double carrier_rabi, bool echo = false);

// Plain single-tone gate: n=1, r=1, xi = 2 eta Omega, T = 2 pi / xi.
Waveform ms_waveform(const ModeSpec& mode, double carrier_rabi, bool echo = false);

// Endpoint-envelope nulling (sum r_j = 0): the drive envelope vanishes at t=0
// and t=T, zeroing the trajectory's endpoint velocity (first-order timing and
// carrier robustness). With >= 3 harmonics an optional second condition
// sum n_j r_j = 0 nulls the envelope slope as well. Normalized to max|r|=1.
std::vector<double> solve_robust_weights(const std::vector<int>& harmonics,
                                         bool higher_order = false);

// Robust multi-tone waveform at a chosen detuning; carrier_rabi starts from a
// nominal guess and should be fixed with phase_calibration.
Waveform cardioid_waveform(const std::vector<int>& harmonics, const ModeSpec& mode,
                           double detuning, bool echo = false);

struct PhaseSpacePath {
  std::vector<double> times;
  std::vector<std::complex<double>> displacement;  // G + iF at each time
  double final_f = 0.0;
  double final_g = 0.0;
  double accumulated_phase = 0.0;  // A
};

// Numerically integrated phase-space path of the drive envelope up to t_end,
// fixed-step composite quadrature with step halving to 1e-9 relative.
PhaseSpacePath trajectory(const Waveform& wf, const ModeSpec& mode, double t_end,
                          double mode_freq_offset = 0.0);

double accumulated_phase(const Waveform& wf, const ModeSpec& mode);

// Rescales Omega so the accumulated phase equals pi/2 (A scales as Omega^2:
// closed-form rescale plus one verification pass). Rejects A <= 0.
Waveform phase_calibration(const Waveform& wf, const ModeSpec& mode);

// Closed-form pair-gate fidelity in terms of the trajectory scalars.
double fidelity_2N(double F, double G, double A, double nbar, int n_qubits);

enum class ScanParameter { gate_time, mode_freq };

std::string to_string(ScanParameter p);

struct ErrorScan {
  std::string parameter;
  std::vector<double> offsets;
  std::vector<double> fidelities;
  int qubit_count = 2;
};

struct ScanOptions {
  // Optional ambient-dephasing injection: multiplies the analytic fidelity by
  // D + (1-D)/2-style mixing with D = exp(-(t/T2)^2/2) at the scanned duration.
  double injected_coherence_time = 0.0;  // 0 disables
};

// Recomputes the trajectory and the fidelity formula per offset. Gate-time
// offsets stop the fixed waveform at T(1+eps) (an evolution-time scan around
// the closure point); mode-frequency offsets shift every tone's detuning.
ErrorScan robustness_scan(const Waveform& wf, const ModeSpec& mode, ScanParameter parameter,
                          const std::vector<double>& offsets, int n_qubits,
                          const ScanOptions& opt = {});

// Infidelity versus qubit count for a waveform whose programmed period 2pi/xi
// is mis-calibrated by the given fraction: the loop still closes but the
// entangling phase scales as (1+frac)^2. This is the "inaccurate gate time"
// error of the quadratic-in-N scaling law.
std::vector<double> n_scaling_infidelity(const Waveform& wf, const ModeSpec& mode,
                                         double fractional_error,
                                         const std::vector<int>& n_qubits);

}  // namespace iontrap::gates
