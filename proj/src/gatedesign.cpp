#include "iontrap/gatedesign.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace iontrap::gates {

using cplx = std::complex<double>;

void ModeSpec::validate() const {
  if (!(mode_freq > 0)) throw std::invalid_argument("ModeSpec: mode_freq must be > 0");
  if (!(lamb_dicke > 0)) throw std::invalid_argument("ModeSpec: lamb_dicke must be > 0");
  if (thermal_occupation < 0) throw std::invalid_argument("ModeSpec: nbar must be >= 0");
}

void Waveform::validate() const {
  if (harmonics.empty()) throw std::invalid_argument("Waveform: no harmonics");
  if (harmonics.size() != weights.size())
    throw std::invalid_argument("Waveform: harmonics/weights length mismatch");
  std::set<int> uniq(harmonics.begin(), harmonics.end());
  if (uniq.size() != harmonics.size())
    throw std::invalid_argument("Waveform: harmonics must be distinct");
  for (int n : harmonics)
    if (n == 0) throw std::invalid_argument("Waveform: harmonics must be nonzero");
  bool any = false;
  for (double r : weights) any |= (r != 0.0);
  if (!any) throw std::invalid_argument("Waveform: all weights are zero");
  if (!(detuning > 0)) throw std::invalid_argument("Waveform: detuning must be > 0");
  if (!(carrier_rabi > 0)) throw std::invalid_argument("Waveform: carrier_rabi must be > 0");
  if (std::abs(gate_time * detuning - kTwoPi) > 1e-9 * kTwoPi)
    throw std::invalid_argument("Waveform: gate_time must equal 2 pi / detuning");
}

Waveform make_waveform(std::vector<int> harmonics, std::vector<double> weights,
                       double detuning, double carrier_rabi, bool echo) {
  Waveform wf;
  wf.harmonics = std::move(harmonics);
  wf.weights = std::move(weights);
  wf.detuning = detuning;
  wf.carrier_rabi = carrier_rabi;
  wf.gate_time = kTwoPi / detuning;
  wf.echo_midpoint = echo;
  wf.validate();
  return wf;
}

Waveform ms_waveform(const ModeSpec& mode, double carrier_rabi, bool echo) {
  mode.validate();
  if (!(carrier_rabi > 0)) throw std::invalid_argument("ms_waveform: Omega must be > 0");
  const double xi = 2.0 * mode.lamb_dicke * carrier_rabi;
  return make_waveform({1}, {1.0}, xi, carrier_rabi, echo);
}

std::vector<double> solve_robust_weights(const std::vector<int>& harmonics,
                                         bool higher_order) {
  const int k = static_cast<int>(harmonics.size());
  if (k < 2)
    throw std::invalid_argument("solve_robust_weights: need >= 2 harmonics (no free parameter)");
  std::set<int> uniq(harmonics.begin(), harmonics.end());
  if (static_cast<int>(uniq.size()) != k)
    throw std::invalid_argument("solve_robust_weights: harmonics must be distinct");
  for (int n : harmonics)
    if (n <= 0) throw std::invalid_argument("solve_robust_weights: harmonics must be positive");

  int m = 1 + (higher_order && k >= 3 ? 1 : 0);
  Eigen::MatrixXd C(m, k);
  for (int j = 0; j < k; ++j) C(0, j) = 1.0;                          // sum r_j = 0
  if (m > 1)
    for (int j = 0; j < k; ++j) C(1, j) = harmonics[j];               // sum n_j r_j = 0

  Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
  Eigen::MatrixXd ker = lu.kernel();
  if (ker.cols() < 1)
    throw std::invalid_argument("solve_robust_weights: constraints leave no solution");
  Eigen::VectorXd r = ker.col(0);
  double amax = r.cwiseAbs().maxCoeff();
  r /= amax;
  if (r[0] < 0) r = -r;
  return std::vector<double>(r.data(), r.data() + k);
}

Waveform cardioid_waveform(const std::vector<int>& harmonics, const ModeSpec& mode,
                           double detuning, bool echo) {
  mode.validate();
  std::vector<double> w = solve_robust_weights(harmonics);
  // Nominal amplitude; phase_calibration fixes the entangling angle.
  const double omega0 = detuning / (2.0 * mode.lamb_dicke);
  return make_waveform(harmonics, std::move(w), detuning, omega0, echo);
}

namespace {

struct Envelope {
  // Effective drive envelope including the echo sign flip, sampled in
  // absolute time. Tones are phase-continuous across the flip.
  const Waveform& wf;
  double scale;          // sqrt(2) * eta * Omega
  double xi;             // rendered detuning
  double t_flip;         // echo midpoint (or +inf)
  double freq_shift;     // mode-frequency offset delta

  cplx operator()(double t) const {
    cplx w{0.0, 0.0};
    for (size_t j = 0; j < wf.harmonics.size(); ++j) {
      const double ph = (wf.harmonics[j] * xi - freq_shift) * t;
      w += wf.weights[j] * cplx(std::cos(ph), std::sin(ph));
    }
    if (t > t_flip) w = -w;
    return scale * w;
  }
};

struct QuadResult {
  std::vector<double> t;
  std::vector<cplx> disp;  // G + iF cumulative
  double A;
};

// Cumulative trapezoid for G+iF and A = -int (Re W) F dt on a uniform grid.
// Trapezoid is spectrally accurate over whole envelope periods, second order
// on partial intervals; the caller halves the step until converged.
QuadResult integrate(const Envelope& env, double t_end, int steps) {
  QuadResult q;
  q.t.resize(steps + 1);
  q.disp.resize(steps + 1);
  const double h = t_end / steps;
  cplx I{0.0, 0.0};
  double A = 0.0;
  cplx w_prev = env(0.0);
  double gF_prev = 0.0;  // F(0) = 0
  q.t[0] = 0.0;
  q.disp[0] = I;
  for (int k = 1; k <= steps; ++k) {
    const double tk = k * h;
    const cplx w_k = env(tk);
    I += 0.5 * h * (w_prev + w_k);
    const double gF_k = w_k.real() * I.imag();  // g * F
    A -= 0.5 * h * (gF_prev + gF_k);
    q.t[k] = tk;
    q.disp[k] = I;
    w_prev = w_k;
    gF_prev = gF_k;
  }
  q.A = A;
  return q;
}

int base_steps(const Waveform& wf, double t_end) {
  int nmax = 1;
  for (int n : wf.harmonics) nmax = std::max(nmax, std::abs(n));
  const double periods = t_end * wf.rendered_detuning() / kTwoPi * nmax;
  return std::max(256, static_cast<int>(std::ceil(periods * 64)));
}

}  // namespace

PhaseSpacePath trajectory(const Waveform& wf, const ModeSpec& mode, double t_end,
                          double mode_freq_offset) {
  wf.validate();
  mode.validate();
  if (!(t_end > 0)) throw std::invalid_argument("trajectory: t_end must be > 0");

  Envelope env{wf,
               std::sqrt(2.0) * mode.lamb_dicke * wf.carrier_rabi,
               wf.rendered_detuning(),
               wf.echo_midpoint ? 0.5 * wf.total_duration()
                                : std::numeric_limits<double>::infinity(),
               mode_freq_offset};

  int steps = base_steps(wf, t_end);
  QuadResult q = integrate(env, t_end, steps);
  for (int iter = 0; iter < 14; ++iter) {
    QuadResult q2 = integrate(env, t_end, steps * 2);
    const double scale = std::max({1.0, std::abs(q2.A), std::abs(q2.disp.back())});
    const double diff = std::max(std::abs(q2.A - q.A), std::abs(q2.disp.back() - q.disp.back()));
    q = std::move(q2);
    steps *= 2;
    if (diff < 1e-9 * scale) break;
  }

  PhaseSpacePath path;
  const int keep = 512;
  const int stride = std::max(1, static_cast<int>(q.t.size()) / keep);
  for (size_t k = 0; k < q.t.size(); k += stride) {
    path.times.push_back(q.t[k]);
    path.displacement.push_back(q.disp[k]);
  }
  if (path.times.back() != q.t.back()) {
    path.times.push_back(q.t.back());
    path.displacement.push_back(q.disp.back());
  }
  path.final_g = q.disp.back().real();
  path.final_f = q.disp.back().imag();
  path.accumulated_phase = q.A;
  return path;
}

double accumulated_phase(const Waveform& wf, const ModeSpec& mode) {
  return trajectory(wf, mode, wf.total_duration()).accumulated_phase;
}

Waveform phase_calibration(const Waveform& wf, const ModeSpec& mode) {
  const double a0 = accumulated_phase(wf, mode);
  if (!(a0 > 0))
    throw std::invalid_argument("phase_calibration: accumulated phase must be positive");
  Waveform out = wf;
  out.carrier_rabi = wf.carrier_rabi * std::sqrt((kPi / 2.0) / a0);  // A ~ Omega^2
  const double a1 = accumulated_phase(out, mode);
  if (std::abs(a1 - kPi / 2.0) > 1e-8)
    throw std::runtime_error("phase_calibration: verification pass failed");
  return out;
}

double fidelity_2N(double F, double G, double A, double nbar, int n_qubits) {
  if (nbar < 0) throw std::invalid_argument("fidelity_2N: nbar must be >= 0");
  if (n_qubits < 2) throw std::invalid_argument("fidelity_2N: N must be >= 2");
  const double theta = A + 0.5 * F * G - kPi / 2.0;
  const double x = (F * F + G * G) * (nbar + 0.5);
  return 0.125 * (4.0 * std::exp(-0.5 * x) * std::cos(n_qubits * theta) * std::cos(theta) +
                  std::exp(-2.0 * x) * std::cos(2.0 * n_qubits * theta) + 3.0);
}

std::string to_string(ScanParameter p) {
  return p == ScanParameter::gate_time ? "gate_time" : "mode_freq";
}

namespace {

double dephasing_mix(double fid, double duration, double t2) {
  if (t2 <= 0.0) return fid;
  const double d = std::exp(-0.5 * (duration / t2) * (duration / t2));
  return fid * d + 0.5 * (1.0 - d);
}

}  // namespace

ErrorScan robustness_scan(const Waveform& wf, const ModeSpec& mode, ScanParameter parameter,
                          const std::vector<double>& offsets, int n_qubits,
                          const ScanOptions& opt) {
  if (offsets.empty()) throw std::invalid_argument("robustness_scan: no offsets");
  const double lo = *std::min_element(offsets.begin(), offsets.end());
  const double hi = *std::max_element(offsets.begin(), offsets.end());
  if (lo > 0.0 || hi < 0.0)
    throw std::invalid_argument("robustness_scan: offsets must bracket 0");

  ErrorScan scan;
  scan.parameter = to_string(parameter);
  scan.offsets = offsets;
  scan.qubit_count = n_qubits;
  scan.fidelities.reserve(offsets.size());
  const double T = wf.total_duration();
  for (double off : offsets) {
    PhaseSpacePath p;
    double duration = T;
    if (parameter == ScanParameter::gate_time) {
      duration = T * (1.0 + off);
      p = trajectory(wf, mode, duration);
    } else {
      p = trajectory(wf, mode, T, off * mode.mode_freq);
    }
    double fid = fidelity_2N(p.final_f, p.final_g, p.accumulated_phase,
                             mode.thermal_occupation, n_qubits);
    fid = dephasing_mix(fid, duration, opt.injected_coherence_time);
    scan.fidelities.push_back(fid);
  }
  return scan;
}

std::vector<double> n_scaling_infidelity(const Waveform& wf, const ModeSpec& mode,
                                         double fractional_error,
                                         const std::vector<int>& n_qubits) {
  // Re-render the waveform with the mis-programmed period: xi' = xi/(1+eps),
  // evaluated over its own (closed) duration.
  Waveform bad = wf;
  bad.detuning = wf.detuning / (1.0 + fractional_error);
  bad.gate_time = kTwoPi / bad.detuning;
  PhaseSpacePath p = trajectory(bad, mode, bad.total_duration());
  std::vector<double> out;
  out.reserve(n_qubits.size());
  for (int nq : n_qubits)
    out.push_back(1.0 - fidelity_2N(p.final_f, p.final_g, p.accumulated_phase,
                                    mode.thermal_occupation, nq));
  return out;
}

}  // namespace iontrap::gates
