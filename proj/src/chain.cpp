#include "iontrap/chain.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace iontrap::chain {

void TrapSpec::validate() const {
  if (ion_count < 1) throw std::invalid_argument("TrapSpec: ion_count must be >= 1");
  if (!(axial_freq > 0)) throw std::invalid_argument("TrapSpec: axial_freq must be > 0");
  if (!(ion_mass > 0)) throw std::invalid_argument("TrapSpec: ion_mass must be > 0");
  if (!(ion_charge > 0)) throw std::invalid_argument("TrapSpec: ion_charge must be > 0");
}

double TrapSpec::length_scale() const {
  const double q2k = ion_charge * ion_charge * kCoulomb;
  return std::cbrt(q2k / (ion_mass * axial_freq * axial_freq));
}

void BeamModel::validate() const {
  if (!(nominal_waist() > 0)) throw std::invalid_argument("BeamModel: waist must be > 0");
  if (quality_m2 < 1.0) throw std::invalid_argument("BeamModel: M^2 must be >= 1");
  if (tail_amplitude < 0.0) throw std::invalid_argument("BeamModel: tail amplitude must be >= 0");
}

double BeamModel::nominal_waist() const {
  if (waist_radius > 0.0) return waist_radius;
  return wavelength / (kPi * numerical_aperture);  // 2w0 = 2 lambda / (pi NA)
}

double BeamModel::effective_waist() const { return quality_m2 * nominal_waist(); }

void AODSpec::validate() const {
  if (!(spot_diameter > 0) || !(acoustic_velocity > 0) || !(bandwidth > 0))
    throw std::invalid_argument("AODSpec: all fields must be > 0");
}

CrosstalkReport CrosstalkReport::from_r_res(double r_res) {
  if (r_res < 0.0 || r_res > 1.0)
    throw std::invalid_argument("CrosstalkReport: r_res must be in [0,1]");
  CrosstalkReport rep;
  rep.r_res = r_res;
  rep.r_ls = r_res * r_res;
  rep.epsilon_bound = 2.0 * rep.r_ls * rep.r_ls;
  return rep;
}

namespace {

// Dimensionless force residual and Jacobian: u_i - sum_{j<i} (u_i-u_j)^-2
// + sum_{j>i} (u_i-u_j)^-2 = 0 for the ordered chain.
Eigen::VectorXd residual(const Eigen::VectorXd& u) {
  const int n = static_cast<int>(u.size());
  Eigen::VectorXd f = u;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = u[i] - u[j];
      f[i] -= (d > 0 ? 1.0 : -1.0) / (d * d);
    }
  }
  return f;
}

Eigen::MatrixXd jacobian(const Eigen::VectorXd& u) {
  const int n = static_cast<int>(u.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = u[i] - u[j];
      const double w = 2.0 / std::abs(d * d * d);
      J(i, i) += w;
      J(i, j) -= w;
    }
  }
  return J;
}

}  // namespace

std::vector<double> scaled_equilibrium_positions(int n) {
  if (n < 1) throw std::invalid_argument("ion count must be >= 1");
  if (n == 1) return {0.0};
  // Quasi-uniform ordered start; the potential is convex on the ordered domain
  // so damped Newton converges from here.
  Eigen::VectorXd u(n);
  const double half = 0.5 * std::pow(static_cast<double>(n), 0.6);
  for (int i = 0; i < n; ++i)
    u[i] = -half + 2.0 * half * i / (n - 1);

  const double tol = 1e-13;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd f = residual(u);
    if (f.lpNorm<Eigen::Infinity>() < tol) break;
    Eigen::VectorXd step = jacobian(u).ldlt().solve(-f);
    double lambda = 1.0;
    const double f0 = f.squaredNorm();
    for (int back = 0; back < 60; ++back) {
      Eigen::VectorXd trial = u + lambda * step;
      bool ordered = true;
      for (int i = 0; i + 1 < n; ++i)
        if (!(trial[i] < trial[i + 1])) { ordered = false; break; }
      if (ordered && residual(trial).squaredNorm() < f0) {
        u = trial;
        break;
      }
      lambda *= 0.5;
      if (back == 59)
        throw SolveError("equilibrium solve: line search failed, residual " +
                         std::to_string(std::sqrt(f0)));
    }
  }
  Eigen::VectorXd f = residual(u);
  if (f.lpNorm<Eigen::Infinity>() > 1e-12)
    throw SolveError("equilibrium solve did not converge, residual " +
                     std::to_string(f.lpNorm<Eigen::Infinity>()));
  // Center exactly (translation mode of the residual is already zero to tol).
  const double mean = u.mean();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = u[i] - mean;
  return out;
}

std::vector<double> equilibrium_positions(const TrapSpec& trap) {
  trap.validate();
  const double l = trap.length_scale();
  std::vector<double> u = scaled_equilibrium_positions(trap.ion_count);
  for (double& x : u) x *= l;
  return u;
}

void axial_normal_modes(const std::vector<double>& positions, const TrapSpec& trap,
                        std::vector<double>& mode_freqs,
                        std::vector<std::vector<double>>& mode_vectors) {
  trap.validate();
  const int n = static_cast<int>(positions.size());
  const double l = trap.length_scale();
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) u[i] = positions[i] / l;
  if (n > 1 && residual(u).lpNorm<Eigen::Infinity>() > 1e-8)
    throw SolveError("axial_normal_modes: positions are not an equilibrium");

  // Dimensionless Hessian: A_ii = 1 + 2 sum_{j!=i} |u_i-u_j|^-3, A_ij = -2|..|^-3.
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = std::abs(u[i] - u[j]);
      const double w = 2.0 / (d * d * d);
      A(i, i) += w;
      A(i, j) -= w;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw SolveError("axial_normal_modes: Hessian not positive definite");

  mode_freqs.assign(n, 0.0);
  mode_vectors.assign(n, std::vector<double>(n, 0.0));
  for (int k = 0; k < n; ++k) {
    double lam = es.eigenvalues()[k];
    if (k == 0 && std::abs(lam - 1.0) < 1e-10) lam = 1.0;  // COM is exact by symmetry
    mode_freqs[k] = trap.axial_freq * std::sqrt(lam);
    Eigen::VectorXd v = es.eigenvectors().col(k);
    if (v.sum() < 0.0) v = -v;
    for (int i = 0; i < n; ++i) mode_vectors[k][i] = v[i];
  }
}

double light_shift(const BeamModel& beam) {
  if (beam.detuning == 0.0)
    throw std::invalid_argument("light_shift: detuning must be nonzero");
  return beam.resonant_rabi * beam.resonant_rabi / beam.detuning;
}

double beam_intensity(double r, const BeamModel& beam) {
  beam.validate();
  const double w = beam.effective_waist();
  const double gauss = std::exp(-2.0 * r * r / (w * w));
  if (beam.tail_amplitude == 0.0) return gauss;
  const double tail = beam.tail_amplitude / (1.0 + (r / w) * (r / w));
  return (gauss + tail) / (1.0 + beam.tail_amplitude);
}

CrosstalkReport crosstalk_map(const IonChain& chain, const BeamModel& beam) {
  const int n = static_cast<int>(chain.positions.size());
  if (n < 2) throw std::invalid_argument("crosstalk_map: need at least 2 ions");
  double rmax = 0.0;
  std::map<std::pair<int, int>, double> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = std::abs(chain.positions[i] - chain.positions[j]);
      // Resonant coupling follows the field amplitude, i.e. sqrt(intensity).
      const double r = std::sqrt(beam_intensity(d, beam));
      pairs[{i, j}] = r;
      rmax = std::max(rmax, r);
    }
  }
  CrosstalkReport rep = CrosstalkReport::from_r_res(rmax);
  rep.pair_r_res = std::move(pairs);
  return rep;
}

AODFigures aod_figures(const AODSpec& aod) {
  aod.validate();
  AODFigures f;
  f.switch_time = aod.spot_diameter / aod.acoustic_velocity;
  f.resolved_spots = f.switch_time * aod.bandwidth;
  if (aod.xy_configuration) f.resolved_spots *= std::sqrt(2.0);
  return f;
}

IonChain build_chain(const TrapSpec& trap, double wavelength, double beam_angle,
                     int selected_mode) {
  IonChain c;
  c.positions = equilibrium_positions(trap);
  axial_normal_modes(c.positions, trap, c.mode_freqs, c.mode_vectors);
  if (selected_mode < 0 || selected_mode >= trap.ion_count)
    throw std::invalid_argument("build_chain: selected_mode out of range");
  c.selected_mode = selected_mode;
  const double k = kTwoPi / wavelength * std::cos(beam_angle);
  const double x0 = std::sqrt(kHbar / (2.0 * trap.ion_mass * c.mode_freqs[selected_mode]));
  c.lamb_dicke.resize(trap.ion_count);
  for (int i = 0; i < trap.ion_count; ++i)
    c.lamb_dicke[i] = k * x0 * std::abs(c.mode_vectors[selected_mode][i]);
  return c;
}

double min_spacing(const std::vector<double>& positions) {
  if (positions.size() < 2) throw std::invalid_argument("min_spacing: need >= 2 ions");
  double m = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < positions.size(); ++i)
    m = std::min(m, positions[i + 1] - positions[i]);
  return m;
}

double solve_axial_freq_for_min_spacing(int ion_count, double min_spacing_m,
                                        double ion_mass, double ion_charge) {
  if (ion_count < 2) throw std::invalid_argument("need >= 2 ions");
  if (!(min_spacing_m > 0)) throw std::invalid_argument("spacing must be > 0");
  // min spacing = u_min * l with l = (q^2 k / (m nu^2))^(1/3): solve directly.
  std::vector<double> u = scaled_equilibrium_positions(ion_count);
  const double umin = min_spacing(u);
  const double l = min_spacing_m / umin;
  const double q2k = ion_charge * ion_charge * kCoulomb;
  return std::sqrt(q2k / (ion_mass * l * l * l));
}

}  // namespace iontrap::chain
