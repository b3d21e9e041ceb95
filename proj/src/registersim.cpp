#include "iontrap/registersim.hpp"

#include <algorithm>
#include <cmath>

namespace iontrap::reg {

namespace {

size_t pow4(int n) { return size_t{1} << (2 * n); }

int digit(size_t idx, int ion) { return static_cast<int>((idx >> (2 * ion)) & 3); }

size_t with_digit(size_t idx, int ion, int level) {
  const size_t mask = size_t{3} << (2 * ion);
  return (idx & ~mask) | (static_cast<size_t>(level) << (2 * ion));
}

// Applies a 2x2 unitary on levels (la, lb) of one ion.
void apply_two_level(RegisterState& st, int ion, int la, int lb, const cplx u[2][2]) {
  const size_t dim = st.amplitudes.size();
  for (size_t idx = 0; idx < dim; ++idx) {
    if (digit(idx, ion) != la) continue;
    const size_t jdx = with_digit(idx, ion, lb);
    const cplx a = st.amplitudes[idx];
    const cplx b = st.amplitudes[jdx];
    st.amplitudes[idx] = u[0][0] * a + u[0][1] * b;
    st.amplitudes[jdx] = u[1][0] * a + u[1][1] * b;
  }
}

void check_ion(const RegisterState& st, int ion) {
  if (ion < 0 || ion >= st.ion_count)
    throw std::invalid_argument("ion index out of range");
}

}  // namespace

double NoiseModel::sigma(Encoding enc) const {
  const double t2 = enc == Encoding::optical ? optical_coherence_time : hidden_coherence_time;
  if (enc == Encoding::none || !enabled) return 0.0;
  if (kind == NoiseKind::quasi_static) return std::sqrt(2.0) / t2;
  // OU Ramsey variance 2 s^2 tc [t - tc(1 - e^{-t/tc})] = 2 at t = T2.
  const double tc = correlation_time;
  const double denom = tc * (t2 - tc * (1.0 - std::exp(-t2 / tc)));
  return std::sqrt(1.0 / denom);
}

NoisePath::NoisePath(const NoiseModel& model, uint64_t shot_seed)
    : model_(model), rng_(shot_seed) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  value_ = gauss(rng_);  // stationary start for both kinds
}

double NoisePath::advance(double duration) {
  if (duration <= 0.0 || !model_.enabled) return 0.0;
  if (model_.kind == NoiseKind::quasi_static) return value_ * duration;
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double tc = model_.correlation_time;
  const int steps = std::max(16, static_cast<int>(std::ceil(duration / (tc / 64.0))));
  const double dt = duration / steps;
  const double decay = std::exp(-dt / tc);
  const double kick = std::sqrt(1.0 - decay * decay);
  double integral = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double next = value_ * decay + kick * gauss(rng_);
    integral += 0.5 * (value_ + next) * dt;
    value_ = next;
  }
  return integral;
}

RegisterState RegisterState::ground(int n_ions) {
  if (n_ions < 1 || n_ions > 10) throw std::invalid_argument("RegisterState: 1..10 ions");
  RegisterState st;
  st.ion_count = n_ions;
  st.amplitudes.assign(pow4(n_ions), cplx(0.0, 0.0));
  st.amplitudes[0] = 1.0;  // every digit 0 = |1>
  return st;
}

double RegisterState::norm() const {
  double s = 0.0;
  for (const cplx& a : amplitudes) s += std::norm(a);
  return std::sqrt(s);
}

int RegisterState::level_of(size_t basis_index, int ion) const { return digit(basis_index, ion); }

double RegisterState::population(int ion, int level) const {
  double p = 0.0;
  for (size_t idx = 0; idx < amplitudes.size(); ++idx)
    if (digit(idx, ion) == level) p += std::norm(amplitudes[idx]);
  return p;
}

double RegisterState::population_outside_levels(int ion, int la, int lb) const {
  double p = 0.0;
  for (size_t idx = 0; idx < amplitudes.size(); ++idx) {
    const int d = digit(idx, ion);
    if (d != la && d != lb) p += std::norm(amplitudes[idx]);
  }
  return p;
}

void apply_global(RegisterState& st, double phi, double theta) {
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  const cplx eip(std::cos(phi), std::sin(phi));
  // exp(i(theta/2) sigma_phi) with sigma_phi |1> = e^{i phi}|0>
  const cplx u[2][2] = {{cplx(c, 0.0), cplx(0.0, s) * std::conj(eip)},
                        {cplx(0.0, s) * eip, cplx(c, 0.0)}};
  for (int ion = 0; ion < st.ion_count; ++ion)
    apply_two_level(st, ion, kL1, kL0, u);
}

void apply_ms(RegisterState& st, double phi, double theta,
              const std::vector<int>& participants, double tolerance) {
  if (participants.size() < 2)
    throw std::invalid_argument("apply_ms: need at least 2 participants");
  for (int ion : participants) {
    check_ion(st, ion);
    if (st.population_outside_levels(ion, kL1, kL0) > tolerance)
      throw std::invalid_argument(
          "apply_ms: participant has population outside the optical subspace");
  }
  const cplx eip(std::cos(phi), std::sin(phi));
  const double r = 1.0 / std::sqrt(2.0);
  // columns are the sigma_phi eigenvectors |+>,|->; V^dag maps into eigenbasis
  const cplx vdag[2][2] = {{cplx(r, 0.0), r * std::conj(eip)},
                           {cplx(r, 0.0), -r * std::conj(eip)}};
  const cplx v[2][2] = {{cplx(r, 0.0), cplx(r, 0.0)},
                        {r * eip, -r * eip}};
  for (int ion : participants) apply_two_level(st, ion, kL1, kL0, vdag);
  for (size_t idx = 0; idx < st.amplitudes.size(); ++idx) {
    int q = 0, m = 0;
    for (int ion : participants) {
      const int d = digit(idx, ion);
      if (d == kL1) { q += 1; ++m; }
      else if (d == kL0) { q -= 1; ++m; }
    }
    // sum_{i<j} s_i s_j = (q^2 - m)/2 on the eigenbasis component
    const double ang = theta * 0.25 * (static_cast<double>(q) * q - m);
    st.amplitudes[idx] *= cplx(std::cos(ang), std::sin(ang));
  }
  for (int ion : participants) apply_two_level(st, ion, kL1, kL0, v);
}

void apply_lightshift_z(RegisterState& st, int ion, double theta, double r_ls) {
  check_ion(st, ion);
  auto zrot = [&st](int target, double angle) {
    const cplx u[2][2] = {{std::exp(cplx(0.0, angle / 2.0)), cplx(0.0, 0.0)},
                          {cplx(0.0, 0.0), std::exp(cplx(0.0, -angle / 2.0))}};
    apply_two_level(st, target, kL1, kL0, u);
  };
  zrot(ion, theta);
  if (r_ls > 0.0) {
    if (ion > 0) zrot(ion - 1, theta * r_ls);
    if (ion + 1 < st.ion_count) zrot(ion + 1, theta * r_ls);
  }
}

void apply_individual(RegisterState& st, int ion, double phi, double theta) {
  check_ion(st, ion);
  // z-shifts rotate the equator: sandwiching the Y rotation produced by
  // U_G(0,pi/2) U_i(theta) U_G(0,-pi/2) gives any sigma_phi axis.
  apply_lightshift_z(st, ion, phi - kPi / 2.0);
  apply_global(st, 0.0, kPi / 2.0);
  apply_lightshift_z(st, ion, theta);
  apply_global(st, 0.0, -kPi / 2.0);
  apply_lightshift_z(st, ion, -(phi - kPi / 2.0));
}

namespace {

void pair_error(RegisterState& st, int ion, int la, int lb, double eps,
                std::mt19937_64* rng) {
  if (eps <= 0.0 || rng == nullptr) return;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  if (uni(*rng) >= eps) return;
  const int which = static_cast<int>(uni(*rng) * 3.0);
  cplx u[2][2] = {{cplx(0, 0), cplx(0, 0)}, {cplx(0, 0), cplx(0, 0)}};
  if (which == 0) { u[0][1] = u[1][0] = 1.0; }                        // X
  else if (which == 1) { u[0][1] = cplx(0, -1); u[1][0] = cplx(0, 1); }  // Y
  else { u[0][0] = 1.0; u[1][1] = -1.0; }                             // Z
  apply_two_level(st, ion, la, lb, u);
}

}  // namespace

void hide(RegisterState& st, int ion, double epsilon_hide, std::mt19937_64* rng) {
  check_ion(st, ion);
  if (st.population_outside_levels(ion, kL1, kL0) > 1e-9)
    throw std::invalid_argument("hide: ion not confined to the optical subspace");
  const cplx u[2][2] = {{cplx(0, 0), cplx(1, 0)}, {cplx(1, 0), cplx(0, 0)}};  // swap
  apply_two_level(st, ion, kL1, kL0h, u);  // |1> <-> |0~>
  pair_error(st, ion, kL0, kL0h, epsilon_hide, rng);
}

void unhide(RegisterState& st, int ion, double epsilon_hide, std::mt19937_64* rng) {
  check_ion(st, ion);
  if (st.population_outside_levels(ion, kL0, kL0h) > 1e-9)
    throw std::invalid_argument("unhide: ion not confined to the hidden subspace");
  const cplx u[2][2] = {{cplx(0, 0), cplx(1, 0)}, {cplx(1, 0), cplx(0, 0)}};
  apply_two_level(st, ion, kL1, kL0h, u);
  pair_error(st, ion, kL1, kL0, epsilon_hide, rng);
}

std::string measure_fluorescence(RegisterState& st, const std::vector<int>& ions,
                                 const MeasureOptions& opt, std::mt19937_64& rng,
                                 const std::string& label) {
  if (ions.empty()) throw std::invalid_argument("measure_fluorescence: empty subset");
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::string bits(static_cast<size_t>(st.ion_count), '-');
  for (int ion : ions) {
    check_ion(st, ion);
    double p_bright = st.population(ion, kL1) + st.population(ion, kL1h);
    const bool bright = uni(rng) < p_bright;
    // project
    double norm2 = 0.0;
    for (size_t idx = 0; idx < st.amplitudes.size(); ++idx) {
      const int d = digit(idx, ion);
      const bool is_bright = (d == kL1 || d == kL1h);
      if (is_bright != bright) st.amplitudes[idx] = 0.0;
      norm2 += std::norm(st.amplitudes[idx]);
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (cplx& a : st.amplitudes) a *= inv;

    bool outcome = bright;
    if (!bright && opt.decay_enabled) {
      const double p_decay = 1.0 - std::exp(-opt.exposure / opt.d_lifetime);
      if (uni(rng) < p_decay) outcome = true;
    } else if (bright && opt.bright_to_dark > 0.0) {
      if (uni(rng) < opt.bright_to_dark) outcome = false;
    }
    bits[static_cast<size_t>(ion)] = outcome ? '1' : '0';
  }
  st.classical_record.emplace_back(label, bits);
  return bits;
}

void apply_dephasing(RegisterState& st, double duration, const NoiseModel& model,
                     NoisePath& path, const std::vector<Encoding>& encodings) {
  if (static_cast<int>(encodings.size()) != st.ion_count)
    throw std::invalid_argument("apply_dephasing: encoding per ion required");
  if (duration <= 0.0 || !model.enabled) return;
  const double field = path.advance(duration);
  for (int ion = 0; ion < st.ion_count; ++ion) {
    const Encoding enc = encodings[static_cast<size_t>(ion)];
    if (enc == Encoding::none) continue;
    const double phase = model.sigma(enc) * field;
    // relative phase lands on the pair's D-side level; a level swap between
    // segments flips the accumulated sign, which is the echo mechanism
    const int lvl = enc == Encoding::optical ? kL0 : kL0h;
    const cplx f = std::exp(cplx(0.0, phase));
    for (size_t idx = 0; idx < st.amplitudes.size(); ++idx)
      if (digit(idx, ion) == lvl) st.amplitudes[idx] *= f;
  }
}

void d_manifold_flip(RegisterState& st, const std::vector<int>& ions) {
  const cplx u[2][2] = {{cplx(0, 0), cplx(1, 0)}, {cplx(1, 0), cplx(0, 0)}};
  for (int ion : ions) {
    check_ion(st, ion);
    apply_two_level(st, ion, kL0, kL0h, u);
  }
}

void EchoSchedule::validate() const {
  if (pulse_count % 2 != 0)
    throw std::invalid_argument("EchoSchedule: odd pulse count would corrupt unhide");
  if (pulse_count < 0) throw std::invalid_argument("EchoSchedule: negative pulse count");
  if (!(tau_exposure > 0) || !(tau_readout > 0))
    throw std::invalid_argument("EchoSchedule: durations must be positive");
}

void cpmg_window(RegisterState& st, double window, int n_pulses,
                 const std::vector<int>& hidden_ions, const NoiseModel& model,
                 NoisePath& path, const std::vector<Encoding>& encodings) {
  if (n_pulses == 0) {
    apply_dephasing(st, window, model, path, encodings);
    return;
  }
  double prev = 0.0;
  for (int k = 0; k < n_pulses; ++k) {
    const double tp = window * (2.0 * k + 1.0) / (2.0 * n_pulses);
    apply_dephasing(st, tp - prev, model, path, encodings);
    d_manifold_flip(st, hidden_ions);
    prev = tp;
  }
  apply_dephasing(st, window - prev, model, path, encodings);
}

void cpmg_echo(RegisterState& st, const EchoSchedule& schedule,
               const std::vector<int>& hidden_ions, const NoiseModel& model,
               NoisePath& path, const std::vector<Encoding>& encodings) {
  schedule.validate();
  const int per_window = schedule.pulse_count / 2;
  cpmg_window(st, schedule.tau_exposure, per_window, hidden_ions, model, path, encodings);
  cpmg_window(st, schedule.tau_readout, per_window, hidden_ions, model, path, encodings);
}

RegisterState prepare(int n_ions, double prep_error, std::mt19937_64& rng) {
  RegisterState st = RegisterState::ground(n_ions);
  if (prep_error > 0.0) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int ion = 0; ion < n_ions; ++ion) {
      if (uni(rng) < prep_error) {
        // failed optical pumping leaves the ion in the other spin state; it
        // still measures bright and is decoupled from the optical drive
        const cplx u[2][2] = {{cplx(0, 0), cplx(1, 0)}, {cplx(1, 0), cplx(0, 0)}};
        apply_two_level(st, ion, kL1, kL1h, u);
      }
    }
  }
  return st;
}

}  // namespace iontrap::reg
