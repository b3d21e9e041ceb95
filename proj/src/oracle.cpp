#include "iontrap/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "iontrap/parallel.hpp"

namespace iontrap::oracle {

void OracleConfig::validate() const {
  if (fock_cutoff < 4) throw std::invalid_argument("OracleConfig: fock_cutoff must be >= 4");
  if (thermal_nbar < 0) throw std::invalid_argument("OracleConfig: nbar must be >= 0");
  if (time_grid.empty()) throw std::invalid_argument("OracleConfig: empty time grid");
  double prev = 0.0;
  for (double t : time_grid) {
    if (!(t > prev)) throw std::invalid_argument("OracleConfig: grid must increase from 0");
    prev = t;
  }
  if (steps_per_period < 8) throw std::invalid_argument("OracleConfig: steps_per_period too small");
}

std::vector<std::pair<int, double>> thermal_mixture(double nbar, double tail) {
  if (nbar <= 0.0) return {{0, 1.0}};
  std::vector<std::pair<int, double>> out;
  double cum = 0.0;
  for (int n = 0;; ++n) {
    const double w = std::pow(nbar / (nbar + 1.0), n) / (nbar + 1.0);
    out.emplace_back(n, w);
    cum += w;
    if (1.0 - cum < tail) break;
  }
  for (auto& [n, w] : out) w /= cum;
  return out;
}

namespace {

struct Drive {
  std::vector<double> tone_freqs;  // nu + n_j * xi_rendered
  std::vector<double> weights;
  double nu;
  double eta_omega;   // eta * Omega
  double omega;       // Omega (carrier)
  double t_flip;      // echo midpoint, or +inf
  bool carrier;

  double envelope(double t) const {
    double m = 0.0;
    for (size_t j = 0; j < tone_freqs.size(); ++j)
      m += weights[j] * std::cos(tone_freqs[j] * t);
    return t > t_flip ? -m : m;
  }
};

class Engine {
 public:
  Engine(const Drive& drive, int n_qubits, int dim_fock, bool first_order, double eta)
      : d_(drive), nq_(n_qubits), ds_(1 << n_qubits), df_(dim_fock), eta_(eta),
        first_order_(first_order) {
    sq_.resize(df_);
    for (int n = 0; n < df_; ++n) sq_[n] = std::sqrt(static_cast<double>(n));
    if (!first_order_) {
      // exp(-i eta (a + a^dag)) in the Fock basis, computed once; the
      // interaction-picture displacement is a diagonal rotation of it.
      Eigen::MatrixXd x(df_, df_);
      x.setZero();
      for (int n = 0; n + 1 < df_; ++n) x(n, n + 1) = x(n + 1, n) = sq_[n + 1];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
      Eigen::VectorXcd ph(df_);
      for (int n = 0; n < df_; ++n)
        ph[n] = std::exp(cplx(0.0, -eta_ * es.eigenvalues()[n]));
      u0_ = (es.eigenvectors().cast<cplx>() * ph.asDiagonal() *
             es.eigenvectors().transpose().cast<cplx>());
    }
  }

  // out = -i H(t) psi
  void apply(double t, const std::vector<cplx>& psi, std::vector<cplx>& out) const {
    std::fill(out.begin(), out.end(), cplx(0.0, 0.0));
    const double m = d_.envelope(t);
    if (first_order_) {
      const cplx em(std::cos(d_.nu * t), -std::sin(d_.nu * t));  // e^{-i nu t}
      const cplx ep = std::conj(em);
      // tmp = (a e^{-i nu t} + a^dag e^{+i nu t}) psi, per spin block
      tmp_.resize(psi.size());
      for (int s = 0; s < ds_; ++s) {
        const cplx* in = psi.data() + static_cast<size_t>(s) * df_;
        cplx* tp = tmp_.data() + static_cast<size_t>(s) * df_;
        for (int n = 0; n < df_; ++n) {
          cplx v(0.0, 0.0);
          if (n + 1 < df_) v += em * (sq_[n + 1] * in[n + 1]);
          if (n > 0) v += ep * (sq_[n] * in[n - 1]);
          tp[n] = v;
        }
      }
      const double g = -d_.eta_omega * m;  // sideband prefactor
      for (int i = 0; i < nq_; ++i) {
        const int mask = 1 << i;
        for (int s = 0; s < ds_; ++s) {
          // sigma_y: |1>(bit 0) -> i|0>, |0>(bit 1) -> -i|1>
          const double ysign = (s & mask) ? 1.0 : -1.0;
          const cplx coef = cplx(0.0, ysign) * g;           // i*ysign*g
          const cplx mi = cplx(0.0, -1.0);                  // -i from -iH
          const cplx c = mi * coef;
          const cplx* tp = tmp_.data() + static_cast<size_t>(s ^ mask) * df_;
          cplx* op = out.data() + static_cast<size_t>(s) * df_;
          for (int n = 0; n < df_; ++n) op[n] += c * tp[n];
        }
      }
    } else {
      // exact displacement coupling: Omega M(t) (sigma+ D(t) + sigma- D(t)^dag)
      rot_.resize(df_);
      for (int n = 0; n < df_; ++n)
        rot_[n] = std::exp(cplx(0.0, d_.nu * t * n));
      dmat_.resize(static_cast<size_t>(df_) * df_);
      for (int r = 0; r < df_; ++r)
        for (int c = 0; c < df_; ++c)
          dmat_[static_cast<size_t>(r) * df_ + c] = rot_[r] * u0_(r, c) * std::conj(rot_[c]);
      const cplx pref = cplx(0.0, -1.0) * (d_.omega * m);
      for (int i = 0; i < nq_; ++i) {
        const int mask = 1 << i;
        for (int s = 0; s < ds_; ++s) {
          const bool excited = (s & mask) != 0;  // bit 1 = |0>
          const cplx* in = psi.data() + static_cast<size_t>(s ^ mask) * df_;
          cplx* op = out.data() + static_cast<size_t>(s) * df_;
          for (int r = 0; r < df_; ++r) {
            cplx acc(0.0, 0.0);
            const size_t row = static_cast<size_t>(r) * df_;
            if (excited) {
              for (int c = 0; c < df_; ++c) acc += dmat_[row + c] * in[c];
            } else {
              for (int c = 0; c < df_; ++c) acc += std::conj(dmat_[static_cast<size_t>(c) * df_ + r]) * in[c];
            }
            op[r] += pref * acc;
          }
        }
      }
    }
    if (d_.carrier) {
      const cplx c = cplx(0.0, -1.0) * (d_.omega * m);
      for (int i = 0; i < nq_; ++i) {
        const int mask = 1 << i;
        for (int s = 0; s < ds_; ++s) {
          const cplx* in = psi.data() + static_cast<size_t>(s ^ mask) * df_;
          cplx* op = out.data() + static_cast<size_t>(s) * df_;
          for (int n = 0; n < df_; ++n) op[n] += c * in[n];
        }
      }
    }
  }

  void rk4_step(double t, double dt, std::vector<cplx>& psi) const {
    const size_t n = psi.size();
    k1_.resize(n); k2_.resize(n); k3_.resize(n); k4_.resize(n); buf_.resize(n);
    apply(t, psi, k1_);
    for (size_t i = 0; i < n; ++i) buf_[i] = psi[i] + 0.5 * dt * k1_[i];
    apply(t + 0.5 * dt, buf_, k2_);
    for (size_t i = 0; i < n; ++i) buf_[i] = psi[i] + 0.5 * dt * k2_[i];
    apply(t + 0.5 * dt, buf_, k3_);
    for (size_t i = 0; i < n; ++i) buf_[i] = psi[i] + dt * k3_[i];
    apply(t + dt, buf_, k4_);
    for (size_t i = 0; i < n; ++i)
      psi[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

  void collective_flip(std::vector<cplx>& psi) const {
    // X on every qubit: spin index s -> ~s (within nq bits)
    const int all = ds_ - 1;
    buf_.resize(psi.size());
    for (int s = 0; s < ds_; ++s)
      std::copy_n(psi.data() + static_cast<size_t>(s) * df_, df_,
                  buf_.data() + static_cast<size_t>(s ^ all) * df_);
    psi.swap(buf_);
  }

  int ds() const { return ds_; }
  int df() const { return df_; }

 private:
  Drive d_;
  int nq_, ds_, df_;
  double eta_;
  bool first_order_;
  std::vector<double> sq_;
  Eigen::MatrixXcd u0_;
  mutable std::vector<cplx> tmp_, k1_, k2_, k3_, k4_, buf_, rot_, dmat_;
};

struct TermResult {
  std::vector<std::vector<double>> pops;  // [grid][spin]
  std::vector<cplx> final_state;
  bool truncated = false;
  double worst_norm_err = 0.0;
};

TermResult evolve_term(const gates::Waveform& wf, const gates::ModeSpec& mode, int nq,
                       const OracleConfig& cfg, int n0, int dim_fock) {
  Drive drive;
  const double xir = wf.rendered_detuning();
  for (size_t j = 0; j < wf.harmonics.size(); ++j) {
    drive.tone_freqs.push_back(mode.mode_freq + wf.harmonics[j] * xir);
    drive.weights.push_back(wf.weights[j]);
  }
  drive.nu = mode.mode_freq;
  drive.eta_omega = mode.lamb_dicke * wf.carrier_rabi;
  drive.omega = wf.carrier_rabi;
  drive.carrier = cfg.carrier_enabled;
  drive.t_flip = wf.echo_midpoint ? 0.5 * wf.total_duration()
                                  : std::numeric_limits<double>::infinity();

  Engine eng(drive, nq, dim_fock, cfg.first_order_ld, mode.lamb_dicke);
  std::vector<cplx> psi(static_cast<size_t>(eng.ds()) * dim_fock, cplx(0.0, 0.0));
  psi[static_cast<size_t>(0) * dim_fock + n0] = 1.0;  // |1...1> x |n0>

  const double mode_period = kTwoPi / mode.mode_freq;
  const double dt_target = mode_period / cfg.steps_per_period;

  // Segment boundaries: grid times plus the echo flip instant.
  std::vector<double> marks;
  marks.push_back(0.0);
  for (double t : cfg.time_grid) marks.push_back(t);
  if (wf.echo_midpoint && drive.t_flip < cfg.time_grid.back()) {
    marks.push_back(drive.t_flip);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  }

  TermResult res;
  res.pops.reserve(cfg.time_grid.size());
  bool flipped = false;
  size_t grid_idx = 0;
  for (size_t seg = 0; seg + 1 < marks.size(); ++seg) {
    const double t0 = marks[seg], t1 = marks[seg + 1];
    const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt_target)));
    const double dt = (t1 - t0) / steps;
    for (int k = 0; k < steps; ++k) eng.rk4_step(t0 + k * dt, dt, psi);
    if (wf.echo_midpoint && !flipped && std::abs(t1 - drive.t_flip) < 1e-15 + 1e-9 * t1) {
      eng.collective_flip(psi);
      flipped = true;
    }
    if (grid_idx < cfg.time_grid.size() &&
        std::abs(t1 - cfg.time_grid[grid_idx]) < 1e-15 + 1e-9 * t1) {
      // Record in the logical frame: compensate the echo's net flip once the
      // flip has happened.
      std::vector<double> p(eng.ds(), 0.0);
      double norm = 0.0, toptwo = 0.0;
      for (int s = 0; s < eng.ds(); ++s) {
        const cplx* blk = psi.data() + static_cast<size_t>(s) * dim_fock;
        double ps = 0.0;
        for (int n = 0; n < dim_fock; ++n) {
          const double a2 = std::norm(blk[n]);
          ps += a2;
          if (n >= dim_fock - 2) toptwo += a2;
        }
        p[flipped ? (s ^ (eng.ds() - 1)) : s] = ps;
        norm += ps;
      }
      res.worst_norm_err = std::max(res.worst_norm_err, std::abs(1.0 - norm));
      if (toptwo > 1e-8) {
        res.truncated = true;
        return res;
      }
      res.pops.push_back(std::move(p));
      ++grid_idx;
    }
  }
  if (flipped) eng.collective_flip(psi);  // logical-frame final state
  res.final_state = std::move(psi);
  return res;
}

}  // namespace

EvolveResult evolve_once(const gates::Waveform& wf, const gates::ModeSpec& mode,
                         int n_qubits, const OracleConfig& config) {
  wf.validate();
  mode.validate();
  config.validate();
  if (n_qubits < 1 || n_qubits > 6)
    throw std::invalid_argument("oracle: 1..6 qubits supported");

  auto mixture = thermal_mixture(config.thermal_nbar);
  const int ds = 1 << n_qubits;

  std::vector<TermResult> terms(mixture.size());
  bool truncated = false;
  parallel_for(mixture.size(), [&](size_t i) {
    const int n0 = mixture[i].first;
    const int dim_fock = n0 + 1 + config.fock_cutoff;
    terms[i] = evolve_term(wf, mode, n_qubits, config, n0, dim_fock);
    if (terms[i].truncated) truncated = true;
  }, config.threads);
  if (truncated) throw TruncationError("oracle: truncation guard tripped");

  EvolveResult out;
  out.n_qubits = n_qubits;
  out.times = config.time_grid;
  out.populations.assign(config.time_grid.size(), std::vector<double>(ds, 0.0));
  for (size_t i = 0; i < mixture.size(); ++i) {
    const double w = mixture[i].second;
    if (terms[i].worst_norm_err > 1e-8)
      throw std::runtime_error("oracle: norm conservation violated");
    for (size_t g = 0; g < out.populations.size(); ++g)
      for (int s = 0; s < ds; ++s) out.populations[g][s] += w * terms[i].pops[g][s];
    out.weights.push_back(w);
    out.fock_dims.push_back(mixture[i].first + 1 + config.fock_cutoff);
    out.final_states.push_back(std::move(terms[i].final_state));
  }
  return out;
}

EvolveResult evolve(const gates::Waveform& wf, const gates::ModeSpec& mode, int n_qubits,
                    const OracleConfig& config) {
  OracleConfig cfg = config;
  for (int attempt = 0; attempt < 3; ++attempt) {
    try {
      return evolve_once(wf, mode, n_qubits, cfg);
    } catch (const TruncationError&) {
      cfg.fock_cutoff *= 2;
    }
  }
  return evolve_once(wf, mode, n_qubits, cfg);
}

double bell_fidelity(const EvolveResult& result, double target_phase) {
  if (result.n_qubits != 2) throw std::invalid_argument("bell_fidelity: need 2 qubits");
  const cplx conj_phase = std::exp(cplx(0.0, -target_phase));
  double fid = 0.0;
  for (size_t term = 0; term < result.final_states.size(); ++term) {
    const int df = result.fock_dims[term];
    const auto& psi = result.final_states[term];
    double f = 0.0;
    for (int n = 0; n < df; ++n) {
      // <Bell| = (<11| + e^{-i phase} <00|)/sqrt2 ; |11> = s0, |00> = s3
      const cplx amp = (psi[static_cast<size_t>(0) * df + n] +
                        conj_phase * psi[static_cast<size_t>(3) * df + n]) / std::sqrt(2.0);
      f += std::norm(amp);
    }
    fid += result.weights[term] * f;
  }
  return fid;
}

std::vector<cplx> reduced_pair_state(const EvolveResult& result) {
  if (result.n_qubits != 2) throw std::invalid_argument("reduced_pair_state: need 2 qubits");
  std::vector<cplx> rho(16, cplx(0.0, 0.0));
  for (size_t term = 0; term < result.final_states.size(); ++term) {
    const int df = result.fock_dims[term];
    const auto& psi = result.final_states[term];
    const double w = result.weights[term];
    for (int s = 0; s < 4; ++s)
      for (int sp = 0; sp < 4; ++sp) {
        cplx acc(0.0, 0.0);
        for (int n = 0; n < df; ++n)
          acc += psi[static_cast<size_t>(s) * df + n] *
                 std::conj(psi[static_cast<size_t>(sp) * df + n]);
        rho[static_cast<size_t>(s) * 4 + sp] += w * acc;
      }
  }
  return rho;
}

ParityScan parity_scan_sim(const std::vector<cplx>& rho, const std::vector<double>& phases) {
  if (rho.size() != 16) throw std::invalid_argument("parity_scan_sim: need 4x4 rho");
  ParityScan scan;
  scan.phases = phases;
  cplx fourier(0.0, 0.0);
  for (double phi : phases) {
    // analysis pulse exp(i (pi/4) sigma_phi) per qubit, then <Z Z>
    const cplx e_m(std::cos(phi), -std::sin(phi));
    // u = (I + i sigma_phi)/sqrt2 on (|1>,|0>) with sigma_phi|1> = e^{i phi}|0>
    cplx u[2][2] = {{cplx(1.0, 0.0) / std::sqrt(2.0), cplx(0.0, 1.0) * e_m / std::sqrt(2.0)},
                    {cplx(0.0, 1.0) * std::conj(e_m) / std::sqrt(2.0),
                     cplx(1.0, 0.0) / std::sqrt(2.0)}};
    double par = 0.0;
    for (int s = 0; s < 4; ++s)
      for (int sp = 0; sp < 4; ++sp) {
        // <s'| U^dag ZZ U |s> with ZZ diagonal (+1 on equal bits)
        cplx elem(0.0, 0.0);
        for (int m = 0; m < 4; ++m) {
          const int b0 = m & 1, b1 = (m >> 1) & 1;
          const double zz = (b0 == b1) ? 1.0 : -1.0;
          const cplx um_s = u[b0][s & 1] * u[b1][(s >> 1) & 1];
          const cplx um_sp = u[b0][sp & 1] * u[b1][(sp >> 1) & 1];
          elem += std::conj(um_sp) * zz * um_s;
        }
        par += std::real(rho[static_cast<size_t>(s) * 4 + sp] * elem);
      }
    scan.parity.push_back(par);
    fourier += par * std::exp(cplx(0.0, -2.0 * phi));
  }
  scan.amplitude = 2.0 * std::abs(fourier) / static_cast<double>(phases.size());
  scan.p_11 = std::real(rho[0]);
  scan.p_00 = std::real(rho[15]);
  scan.fidelity = 0.5 * (scan.p_11 + scan.p_00 + scan.amplitude);
  return scan;
}

}  // namespace iontrap::oracle
