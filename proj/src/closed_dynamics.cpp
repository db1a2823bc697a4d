#include "gplvc/closed_dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "internal.hpp"

namespace gplvc {

void PropagationPlan::validate() const {
  if (!(dt_output > 0) || !(dt_output <= t_final))
    throw std::invalid_argument("plan: need 0 < dt_output <= t_final");
  for (double t : snapshot_times)
    if (t < 0 || t > t_final)
      throw std::invalid_argument("plan: snapshot times must lie in [0, t_final]");
}

std::vector<double> PropagationPlan::output_times() const {
  std::vector<double> ts;
  const int n = static_cast<int>(std::floor(t_final / dt_output + 1e-9));
  ts.reserve(n + 1);
  for (int k = 0; k <= n; ++k) ts.push_back(k * dt_output);
  if (ts.back() < t_final - 1e-9 * t_final) ts.push_back(t_final);
  return ts;
}

namespace {

// Per-point observable accumulators for grid-layout pure states.
struct GridObservables {
  std::vector<bool> donor;
  std::vector<double> paa, pad, pdd;  // lower-adiabatic projector fields
  bool adiabatic_layout;

  GridObservables(const DiscretizedHamiltonian& H) {
    const int n = H.n_nuclear();
    adiabatic_layout = H.representation == Representation::AdiabaticNoGp;
    donor.resize(n);
    paa.resize(n);
    pad.resize(n);
    pdd.resize(n);
    const auto& p = H.params;
    const double gx = 2.0 * p.Omega_X * p.Omega_X * p.X0;
    const double gy = 2.0 * p.Omega_Y * p.Omega_Y * p.Y0;
    for (int i = 0; i < H.grid.nx; ++i)
      for (int j = 0; j < H.grid.ny; ++j) {
        const int idx = H.grid.index(i, j);
        donor[idx] = gx * H.grid.x(i) + gy * H.grid.y(j) + p.Delta < 0;
        const double c = std::cos(0.5 * H.fields[idx].theta);
        const double s = std::sin(0.5 * H.fields[idx].theta);
        paa[idx] = c * c;
        pad[idx] = -c * s;
        pdd[idx] = s * s;
      }
  }

  void accumulate(const CVec& psi, double* P_D, double* pop1, double* pop2, double* tr) const {
    const int n = static_cast<int>(donor.size());
    double pd = 0, p1 = 0, trace = 0;
    for (int idx = 0; idx < n; ++idx) {
      const cplx a = psi[idx], d = psi[n + idx];
      const double na = std::norm(a), nd = std::norm(d);
      trace += na + nd;
      if (donor[idx]) pd += na + nd;
      if (adiabatic_layout)
        p1 += na;
      else
        p1 += paa[idx] * na + pdd[idx] * nd + 2.0 * pad[idx] * (std::conj(a) * d).real();
    }
    *P_D = std::min(1.0, std::max(0.0, pd));
    *pop1 = p1;
    *pop2 = trace - p1;
    *tr = trace;
  }
};

// Dense-operator observables for the HO scheme.
struct HoObservables {
  Mat P_D, P_1;

  HoObservables(const DiscretizedHamiltonian& H)
      : P_D(operator_matrix(SubsystemOperator::DonorProjector, H)),
        P_1(operator_matrix(SubsystemOperator::AdiabaticProjection1, H)) {}

  void accumulate(const CVec& psi, double* pd, double* pop1, double* pop2, double* tr) const {
    const double trace = psi.squaredNorm();
    *pd = std::min(1.0, std::max(0.0, psi.dot(detail::real_times_complex(P_D, psi)).real()));
    *pop1 = psi.dot(detail::real_times_complex(P_1, psi)).real();
    *pop2 = trace - *pop1;
    *tr = trace;
  }
};

DensityState wrap_state(const DiscretizedHamiltonian& H, CVec psi) {
  DensityState s;
  s.representation = H.representation;
  s.scheme = H.scheme;
  s.pure = true;
  s.psi = std::move(psi);
  return s;
}

RunResult propagate_eigenbasis(const DiscretizedHamiltonian& H, const DensityState& s0,
                               const PropagationPlan& plan, const GridSpec* snapshot_grid) {
  const auto& es = H.eigensystem();
  const int M = H.dim();
  CVec c(M);
  c.real() = es.vectors.transpose() * s0.psi.real();
  c.imag() = es.vectors.transpose() * s0.psi.imag();

  const std::vector<double> out_times = plan.output_times();
  std::vector<double> eval_times = out_times;
  for (double t : plan.snapshot_times) eval_times.push_back(t);
  const int T = static_cast<int>(eval_times.size());

  // Batch reconstruction: Psi = V (c o exp(-i E t)) for all sample times.
  CMat phases(M, T);
  for (int k = 0; k < T; ++k)
    for (int m = 0; m < M; ++m) {
      const double ph = -es.energies[m] * eval_times[k];
      phases(m, k) = c[m] * cplx(std::cos(ph), std::sin(ph));
    }
  CMat Psi(M, T);
  Psi.real() = es.vectors * phases.real();
  Psi.imag() = es.vectors * phases.imag();

  const double energy = (c.array().abs2() * es.energies.array()).sum();

  RunResult res;
  std::unique_ptr<GridObservables> gobs;
  std::unique_ptr<HoObservables> hobs;
  if (H.scheme == Scheme::Grid)
    gobs = std::make_unique<GridObservables>(H);
  else
    hobs = std::make_unique<HoObservables>(H);

  const int n_out = static_cast<int>(out_times.size());
  for (int k = 0; k < n_out; ++k) {
    CVec psi = Psi.col(k);
    double pd, p1, p2, tr;
    if (gobs)
      gobs->accumulate(psi, &pd, &p1, &p2, &tr);
    else
      hobs->accumulate(psi, &pd, &p1, &p2, &tr);
    if (std::abs(tr - 1.0) > 1e-6)
      throw NumericalError("closed propagation: norm drift " + std::to_string(tr - 1.0));
    res.series.times.push_back(out_times[k]);
    res.series.P_D.push_back(pd);
    res.series.pop_adi_1.push_back(p1);
    res.series.pop_adi_2.push_back(p2);
    res.series.trace.push_back(tr);
    res.series.energy.push_back(energy);
  }
  const GridSpec snap_grid =
      snapshot_grid ? *snapshot_grid : (H.scheme == Scheme::Grid ? H.grid : GridSpec{});
  for (size_t s = 0; s < plan.snapshot_times.size(); ++s) {
    const DensityState st = wrap_state(H, Psi.col(n_out + s));
    res.snapshots.push_back(adiabatic_density(st, H, plan.snapshot_times[s], snap_grid));
  }
  res.final_state = wrap_state(H, Psi.col(n_out - 1));
  return res;
}

RunResult propagate_split_step(const DiscretizedHamiltonian& H, const DensityState& s0,
                               const PropagationPlan& plan, const GridSpec* snapshot_grid) {
  if (H.scheme != Scheme::Grid || H.representation != Representation::DiabaticWithGp)
    throw std::invalid_argument(
        "split-step propagation needs a pointwise potential: diabatic grid representation only");
  const auto& g = H.grid;
  const int n = g.n_points();
  const int n_sub = std::max(1, (int)std::ceil(plan.dt_output / plan.split_step_dt - 1e-12));
  const double dt = plan.dt_output / n_sub;

  // exp(-i dt/2 V(R)) for the pointwise 2x2 symmetric potential.
  std::vector<cplx> vaa(n), vad(n), vdd(n);
  for (int idx = 0; idx < n; ++idx) {
    const auto& f = H.fields[idx];
    const double mean = 0.5 * (f.V_A + f.V_D);
    const double h = 0.5 * (f.V_A - f.V_D);
    const double r = std::hypot(h, f.V_c);
    const double tau = 0.5 * dt;
    const cplx e_mean(std::cos(tau * mean), -std::sin(tau * mean));
    const double cr = std::cos(tau * r);
    const double snc = r < 1e-14 ? tau : std::sin(tau * r) / r;
    vaa[idx] = e_mean * (cr - cplx(0, 1) * snc * h);
    vdd[idx] = e_mean * (cr + cplx(0, 1) * snc * h);
    vad[idx] = e_mean * (-cplx(0, 1) * snc * f.V_c);
  }
  const Vec kx = detail::fourier_wavenumbers(g.nx, g.xmax - g.xmin, false);
  const Vec ky = detail::fourier_wavenumbers(g.ny, g.ymax - g.ymin, false);
  std::vector<cplx> tphase(n);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double e = 0.5 * (kx[i] * kx[i] + ky[j] * ky[j]) * dt;
      tphase[g.index(i, j)] = cplx(std::cos(e), -std::sin(e));
    }

  const auto& fft = detail::fft_for(g.nx, g.ny);
  auto half_v = [&](CVec& psi) {
    for (int idx = 0; idx < n; ++idx) {
      const cplx a = psi[idx], d = psi[n + idx];
      psi[idx] = vaa[idx] * a + vad[idx] * d;
      psi[n + idx] = vad[idx] * a + vdd[idx] * d;
    }
  };
  auto kinetic = [&](CVec& psi) {
    for (int b = 0; b < 2; ++b) {
      cplx* comp = psi.data() + b * n;
      fft.forward(comp);
      for (int idx = 0; idx < n; ++idx) comp[idx] *= tphase[idx];
      fft.backward_scaled(comp);
    }
  };

  GridObservables obs(H);
  RunResult res;
  CVec psi = s0.psi;
  const std::vector<double> out_times = plan.output_times();
  const GridSpec snap_grid = snapshot_grid ? *snapshot_grid : g;
  auto maybe_snapshot = [&](double t) {
    for (double ts : plan.snapshot_times)
      if (std::abs(ts - t) < 0.5 * plan.dt_output) {
        const DensityState st = wrap_state(H, psi);
        res.snapshots.push_back(adiabatic_density(st, H, ts, snap_grid));
        return;
      }
  };
  for (size_t k = 0; k < out_times.size(); ++k) {
    if (k > 0) {
      for (int s = 0; s < n_sub; ++s) {
        half_v(psi);
        kinetic(psi);
        half_v(psi);
      }
    }
    double pd, p1, p2, tr;
    obs.accumulate(psi, &pd, &p1, &p2, &tr);
    if (std::abs(tr - 1.0) > 1e-6)
      throw NumericalError("split-step: norm drift " + std::to_string(tr - 1.0) + " at t = " +
                           std::to_string(out_times[k]));
    const double energy = psi.dot(H.apply(psi)).real();
    res.series.times.push_back(out_times[k]);
    res.series.P_D.push_back(pd);
    res.series.pop_adi_1.push_back(p1);
    res.series.pop_adi_2.push_back(p2);
    res.series.trace.push_back(tr);
    res.series.energy.push_back(energy);
    maybe_snapshot(out_times[k]);
  }
  res.final_state = wrap_state(H, psi);
  return res;
}

}  // namespace

RunResult propagate_closed(const DiscretizedHamiltonian& H, const DensityState& s0,
                           const PropagationPlan& plan, const GridSpec* snapshot_grid) {
  plan.validate();
  if (!s0.pure) throw std::invalid_argument("propagate_closed: pure states only");
  if (s0.representation != H.representation || s0.scheme != H.scheme)
    throw std::invalid_argument("propagate_closed: state and Hamiltonian disagree");
  if (std::abs(s0.psi.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("propagate_closed: state not normalized");
  if (plan.propagator == Propagator::SplitStep)
    return propagate_split_step(H, s0, plan, snapshot_grid);
  return propagate_eigenbasis(H, s0, plan, snapshot_grid);
}

double energy_audit(const DiscretizedHamiltonian& H, const DensityState& state) {
  if (state.pure) return state.psi.dot(H.apply(state.psi)).real();
  double e = 0;
  for (int k = 0; k < state.rho.rows(); ++k) e += state.rho(k, k).real() * state.energies[k];
  return e;
}

}  // namespace gplvc
