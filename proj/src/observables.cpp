#include "gplvc/observables.hpp"

#include <cmath>

#include "internal.hpp"

namespace gplvc {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

bool donor_side_point(const SubsystemParameters& p, double x, double y) {
  const double wx2 = p.Omega_X * p.Omega_X, wy2 = p.Omega_Y * p.Omega_Y;
  return 2.0 * (wx2 * p.X0 * x + wy2 * p.Y0 * y) + p.Delta < 0.0;
}

struct AdiProjectorFields {
  double aa, ad, dd;
};
AdiProjectorFields lower_projector_fields(double theta) {
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  return {c * c, -c * s, s * s};
}

}  // namespace

double donor_population(const DensityState& state, const DiscretizedHamiltonian& H) {
  if (!state.pure) {
    if (state.basis.size() == 0)
      throw std::invalid_argument("donor_population: density state carries no basis");
    const Mat P = operator_matrix(SubsystemOperator::DonorProjector, H);
    const Mat Peig = state.basis.transpose() * P * state.basis;
    return donor_population(state.rho, Peig);
  }
  const int n = H.n_nuclear();
  if (H.scheme == Scheme::Grid) {
    double pd = 0;
    for (int i = 0; i < H.grid.nx; ++i)
      for (int j = 0; j < H.grid.ny; ++j)
        if (donor_side_point(H.params, H.grid.x(i), H.grid.y(j))) {
          const int idx = H.grid.index(i, j);
          pd += std::norm(state.psi[idx]) + std::norm(state.psi[n + idx]);
        }
    return clamp01(pd);
  }
  const Mat P = operator_matrix(SubsystemOperator::DonorProjector, H);
  const CVec Pv = detail::real_times_complex(P, state.psi);
  return clamp01(state.psi.dot(Pv).real());
}

double donor_population(const CMat& rho_eig, const Mat& projector_eig) {
  return clamp01((rho_eig * projector_eig.cast<cplx>()).trace().real());
}

std::pair<double, double> adiabatic_populations(const DensityState& state,
                                                const DiscretizedHamiltonian& H) {
  if (!state.pure) {
    const Mat P1 = operator_matrix(SubsystemOperator::AdiabaticProjection1, H);
    const Mat P1e = state.basis.transpose() * P1 * state.basis;
    const double tr = state.rho.trace().real();
    const double p1 = (state.rho * P1e.cast<cplx>()).trace().real();
    return {p1, tr - p1};
  }
  const int n = H.n_nuclear();
  if (H.scheme == Scheme::Grid) {
    if (H.representation == Representation::AdiabaticNoGp) {
      const double p1 = state.psi.head(n).squaredNorm();
      return {p1, state.psi.tail(n).squaredNorm()};
    }
    double p1 = 0;
    const double tr = state.psi.squaredNorm();
    for (int idx = 0; idx < n; ++idx) {
      const auto pr = lower_projector_fields(H.fields[idx].theta);
      const cplx a = state.psi[idx], d = state.psi[n + idx];
      p1 += pr.aa * std::norm(a) + pr.dd * std::norm(d) + 2.0 * pr.ad * (conj(a) * d).real();
    }
    return {p1, tr - p1};
  }
  const Mat P1 = operator_matrix(SubsystemOperator::AdiabaticProjection1, H);
  const double p1 = state.psi.dot(detail::real_times_complex(P1, state.psi)).real();
  return {p1, state.psi.squaredNorm() - p1};
}

namespace {

// Pointwise lower-adiabatic density of a pure grid-layout state.
Mat grid_density_pure(const DiscretizedHamiltonian& H, const CVec& psi_a, const CVec& psi_d,
                      const GridSpec& g, const SubsystemParameters& params,
                      Representation rep) {
  Mat vals(g.ny, g.nx);
  const double inv_area = 1.0 / g.cell_area();
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const int idx = g.index(i, j);
      double v;
      if (rep == Representation::AdiabaticNoGp) {
        v = std::norm(psi_a[idx]);
      } else {
        const auto s = evaluate_potentials(params, Vec2(g.x(i), g.y(j)));
        const Vec2 u = lower_adiabatic_vector(s.theta);
        v = std::norm(u[0] * psi_a[idx] + u[1] * psi_d[idx]);
      }
      vals(j, i) = v * inv_area;
    }
  return vals;
}

}  // namespace

DensityGrid adiabatic_density(const DensityState& state, const DiscretizedHamiltonian& H,
                              double time, const GridSpec& out_grid) {
  DensityGrid dg;
  dg.time = time;
  dg.grid = (H.scheme == Scheme::Grid) ? H.grid : out_grid;

  if (state.pure) {
    CVec pa, pd;
    if (H.scheme == Scheme::Grid) {
      const int n = H.n_nuclear();
      pa = state.psi.head(n);
      pd = state.psi.tail(n);
    } else {
      std::tie(pa, pd) = resample_to_grid(H, state.psi, dg.grid);
    }
    dg.values = grid_density_pure(H, pa, pd, dg.grid, H.params, H.representation);
    dg.values = dg.values.cwiseMax(0.0);
    return dg;
  }

  // Mixed state in the truncated eigenbasis: rho_pos(R) = V rho V^T restricted
  // to the 2x2 electronic block at R, projected on the lower adiabatic state.
  const int K = static_cast<int>(state.rho.rows());
  const int n = H.n_nuclear();
  Mat Va(dg.grid.n_points(), K), Vd(dg.grid.n_points(), K);
  if (H.scheme == Scheme::Grid) {
    Va = state.basis.topRows(n);
    Vd = state.basis.bottomRows(n);
  } else {
    for (int k = 0; k < K; ++k) {
      auto [ga, gd] = resample_to_grid(H, state.basis.col(k).cast<cplx>(), dg.grid);
      Va.col(k) = ga.real();
      Vd.col(k) = gd.real();
    }
  }
  const CMat Wa = Va.cast<cplx>() * state.rho;
  const CMat Wd = Vd.cast<cplx>() * state.rho;
  dg.values.resize(dg.grid.ny, dg.grid.nx);
  const double inv_area = 1.0 / dg.grid.cell_area();
  for (int i = 0; i < dg.grid.nx; ++i)
    for (int j = 0; j < dg.grid.ny; ++j) {
      const int idx = dg.grid.index(i, j);
      double uaa, uad, udd;
      if (H.representation == Representation::AdiabaticNoGp) {
        uaa = 1.0;
        uad = 0.0;
        udd = 0.0;
      } else {
        const auto s = evaluate_potentials(H.params, Vec2(dg.grid.x(i), dg.grid.y(j)));
        const auto pr = lower_projector_fields(s.theta);
        uaa = pr.aa;
        uad = pr.ad;
        udd = pr.dd;
      }
      cplx raa(0), rdd(0), rad(0);
      for (int l = 0; l < K; ++l) {
        raa += Wa(idx, l) * Va(idx, l);
        rdd += Wd(idx, l) * Vd(idx, l);
        rad += Wa(idx, l) * Vd(idx, l);
      }
      const double v = uaa * raa.real() + udd * rdd.real() + 2.0 * uad * rad.real();
      dg.values(j, i) = std::max(0.0, v) * inv_area;
    }
  return dg;
}

NodeDiagnostic node_diagnostic(const DensityGrid& g, const Geometry& geometry, double epsilon) {
  NodeDiagnostic nd;
  nd.epsilon = epsilon;
  const Vec2 t = geometry.tuning_direction;
  const Vec2 nrm(-t.y(), t.x());
  const auto& L = geometry.degeneracy_line;
  // Each sample stands for a cell; weight it by the cell's overlap with the
  // strip along the strip normal, so strips narrower than a cell still count.
  const double half_cell =
      0.5 * (std::abs(nrm.x()) * g.grid.dx() + std::abs(nrm.y()) * g.grid.dy());
  double strip = 0, total = 0;
  for (int i = 0; i < g.grid.nx; ++i)
    for (int j = 0; j < g.grid.ny; ++j) {
      const double x = g.grid.x(i), y = g.grid.y(j);
      if (L.a * x + L.b * y + L.c0 <= 0) continue;  // keep the acceptor side
      const double rho = g.values(j, i);
      total += rho;
      const double s = nrm.x() * x + nrm.y() * y;
      const double overlap =
          std::min(s + half_cell, epsilon) - std::max(s - half_cell, -epsilon);
      if (overlap > 0) strip += rho * std::min(1.0, overlap / (2.0 * half_cell));
    }
  if (total * g.grid.cell_area() < 1e-12) {
    nd.defined = false;
    nd.strip_fraction = 0.0;
    return nd;
  }
  nd.strip_fraction = strip / total;
  return nd;
}

double uniform_strip_baseline(const GridSpec& grid, const Geometry& geometry, double epsilon) {
  DensityGrid g;
  g.grid = grid;
  g.values = Mat::Ones(grid.ny, grid.nx);
  const auto nd = node_diagnostic(g, geometry, epsilon);
  return nd.strip_fraction;
}

}  // namespace gplvc
