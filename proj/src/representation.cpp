// Operators and initial states over the discretized bases.

#include <cmath>

#include "internal.hpp"

namespace gplvc {

const char* to_string(Representation r) {
  return r == Representation::DiabaticWithGp ? "with-gp" : "no-gp";
}
const char* to_string(Scheme s) { return s == Scheme::Grid ? "grid" : "ho-basis"; }

double DensityState::norm() const {
  if (pure) return psi.norm();
  return std::abs(rho.trace());
}

namespace {

// 2x2 electronic projector on the lower adiabatic state, (A, D) components.
// Section-sign free: entries depend only on theta.
struct AdiProjector {
  double aa, ad, dd;  // [aa, ad; ad, dd]
};
AdiProjector lower_projector(double theta) {
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  return {c * c, -c * s, s * s};
}

bool donor_side(const SubsystemParameters& p, double x, double y) {
  const double wx2 = p.Omega_X * p.Omega_X, wy2 = p.Omega_Y * p.Omega_Y;
  return 2.0 * (wx2 * p.X0 * x + wy2 * p.Y0 * y) + p.Delta < 0.0;
}

Mat grid_operator(SubsystemOperator op, const DiscretizedHamiltonian& H) {
  const int n = H.n_nuclear();
  Mat M = Mat::Zero(2 * n, 2 * n);
  const auto& g = H.grid;
  switch (op) {
    case SubsystemOperator::X:
    case SubsystemOperator::Y:
      for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
          const double v = op == SubsystemOperator::X ? g.x(i) : g.y(j);
          const int idx = g.index(i, j);
          M(idx, idx) = v;
          M(n + idx, n + idx) = v;
        }
      return M;
    case SubsystemOperator::DonorProjector:
      for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
          if (donor_side(H.params, g.x(i), g.y(j))) {
            const int idx = g.index(i, j);
            M(idx, idx) = 1.0;
            M(n + idx, n + idx) = 1.0;
          }
      return M;
    case SubsystemOperator::AdiabaticProjection1:
    case SubsystemOperator::AdiabaticProjection2: {
      const bool first = op == SubsystemOperator::AdiabaticProjection1;
      if (H.representation == Representation::AdiabaticNoGp) {
        for (int idx = 0; idx < n; ++idx) {
          if (first)
            M(idx, idx) = 1.0;
          else
            M(n + idx, n + idx) = 1.0;
        }
        return M;
      }
      for (int idx = 0; idx < n; ++idx) {
        const AdiProjector pr = lower_projector(H.fields[idx].theta);
        const double aa = first ? pr.aa : 1.0 - pr.aa;
        const double dd = first ? pr.dd : 1.0 - pr.dd;
        const double ad = first ? pr.ad : -pr.ad;
        M(idx, idx) = aa;
        M(n + idx, n + idx) = dd;
        M(idx, n + idx) = ad;
        M(n + idx, idx) = ad;
      }
      return M;
    }
  }
  throw std::logic_error("unreachable");
}

// 1D quadrature data for the HO scheme: Simpson panels covering the basis
// support, optionally split one-sidedly at a cut line.
struct HoQuadrature {
  std::vector<detail::QuadratureSegment> segs;
  double lo, hi;
};

HoQuadrature make_axis_quadrature(double nu, double gamma, int n_max, int points,
                                  std::optional<double> cut) {
  const double span = std::sqrt((2.0 * n_max + 1.0) / nu) + 8.0 / std::sqrt(nu);
  HoQuadrature q;
  q.lo = gamma - span;
  q.hi = gamma + span;
  std::optional<double> c = cut;
  if (c && (*c <= q.lo || *c >= q.hi)) c.reset();
  q.segs = detail::simpson_segments(q.lo, q.hi, points, c);
  return q;
}

// c_{p} = integral phi_p(x, y) f(x, y) over the basis support.
// f is evaluated pointwise; separable accumulation keeps this cheap.
template <typename F>
CVec ho_project(const DiscretizedHamiltonian& H, const HoQuadrature& qx, const HoQuadrature& qy,
                F&& f) {
  const auto& spec = H.ho;
  const int nsx = spec.n_max_x + 1, nsy = spec.n_max_y + 1;
  Mat acc = Mat::Zero(nsx, nsy);
  Mat acc_im = Mat::Zero(nsx, nsy);
  std::vector<double> phix(nsx), phiy(nsy);
  for (const auto& sy : qy.segs)
    for (int jy = 0; jy < sy.points.size(); ++jy) {
      const double y = sy.points[jy], wy = sy.weights[jy];
      detail::ho_function_column(spec.n_max_y, spec.freq_y, spec.center.y(), y, phiy.data());
      Vec gx = Vec::Zero(nsx), gx_im = Vec::Zero(nsx);
      for (const auto& sx : qx.segs)
        for (int ix = 0; ix < sx.points.size(); ++ix) {
          const double x = sx.points[ix], wx = sx.weights[ix];
          const cplx fv = f(x, y);
          if (fv == cplx(0, 0)) continue;
          detail::ho_function_column(spec.n_max_x, spec.freq_x, spec.center.x(), x, phix.data());
          for (int a = 0; a < nsx; ++a) {
            gx[a] += wx * phix[a] * fv.real();
            gx_im[a] += wx * phix[a] * fv.imag();
          }
        }
      for (int b = 0; b < nsy; ++b) {
        acc.col(b) += wy * phiy[b] * gx;
        acc_im.col(b) += wy * phiy[b] * gx_im;
      }
    }
  const int n = H.n_nuclear();
  CVec out(n);
  for (int p = 0; p < n; ++p) {
    const auto [nx, ny] = H.ho_states[p];
    out[p] = cplx(acc(nx, ny), acc_im(nx, ny));
  }
  return out;
}

// Half-line overlaps Q_{nm} = integral_{-inf}^{edge} phi_n phi_m dx for one
// axis (Simpson, panel boundary exactly at the edge).
Mat half_line_overlaps(double nu, double gamma, int n_max, double edge) {
  const double span = std::sqrt((2.0 * n_max + 1.0) / nu) + 8.0 / std::sqrt(nu);
  const double lo = gamma - span;
  const int n = n_max + 1;
  if (edge <= lo) return Mat::Zero(n, n);
  const int pts = 4097;
  const double h = (edge - lo) / (pts - 1);
  const Vec w = detail::simpson_weights(pts, h);
  Mat Q = Mat::Zero(n, n);
  std::vector<double> phi(n);
  for (int i = 0; i < pts; ++i) {
    const double x = lo + i * h;
    detail::ho_function_column(n_max, nu, gamma, x, phi.data());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b <= a; ++b) Q(a, b) += w[i] * phi[a] * phi[b];
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) Q(a, b) = Q(b, a);
  return Q;
}

Mat ho_operator(SubsystemOperator op, const DiscretizedHamiltonian& H) {
  const int n = H.n_nuclear();
  const auto& spec = H.ho;
  Mat M = Mat::Zero(2 * n, 2 * n);
  auto band1 = [&](double nu, double gamma, int n_max) {
    Mat x1 = Mat::Zero(n_max + 1, n_max + 1);
    for (int i = 0; i <= n_max; ++i) {
      x1(i, i) = gamma;
      if (i + 1 <= n_max)
        x1(i, i + 1) = x1(i + 1, i) = std::sqrt((i + 1) / (2.0 * nu));
    }
    return x1;
  };
  switch (op) {
    case SubsystemOperator::X:
    case SubsystemOperator::Y: {
      const bool is_x = op == SubsystemOperator::X;
      const Mat b = is_x ? band1(spec.freq_x, spec.center.x(), spec.n_max_x)
                         : band1(spec.freq_y, spec.center.y(), spec.n_max_y);
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          const auto [nxa, nya] = H.ho_states[p];
          const auto [nxb, nyb] = H.ho_states[q];
          double v = 0;
          if (is_x && nya == nyb) v = b(nxa, nxb);
          if (!is_x && nxa == nxb) v = b(nya, nyb);
          if (v != 0) {
            M(p, q) = v;
            M(n + p, n + q) = v;
          }
        }
      return M;
    }
    case SubsystemOperator::DonorProjector: {
      const auto& p = H.params;
      const double gx = p.Omega_X * p.Omega_X * p.X0, gy = p.Omega_Y * p.Omega_Y * p.Y0;
      Mat nuc;
      if (gy == 0.0 && gx != 0.0) {
        // Vertical degeneracy line: donor side is x < edge (gx > 0).
        const double edge = -p.Delta / (2.0 * gx);
        Mat Qx = half_line_overlaps(spec.freq_x, spec.center.x(), spec.n_max_x, edge);
        if (gx < 0) Qx = Mat::Identity(Qx.rows(), Qx.cols()) - Qx;
        nuc = Mat::Zero(n, n);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            const auto [nxa, nya] = H.ho_states[a];
            const auto [nxb, nyb] = H.ho_states[b];
            if (nya == nyb) nuc(a, b) = Qx(nxa, nxb);
          }
      } else if (gx == 0.0 && gy != 0.0) {
        const double edge = -p.Delta / (2.0 * gy);
        Mat Qy = half_line_overlaps(spec.freq_y, spec.center.y(), spec.n_max_y, edge);
        if (gy < 0) Qy = Mat::Identity(Qy.rows(), Qy.cols()) - Qy;
        nuc = Mat::Zero(n, n);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            const auto [nxa, nya] = H.ho_states[a];
            const auto [nxb, nyb] = H.ho_states[b];
            if (nxa == nxb) nuc(a, b) = Qy(nya, nyb);
          }
      } else {
        // Tilted degeneracy line: 2D quadrature of the indicator.
        const auto qx = make_axis_quadrature(spec.freq_x, spec.center.x(), spec.n_max_x, 513, {});
        const auto qy = make_axis_quadrature(spec.freq_y, spec.center.y(), spec.n_max_y, 513, {});
        nuc = Mat::Zero(n, n);
        std::vector<double> phix(spec.n_max_x + 1), phiy(spec.n_max_y + 1);
        for (const auto& sy : qy.segs)
          for (int jy = 0; jy < sy.points.size(); ++jy) {
            const double y = sy.points[jy], wy = sy.weights[jy];
            detail::ho_function_column(spec.n_max_y, spec.freq_y, spec.center.y(), y,
                                       phiy.data());
            Mat ax = Mat::Zero(spec.n_max_x + 1, spec.n_max_x + 1);
            for (const auto& sx : qx.segs)
              for (int ix = 0; ix < sx.points.size(); ++ix) {
                const double x = sx.points[ix];
                if (!donor_side(H.params, x, y)) continue;
                detail::ho_function_column(spec.n_max_x, spec.freq_x, spec.center.x(), x,
                                           phix.data());
                const double wx = sx.weights[ix];
                for (int a = 0; a <= spec.n_max_x; ++a)
                  for (int b = 0; b <= a; ++b) ax(a, b) += wx * phix[a] * phix[b];
              }
            for (int a = 0; a <= spec.n_max_x; ++a)
              for (int b = a + 1; b <= spec.n_max_x; ++b) ax(a, b) = ax(b, a);
            for (int p2 = 0; p2 < n; ++p2)
              for (int q2 = 0; q2 < n; ++q2) {
                const auto [nxa, nya] = H.ho_states[p2];
                const auto [nxb, nyb] = H.ho_states[q2];
                nuc(p2, q2) += wy * phiy[nya] * phiy[nyb] * ax(nxa, nxb);
              }
          }
      }
      M.topLeftCorner(n, n) = nuc;
      M.bottomRightCorner(n, n) = nuc;
      return M;
    }
    case SubsystemOperator::AdiabaticProjection1:
    case SubsystemOperator::AdiabaticProjection2: {
      const bool first = op == SubsystemOperator::AdiabaticProjection1;
      const auto qx = make_axis_quadrature(spec.freq_x, spec.center.x(), spec.n_max_x, 513, {});
      const auto qy = make_axis_quadrature(spec.freq_y, spec.center.y(), spec.n_max_y, 513, {});
      Mat aa = Mat::Zero(n, n), dd = Mat::Zero(n, n), ad = Mat::Zero(n, n);
      std::vector<double> phix(spec.n_max_x + 1), phiy(spec.n_max_y + 1);
      const int nsx = spec.n_max_x + 1;
      for (const auto& sy : qy.segs)
        for (int jy = 0; jy < sy.points.size(); ++jy) {
          const double y = sy.points[jy], wy = sy.weights[jy];
          detail::ho_function_column(spec.n_max_y, spec.freq_y, spec.center.y(), y, phiy.data());
          Mat axa = Mat::Zero(nsx, nsx), axd = Mat::Zero(nsx, nsx), axc = Mat::Zero(nsx, nsx);
          for (const auto& sx : qx.segs)
            for (int ix = 0; ix < sx.points.size(); ++ix) {
              const double x = sx.points[ix], wx = sx.weights[ix];
              const auto s = evaluate_potentials(H.params, Vec2(x, y));
              const AdiProjector pr = lower_projector(s.theta);
              detail::ho_function_column(spec.n_max_x, spec.freq_x, spec.center.x(), x,
                                         phix.data());
              for (int a = 0; a < nsx; ++a)
                for (int b = 0; b < nsx; ++b) {
                  const double pp = wx * phix[a] * phix[b];
                  axa(a, b) += pp * pr.aa;
                  axd(a, b) += pp * pr.dd;
                  axc(a, b) += pp * pr.ad;
                }
            }
          for (int p2 = 0; p2 < n; ++p2)
            for (int q2 = 0; q2 < n; ++q2) {
              const auto [nxa, nya] = H.ho_states[p2];
              const auto [nxb, nyb] = H.ho_states[q2];
              const double yy = wy * phiy[nya] * phiy[nyb];
              aa(p2, q2) += yy * axa(nxa, nxb);
              dd(p2, q2) += yy * axd(nxa, nxb);
              ad(p2, q2) += yy * axc(nxa, nxb);
            }
        }
      if (!first) {
        aa = Mat::Identity(n, n) - aa;
        dd = Mat::Identity(n, n) - dd;
        ad = -ad;
      }
      M.topLeftCorner(n, n) = aa;
      M.bottomRightCorner(n, n) = dd;
      M.topRightCorner(n, n) = ad;
      M.bottomLeftCorner(n, n) = ad;
      return M;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

Mat operator_matrix(SubsystemOperator op, const DiscretizedHamiltonian& H) {
  if (H.scheme == Scheme::Grid) return grid_operator(op, H);
  if (H.representation == Representation::AdiabaticNoGp)
    throw std::invalid_argument("operator_matrix: ho-basis carries the diabatic representation only");
  return ho_operator(op, H);
}

namespace {

double gaussian_out_of_bounds_mass(const SubsystemParameters& p, const GridSpec& g) {
  // Continuum donor-ground density outside the box, per axis tail sums.
  const double cx = -p.X0, cy = -p.Y0;
  const double ax = std::sqrt(p.Omega_X), ay = std::sqrt(p.Omega_Y);
  const double out_x = 0.5 * std::erfc(ax * (g.xmax - cx)) + 0.5 * std::erfc(ax * (cx - g.xmin));
  const double out_y = 0.5 * std::erfc(ay * (g.ymax - cy)) + 0.5 * std::erfc(ay * (cy - g.ymin));
  return out_x + out_y;
}

cplx donor_gaussian(const SubsystemParameters& p, double x, double y) {
  const double nx = std::pow(p.Omega_X / M_PI, 0.25), ny = std::pow(p.Omega_Y / M_PI, 0.25);
  return nx * ny *
         std::exp(-0.5 * p.Omega_X * (x + p.X0) * (x + p.X0) -
                  0.5 * p.Omega_Y * (y + p.Y0) * (y + p.Y0));
}

// One-sided cut line for the adiabatic section in the diabatic representation:
// the zero-coupling line, when it is horizontal or vertical.
struct CutInfo {
  std::optional<double> x_cut, y_cut;
  bool tilted = false;
};
CutInfo section_cut(const SubsystemParameters& p) {
  CutInfo c;
  if (p.C_X == 0.0 && p.C_Y != 0.0)
    c.y_cut = -p.Delta12 / p.C_Y;
  else if (p.C_Y == 0.0 && p.C_X != 0.0)
    c.x_cut = -p.Delta12 / p.C_X;
  else if (p.C_X != 0.0 && p.C_Y != 0.0)
    c.tilted = true;
  return c;
}

DensityState make_pure(const DiscretizedHamiltonian& H, CVec psi) {
  DensityState s;
  s.representation = H.representation;
  s.scheme = H.scheme;
  s.pure = true;
  const double nrm = psi.norm();
  if (nrm <= 0) throw NumericalError("initial state has zero norm");
  s.psi = psi / nrm;
  return s;
}

DensityState prepare_grid_state(const DiscretizedHamiltonian& H, bool adiabatic_ground) {
  const auto& p = H.params;
  const auto& g = H.grid;
  if (gaussian_out_of_bounds_mass(p, g) > 1e-6)
    throw std::invalid_argument("initial state: grid bounds clip more than 1e-6 of the Gaussian");
  const int n = H.n_nuclear();
  CVec psi = CVec::Zero(2 * n);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const int idx = g.index(i, j);
      const cplx chi = donor_gaussian(p, g.x(i), g.y(j));
      if (H.representation == Representation::AdiabaticNoGp) {
        psi[idx] = chi;  // lower surface
      } else if (!adiabatic_ground) {
        psi[n + idx] = chi;  // bare donor diabat
      } else {
        const Vec2 v = lower_adiabatic_vector(H.fields[idx].theta);
        psi[idx] = chi * v[0];
        psi[n + idx] = chi * v[1];
      }
    }
  return make_pure(H, std::move(psi));
}

DensityState prepare_ho_state(const DiscretizedHamiltonian& H, bool adiabatic_ground) {
  const auto& p = H.params;
  const auto& spec = H.ho;
  const CutInfo cut = adiabatic_ground ? section_cut(p) : CutInfo{};
  const auto qx = make_axis_quadrature(spec.freq_x, spec.center.x(), spec.n_max_x, 257, cut.x_cut);
  const auto qy = make_axis_quadrature(spec.freq_y, spec.center.y(), spec.n_max_y, 257, cut.y_cut);

  const int n = H.n_nuclear();
  CVec psi(2 * n);
  auto field = [&](double x, double y, int comp) -> cplx {
    const cplx chi = donor_gaussian(p, x, y);
    if (!adiabatic_ground) return comp == 1 ? chi : cplx(0, 0);
    const auto s = evaluate_potentials(p, Vec2(x, y));
    const Vec2 v = lower_adiabatic_vector(s.theta);
    return chi * v[comp];
  };
  psi.head(n) = ho_project(H, qx, qy, [&](double x, double y) { return field(x, y, 0); });
  psi.tail(n) = ho_project(H, qx, qy, [&](double x, double y) { return field(x, y, 1); });

  // The single-valued electronic section carries a small discontinuity on the
  // acceptor-side ray; its high-frequency tail (~1e-4) lies beyond any finite
  // basis, so only gross truncation is an error here.
  const double captured = psi.squaredNorm();
  if (captured < 1.0 - 2e-3)
    throw NumericalError("initial state: ho-basis captures only " + std::to_string(captured) +
                         " of the donor ground state");
  return make_pure(H, std::move(psi));
}

}  // namespace

DensityState prepare_initial_state(const DiscretizedHamiltonian& H) {
  if (H.scheme == Scheme::Grid) return prepare_grid_state(H, true);
  return prepare_ho_state(H, true);
}

DensityState prepare_diabatic_donor_ground(const DiscretizedHamiltonian& H) {
  if (H.representation != Representation::DiabaticWithGp)
    throw std::invalid_argument("donor-ground state: diabatic representation only");
  if (H.scheme == Scheme::Grid) return prepare_grid_state(H, false);
  return prepare_ho_state(H, false);
}

}  // namespace gplvc
