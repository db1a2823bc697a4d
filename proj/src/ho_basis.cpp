// Harmonic-oscillator product basis: analytic 1D operator bands, dense
// Hamiltonian assembly with total-quanta truncation, and stable eigenfunction
// evaluation for quadrature and resampling.

#include <cmath>

#include "internal.hpp"

namespace gplvc {

namespace {

struct Band1D {
  // Analytic matrix elements for frequency nu, center gamma: identity,
  // position, position^2, kinetic p^2/2. Symmetric bands |n-m| <= 2.
  Mat x1, x2, kin;
};

Band1D make_bands(int n_max, double nu, double gamma) {
  const int n = n_max + 1;
  Band1D b;
  b.x1 = Mat::Zero(n, n);
  b.x2 = Mat::Zero(n, n);
  b.kin = Mat::Zero(n, n);
  const double s = 1.0 / std::sqrt(2.0 * nu);  // <n|xi|n+1> scale
  for (int i = 0; i < n; ++i) {
    b.x1(i, i) = gamma;
    b.x2(i, i) = gamma * gamma + (2.0 * i + 1.0) / (2.0 * nu);
    b.kin(i, i) = 0.25 * nu * (2.0 * i + 1.0);
    if (i + 1 < n) {
      const double e1 = std::sqrt(double(i + 1)) * s;
      b.x1(i, i + 1) = b.x1(i + 1, i) = e1;
      b.x2(i, i + 1) = b.x2(i + 1, i) = 2.0 * gamma * e1;
    }
    if (i + 2 < n) {
      const double e2 = std::sqrt(double((i + 1) * (i + 2))) / (2.0 * nu);
      b.x2(i, i + 2) = b.x2(i + 2, i) = e2;
      b.kin(i, i + 2) = b.kin(i + 2, i) = -0.25 * nu * std::sqrt(double((i + 1) * (i + 2)));
    }
  }
  return b;
}

}  // namespace

namespace detail {

void ho_function_column(int n_max, double nu, double gamma, double x, double* out) {
  // phi_0 = (nu/pi)^{1/4} exp(-nu u^2 / 2), recurrence
  // phi_{n+1} = u sqrt(2 nu/(n+1)) phi_n - sqrt(n/(n+1)) phi_{n-1}.
  const double u = x - gamma;
  out[0] = std::pow(nu / M_PI, 0.25) * std::exp(-0.5 * nu * u * u);
  if (n_max >= 1) out[1] = u * std::sqrt(2.0 * nu) * out[0];
  for (int n = 1; n < n_max; ++n)
    out[n + 1] = u * std::sqrt(2.0 * nu / (n + 1)) * out[n] -
                 std::sqrt(double(n) / (n + 1)) * out[n - 1];
}

}  // namespace detail

DiscretizedHamiltonian build_diabatic(const SubsystemParameters& p, const HoBasisSpec& scheme) {
  HoBasisSpec spec = scheme;
  if (spec.freq_x <= 0) spec.freq_x = p.Omega_X;
  if (spec.freq_y <= 0) spec.freq_y = p.Omega_Y;
  if (spec.n_max_x < 1 || spec.n_max_y < 1)
    throw std::invalid_argument("ho basis: cutoffs must be >= 1");
  if (spec.n_total_max <= 0) spec.n_total_max = spec.n_max_x + spec.n_max_y;

  DiscretizedHamiltonian H;
  H.representation = Representation::DiabaticWithGp;
  H.scheme = Scheme::HoBasis;
  H.params = p;
  H.ho = spec;
  for (int nx = 0; nx <= spec.n_max_x; ++nx)
    for (int ny = 0; ny <= spec.n_max_y; ++ny)
      if (nx + ny <= spec.n_total_max) H.ho_states.emplace_back(nx, ny);

  const Band1D bx = make_bands(spec.n_max_x, spec.freq_x, spec.center.x());
  const Band1D by = make_bands(spec.n_max_y, spec.freq_y, spec.center.y());

  const double wx2 = p.Omega_X * p.Omega_X, wy2 = p.Omega_Y * p.Omega_Y;
  const int n = static_cast<int>(H.ho_states.size());
  auto M = std::make_unique<Mat>(Mat::Zero(2 * n, 2 * n));
  Mat& Hm = *M;

  // Separable 1D pieces: f(x) = wx2/2 (x +- X0)^2 and the analogous y parts.
  const Mat fxD = 0.5 * wx2 * (bx.x2 + 2.0 * p.X0 * bx.x1 +
                               p.X0 * p.X0 * Mat::Identity(bx.x1.rows(), bx.x1.cols()));
  const Mat fxA = 0.5 * wx2 * (bx.x2 - 2.0 * p.X0 * bx.x1 +
                               p.X0 * p.X0 * Mat::Identity(bx.x1.rows(), bx.x1.cols()));
  const Mat fyD = 0.5 * wy2 * (by.x2 + 2.0 * p.Y0 * by.x1 +
                               p.Y0 * p.Y0 * Mat::Identity(by.x1.rows(), by.x1.cols()));
  const Mat fyA = 0.5 * wy2 * (by.x2 - 2.0 * p.Y0 * by.x1 +
                               p.Y0 * p.Y0 * Mat::Identity(by.x1.rows(), by.x1.cols()));

  for (int a = 0; a < n; ++a) {
    const auto [nxa, nya] = H.ho_states[a];
    for (int b = 0; b < n; ++b) {
      const auto [nxb, nyb] = H.ho_states[b];
      if (std::abs(nxa - nxb) > 2 || std::abs(nya - nyb) > 2) continue;
      const double dxa = (nxa == nxb) ? 1.0 : 0.0;
      const double dya = (nya == nyb) ? 1.0 : 0.0;
      const double kin = bx.kin(nxa, nxb) * dya + by.kin(nya, nyb) * dxa;
      const double va = fxA(nxa, nxb) * dya + fyA(nya, nyb) * dxa - 0.5 * p.Delta * dxa * dya;
      const double vd = fxD(nxa, nxb) * dya + fyD(nya, nyb) * dxa + 0.5 * p.Delta * dxa * dya;
      const double vc = p.C_X * bx.x1(nxa, nxb) * dya + p.C_Y * by.x1(nya, nyb) * dxa +
                        p.Delta12 * dxa * dya;
      Hm(a, b) = kin + va;
      Hm(n + a, n + b) = kin + vd;
      Hm(a, n + b) = vc;
      Hm(n + a, b) = vc;
    }
  }
  H.matrix_ = std::move(M);
  return H;
}

std::pair<CVec, CVec> resample_to_grid(const DiscretizedHamiltonian& H, const CVec& psi,
                                       const GridSpec& out_grid) {
  if (H.scheme != Scheme::HoBasis)
    throw std::invalid_argument("resample_to_grid: HoBasis states only");
  const int n = H.n_nuclear();
  const int npts = out_grid.n_points();
  // Basis values, separable: phix (nx_max+1 per grid x), phiy likewise.
  Mat phix(H.ho.n_max_x + 1, out_grid.nx), phiy(H.ho.n_max_y + 1, out_grid.ny);
  for (int i = 0; i < out_grid.nx; ++i)
    detail::ho_function_column(H.ho.n_max_x, H.ho.freq_x, H.ho.center.x(), out_grid.x(i),
                               phix.col(i).data());
  for (int j = 0; j < out_grid.ny; ++j)
    detail::ho_function_column(H.ho.n_max_y, H.ho.freq_y, H.ho.center.y(), out_grid.y(j),
                               phiy.col(j).data());

  const double scale = std::sqrt(out_grid.cell_area());  // l2 grid convention
  CVec out_a = CVec::Zero(npts), out_d = CVec::Zero(npts);
  for (int e = 0; e < 2; ++e) {
    CVec& out = e == 0 ? out_a : out_d;
    // psi(x, y) = sum_p c_p phix_{nx(p)}(x) phiy_{ny(p)}(y); accumulate per x
    // column to keep it O(n_states * nx * ny / nx).
    CMat coef = CMat::Zero(H.ho.n_max_x + 1, H.ho.n_max_y + 1);
    for (int p = 0; p < n; ++p)
      coef(H.ho_states[p].first, H.ho_states[p].second) = psi[e * n + p];
    // values = phix^T coef phiy
    CMat tmp(out_grid.nx, H.ho.n_max_y + 1);
    tmp.real() = phix.transpose() * coef.real();
    tmp.imag() = phix.transpose() * coef.imag();
    for (int i = 0; i < out_grid.nx; ++i)
      for (int j = 0; j < out_grid.ny; ++j) {
        cplx v(0, 0);
        for (int m = 0; m <= H.ho.n_max_y; ++m) v += tmp(i, m) * phiy(m, j);
        out[out_grid.index(i, j)] = v * scale;
      }
  }
  return {out_a, out_d};
}

}  // namespace gplvc
