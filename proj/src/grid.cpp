// Fourier-grid machinery: spectral derivative matrices, FFT workspaces and
// the dense grid Hamiltonians in both electronic representations.

#include <lapacke.h>

#include <cmath>

#include "internal.hpp"

extern "C" void zgemm_(const char* transa, const char* transb, const int* m, const int* n,
                       const int* k, const void* alpha, const void* a, const int* lda,
                       const void* b, const int* ldb, const void* beta, void* c,
                       const int* ldc);

namespace gplvc::detail {

void zgemm_nn(cplx alpha, const CMat& A, const CMat& B, cplx beta, CMat& C) {
  const int m = (int)A.rows(), k = (int)A.cols(), n = (int)B.cols();
  if (C.rows() != m || C.cols() != n) {
    C.resize(m, n);
    C.setZero();
  }
  const char tn = 'N';
  zgemm_(&tn, &tn, &m, &n, &k, &alpha, A.data(), &m, B.data(), &k, &beta, C.data(), &m);
}

Eigensystem eigh(const Mat& A) {
  const int n = static_cast<int>(A.rows());
  Eigensystem es;
  es.vectors = A;
  es.energies.resize(n);
  const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, es.vectors.data(), n,
                                  es.energies.data());
  if (info != 0)
    throw NumericalError("dsyevd failed with info = " + std::to_string(info));
  return es;
}

Vec fourier_wavenumbers(int n, double length, bool drop_nyquist) {
  Vec k(n);
  for (int m = 0; m < n; ++m) {
    const int mp = m <= n / 2 ? m : m - n;
    k[m] = 2.0 * M_PI * mp / length;
  }
  if (drop_nyquist && n % 2 == 0) k[n / 2] = 0.0;
  return k;
}

namespace {
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft2D::Fft2D(int nx, int ny) : nx_(nx), ny_(ny) {
  // Plan creation/destruction is not thread-safe; FFTW_UNALIGNED keeps the
  // plans valid for the caller-provided (non-fftw_malloc) buffers.
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  work_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(cplx) * nx * ny));
  auto* w = reinterpret_cast<fftw_complex*>(work_);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fwd_ = fftw_plan_dft_2d(nx, ny, w, w, FFTW_FORWARD, flags);
  bwd_ = fftw_plan_dft_2d(nx, ny, w, w, FFTW_BACKWARD, flags);
}

Fft2D::~Fft2D() {
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(fwd_);
  fftw_destroy_plan(bwd_);
  fftw_free(work_);
}

void Fft2D::forward(cplx* data) const {
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(fwd_, d, d);
}

void Fft2D::backward_scaled(cplx* data) const {
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(bwd_, d, d);
  const double s = 1.0 / (double(nx_) * ny_);
  for (int i = 0; i < nx_ * ny_; ++i) data[i] *= s;
}

const Fft2D& fft_for(int nx, int ny) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<Fft2D>> cache;
  auto& slot = cache[{nx, ny}];
  if (!slot) slot = std::make_unique<Fft2D>(nx, ny);
  return *slot;
}

Mat fourier_second_derivative(int n, double length) {
  const Vec k = fourier_wavenumbers(n, length, false);
  const double dx = length / n;
  Vec row(n);
  for (int p = 0; p < n; ++p) {
    double s = 0;
    for (int m = 0; m < n; ++m) s += -k[m] * k[m] * std::cos(k[m] * p * dx);
    row[p] = s / n;
  }
  Mat D(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) D(i, j) = row[((i - j) % n + n) % n];
  return D;
}

Mat fourier_first_derivative(int n, double length) {
  const Vec k = fourier_wavenumbers(n, length, true);
  const double dx = length / n;
  Vec row(n);
  for (int p = 0; p < n; ++p) {
    double s = 0;
    for (int m = 0; m < n; ++m) s += -k[m] * std::sin(k[m] * p * dx);
    row[p] = s / n;
  }
  Mat D(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) D(i, j) = row[((i - j) % n + n) % n];
  return D;
}

Vec simpson_weights(int n_points, double h) {
  if (n_points < 3 || n_points % 2 == 0)
    throw std::invalid_argument("simpson_weights: need an odd point count >= 3");
  Vec w(n_points);
  w.setZero();
  for (int i = 0; i + 2 < n_points; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  return w;
}

std::vector<QuadratureSegment> simpson_segments(double a, double b, int n_per_segment,
                                                std::optional<double> cut, double side_eps) {
  if (n_per_segment % 2 == 0) ++n_per_segment;
  auto make = [&](double lo, double hi, double lo_nudge, double hi_nudge) {
    QuadratureSegment seg;
    const double h = (hi - lo) / (n_per_segment - 1);
    seg.points.resize(n_per_segment);
    for (int i = 0; i < n_per_segment; ++i) seg.points[i] = lo + i * h;
    seg.points[0] += lo_nudge;
    seg.points[n_per_segment - 1] += hi_nudge;
    seg.weights = simpson_weights(n_per_segment, h);
    return seg;
  };
  std::vector<QuadratureSegment> segs;
  if (cut && *cut > a + 1e-12 && *cut < b - 1e-12) {
    segs.push_back(make(a, *cut, 0.0, -side_eps));
    segs.push_back(make(*cut, b, +side_eps, 0.0));
  } else {
    segs.push_back(make(a, b, 0.0, 0.0));
  }
  return segs;
}

}  // namespace gplvc::detail

namespace gplvc {

using detail::fourier_first_derivative;
using detail::fourier_second_derivative;

namespace {

bool is_power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

void check_grid_spec(const SubsystemParameters& p, const GridSpec& g) {
  if (!is_power_of_two(g.nx) || !is_power_of_two(g.ny) || g.nx < 16 || g.ny < 16)
    throw std::invalid_argument("grid: nx, ny must be powers of two >= 16");
  if (!(g.xmax > g.xmin) || !(g.ymax > g.ymin))
    throw std::invalid_argument("grid: empty bounds");
  // Bounds must hold both minima (and the CI point, when one exists) with a
  // three-sigma margin of the donor ground state.
  const double sx = 1.0 / std::sqrt(2.0 * p.Omega_X);
  const double sy = 1.0 / std::sqrt(2.0 * p.Omega_Y);
  double need_xmin = -std::abs(p.X0) - 3 * sx, need_xmax = std::abs(p.X0) + 3 * sx;
  double need_ymin = -std::abs(p.Y0) - 3 * sy, need_ymax = std::abs(p.Y0) + 3 * sy;
  if (p.X0 != 0 || p.Y0 != 0) {
    const Geometry geo = derive_geometry(p);
    // The CI only constrains the box when it sits in the dynamical region
    // (inside the 3-sigma hull of the minima); a far-detuned CI may lie
    // outside the sampled box on purpose.
    if (geo.ci_point && geo.ci_point->x() >= need_xmin && geo.ci_point->x() <= need_xmax &&
        geo.ci_point->y() >= need_ymin && geo.ci_point->y() <= need_ymax) {
      need_xmin = std::min(need_xmin, geo.ci_point->x() - 3 * sx);
      need_xmax = std::max(need_xmax, geo.ci_point->x() + 3 * sx);
      need_ymin = std::min(need_ymin, geo.ci_point->y() - 3 * sy);
      need_ymax = std::max(need_ymax, geo.ci_point->y() + 3 * sy);
    }
  }
  if (g.xmin > need_xmin || g.xmax < need_xmax || g.ymin > need_ymin || g.ymax < need_ymax)
    throw std::invalid_argument("grid: bounds too small for the minima/CI with 3-sigma margin");
}

std::vector<PotentialSample> sample_fields(const SubsystemParameters& p, const GridSpec& g) {
  std::vector<PotentialSample> fields(g.n_points());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      fields[g.index(i, j)] = evaluate_potentials(p, Vec2(g.x(i), g.y(j)));
  return fields;
}

bool any_at_ci(const std::vector<PotentialSample>& fields) {
  for (const auto& f : fields)
    if (f.at_ci) return true;
  return false;
}

// Nodes exactly on the degeneracy line break the half-plane donor projector
// (a whole sampled column straddles the boundary); nodes on the CI break the
// derivative coupling. Both are cured by a half-spacing shift.
bool grid_needs_shift(const std::vector<PotentialSample>& fields) {
  for (const auto& f : fields) {
    if (f.at_ci) return true;
    const double scale = std::abs(f.V_D) + std::abs(f.V_A) + 1.0;
    if (std::abs(f.V_D - f.V_A) < 1e-12 * scale) return true;
  }
  return false;
}

void shift_half_cell(const SubsystemParameters& p, DiscretizedHamiltonian& H) {
  if (!grid_needs_shift(H.fields)) return;
  GridSpec shifted = H.grid;
  const double hx = 0.5 * H.grid.dx(), hy = 0.5 * H.grid.dy();
  shifted.xmin += hx;
  shifted.xmax += hx;
  shifted.ymin += hy;
  shifted.ymax += hy;
  H.grid = shifted;
  H.fields = sample_fields(p, shifted);
  H.warnings.push_back(
      "degeneracy line or CI point coincided with grid nodes; grid shifted by half a spacing");
  if (any_at_ci(H.fields))
    throw NumericalError("grid still contains the CI point after the half-spacing shift");
}

}  // namespace

DiscretizedHamiltonian build_diabatic(const SubsystemParameters& p, const GridSpec& scheme) {
  check_grid_spec(p, scheme);
  DiscretizedHamiltonian H;
  H.representation = Representation::DiabaticWithGp;
  H.scheme = Scheme::Grid;
  H.params = p;
  H.grid = scheme;
  H.fields = sample_fields(p, scheme);
  shift_half_cell(p, H);
  return H;
}

DiscretizedHamiltonian build_adiabatic_no_gp(const SubsystemParameters& p, const GridSpec& scheme) {
  check_grid_spec(p, scheme);
  DiscretizedHamiltonian H;
  H.representation = Representation::AdiabaticNoGp;
  H.scheme = Scheme::Grid;
  H.params = p;
  H.grid = scheme;
  H.fields = sample_fields(p, scheme);
  shift_half_cell(p, H);
  return H;
}

void DiscretizedHamiltonian::build_matrix() const {
  const int n = n_nuclear();
  auto M = std::make_unique<Mat>(Mat::Zero(2 * n, 2 * n));
  Mat& H = *M;

  const Mat Tx = -0.5 * fourier_second_derivative(grid.nx, grid.xmax - grid.xmin);
  const Mat Ty = -0.5 * fourier_second_derivative(grid.ny, grid.ymax - grid.ymin);

  // Kinetic term, both electronic blocks: Tx (x) Iy + Ix (x) Ty.
  for (int b = 0; b < 2; ++b) {
    const int off = b * n;
    for (int ix = 0; ix < grid.nx; ++ix)
      for (int jx = 0; jx < grid.nx; ++jx) {
        const double t = Tx(ix, jx);
        for (int iy = 0; iy < grid.ny; ++iy)
          H(off + grid.index(ix, iy), off + grid.index(jx, iy)) += t;
      }
    for (int ix = 0; ix < grid.nx; ++ix)
      for (int iy = 0; iy < grid.ny; ++iy)
        for (int jy = 0; jy < grid.ny; ++jy)
          H(off + grid.index(ix, iy), off + grid.index(ix, jy)) += Ty(iy, jy);
  }

  if (representation == Representation::DiabaticWithGp) {
    for (int i = 0; i < n; ++i) {
      const auto& f = fields[i];
      H(i, i) += f.V_A;
      H(n + i, n + i) += f.V_D;
      H(i, n + i) += f.V_c;
      H(n + i, i) += f.V_c;
    }
  } else {
    const Mat Dx = fourier_first_derivative(grid.nx, grid.xmax - grid.xmin);
    const Mat Dy = fourier_first_derivative(grid.ny, grid.ymax - grid.ymin);
    for (int i = 0; i < n; ++i) {
      const auto& f = fields[i];
      const double dbc = 0.5 * f.F.squaredNorm();  // diagonal Born-Huang term
      H(i, i) += f.W1 + dbc;
      H(n + i, n + i) += f.W2 + dbc;
    }
    // tau_12 = -[F.grad + (div F)/2] discretized in the exactly antisymmetric
    // form -(diag(F) D + D diag(F))/2; tau_21 is its negative transpose.
    auto add_coupling = [&](double fval_i, double fval_j, double d, int row, int col) {
      const double v = 0.5 * (fval_i + fval_j) * d;
      H(row, n + col) += -v;
      H(n + col, row) += -v;  // tau_21 entry (col,row) of +B equals -B(row,col)
    };
    for (int ix = 0; ix < grid.nx; ++ix)
      for (int jx = 0; jx < grid.nx; ++jx) {
        if (ix == jx) continue;
        const double d = Dx(ix, jx);
        for (int iy = 0; iy < grid.ny; ++iy)
          add_coupling(fields[grid.index(ix, iy)].F.x(), fields[grid.index(jx, iy)].F.x(), d,
                       grid.index(ix, iy), grid.index(jx, iy));
      }
    for (int ix = 0; ix < grid.nx; ++ix)
      for (int iy = 0; iy < grid.ny; ++iy)
        for (int jy = 0; jy < grid.ny; ++jy) {
          if (iy == jy) continue;
          add_coupling(fields[grid.index(ix, iy)].F.y(), fields[grid.index(ix, jy)].F.y(),
                       Dy(iy, jy), grid.index(ix, iy), grid.index(ix, jy));
        }
  }
  matrix_ = std::move(M);
}

namespace {

// Spectral kinetic application and first derivatives on one electronic
// component via FFT.
void apply_kinetic(const GridSpec& g, const cplx* in, cplx* out) {
  const auto& fft = detail::fft_for(g.nx, g.ny);
  const Vec kx = detail::fourier_wavenumbers(g.nx, g.xmax - g.xmin, false);
  const Vec ky = detail::fourier_wavenumbers(g.ny, g.ymax - g.ymin, false);
  std::vector<cplx> buf(in, in + g.n_points());
  fft.forward(buf.data());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      buf[g.index(i, j)] *= 0.5 * (kx[i] * kx[i] + ky[j] * ky[j]);
  fft.backward_scaled(buf.data());
  for (int i = 0; i < g.n_points(); ++i) out[i] += buf[i];
}

void spectral_gradient(const GridSpec& g, const cplx* in, std::vector<cplx>& dx,
                       std::vector<cplx>& dy) {
  const auto& fft = detail::fft_for(g.nx, g.ny);
  const Vec kx = detail::fourier_wavenumbers(g.nx, g.xmax - g.xmin, true);
  const Vec ky = detail::fourier_wavenumbers(g.ny, g.ymax - g.ymin, true);
  std::vector<cplx> hat(in, in + g.n_points());
  fft.forward(hat.data());
  dx.assign(g.n_points(), cplx(0));
  dy.assign(g.n_points(), cplx(0));
  const cplx I(0, 1);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const int idx = g.index(i, j);
      dx[idx] = I * kx[i] * hat[idx];
      dy[idx] = I * ky[j] * hat[idx];
    }
  fft.backward_scaled(dx.data());
  fft.backward_scaled(dy.data());
}

void spectral_divergence(const GridSpec& g, const std::vector<cplx>& vx,
                         const std::vector<cplx>& vy, std::vector<cplx>& out) {
  const auto& fft = detail::fft_for(g.nx, g.ny);
  const Vec kx = detail::fourier_wavenumbers(g.nx, g.xmax - g.xmin, true);
  const Vec ky = detail::fourier_wavenumbers(g.ny, g.ymax - g.ymin, true);
  std::vector<cplx> hx(vx), hy(vy);
  fft.forward(hx.data());
  fft.forward(hy.data());
  out.assign(g.n_points(), cplx(0));
  const cplx I(0, 1);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const int idx = g.index(i, j);
      out[idx] = I * kx[i] * hx[idx] + I * ky[j] * hy[idx];
    }
  fft.backward_scaled(out.data());
}

}  // namespace

void DiscretizedHamiltonian::apply(const CVec& in, CVec& out) const {
  if (in.size() != dim()) throw std::invalid_argument("apply: dimension mismatch");
  out.setZero(dim());
  if (scheme == Scheme::HoBasis) {
    out = detail::real_times_complex(matrix(), in);
    return;
  }
  const int n = n_nuclear();
  apply_kinetic(grid, in.data(), out.data());
  apply_kinetic(grid, in.data() + n, out.data() + n);

  if (representation == Representation::DiabaticWithGp) {
    for (int i = 0; i < n; ++i) {
      const auto& f = fields[i];
      out[i] += f.V_A * in[i] + f.V_c * in[n + i];
      out[n + i] += f.V_D * in[n + i] + f.V_c * in[i];
    }
  } else {
    std::vector<cplx> d1x, d1y, d2x, d2y, div1(n), div2(n);
    spectral_gradient(grid, in.data(), d1x, d1y);
    spectral_gradient(grid, in.data() + n, d2x, d2y);
    std::vector<cplx> f1x(n), f1y(n), f2x(n), f2y(n);
    for (int i = 0; i < n; ++i) {
      const auto& F = fields[i].F;
      f1x[i] = F.x() * in[i];
      f1y[i] = F.y() * in[i];
      f2x[i] = F.x() * in[n + i];
      f2y[i] = F.y() * in[n + i];
    }
    spectral_divergence(grid, f1x, f1y, div1);
    spectral_divergence(grid, f2x, f2y, div2);
    for (int i = 0; i < n; ++i) {
      const auto& f = fields[i];
      const double dbc = 0.5 * f.F.squaredNorm();
      const cplx tau12_on_2 = -0.5 * (f.F.x() * d2x[i] + f.F.y() * d2y[i] + div2[i]);
      const cplx tau21_on_1 = +0.5 * (f.F.x() * d1x[i] + f.F.y() * d1y[i] + div1[i]);
      out[i] += (f.W1 + dbc) * in[i] + tau12_on_2;
      out[n + i] += (f.W2 + dbc) * in[n + i] + tau21_on_1;
    }
  }
}

CVec DiscretizedHamiltonian::apply(const CVec& in) const {
  CVec out;
  apply(in, out);
  return out;
}

const Mat& DiscretizedHamiltonian::matrix() const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (!matrix_) build_matrix();
  return *matrix_;
}

const Eigensystem& DiscretizedHamiltonian::eigensystem() const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (!eig_) {
    if (!matrix_) build_matrix();
    eig_ = std::make_unique<Eigensystem>(detail::eigh(*matrix_));
    if (scheme == Scheme::Grid) matrix_.reset();  // rebuildable, 0.5 GB at production size
  }
  return *eig_;
}

void DiscretizedHamiltonian::release_heavy_data() const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  matrix_.reset();
  eig_.reset();
}

double DiscretizedHamiltonian::matrix_norm_estimate() const {
  // Max kinetic eigenvalue plus potential range: cheap upper-bound scale.
  double kmax2 = 0;
  if (scheme == Scheme::Grid) {
    const Vec kx = detail::fourier_wavenumbers(grid.nx, grid.xmax - grid.xmin, false);
    const Vec ky = detail::fourier_wavenumbers(grid.ny, grid.ymax - grid.ymin, false);
    kmax2 = 0.5 * (kx.array().square().maxCoeff() + ky.array().square().maxCoeff());
    double vmax = 0;
    for (const auto& f : fields) vmax = std::max(vmax, std::abs(f.V_D) + std::abs(f.V_c));
    return kmax2 + vmax;
  }
  return matrix().cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace gplvc
