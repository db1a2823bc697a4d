#include "gplvc/open_dynamics.hpp"

#include <cmath>

#include "internal.hpp"

namespace gplvc {

BathParameters discretize_ohmic(const OhmicSpec& spec) {
  if (spec.xi < 0) throw std::invalid_argument("ohmic: xi must be >= 0");
  if (!(spec.Omega_c > 0)) throw std::invalid_argument("ohmic: Omega_c must be > 0");
  if (spec.n_modes < 1) throw std::invalid_argument("ohmic: n_modes must be >= 1");
  const double Omega_max = spec.Omega_max > 0 ? spec.Omega_max : 3.0 * spec.Omega_c;

  const int n = spec.n_modes;
  const double Omega_0 = spec.Omega_c * (1.0 - std::exp(-Omega_max / spec.Omega_c)) / n;
  BathParameters b;
  b.Omega.resize(n);
  b.lambda_X = Vec::Zero(n);
  b.lambda_Y = Vec::Zero(n);
  b.temperature = spec.temperature;
  for (int j = 1; j <= n; ++j) {
    const double arg = 1.0 - j * Omega_0 / spec.Omega_c;
    if (!(arg > 0)) throw NumericalError("ohmic: logarithm argument not positive");
    b.Omega[j - 1] = -spec.Omega_c * std::log(arg);
    const double lam = b.Omega[j - 1] * std::sqrt(spec.xi * Omega_0);
    if (spec.couple_to == CouplingAxis::X)
      b.lambda_X[j - 1] = lam;
    else
      b.lambda_Y[j - 1] = lam;
  }
  return b;
}

cplx bath_correlation(double Omega_j, double temperature, double t) {
  if (temperature < 0) throw std::invalid_argument("bath_correlation: T must be >= 0");
  if (!(Omega_j > 0)) throw std::invalid_argument("bath_correlation: Omega_j must be > 0");
  const cplx quantum(std::cos(Omega_j * t), -std::sin(Omega_j * t));
  cplx c = quantum;
  if (temperature > 0) {
    const double nbar = 1.0 / std::expm1(Omega_j / temperature);
    c += 2.0 * std::cos(Omega_j * t) * nbar;
  }
  return c / (2.0 * Omega_j);
}

namespace {

// I(a, t) = (1 - exp(-i a t)) / (i a) = t exp(-i a t / 2) sinc(a t / 2),
// exact and stable through a = 0.
cplx phase_integral(double a, double t) {
  const double half = 0.5 * a * t;
  const double snc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
  return t * snc * cplx(std::cos(half), -std::sin(half));
}

}  // namespace

cplx dressed_integral(double omega, double Omega_j, double temperature, double t) {
  if (t < 0) throw std::invalid_argument("dressed_integral: t must be >= 0");
  const double w = 1.0 / (2.0 * Omega_j);
  cplx eta = w * phase_integral(omega + Omega_j, t);
  if (temperature > 0) {
    const double nbar = 1.0 / std::expm1(Omega_j / temperature);
    eta += w * nbar * (phase_integral(omega + Omega_j, t) + phase_integral(omega - Omega_j, t));
  }
  return eta;
}

// --- dressed-operator cache -------------------------------------------------

struct DressedCache::Kernel {
  int axis_a = 0, axis_b = 0;  // 0 = X, 1 = Y
  // S(w_mn, t) = -i P_mn + i E_mn (W g(t))_mn with W_(mn),b = u_b / (w_mn + nu_b),
  // g_b(t) = exp(-i nu_b t). Near-resonant entries are carried separately.
  Mat W;        // (K*K) x B
  Mat P;        // K x K row sums of W
  Vec nu;       // branch frequencies (+Omega_j, and -Omega_j at T > 0)
  std::vector<std::tuple<int, int, int, double>> patches;  // (m, n, branch, u_b)
};

DressedCache::DressedCache(const Vec& energies, Mat X_eig, Mat Y_eig, const BathParameters& bath)
    : energies_(energies), X_(std::move(X_eig)), Y_(std::move(Y_eig)) {
  const int K = static_cast<int>(energies_.size());
  omega_.resize(K, K);
  for (int m = 0; m < K; ++m)
    for (int n = 0; n < K; ++n) omega_(m, n) = energies_[m] - energies_[n];
  bath_Omega_ = bath.Omega;
  const int J = bath.n_modes();
  has_x_ = bath.lambda_X.size() == J && J > 0 && bath.lambda_X.cwiseAbs().maxCoeff() > 0;
  has_y_ = bath.lambda_Y.size() == J && J > 0 && bath.lambda_Y.cwiseAbs().maxCoeff() > 0;

  // Branch list: quantum part with weight (1 + nbar), thermal mirror with nbar.
  const double T = bath.temperature;
  std::vector<double> nu;
  std::vector<double> base;  // per-branch weight factor excluding lambda products
  for (int j = 0; j < J; ++j) {
    const double nbar = T > 0 ? 1.0 / std::expm1(bath.Omega[j] / T) : 0.0;
    nu.push_back(bath.Omega[j]);
    base.push_back((1.0 + nbar) / (2.0 * bath.Omega[j]));
    if (T > 0) {
      nu.push_back(-bath.Omega[j]);
      base.push_back(nbar / (2.0 * bath.Omega[j]));
    }
  }
  const int B = static_cast<int>(nu.size());

  auto make_kernel = [&](int aa, int ab) {
    Kernel k;
    k.axis_a = aa;
    k.axis_b = ab;
    k.nu = Eigen::Map<const Vec>(nu.data(), B);
    k.W.setZero(K * K, B);
    k.P.setZero(K, K);
    const Vec& la = aa == 0 ? bath.lambda_X : bath.lambda_Y;
    const Vec& lb = ab == 0 ? bath.lambda_X : bath.lambda_Y;
    for (int b = 0; b < B; ++b) {
      const int j = T > 0 ? b / 2 : b;
      const double u = la[j] * lb[j] * base[b];
      if (u == 0.0) continue;
      for (int m = 0; m < K; ++m)
        for (int n = 0; n < K; ++n) {
          const double a = omega_(m, n) + nu[b];
          if (std::abs(a) < 1e-6) {
            k.patches.emplace_back(m, n, b, u);
            continue;
          }
          k.W(m * K + n, b) = u / a;
          k.P(m, n) += u / a;
        }
    }
    return k;
  };
  if (has_x_) kernels_.push_back(make_kernel(0, 0));
  if (has_y_) kernels_.push_back(make_kernel(1, 1));
  if (has_x_ && has_y_) {
    kernels_.push_back(make_kernel(0, 1));  // S_XY = S_YX
  }
}

void DressedCache::eval_kernel(const Kernel& k, double t, CMat& out) const {
  const int K = dim();
  const int B = static_cast<int>(k.nu.size());
  CVec g(B);
  for (int b = 0; b < B; ++b) g[b] = cplx(std::cos(k.nu[b] * t), -std::sin(k.nu[b] * t));
  Vec wg_re = k.W * g.real().matrix();
  Vec wg_im = k.W * g.imag().matrix();
  out.resize(K, K);
  const cplx I(0, 1);
  for (int m = 0; m < K; ++m)
    for (int n = 0; n < K; ++n) {
      const double ph = -omega_(m, n) * t;
      const cplx E(std::cos(ph), std::sin(ph));
      out(m, n) = -I * k.P(m, n) + I * E * cplx(wg_re[m * K + n], wg_im[m * K + n]);
    }
  for (const auto& [m, n, b, u] : k.patches)
    out(m, n) += u * phase_integral(omega_(m, n) + k.nu[b], t);
}

void DressedCache::dressed_operators(double t, CMat* B_X, CMat* B_Y) const {
  const int K = dim();
  if (B_X) B_X->setZero(K, K);
  if (B_Y) B_Y->setZero(K, K);
  CMat S;
  for (const auto& k : kernels_) {
    eval_kernel(k, t, S);
    const Mat& Ab = k.axis_b == 0 ? X_ : Y_;
    if (k.axis_a == k.axis_b) {
      CMat* dst = k.axis_a == 0 ? B_X : B_Y;
      if (dst) *dst += S.cwiseProduct(Ab.cast<cplx>());
    } else {
      // Cross kernel feeds both axes: B_X += S o Y, B_Y += S o X.
      if (B_X) *B_X += S.cwiseProduct(Y_.cast<cplx>());
      if (B_Y) *B_Y += S.cwiseProduct(X_.cast<cplx>());
    }
  }
}

DressedCache::~DressedCache() = default;
DressedCache::DressedCache(DressedCache&&) noexcept = default;
DressedCache& DressedCache::operator=(DressedCache&&) noexcept = default;

CMat tcl2_rhs(const CMat& rho, double t, const DressedCache& cache) {
  const int K = cache.dim();
  if (rho.rows() != K || rho.cols() != K)
    throw std::invalid_argument("tcl2_rhs: dimension mismatch");
  CMat out(K, K);
  for (int m = 0; m < K; ++m)
    for (int n = 0; n < K; ++n)
      out(m, n) = cplx(0, -1) * (cache.energies()[m] - cache.energies()[n]) * rho(m, n);

  CMat BX, BY;
  cache.dressed_operators(t, cache.has_x() ? &BX : nullptr, cache.has_y() ? &BY : nullptr);
  auto dissipate = [&](const Mat& A, const CMat& B) {
    const CMat Ac = A.cast<cplx>();
    const CMat T1 = B * rho;
    out -= Ac * T1 - T1 * Ac;
    const CMat T2 = rho * B.adjoint();
    out -= T2 * Ac - Ac * T2;
  };
  if (cache.has_x()) dissipate(cache.X(), BX);
  if (cache.has_y()) dissipate(cache.Y(), BY);
  return out;
}

// --- TCL2 propagation --------------------------------------------------------

namespace {

// Projects an operator onto the kept eigenvector columns without forming the
// full dense operator when the grid layout allows it.
Mat project_operator(SubsystemOperator op, const DiscretizedHamiltonian& H, const Mat& Vk) {
  const int K = static_cast<int>(Vk.cols());
  const int n = H.n_nuclear();
  if (H.scheme == Scheme::HoBasis)
    return Vk.transpose() * operator_matrix(op, H) * Vk;

  Mat tmp(Vk.rows(), K);
  const auto& g = H.grid;
  switch (op) {
    case SubsystemOperator::X:
    case SubsystemOperator::Y: {
      Vec diag(n);
      for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
          diag[g.index(i, j)] = op == SubsystemOperator::X ? g.x(i) : g.y(j);
      tmp.topRows(n) = diag.asDiagonal() * Vk.topRows(n);
      tmp.bottomRows(n) = diag.asDiagonal() * Vk.bottomRows(n);
      break;
    }
    case SubsystemOperator::DonorProjector: {
      const auto& p = H.params;
      const double gx = 2.0 * p.Omega_X * p.Omega_X * p.X0;
      const double gy = 2.0 * p.Omega_Y * p.Omega_Y * p.Y0;
      Vec diag(n);
      for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
          diag[g.index(i, j)] = gx * g.x(i) + gy * g.y(j) + p.Delta < 0 ? 1.0 : 0.0;
      tmp.topRows(n) = diag.asDiagonal() * Vk.topRows(n);
      tmp.bottomRows(n) = diag.asDiagonal() * Vk.bottomRows(n);
      break;
    }
    case SubsystemOperator::AdiabaticProjection1: {
      if (H.representation == Representation::AdiabaticNoGp) {
        tmp.topRows(n) = Vk.topRows(n);
        tmp.bottomRows(n).setZero();
      } else {
        for (int idx = 0; idx < n; ++idx) {
          const double c = std::cos(0.5 * H.fields[idx].theta);
          const double s = std::sin(0.5 * H.fields[idx].theta);
          const double aa = c * c, ad = -c * s, dd = s * s;
          tmp.row(idx) = aa * Vk.row(idx) + ad * Vk.row(n + idx);
          tmp.row(n + idx) = ad * Vk.row(idx) + dd * Vk.row(n + idx);
        }
      }
      break;
    }
    default:
      throw std::logic_error("project_operator: unsupported operator");
  }
  return Vk.transpose() * tmp;
}

struct StageOps {
  CMat Ax, Bx, Ay, By;
};

}  // namespace

OpenRunResult propagate_tcl2(const SystemBathModel& model, const DiscretizedHamiltonian& H,
                             const DensityState& rho0, const PropagationPlan& plan,
                             const Tcl2Options& opts, const GridSpec* snapshot_grid) {
  plan.validate();
  if (!rho0.pure)
    throw std::invalid_argument("propagate_tcl2: initial state must be the pure prepared state");
  if (rho0.representation != H.representation || rho0.scheme != H.scheme)
    throw std::invalid_argument("propagate_tcl2: state and Hamiltonian disagree");
  {
    auto diags = validate(model);
    if (has_errors(diags))
      throw std::invalid_argument("propagate_tcl2: invalid model: " + diags.front().message);
  }

  OpenRunResult res;
  const auto& es = H.eigensystem();
  const int M = H.dim();
  CVec c(M);
  c.real() = es.vectors.transpose() * rho0.psi.real();
  c.imag() = es.vectors.transpose() * rho0.psi.imag();

  // Truncation: energy window plus capture target, capped.
  const double E0 = es.energies[0];
  int K_window = 0;
  while (K_window < M && es.energies[K_window] < E0 + opts.energy_window) ++K_window;
  double cum = 0;
  int K_capture = M;
  for (int k = 0; k < M; ++k) {
    cum += std::norm(c[k]);
    if (1.0 - cum <= opts.capture_target) {
      K_capture = k + 1;
      break;
    }
  }
  int K = std::min({std::max(K_window, K_capture), opts.max_states, M});
  res.n_states = K;
  res.captured_mass = c.head(K).squaredNorm();
  if (res.captured_mass < 1.0 - opts.capture_target)
    res.warnings.push_back("eigenbasis truncation captures " + std::to_string(res.captured_mass) +
                           " of the initial state (cap reached)");

  const Mat Vk = es.vectors.leftCols(K);
  const Vec Ek = es.energies.head(K);
  CVec ck = c.head(K) / c.head(K).norm();
  CMat sigma = ck * ck.adjoint();  // interaction picture; equals rho at t = 0

  const Mat Xe = project_operator(SubsystemOperator::X, H, Vk);
  const Mat Ye = project_operator(SubsystemOperator::Y, H, Vk);
  const Mat Pd = project_operator(SubsystemOperator::DonorProjector, H, Vk);
  const Mat P1 = project_operator(SubsystemOperator::AdiabaticProjection1, H, Vk);
  DressedCache cache(Ek, Xe, Ye, model.bath);

  const bool any_bath = cache.has_x() || cache.has_y();
  const int n_sub = std::max(1, (int)std::ceil(plan.dt_output / opts.dt - 1e-12));
  const double h = plan.dt_output / n_sub;

  auto phases = [&](double t) {
    CVec pi(K);
    for (int k = 0; k < K; ++k) pi[k] = cplx(std::cos(Ek[k] * t), -std::sin(Ek[k] * t));
    return pi;
  };
  auto stage_ops = [&](double t) {
    StageOps ops;
    CMat BX, BY;
    cache.dressed_operators(t, cache.has_x() ? &BX : nullptr, cache.has_y() ? &BY : nullptr);
    const CVec pi = phases(t);
    auto rotate = [&](const CMat& Min) {
      return CMat(pi.conjugate().asDiagonal() * Min * pi.asDiagonal());
    };
    if (cache.has_x()) {
      ops.Ax = rotate(Xe.cast<cplx>());
      ops.Bx = rotate(BX);
    }
    if (cache.has_y()) {
      ops.Ay = rotate(Ye.cast<cplx>());
      ops.By = rotate(BY);
    }
    return ops;
  };
  // For Hermitian s the dissipator per axis is -(D + D^+) with
  // D = A (B s) - (B s) A, which costs three gemms.
  CMat T1(K, K), MA(K, K), rhs_buf(K, K);
  auto rhs = [&](const StageOps& ops, const CMat& s) -> const CMat& {
    rhs_buf.setZero();
    auto dissipate = [&](const CMat& A, const CMat& B) {
      detail::zgemm_nn(1.0, B, s, 0.0, T1);
      detail::zgemm_nn(1.0, A, T1, 0.0, MA);   // MA = A T1
      detail::zgemm_nn(-1.0, T1, A, 1.0, MA);  // MA = A T1 - T1 A
      rhs_buf -= MA + MA.adjoint();
    };
    if (cache.has_x()) dissipate(ops.Ax, ops.Bx);
    if (cache.has_y()) dissipate(ops.Ay, ops.By);
    return rhs_buf;
  };

  const std::vector<double> out_times = plan.output_times();
  const GridSpec snap_grid =
      snapshot_grid ? *snapshot_grid : (H.scheme == Scheme::Grid ? H.grid : GridSpec{});
  double max_herm = 0, max_trace_drift = 0;
  double min_eig = 1.0;
  const double tr0 = sigma.trace().real();

  StageOps ops_t = any_bath ? stage_ops(0.0) : StageOps{};
  double t = 0;
  for (size_t k_out = 0; k_out < out_times.size(); ++k_out) {
    if (k_out > 0) {
      for (int s = 0; s < n_sub; ++s) {
        if (any_bath) {
          const StageOps ops_mid = stage_ops(t + 0.5 * h);
          const StageOps ops_end = stage_ops(t + h);
          const CMat k1 = rhs(ops_t, sigma);
          const CMat k2 = rhs(ops_mid, sigma + (0.5 * h) * k1);
          const CMat k3 = rhs(ops_mid, sigma + (0.5 * h) * k2);
          const CMat k4 = rhs(ops_end, sigma + h * k3);
          sigma += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
          ops_t = ops_end;
          const double herm = (sigma - sigma.adjoint()).norm();
          max_herm = std::max(max_herm, herm);
          sigma = 0.5 * (sigma + sigma.adjoint().eval());
        }
        t += h;
      }
      t = out_times[k_out];  // keep the clock exact across many steps
    }

    max_trace_drift = std::max(max_trace_drift, std::abs(sigma.trace().real() - tr0));
    const CVec pi = phases(t);
    const CMat rho = pi.asDiagonal() * sigma * pi.conjugate().asDiagonal();

    Eigen::SelfAdjointEigenSolver<CMat> esol(rho, Eigen::EigenvaluesOnly);
    const double mn = esol.eigenvalues().minCoeff();
    min_eig = std::min(min_eig, mn);
    if (mn < -1e-2)
      throw NumericalError("TCL2: density eigenvalue " + std::to_string(mn) +
                           " below -1e-2 at t = " + std::to_string(t));
    if (mn < -1e-4)
      res.warnings.push_back("TCL2: negative density eigenvalue " + std::to_string(mn) +
                             " at t = " + std::to_string(t));

    const double trace = rho.trace().real();
    const double pd = donor_population(rho, Pd);
    const double p1 = (rho * P1.cast<cplx>()).trace().real();
    double energy = 0;
    for (int k = 0; k < K; ++k) energy += rho(k, k).real() * Ek[k];
    res.series.times.push_back(t);
    res.series.P_D.push_back(pd);
    res.series.pop_adi_1.push_back(p1);
    res.series.pop_adi_2.push_back(trace - p1);
    res.series.trace.push_back(trace);
    res.series.energy.push_back(energy);

    for (double ts : plan.snapshot_times)
      if (std::abs(ts - t) < 0.5 * plan.dt_output) {
        DensityState st;
        st.representation = H.representation;
        st.scheme = H.scheme;
        st.pure = false;
        st.rho = rho;
        st.energies = Ek;
        st.basis = Vk;
        res.snapshots.push_back(adiabatic_density(st, H, ts, snap_grid));
      }
  }
  res.min_rho_eigenvalue = min_eig;
  if (max_herm > 1e-9)
    res.warnings.push_back("TCL2: pre-symmetrization Hermiticity deviation " +
                           std::to_string(max_herm));
  if (max_trace_drift > 1e-8 * std::max(1.0, plan.t_final / 100.0))
    res.warnings.push_back("TCL2: trace drift " + std::to_string(max_trace_drift));
  return res;
}

}  // namespace gplvc
