#pragma once

#include "gplvc/closed_dynamics.hpp"

namespace gplvc {

enum class CouplingAxis { X, Y };

// Ohmic spectral density J(W) discretized on a logarithmic frequency ladder:
//   W_0 = W_c (1 - exp(-W_max/W_c)) / n_modes,
//   W_j = -W_c ln(1 - j W_0 / W_c),   lambda_j = W_j sqrt(xi W_0),
// which places W_{n_modes} = W_max exactly.
struct OhmicSpec {
  double xi = 0.0;        // Kondo parameter
  double Omega_c = 3.5;   // cutoff
  int n_modes = 100;
  double Omega_max = 0.0;  // 0 = default 3 Omega_c
  CouplingAxis couple_to = CouplingAxis::Y;
  double temperature = 0.0;
};

BathParameters discretize_ohmic(const OhmicSpec& spec);

// Thermal bath autocorrelation <Q_j(0) Q_j(t)> for one harmonic mode.
cplx bath_correlation(double Omega_j, double temperature, double t);

// eta_j(w, t) = integral_0^t exp(-i w t') C_j(t') dt' in closed form, with the
// resonance w = -Omega_j handled by the exact sinc limit.
cplx dressed_integral(double omega, double Omega_j, double temperature, double t);

// Bohr frequencies, coupling operators in the H_S eigenbasis and the kernel
// sums S_ab(w_mn, t) = sum_j lambda_ja lambda_jb eta_j(w_mn, t) needed to
// assemble the time-local dissipator.
class DressedCache {
 public:
  DressedCache(const Vec& energies, Mat X_eig, Mat Y_eig, const BathParameters& bath);
  ~DressedCache();
  DressedCache(DressedCache&&) noexcept;
  DressedCache& operator=(DressedCache&&) noexcept;

  int dim() const { return static_cast<int>(energies_.size()); }
  const Mat& X() const { return X_; }
  const Mat& Y() const { return Y_; }
  const Vec& energies() const { return energies_; }
  bool has_x() const { return has_x_; }
  bool has_y() const { return has_y_; }

  // Dressed operators B_X(t), B_Y(t) with B_a = sum_b S_ab(w, t) o A_b.
  void dressed_operators(double t, CMat* B_X, CMat* B_Y) const;

 private:
  struct Kernel;  // one axis pair (XX, XY, YY)
  void eval_kernel(const Kernel& k, double t, CMat& out) const;

  Vec energies_;
  Mat X_, Y_;
  Mat omega_;  // omega_mn = E_m - E_n
  bool has_x_ = false, has_y_ = false;
  std::vector<Kernel> kernels_;
  Vec bath_Omega_;
};

// Full time-convolutionless generator at second order in the coupling:
//   drho/dt = -i[H, rho] - sum_a [A_a, B_a(t) rho] - sum_a [rho B_a(t)^+, A_a].
// rho is given in the H_S eigenbasis matching `cache`.
CMat tcl2_rhs(const CMat& rho, double t, const DressedCache& cache);

struct Tcl2Options {
  double energy_window = 15.0;   // keep all states below E_0 + window
  double capture_target = 1e-3;  // grow K until missing mass <= target
  int max_states = 256;
  double dt = 0.01;
};

struct OpenRunResult {
  TimeSeries series;
  std::vector<DensityGrid> snapshots;
  int n_states = 0;          // eigenbasis truncation actually used
  double captured_mass = 0;  // |<kept|psi0>|^2 before renormalization
  double min_rho_eigenvalue = 0;
  std::vector<std::string> warnings;
};

// RK4 integration of the TCL2 master equation in the truncated H_S eigenbasis.
// The commutator part is absorbed into exact phase factors (integrating
// factor), so the xi = 0 limit reproduces closed dynamics to round-off.
OpenRunResult propagate_tcl2(const SystemBathModel& model, const DiscretizedHamiltonian& H,
                             const DensityState& rho0, const PropagationPlan& plan,
                             const Tcl2Options& opts = {},
                             const GridSpec* snapshot_grid = nullptr);

}  // namespace gplvc
