#pragma once

#include <memory>
#include <mutex>

#include "gplvc/model.hpp"

namespace gplvc {

enum class Representation { DiabaticWithGp, AdiabaticNoGp };
enum class Scheme { Grid, HoBasis };

const char* to_string(Representation r);
const char* to_string(Scheme s);

// Uniform periodic Fourier grid. nx, ny must be powers of two >= 16.
struct GridSpec {
  int nx = 64, ny = 64;
  double xmin = -6, xmax = 6, ymin = -6, ymax = 6;

  double dx() const { return (xmax - xmin) / nx; }
  double dy() const { return (ymax - ymin) / ny; }
  double cell_area() const { return dx() * dy(); }
  double x(int i) const { return xmin + i * dx(); }
  double y(int j) const { return ymin + j * dy(); }
  int index(int i, int j) const { return i * ny + j; }  // x-major
  int n_points() const { return nx * ny; }
};

// Product basis of harmonic-oscillator eigenfunctions of a reference
// oscillator. States (n_x, n_y) with n_x <= n_max_x, n_y <= n_max_y and
// n_x + n_y <= n_total_max.
struct HoBasisSpec {
  int n_max_x = 40, n_max_y = 40;
  int n_total_max = 60;
  Vec2 center = Vec2::Zero();
  double freq_x = 0.0, freq_y = 0.0;  // 0 = take the subsystem frequencies
};

struct Eigensystem {
  Vec energies;  // ascending
  Mat vectors;   // columns, orthonormal
};

// Subsystem Hamiltonian projected on a finite single-valued basis, in either
// the diabatic (GP included) or adiabatic (GP excluded) representation.
// Electronic component order is (A, D) for the diabatic representation and
// (lower, upper) surface for the adiabatic one; nuclear index is x-major.
class DiscretizedHamiltonian {
 public:
  Representation representation{};
  Scheme scheme{};
  SubsystemParameters params;

  GridSpec grid;                          // valid when scheme == Grid
  std::vector<PotentialSample> fields;    // per grid point
  std::vector<std::pair<int, int>> ho_states;  // valid when scheme == HoBasis
  HoBasisSpec ho;

  std::vector<std::string> warnings;

  DiscretizedHamiltonian() = default;
  DiscretizedHamiltonian(DiscretizedHamiltonian&& other) noexcept { *this = std::move(other); }
  DiscretizedHamiltonian& operator=(DiscretizedHamiltonian&& other) noexcept {
    representation = other.representation;
    scheme = other.scheme;
    params = other.params;
    grid = other.grid;
    fields = std::move(other.fields);
    ho_states = std::move(other.ho_states);
    ho = other.ho;
    warnings = std::move(other.warnings);
    matrix_ = std::move(other.matrix_);
    eig_ = std::move(other.eig_);
    return *this;
  }

  int n_nuclear() const {
    return scheme == Scheme::Grid ? grid.n_points() : static_cast<int>(ho_states.size());
  }
  int dim() const { return 2 * n_nuclear(); }

  // Matrix-free action (FFT-based kinetic term on the grid scheme).
  void apply(const CVec& in, CVec& out) const;
  CVec apply(const CVec& in) const;

  const Mat& matrix() const;             // dense, built on first use
  const Eigensystem& eigensystem() const;  // cached dense diagonalization
  void release_heavy_data() const;       // drops dense matrix + eigensystem

  double matrix_norm_estimate() const;

 private:
  friend DiscretizedHamiltonian build_diabatic(const SubsystemParameters&, const GridSpec&);
  friend DiscretizedHamiltonian build_diabatic(const SubsystemParameters&, const HoBasisSpec&);
  friend DiscretizedHamiltonian build_adiabatic_no_gp(const SubsystemParameters&, const GridSpec&);

  void build_matrix() const;

  mutable std::mutex cache_mutex_;
  mutable std::unique_ptr<Mat> matrix_;
  mutable std::unique_ptr<Eigensystem> eig_;
};

DiscretizedHamiltonian build_diabatic(const SubsystemParameters& p, const GridSpec& scheme);
DiscretizedHamiltonian build_diabatic(const SubsystemParameters& p, const HoBasisSpec& scheme);
DiscretizedHamiltonian build_adiabatic_no_gp(const SubsystemParameters& p, const GridSpec& scheme);

enum class SubsystemOperator { X, Y, DonorProjector, AdiabaticProjection1, AdiabaticProjection2 };

// Dense operator matrix in the basis of `H` (electronic x nuclear layout).
Mat operator_matrix(SubsystemOperator op, const DiscretizedHamiltonian& H);

// Pure subsystem state over the basis of a discretized Hamiltonian, or a
// density operator expressed in its (possibly truncated) eigenbasis.
struct DensityState {
  Representation representation{};
  Scheme scheme{};
  bool pure = true;
  CVec psi;       // pure state, full basis
  CMat rho;       // density in eigenbasis, used by open dynamics
  Vec energies;   // eigenvalues matching rho's basis
  Mat basis;      // basis columns (dim x K) matching rho

  double norm() const;
};

// Ground vibrational state of T_S + V_D placed on the lower adiabatic
// electronic state; normalized on the discrete basis.
DensityState prepare_initial_state(const DiscretizedHamiltonian& H);

// Donor-well Gaussian on the bare donor diabat (used by perturbation-theory
// cross-checks; diabatic representation only).
DensityState prepare_diabatic_donor_ground(const DiscretizedHamiltonian& H);

// Evaluates an HoBasis-scheme nuclear component on a grid (for densities).
// Coefficient layout must match H; returns the two electronic components.
std::pair<CVec, CVec> resample_to_grid(const DiscretizedHamiltonian& H, const CVec& psi,
                                       const GridSpec& out_grid);

namespace detail {
// 1D periodic spectral differentiation matrices (exact circulants).
Mat fourier_second_derivative(int n, double length);
Mat fourier_first_derivative(int n, double length);
// Normalized HO eigenfunction value phi_n(x) for frequency nu, center gamma.
void ho_function_column(int n_max, double nu, double gamma, double x, double* out);
}  // namespace detail

}  // namespace gplvc
