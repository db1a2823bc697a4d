#pragma once

#include "gplvc/representation.hpp"

namespace gplvc {

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> P_D;
  std::vector<double> pop_adi_1;
  std::vector<double> pop_adi_2;
  std::vector<double> trace;   // state norm (closed) or density trace (open)
  std::vector<double> energy;

  size_t size() const { return times.size(); }
};

// Lower-adiabatic nuclear density sampled on a grid. `values(j, i)` is the
// density (per unit area) at (x_i, y_j); integral = sum * cell area.
struct DensityGrid {
  double time = 0.0;
  GridSpec grid;
  Mat values;  // ny x nx, non-negative

  double integral() const { return values.sum() * grid.cell_area(); }
};

struct NodeDiagnostic {
  double strip_fraction = 0.0;
  double epsilon = 0.15;
  bool defined = true;  // false when the acceptor side holds no density
};

// tr(rho P_D), clamped to [0, 1]. The projector acts on nuclear coordinates
// only: 1 on the donor side of the degeneracy line (2 G.R + Delta < 0).
double donor_population(const DensityState& state, const DiscretizedHamiltonian& H);
double donor_population(const CMat& rho_eig, const Mat& projector_eig);

// Adiabatic surface populations {pop_1, pop_2} via the pointwise projector.
std::pair<double, double> adiabatic_populations(const DensityState& state,
                                                const DiscretizedHamiltonian& H);

// Pointwise <phi1_adi | rho | phi1_adi>. HoBasis states are resampled onto
// `out_grid` (pass the production grid); Grid states use their own grid.
DensityGrid adiabatic_density(const DensityState& state, const DiscretizedHamiltonian& H,
                              double time, const GridSpec& out_grid);

// Fraction of acceptor-side density lying within distance epsilon of the
// tuning line. Small values against the uniform baseline flag a nodal line.
NodeDiagnostic node_diagnostic(const DensityGrid& g, const Geometry& geometry,
                               double epsilon = 0.15);

// strip_fraction of a uniform density on the same grid and geometry.
double uniform_strip_baseline(const GridSpec& grid, const Geometry& geometry,
                              double epsilon = 0.15);

}  // namespace gplvc
