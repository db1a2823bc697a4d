#pragma once

#include "gplvc/observables.hpp"

namespace gplvc {

enum class Propagator { EigenbasisExact, SplitStep };

struct PropagationPlan {
  double t_final = 100.0;
  double dt_output = 0.5;
  Propagator propagator = Propagator::EigenbasisExact;
  double split_step_dt = 0.002;
  double rk4_dt = 0.01;  // open dynamics
  std::vector<double> snapshot_times;

  std::vector<double> output_times() const;
  void validate() const;
};

struct RunResult {
  TimeSeries series;
  std::vector<DensityGrid> snapshots;
  DensityState final_state;  // at t_final
};

// Unitary propagation of a pure state. Eigenbasis-exact mode expands in the
// dense eigensystem and applies phases; split-step mode (diabatic only) uses
// Strang splitting of T and V. Snapshots are rendered on `snapshot_grid`
// (HoBasis runs) or the Hamiltonian's own grid.
RunResult propagate_closed(const DiscretizedHamiltonian& H, const DensityState& s0,
                           const PropagationPlan& plan,
                           const GridSpec* snapshot_grid = nullptr);

// <H> for a pure state or tr(rho H) for an eigenbasis density.
double energy_audit(const DiscretizedHamiltonian& H, const DensityState& state);

}  // namespace gplvc
