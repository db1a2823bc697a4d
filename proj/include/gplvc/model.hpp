#pragma once

#include <optional>

#include "gplvc/types.hpp"

namespace gplvc {

// Raw N-mode two-state linear vibronic coupling model in mass-weighted
// coordinates. Atomic units throughout.
struct LvcParameters {
  int n_modes = 0;
  Vec omega;        // frequencies, all > 0
  Vec kappa;        // state-1 linear couplings
  Vec kappa_tilde;  // state-2 linear couplings
  Vec c;            // inter-state linear couplings
  double delta = 0.0;  // diabatic energy offset
};

// Two-dimensional coupled subsystem after the effective-mode transformation.
// Diabatic potentials: V_D = [Omega_X^2 (X+X0)^2 + Omega_Y^2 (Y+Y0)^2 + Delta]/2,
// V_A the mirror image with -Delta, V_c = C_X X + C_Y Y + Delta12.
struct SubsystemParameters {
  double Omega_X = 1.0, Omega_Y = 1.0;
  double X0 = 0.0, Y0 = 0.0;
  double Delta = 0.0;          // donor minus acceptor minimum energy
  double C_X = 0.0, C_Y = 0.0;
  double Delta12 = 0.0;

  // Tuning, coupling and degeneracy directions all axis-aligned and orthogonal.
  bool symmetric_setup(double tol = 0.0) const {
    return std::abs(Y0) <= tol && std::abs(Delta) <= tol &&
           std::abs(Delta12) <= tol && std::abs(C_X) <= tol;
  }
};

// Discrete harmonic bath bilinearly coupled to the subsystem coordinates.
struct BathParameters {
  Vec Omega;     // bath frequencies, all > 0
  Vec lambda_X;  // couplings to X, same length as Omega
  Vec lambda_Y;  // couplings to Y
  double temperature = 0.0;  // in energy units (k_B = 1)

  int n_modes() const { return static_cast<int>(Omega.size()); }
  static BathParameters empty() { return {Vec(0), Vec(0), Vec(0), 0.0}; }
};

struct SystemBathModel {
  SubsystemParameters subsystem;
  BathParameters bath;
};

// a*X + b*Y + c0 = 0
struct Line {
  double a = 0, b = 0, c0 = 0;
};

// Geometric elements of the subsystem Hamiltonian.
struct Geometry {
  Vec2 G;                     // (Omega_X^2 X0, Omega_Y^2 Y0), normal to the degeneracy line
  Vec2 tuning_direction;      // unit vector along (X0, Y0)
  Line degeneracy_line;       // V_D = V_A
  Line zero_coupling_line;    // V_c = 0
  std::optional<Vec2> ci_point;
};

// Point evaluation of the diabatic/adiabatic potential data.
struct PotentialSample {
  double V_D = 0, V_A = 0, V_c = 0;
  double W1 = 0, W2 = 0;   // adiabatic surfaces, W1 <= W2
  double theta = 0;        // mixing angle, atan2(2 V_c, V_D - V_A), in (-pi, pi]
  Vec2 F;                  // half gradient of theta (derivative coupling)
  bool at_ci = false;      // degeneracy point: F undefined, left zero
};

PotentialSample evaluate_potentials(const SubsystemParameters& p, const Vec2& point);

Geometry derive_geometry(const SubsystemParameters& p);

std::vector<Diagnostic> validate(const LvcParameters& lvc);
std::vector<Diagnostic> validate(const SystemBathModel& model);

// Lower adiabatic electronic state at a point, components in (A, D) order.
// Single-valued section whose discontinuity ray lies on the acceptor side of
// the zero-coupling line, away from the initial density.
Vec2 lower_adiabatic_vector(double theta);

// Analytic divergence of F at a point (used by derivative-coupling checks).
double divergence_F(const SubsystemParameters& p, const Vec2& point);

}  // namespace gplvc
