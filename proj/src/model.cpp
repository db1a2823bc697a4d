#include "gplvc/model.hpp"

#include <cmath>

namespace gplvc {

namespace {
constexpr double kCiTolerance = 1e-24;  // on (V_D-V_A)^2 + 4 V_c^2
}

PotentialSample evaluate_potentials(const SubsystemParameters& p, const Vec2& point) {
  const double X = point.x(), Y = point.y();
  if (!std::isfinite(X) || !std::isfinite(Y))
    throw std::invalid_argument("evaluate_potentials: point must be finite");

  PotentialSample s;
  const double wx2 = p.Omega_X * p.Omega_X, wy2 = p.Omega_Y * p.Omega_Y;
  s.V_D = 0.5 * (wx2 * (X + p.X0) * (X + p.X0) + wy2 * (Y + p.Y0) * (Y + p.Y0) + p.Delta);
  s.V_A = 0.5 * (wx2 * (X - p.X0) * (X - p.X0) + wy2 * (Y - p.Y0) * (Y - p.Y0) - p.Delta);
  s.V_c = p.C_X * X + p.C_Y * Y + p.Delta12;

  const double dv = s.V_D - s.V_A;  // = 2 G.R + Delta
  const double disc = dv * dv + 4.0 * s.V_c * s.V_c;
  const double root = std::sqrt(disc);
  const double mean = 0.5 * (s.V_D + s.V_A);
  s.W1 = mean - 0.5 * root;
  s.W2 = mean + 0.5 * root;
  s.theta = std::atan2(2.0 * s.V_c, dv);

  if (disc <= kCiTolerance) {
    s.at_ci = true;
    s.F.setZero();
    return s;
  }
  // grad theta = 2 [ (V_D-V_A) grad V_c - V_c grad(V_D-V_A) ] / disc,
  // with grad V_c = C and grad(V_D-V_A) = 2G.
  const Vec2 C(p.C_X, p.C_Y);
  const Vec2 twoG(2.0 * wx2 * p.X0, 2.0 * wy2 * p.Y0);
  s.F = (dv * C - s.V_c * twoG) / disc;  // = 0.5 grad theta
  return s;
}

double divergence_F(const SubsystemParameters& p, const Vec2& point) {
  const PotentialSample s = evaluate_potentials(p, point);
  if (s.at_ci) throw NumericalError("divergence_F: singular at the CI point");
  const Vec2 C(p.C_X, p.C_Y);
  const Vec2 G(p.Omega_X * p.Omega_X * p.X0, p.Omega_Y * p.Omega_Y * p.Y0);
  const double dv = s.V_D - s.V_A;
  const double disc = dv * dv + 4.0 * s.V_c * s.V_c;
  // div F = -[4 dv^2 (C.G) + 8 dv V_c (|C|^2 - |G|^2) - 16 V_c^2 (C.G)] / disc^2
  const double cg = C.dot(G);
  const double num = 4.0 * dv * dv * cg + 8.0 * dv * s.V_c * (C.squaredNorm() - G.squaredNorm()) -
                     16.0 * s.V_c * s.V_c * cg;
  return -num / (disc * disc);
}

Vec2 lower_adiabatic_vector(double theta) {
  // Lower eigenvector of [[V_A, V_c],[V_c, V_D]] in (A, D) components. The
  // sign flip for theta < 0 moves the section's discontinuity from the
  // donor-side ray (theta = +-pi) to the acceptor-side zero-coupling ray.
  const double s = theta < 0 ? -1.0 : 1.0;
  return Vec2(-s * std::cos(0.5 * theta), s * std::sin(0.5 * theta));
}

Geometry derive_geometry(const SubsystemParameters& p) {
  if (p.X0 == 0.0 && p.Y0 == 0.0)
    throw std::invalid_argument("derive_geometry: X0 = Y0 = 0 leaves no tuning direction");

  Geometry g;
  g.G = Vec2(p.Omega_X * p.Omega_X * p.X0, p.Omega_Y * p.Omega_Y * p.Y0);
  g.tuning_direction = Vec2(p.X0, p.Y0).normalized();
  // V_D - V_A = 2 G.R + Delta
  g.degeneracy_line = {2.0 * g.G.x(), 2.0 * g.G.y(), p.Delta};
  g.zero_coupling_line = {p.C_X, p.C_Y, p.Delta12};

  Eigen::Matrix2d A;
  A << g.degeneracy_line.a, g.degeneracy_line.b, g.zero_coupling_line.a, g.zero_coupling_line.b;
  const double det = A.determinant();
  const double scale = std::max(g.G.norm(), Vec2(p.C_X, p.C_Y).norm());
  if (std::abs(det) > 1e-12 * std::max(1.0, scale * scale)) {
    Vec2 rhs(-g.degeneracy_line.c0, -g.zero_coupling_line.c0);
    g.ci_point = A.inverse() * rhs;
  }
  return g;
}

std::vector<Diagnostic> validate(const LvcParameters& lvc) {
  std::vector<Diagnostic> out;
  auto err = [&](const std::string& field, const std::string& msg) {
    out.push_back({Diagnostic::Severity::Error, field, msg});
  };
  if (lvc.n_modes <= 0) err("n_modes", "must be positive");
  if (lvc.omega.size() != lvc.n_modes) err("omega", "length must equal n_modes");
  for (int j = 0; j < lvc.omega.size(); ++j)
    if (!(lvc.omega[j] > 0)) err("omega", "frequency " + std::to_string(j) + " not positive");
  if (lvc.kappa.size() != lvc.n_modes) err("kappa", "length must equal n_modes");
  if (lvc.kappa_tilde.size() != lvc.n_modes) err("kappa_tilde", "length must equal n_modes");
  if (lvc.c.size() != lvc.n_modes) err("c", "length must equal n_modes");
  return out;
}

std::vector<Diagnostic> validate(const SystemBathModel& model) {
  std::vector<Diagnostic> out;
  auto err = [&](const std::string& field, const std::string& msg) {
    out.push_back({Diagnostic::Severity::Error, field, msg});
  };
  const auto& p = model.subsystem;
  if (!(p.Omega_X > 0)) err("Omega_X", "must be strictly positive");
  if (!(p.Omega_Y > 0)) err("Omega_Y", "must be strictly positive");
  const auto& b = model.bath;
  for (int j = 0; j < b.Omega.size(); ++j)
    if (!(b.Omega[j] > 0)) err("bath.Omega", "frequency " + std::to_string(j) + " not positive");
  if (b.lambda_X.size() != b.Omega.size())
    err("bath.lambda_X", "length must match bath.Omega");
  if (b.lambda_Y.size() != b.Omega.size())
    err("bath.lambda_Y", "length must match bath.Omega");
  if (b.temperature < 0) err("bath.temperature", "must be non-negative");
  return out;
}

}  // namespace gplvc
