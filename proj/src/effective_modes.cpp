#include "gplvc/effective_modes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gplvc {

namespace {

void require_valid(const LvcParameters& lvc) {
  auto diags = validate(lvc);
  if (has_errors(diags))
    throw std::invalid_argument("invalid LVC model: " + diags.front().field + " " +
                                diags.front().message);
}

// Eigen's 2x2/NxN self-adjoint solver, ascending eigenvalues.
void eigh(const Mat& A, Vec& w, Mat& V) {
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  w = es.eigenvalues();
  V = es.eigenvectors();
}

}  // namespace

Vec OrthogonalTransform::to_collective(const Vec& q, const Vec& shift) const {
  const int n = static_cast<int>(O1.rows());
  Vec x = q + shift;
  Vec tilde = O1 * x;
  Vec out(n);
  out.head<2>() = subsystem_rotation * tilde.head<2>();
  if (n > 2) out.tail(n - 2) = bath_rotation * tilde.tail(n - 2);
  return out;
}

TranslatedModel translate_origin(const LvcParameters& lvc) {
  require_valid(lvc);
  const int n = lvc.n_modes;
  TranslatedModel t;
  t.omega = lvc.omega;
  t.shift.resize(n);
  t.d.resize(n);
  t.c = lvc.c;
  double Delta = lvc.delta, Delta12 = 0.0, offset = 0.0;
  for (int j = 0; j < n; ++j) {
    const double w2 = lvc.omega[j] * lvc.omega[j];
    const double sum = lvc.kappa[j] + lvc.kappa_tilde[j];
    t.shift[j] = sum / (2.0 * w2);
    t.d[j] = 0.5 * (lvc.kappa_tilde[j] - lvc.kappa[j]);
    Delta += (lvc.kappa[j] * lvc.kappa[j] - lvc.kappa_tilde[j] * lvc.kappa_tilde[j]) / (2.0 * w2);
    // The translation q = x - s turns the off-diagonal c.q into c.x - c.s.
    Delta12 -= lvc.c[j] * t.shift[j];
    offset -= sum * sum / (8.0 * w2);  // common diagonal constant, dropped
  }
  t.Delta = Delta;
  t.Delta12 = Delta12;
  t.energy_offset = offset;
  return t;
}

OrthogonalTransform separate_subsystem(const TranslatedModel& t) {
  const int n = static_cast<int>(t.omega.size());
  if (n < 2) throw std::invalid_argument("separate_subsystem: need at least two modes");
  const double dnorm = t.d.norm();
  const double cnorm = t.c.norm();

  OrthogonalTransform o;
  if (dnorm == 0.0 && cnorm == 0.0) {
    // No electronic-nuclear coupling at all: any two coordinates serve as the
    // (trivially uncoupled) subsystem.
    o.O1 = Mat::Identity(n, n);
    o.subsystem_is_1d = true;
    o.subsystem_rotation.setIdentity();
    o.bath_rotation = Mat::Identity(n - 2, n - 2);
    return o;
  }
  o.O1.setZero(n, n);

  Vec e_d;
  if (dnorm > 0) {
    e_d = t.d / dnorm;
  } else {
    // Degenerate tuning direction: fall back to the coupling direction.
    e_d = t.c / cnorm;
  }

  Vec row2;
  const double c1 = t.c.dot(e_d);
  const double c2sq = t.c.squaredNorm() - c1 * c1;
  // Cancellation in |c|^2 - c1^2 floors the computable residual near
  // sqrt(eps)|c|, so exact parallelism is detected at 1e-7 |c|.
  if (c2sq > (1e-7 * cnorm) * (1e-7 * cnorm)) {
    row2 = (t.c - c1 * e_d) / std::sqrt(c2sq);
  } else {
    // c parallel to d: the coupled subspace is one-dimensional; complete with
    // an arbitrary deterministic unit vector orthogonal to e_d.
    o.subsystem_is_1d = true;
    int pick = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(e_d[i]) < std::abs(e_d[pick])) pick = i;
    row2 = Vec::Unit(n, pick);
    row2 -= row2.dot(e_d) * e_d;
    row2.normalize();
  }
  o.O1.row(0) = e_d;
  o.O1.row(1) = row2;

  // Gram-Schmidt completion seeded by canonical axes, largest residual first.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Vec residual(n);
  for (int i = 0; i < n; ++i)
    residual[i] = 1.0 - e_d[i] * e_d[i] - row2[i] * row2[i];
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return residual[a] > residual[b]; });

  int row = 2;
  for (int idx : order) {
    if (row >= n) break;
    Vec v = Vec::Unit(n, idx);
    for (int r = 0; r < row; ++r) v -= o.O1.row(r).dot(v) * o.O1.row(r).transpose();
    double nv = v.norm();
    if (nv < 1e-8) continue;  // nearly parallel to the accepted rows
    v /= nv;
    // One re-orthogonalization pass keeps O1 orthogonal to ~1e-15.
    for (int r = 0; r < row; ++r) v -= o.O1.row(r).dot(v) * o.O1.row(r).transpose();
    v.normalize();
    o.O1.row(row++) = v;
  }
  if (row != n)
    throw NumericalError("separate_subsystem: Gram-Schmidt completion failed");

  o.subsystem_rotation.setIdentity();
  o.bath_rotation = Mat::Identity(n - 2, n - 2);
  return o;
}

SystemBathModel diagonalize_hessian_blocks(const TranslatedModel& t, OrthogonalTransform& o) {
  const int n = static_cast<int>(t.omega.size());
  const int nb = n - 2;
  const Mat lambda_full = o.O1 * t.omega.array().square().matrix().asDiagonal() * o.O1.transpose();

  const Eigen::Matrix2d Lss = lambda_full.topLeftCorner<2, 2>();
  const Mat Lbb = lambda_full.bottomRightCorner(nb, nb);
  const Mat Lsb = lambda_full.topRightCorner(2, nb);

  const double d1t = t.d.norm();
  const double c1t = t.c.dot(o.O1.row(0));
  const double c2t = t.c.dot(o.O1.row(1));

  // Subsystem block. Identity when already diagonal (covers the degenerate
  // isotropic case deterministically).
  Eigen::Matrix2d Rs = Eigen::Matrix2d::Identity();
  Eigen::Vector2d sub_w2(Lss(0, 0), Lss(1, 1));
  const double off_scale = std::abs(Lss(0, 1));
  if (off_scale > 1e-13 * std::max(1.0, Lss.norm())) {
    Vec w;
    Mat V;
    eigh(Lss, w, V);
    sub_w2 = w.head<2>();
    Rs = V.transpose();  // rows = new coordinates
  } else if (Lss(0, 0) > Lss(1, 1) + 1e-13 * std::max(1.0, Lss.norm())) {
    // Diagonal but out of order: swap to ascending.
    Rs << 0, 1, 1, 0;
    std::swap(sub_w2(0), sub_w2(1));
  }

  // Sign gauge (axis relabelings are physically equivalent): flip the X row
  // for G_X >= 0 (tie-break on C_X), the Y row for C_Y >= 0 (tie-breaks on
  // G_Y, then right-handedness).
  Eigen::Vector2d G = d1t * Rs.col(0);
  Eigen::Vector2d C = c1t * Rs.col(0) + c2t * Rs.col(1);
  if (G.x() < 0 || (G.x() == 0 && C.x() < 0)) Rs.row(0) *= -1;
  G = d1t * Rs.col(0);
  C = c1t * Rs.col(0) + c2t * Rs.col(1);
  if (C.y() < 0 || (C.y() == 0 && G.y() < 0) ||
      (C.y() == 0 && G.y() == 0 && Rs.determinant() < 0))
    Rs.row(1) *= -1;
  G = d1t * Rs.col(0);
  C = c1t * Rs.col(0) + c2t * Rs.col(1);

  if (!(sub_w2(0) > 0) || !(sub_w2(1) > 0))
    throw NumericalError("diagonalize_hessian_blocks: subsystem Hessian not positive definite");

  // Bath block.
  Mat Rb = Mat::Identity(nb, nb);
  Vec bath_w2(nb);
  bool bath_rotated = false;
  if (nb > 0) {
    double max_off = 0;
    for (int i = 0; i < nb; ++i)
      for (int j = i + 1; j < nb; ++j) max_off = std::max(max_off, std::abs(Lbb(i, j)));
    if (max_off > 1e-13 * std::max(1.0, Lbb.norm())) {
      Vec w;
      Mat V;
      eigh(Lbb, w, V);
      bath_w2 = w;
      Rb = V.transpose();
      bath_rotated = true;
    } else {
      bath_w2 = Lbb.diagonal();
    }
    for (int j = 0; j < nb; ++j)
      if (!(bath_w2[j] > 0))
        throw NumericalError("diagonalize_hessian_blocks: bath Hessian not positive definite");
  }

  // Couplings: quadratic-form cross block in the rotated coordinates.
  Mat lam = Rs * Lsb * Rb.transpose();  // 2 x nb, row 0: lambda_jX, row 1: lambda_jY
  if (bath_rotated) {
    // Eigenvector sign gauge: make the dominant coupling component of each
    // bath mode non-negative, for reproducible couplings.
    for (int j = 0; j < nb; ++j) {
      const double lx = lam(0, j), ly = lam(1, j);
      const double dominant = std::abs(ly) >= std::abs(lx) ? ly : lx;
      if (dominant < 0) {
        lam.col(j) *= -1;
        Rb.row(j) *= -1;
      }
    }
  }

  SystemBathModel m;
  m.subsystem.Omega_X = std::sqrt(sub_w2(0));
  m.subsystem.Omega_Y = std::sqrt(sub_w2(1));
  m.subsystem.X0 = G.x() / sub_w2(0);
  m.subsystem.Y0 = G.y() / sub_w2(1);
  m.subsystem.Delta = t.Delta;
  m.subsystem.Delta12 = t.Delta12;
  m.subsystem.C_X = C.x();
  m.subsystem.C_Y = C.y();
  m.bath.Omega = bath_w2.array().sqrt();
  m.bath.lambda_X = lam.row(0);
  m.bath.lambda_Y = lam.row(1);
  m.bath.temperature = 0.0;

  o.subsystem_rotation = Rs;
  o.bath_rotation = Rb;
  return m;
}

LvcTransformResult lvc_to_system_bath(const LvcParameters& lvc) {
  TranslatedModel t = translate_origin(lvc);
  OrthogonalTransform o = separate_subsystem(t);
  SystemBathModel m = diagonalize_hessian_blocks(t, o);

  LvcTransformResult r;
  r.model = m;
  r.transform = std::move(o);
  r.shifts = t.shift;
  // Second dropped constant from completing the squares in X and Y.
  const auto& p = m.subsystem;
  r.energy_offset = t.energy_offset - 0.5 * (p.Omega_X * p.Omega_X * p.X0 * p.X0 +
                                             p.Omega_Y * p.Omega_Y * p.Y0 * p.Y0);
  return r;
}

Eigen::Matrix2d transformed_potential_matrix(const SystemBathModel& m, const Vec& collective) {
  const auto& p = m.subsystem;
  const double X = collective[0], Y = collective[1];
  const auto s = evaluate_potentials(p, Vec2(X, Y));
  double common = 0.0;
  for (int j = 0; j < m.bath.n_modes(); ++j) {
    const double Q = collective[2 + j];
    common += 0.5 * m.bath.Omega[j] * m.bath.Omega[j] * Q * Q +
              (m.bath.lambda_X[j] * X + m.bath.lambda_Y[j] * Y) * Q;
  }
  Eigen::Matrix2d V;
  V << s.V_A + common, s.V_c, s.V_c, s.V_D + common;
  return V;
}

Eigen::Matrix2d lvc_potential_matrix(const LvcParameters& lvc, const Vec& q) {
  double v11 = -0.5 * lvc.delta, v22 = 0.5 * lvc.delta, v12 = 0.0, harm = 0.0;
  for (int j = 0; j < lvc.n_modes; ++j) {
    harm += 0.5 * lvc.omega[j] * lvc.omega[j] * q[j] * q[j];
    v11 += lvc.kappa[j] * q[j];
    v22 += lvc.kappa_tilde[j] * q[j];
    v12 += lvc.c[j] * q[j];
  }
  Eigen::Matrix2d V;
  V << v11 + harm, v12, v12, v22 + harm;
  return V;
}

}  // namespace gplvc
