#pragma once

#include "gplvc/model.hpp"

namespace gplvc {

// LVC model after the coordinate translation that symmetrizes the linear
// couplings: q_j = x_j - shift_j with shift_j = (kappa_j + kappa_tilde_j)/(2 omega_j^2).
struct TranslatedModel {
  Vec omega;
  Vec d;       // d_j = (kappa_tilde_j - kappa_j)/2
  Vec c;
  Vec shift;
  double Delta = 0.0;
  double Delta12 = 0.0;
  double energy_offset = 0.0;  // dropped global constant, kept for round trips
};

// Orthogonal coordinate maps. O1 rows are the new coordinates in terms of the
// translated ones; the block rotations diagonalize the Hessian blocks.
struct OrthogonalTransform {
  Mat O1;                        // N x N, rows 1-2 span the coupled subspace
  Eigen::Matrix2d subsystem_rotation = Eigen::Matrix2d::Identity();
  Mat bath_rotation;             // (N-2) x (N-2)
  bool subsystem_is_1d = false;  // c parallel to d (or both degenerate)

  // Composite map from original LVC coordinates to (X, Y, Q_1..Q_{N-2}).
  Vec to_collective(const Vec& q, const Vec& shift) const;
};

TranslatedModel translate_origin(const LvcParameters& lvc);

// Builds O1: rows 1-2 from d and c, remaining rows by Gram-Schmidt completion.
OrthogonalTransform separate_subsystem(const TranslatedModel& t);

// Diagonalizes the 2x2 subsystem and (N-2)x(N-2) bath blocks of the Hessian,
// rotating the linear couplings accordingly. Fills the block rotations of `o`.
SystemBathModel diagonalize_hessian_blocks(const TranslatedModel& t, OrthogonalTransform& o);

struct LvcTransformResult {
  SystemBathModel model;
  OrthogonalTransform transform;
  Vec shifts;
  double energy_offset = 0.0;  // total dropped constant (translation + square completion)
};

LvcTransformResult lvc_to_system_bath(const LvcParameters& lvc);

// Diabatic potential matrix of the transformed Hamiltonian at collective
// coordinates (X, Y, Q...), including bath and bilinear terms but not the
// dropped global constant. Used by round-trip checks and tests.
Eigen::Matrix2d transformed_potential_matrix(const SystemBathModel& m, const Vec& collective);

// Same for the raw LVC model at original coordinates q.
Eigen::Matrix2d lvc_potential_matrix(const LvcParameters& lvc, const Vec& q);

}  // namespace gplvc
