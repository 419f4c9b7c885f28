#pragma once

#include <Eigen/Dense>
#include <random>

#include "mcflow/indefinite.hpp"
#include "mcflow/signature.hpp"
#include "mcflow/tensornorm.hpp"

namespace mcflow {

using Rng = std::mt19937_64;

/// Haar-ish random k x k orthogonal matrix (QR of a Gaussian draw).
Eigen::MatrixXd random_rotation(int k, Rng& rng);

/// Boost in the (i-th spacelike, a-th timelike) coordinate plane:
/// identity blocks except X_ii = V_aa = cosh(t), W_ia = U_ai = sinh(t).
PseudoOrthogonalMatrix boost(Signature sig, int i, int a, double t);

/// Product of independent spacelike/timelike block rotations and boosts with
/// angles drawn from [-max_angle, max_angle].
PseudoOrthogonalMatrix random_onm(Signature sig, Rng& rng, int n_boosts = 3,
                                  double max_angle = 2.0);

/// Group product of assembled matrices.
PseudoOrthogonalMatrix onm_product(const PseudoOrthogonalMatrix& A,
                                   const PseudoOrthogonalMatrix& B);

/// Chart components of the adapted frame encoded by M against the standard
/// background frame: tau_i = (X(i,:), -W(i,:)), nu_a = (-U(a,:), V(a,:)),
/// so that the recovered pairings reproduce the blocks of M.
Eigen::MatrixXd adapted_frame_from_onm(const PseudoOrthogonalMatrix& M);

/// Adapted frame in the flat model: background = standard basis, adapted
/// drawn from a random O(n, m) element.
FramePair random_flat_frame_pair(Signature sig, Rng& rng, int n_boosts = 3,
                                 double max_angle = 2.0);

}  // namespace mcflow
