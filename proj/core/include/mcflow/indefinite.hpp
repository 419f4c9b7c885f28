#pragma once

#include <Eigen/Dense>

#include "mcflow/signature.hpp"

namespace mcflow {

/// Element of the indefinite orthogonal group O(n, m), stored by blocks.
/// The assembled matrix is
///   M = [  X   W ]
///       [ -U  -V ]
/// with X (n x n), W (n x m), U (m x n), V (m x m).  Membership in O(n, m)
/// is equivalent to
///   X^T X = I + U^T U,   V^T V = I + W^T W,   U^T V = X^T W.
struct PseudoOrthogonalMatrix {
  Signature sig;
  Eigen::MatrixXd X, W, U, V;

  Eigen::MatrixXd assembled() const;
  static PseudoOrthogonalMatrix from_assembled(const Eigen::MatrixXd& M, Signature sig);
};

/// Largest absolute deviation over the three block identities above.
double onm_deviation(const PseudoOrthogonalMatrix& M);

bool onm_check(const PseudoOrthogonalMatrix& M, double tol = 1e-9);

/// Two-sided O(n) x O(m) reduction of an O(n, m) element to block-diagonal
/// normal form.  For n >= m the canonical block data is
///   X_c = I_{n-m} (+) D1,  U_c = [0 | A D3],  V_c = D2,
///   W_c = X_c^{-1} U_c^T V_c
/// with D1, D2 diagonal (entries >= 1, D1 sorted descending), D3, D4
/// nonnegative diagonals satisfying D1^2 = I + D3^2 and D2^2 = I + D4^2,
/// and A orthogonal.  The n < m case is handled by the block-swapped
/// arrangement (X <-> V, W <-> U) of the same reduction.
struct NormalForm {
  Signature sig;
  Eigen::MatrixXd R_tan;  // left O(n) action on the tangent frame
  Eigen::MatrixXd R_nor;  // left O(m) action on the normal frame
  Eigen::MatrixXd S_tan;  // right O(n) action on the spacelike background frame
  Eigen::MatrixXd S_nor;  // right O(m) action on the timelike background frame
  Eigen::VectorXd D1, D2, D3, D4;  // length min(n, m)
  Eigen::MatrixXd A_block;         // min(n,m) x min(n,m) orthogonal
  Eigen::VectorXi sign_choices;    // per-column sign relating W_c to A^T D4

  bool mirrored() const { return sig.n < sig.m; }

  /// Canonical element: blocks after the two-sided reduction.
  PseudoOrthogonalMatrix canonical() const;
};

NormalForm onm_normal_form(const PseudoOrthogonalMatrix& M, double tol = 1e-9);

/// Undo the reduction: returns blockdiag(R_tan, R_nor)^T * canonical *
/// blockdiag(S_tan, S_nor) as a PseudoOrthogonalMatrix.
PseudoOrthogonalMatrix reconstruct(const NormalForm& nf);

/// Tilt of an adapted frame: v = sqrt(sum_{ab} V_ab^2) >= sqrt(m).
double tilt(const Eigen::MatrixXd& V_block);

}  // namespace mcflow
