#include "mcflow/sampling.hpp"

#include <cmath>

namespace mcflow {

Eigen::MatrixXd random_rotation(int k, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd Z(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) Z(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
  Eigen::MatrixXd Q = qr.householderQ();
  // Fix the sign ambiguity so the distribution does not depend on QR internals.
  Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

PseudoOrthogonalMatrix boost(Signature sig, int i, int a, double t) {
  sig.validate();
  PseudoOrthogonalMatrix M;
  M.sig = sig;
  M.X = Eigen::MatrixXd::Identity(sig.n, sig.n);
  M.V = Eigen::MatrixXd::Identity(sig.m, sig.m);
  M.W = Eigen::MatrixXd::Zero(sig.n, sig.m);
  M.U = Eigen::MatrixXd::Zero(sig.m, sig.n);
  M.X(i, i) = std::cosh(t);
  M.V(a, a) = std::cosh(t);
  M.W(i, a) = std::sinh(t);
  M.U(a, i) = std::sinh(t);
  return M;
}

PseudoOrthogonalMatrix onm_product(const PseudoOrthogonalMatrix& A,
                                   const PseudoOrthogonalMatrix& B) {
  return PseudoOrthogonalMatrix::from_assembled(A.assembled() * B.assembled(),
                                                A.sig);
}

PseudoOrthogonalMatrix random_onm(Signature sig, Rng& rng, int n_boosts,
                                  double max_angle) {
  sig.validate();
  std::uniform_real_distribution<double> angle(-max_angle, max_angle);
  std::uniform_int_distribution<int> pick_i(0, sig.n - 1);
  std::uniform_int_distribution<int> pick_a(0, sig.m - 1);

  PseudoOrthogonalMatrix M;
  M.sig = sig;
  M.X = random_rotation(sig.n, rng);
  M.V = random_rotation(sig.m, rng);
  M.W = Eigen::MatrixXd::Zero(sig.n, sig.m);
  M.U = Eigen::MatrixXd::Zero(sig.m, sig.n);
  for (int b = 0; b < n_boosts; ++b) {
    M = onm_product(M, boost(sig, pick_i(rng), pick_a(rng), angle(rng)));
    PseudoOrthogonalMatrix R;
    R.sig = sig;
    R.X = random_rotation(sig.n, rng);
    R.V = random_rotation(sig.m, rng);
    R.W = Eigen::MatrixXd::Zero(sig.n, sig.m);
    R.U = Eigen::MatrixXd::Zero(sig.m, sig.n);
    M = onm_product(M, R);
  }
  return M;
}

Eigen::MatrixXd adapted_frame_from_onm(const PseudoOrthogonalMatrix& M) {
  const int n = M.sig.n, m = M.sig.m;
  Eigen::MatrixXd F(n + m, n + m);
  F.topLeftCorner(n, n) = M.X.transpose();
  F.bottomLeftCorner(m, n) = -M.W.transpose();
  F.topRightCorner(n, m) = -M.U.transpose();
  F.bottomRightCorner(m, m) = M.V.transpose();
  return F;
}

FramePair random_flat_frame_pair(Signature sig, Rng& rng, int n_boosts,
                                 double max_angle) {
  const int d = sig.dim();
  FramePair fp;
  fp.sig = sig;
  fp.G = Eigen::MatrixXd::Zero(d, d);
  fp.G.topLeftCorner(sig.n, sig.n).setIdentity();
  fp.G.bottomRightCorner(sig.m, sig.m) = -Eigen::MatrixXd::Identity(sig.m, sig.m);
  fp.bg = Eigen::MatrixXd::Identity(d, d);
  fp.adapted = adapted_frame_from_onm(random_onm(sig, rng, n_boosts, max_angle));
  return fp;
}

}  // namespace mcflow
