#include "mcflow/indefinite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mcflow {

namespace {

// Permutation sending eigenvalues (ascending input) to the canonical order:
// the n - m smallest (all ~1) first, then the largest m sorted descending.
// For square n = m this is simply descending order.
std::vector<int> canonical_order(const Eigen::VectorXd& evals_asc, int keep) {
  const int n = static_cast<int>(evals_asc.size());
  std::vector<int> order(n);
  for (int i = 0; i < n - keep; ++i) order[i] = i;
  for (int i = 0; i < keep; ++i) order[n - keep + i] = n - 1 - i;
  return order;
}

// Orthogonal polar factor Q and symmetric-root data of B: B = Q * sqrt(B^T B),
// sqrt(B^T B) = E diag(lam) E^T with lam >= 1 for O(n, m) blocks.
struct PolarEig {
  Eigen::MatrixXd Q;     // orthogonal polar factor
  Eigen::MatrixXd E;     // eigenvectors of B^T B
  Eigen::VectorXd lam;   // eigenvalues of sqrt(B^T B), ascending
};

PolarEig polar_eig(const Eigen::MatrixXd& B) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B.transpose() * B);
  PolarEig out;
  out.E = es.eigenvectors();
  out.lam = es.eigenvalues().cwiseMax(1.0).cwiseSqrt();
  Eigen::MatrixXd inv_root =
      out.E * out.lam.cwiseInverse().asDiagonal() * out.E.transpose();
  out.Q = B * inv_root;  // B = Q * root
  return out;
}

// Reduce blocks with n >= m.  Fills everything except sig.
void reduce(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W,
            const Eigen::MatrixXd& U, const Eigen::MatrixXd& V,
            NormalForm& nf, double tol) {
  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(V.rows());

  PolarEig px = polar_eig(X);
  std::vector<int> ord = canonical_order(px.lam, m);
  Eigen::MatrixXd Qx(n, n);
  Eigen::VectorXd lam(n);
  for (int i = 0; i < n; ++i) {
    Qx.col(i) = px.E.col(ord[i]);
    lam(i) = px.lam(ord[i]);
  }
  // X ->  R_tan X S_tan^T = diag(lam) with the canonical ordering.
  nf.R_tan = Qx.transpose() * px.Q.transpose();
  nf.S_tan = Qx.transpose();

  PolarEig pv = polar_eig(V);
  Eigen::MatrixXd Qv(m, m);
  Eigen::VectorXd mu(m);
  for (int i = 0; i < m; ++i) {
    Qv.col(i) = pv.E.col(m - 1 - i);  // descending
    mu(i) = pv.lam(m - 1 - i);
  }
  nf.R_nor = Qv.transpose() * pv.Q.transpose();
  nf.S_nor = Qv.transpose();

  // U_c = R_nor U S_tan^T has vanishing first n - m columns; factor the rest
  // as A * D3 with A orthogonal.  D3 is read off the actual column norms and
  // D1 rebuilt from it: near eigenvalue 1 the clamped eigenvalue route is off
  // by sqrt-of-roundoff while the columns themselves are exact data.
  const double deg_tol = std::max(tol, 1e-7);
  Eigen::MatrixXd Uc = nf.R_nor * U * nf.S_tan.transpose();
  Eigen::MatrixXd Ut = Uc.rightCols(m);
  nf.D3.resize(m);
  for (int j = 0; j < m; ++j) nf.D3(j) = Ut.col(j).norm();
  nf.D1 = (1.0 + nf.D3.array().square()).sqrt().matrix();
  nf.D2 = mu;
  nf.D4 = (nf.D2.array().square() - 1.0).max(0.0).sqrt().matrix();

  Eigen::MatrixXd A(m, m);
  std::vector<int> degenerate;
  for (int j = 0; j < m; ++j) {
    double a = nf.D3(j);
    if (a > deg_tol) {
      A.col(j) = Ut.col(j) / a;
    } else {
      A.col(j).setZero();
      degenerate.push_back(j);
    }
  }
  // Complete degenerate columns to an orthonormal set.
  for (int j : degenerate) {
    for (int k = 0; k < m; ++k) {
      Eigen::VectorXd cand = Eigen::VectorXd::Unit(m, k);
      for (int l = 0; l < m; ++l)
        if (l != j) cand -= A.col(l).dot(cand) * A.col(l);
      double norm = cand.norm();
      if (norm > 0.5) {
        A.col(j) = cand / norm;
        break;
      }
    }
  }
  // Polar projection onto the orthogonal group absorbs the residual drift.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  nf.A_block = svd.matrixU() * svd.matrixV().transpose();

  // Sign bookkeeping for the W block against the A^T D4 pattern.
  Eigen::MatrixXd Wc = nf.R_tan * W * nf.S_nor.transpose();
  Eigen::MatrixXd Wt = Wc.bottomRows(m);
  nf.sign_choices.resize(m);
  for (int j = 0; j < m; ++j) {
    double overlap = Wt.col(j).dot(A.col(j));
    nf.sign_choices(j) = overlap < 0.0 ? -1 : 1;
  }
}

}  // namespace

Eigen::MatrixXd PseudoOrthogonalMatrix::assembled() const {
  const int n = sig.n, m = sig.m;
  Eigen::MatrixXd M(n + m, n + m);
  M.topLeftCorner(n, n) = X;
  M.topRightCorner(n, m) = W;
  M.bottomLeftCorner(m, n) = -U;
  M.bottomRightCorner(m, m) = -V;
  return M;
}

PseudoOrthogonalMatrix PseudoOrthogonalMatrix::from_assembled(
    const Eigen::MatrixXd& M, Signature sig) {
  sig.validate();
  if (M.rows() != sig.dim() || M.cols() != sig.dim())
    throw std::invalid_argument("from_assembled: matrix size does not match signature");
  PseudoOrthogonalMatrix out;
  out.sig = sig;
  out.X = M.topLeftCorner(sig.n, sig.n);
  out.W = M.topRightCorner(sig.n, sig.m);
  out.U = -M.bottomLeftCorner(sig.m, sig.n);
  out.V = -M.bottomRightCorner(sig.m, sig.m);
  return out;
}

double onm_deviation(const PseudoOrthogonalMatrix& M) {
  const int n = M.sig.n, m = M.sig.m;
  Eigen::MatrixXd r1 = M.X.transpose() * M.X - Eigen::MatrixXd::Identity(n, n) -
                       M.U.transpose() * M.U;
  Eigen::MatrixXd r2 = M.V.transpose() * M.V - Eigen::MatrixXd::Identity(m, m) -
                       M.W.transpose() * M.W;
  Eigen::MatrixXd r3 = M.U.transpose() * M.V - M.X.transpose() * M.W;
  return std::max({r1.cwiseAbs().maxCoeff(), r2.cwiseAbs().maxCoeff(),
                   r3.cwiseAbs().maxCoeff()});
}

bool onm_check(const PseudoOrthogonalMatrix& M, double tol) {
  return onm_deviation(M) <= tol;
}

NormalForm onm_normal_form(const PseudoOrthogonalMatrix& M, double tol) {
  M.sig.validate();
  if (!onm_check(M, std::max(tol, 1e-9)))
    throw std::invalid_argument("onm_normal_form: input fails the O(n,m) block identities");

  NormalForm nf;
  nf.sig = M.sig;
  if (M.sig.n >= M.sig.m) {
    reduce(M.X, M.W, M.U, M.V, nf, tol);
  } else {
    // Swapping (X <-> V, W <-> U) gives an O(m, n) element; reduce that and
    // keep the actions attached to the frames they act on.
    NormalForm sw;
    reduce(M.V, M.U, M.W, M.X, sw, tol);
    nf.R_tan = sw.R_nor;
    nf.S_tan = sw.S_nor;
    nf.R_nor = sw.R_tan;
    nf.S_nor = sw.S_tan;
    nf.D1 = sw.D2;
    nf.D2 = sw.D1;
    nf.D3 = sw.D4;
    nf.D4 = sw.D3;
    nf.A_block = sw.A_block;
    nf.sign_choices = sw.sign_choices;
  }
  return nf;
}

PseudoOrthogonalMatrix NormalForm::canonical() const {
  const int n = sig.n, m = sig.m;
  const int k = std::min(n, m);
  PseudoOrthogonalMatrix C;
  C.sig = sig;
  if (n >= m) {
    C.X = Eigen::MatrixXd::Identity(n, n);
    C.X.bottomRightCorner(k, k) = D1.asDiagonal();
    C.U = Eigen::MatrixXd::Zero(m, n);
    C.U.rightCols(k) = A_block * D3.asDiagonal();
    C.V = D2.asDiagonal();
    // W is pinned by the third block identity; X_c is diagonal.
    C.W = C.X.inverse() * C.U.transpose() * C.V;
  } else {
    C.V = Eigen::MatrixXd::Identity(m, m);
    C.V.bottomRightCorner(k, k) = D2.asDiagonal();
    C.W = Eigen::MatrixXd::Zero(n, m);
    C.W.rightCols(k) = A_block * D4.asDiagonal();
    C.X = D1.asDiagonal();
    C.U = C.V.inverse() * C.W.transpose() * C.X;
  }
  return C;
}

PseudoOrthogonalMatrix reconstruct(const NormalForm& nf) {
  PseudoOrthogonalMatrix C = nf.canonical();
  PseudoOrthogonalMatrix out;
  out.sig = nf.sig;
  out.X = nf.R_tan.transpose() * C.X * nf.S_tan;
  out.W = nf.R_tan.transpose() * C.W * nf.S_nor;
  out.U = nf.R_nor.transpose() * C.U * nf.S_tan;
  out.V = nf.R_nor.transpose() * C.V * nf.S_nor;
  return out;
}

double tilt(const Eigen::MatrixXd& V_block) {
  return V_block.norm();
}

}  // namespace mcflow
