#include "mcflow/tensornorm.hpp"

#include <cmath>
#include <stdexcept>

namespace mcflow {

namespace {

std::size_t flat_index(const std::vector<int>& idx, int dim) {
  std::size_t k = 0;
  for (int i : idx) k = k * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i);
  return k;
}

std::size_t pow_size(int dim, int rank) {
  std::size_t s = 1;
  for (int r = 0; r < rank; ++r) s *= static_cast<std::size_t>(dim);
  return s;
}

// Sum of squared components over index tuples restricted to [lo, hi).
double block_sum(const FrameTensor& B, int lo, int hi) {
  if (B.rank == 0) return B.comp[0] * B.comp[0];
  double total = 0.0;
  std::vector<int> idx(B.rank, lo);
  while (true) {
    double c = B.comp[flat_index(idx, B.dim)];
    total += c * c;
    int pos = B.rank - 1;
    while (pos >= 0) {
      if (++idx[pos] < hi) break;
      idx[pos] = lo;
      --pos;
    }
    if (pos < 0) break;
  }
  return total;
}

}  // namespace

double& FrameTensor::at(const std::vector<int>& idx) {
  return comp[flat_index(idx, dim)];
}

double FrameTensor::at(const std::vector<int>& idx) const {
  return comp[flat_index(idx, dim)];
}

FrameTensor FrameTensor::zeros(int rank, int dim) {
  FrameTensor t;
  t.rank = rank;
  t.dim = dim;
  t.comp.assign(pow_size(dim, rank), 0.0);
  return t;
}

double tensor_norm_squared(const FrameTensor& B, Signature sig) {
  sig.validate();
  if (B.dim != sig.dim())
    throw std::invalid_argument("tensor_norm_squared: tensor dim does not match signature");
  if (B.comp.size() != pow_size(B.dim, B.rank))
    throw std::invalid_argument("tensor_norm_squared: component count mismatch");
  if (B.rank == 0) return B.comp[0] * B.comp[0];
  return block_sum(B, 0, sig.n) + block_sum(B, sig.n, sig.dim());
}

double tensor_norm_squared_k(const std::vector<FrameTensor>& derivatives, Signature sig) {
  double total = 0.0;
  for (const auto& d : derivatives) total += tensor_norm_squared(d, sig);
  return total;
}

double frame_orthonormality_deviation(const FramePair& fp) {
  const int n = fp.sig.n, m = fp.sig.m;
  Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(n + m, n + m);
  eta.topLeftCorner(n, n).setIdentity();
  eta.bottomRightCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
  double d1 = (fp.bg.transpose() * fp.G * fp.bg - eta).cwiseAbs().maxCoeff();
  double d2 = (fp.adapted.transpose() * fp.G * fp.adapted - eta).cwiseAbs().maxCoeff();
  return std::max(d1, d2);
}

FrameNormBounds frame_norm_bounds(const FramePair& fp) {
  const int n = fp.sig.n, m = fp.sig.m;
  FrameNormBounds out;
  // Pairings of every adapted vector with every background vector.
  Eigen::MatrixXd P = fp.adapted.transpose() * fp.G * fp.bg;  // (n+m) x (n+m)
  out.tau_norm_sq = P.topRows(n).array().square().matrix().rowwise().sum();
  out.nu_norm_sq = P.bottomRows(m).array().square().matrix().rowwise().sum();
  out.V_block = -P.bottomRightCorner(m, m);
  out.v = out.V_block.norm();
  double v2 = out.v * out.v;
  out.tau_bound_holds =
      (out.tau_norm_sq.array() <= n * (n + 2.0) * v2 + 1e-12).all();
  out.nu_bound_holds = (out.nu_norm_sq.array() <= 2.0 * m * v2 + 1e-12).all();
  return out;
}

}  // namespace mcflow
