#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mcflow/signature.hpp"

namespace mcflow {

/// Rank-l tensor stored by components against a G-orthonormal background
/// frame {e_1..e_n, T_1..T_m}: index values 0..n-1 are spacelike slots,
/// n..n+m-1 timelike.  Row-major over the l indices.
struct FrameTensor {
  int rank = 0;
  int dim = 0;
  std::vector<double> comp;

  double& at(const std::vector<int>& idx);
  double at(const std::vector<int>& idx) const;
  static FrameTensor zeros(int rank, int dim);
};

/// Frame norm: sum of squared components over all-spacelike index tuples
/// plus the same over all-timelike tuples.  Mixed tuples do not contribute.
double tensor_norm_squared(const FrameTensor& B, Signature sig);

/// Accumulated norm over a tensor and caller-supplied covariant derivative
/// components (each one more slot than the last).
double tensor_norm_squared_k(const std::vector<FrameTensor>& derivatives, Signature sig);

/// Background frame {e_i, T_a} and adapted frame {tau_i, nu_a} at one ambient
/// point, as chart-coordinate column vectors, with the metric at that point.
struct FramePair {
  Signature sig;
  Eigen::MatrixXd G;        // (n+m) x (n+m) metric in chart coordinates
  Eigen::MatrixXd bg;       // columns e_1..e_n, T_1..T_m
  Eigen::MatrixXd adapted;  // columns tau_1..tau_n, nu_1..nu_m
};

/// Max deviation of both frames from G-orthonormality with the (+..+,-..-) pattern.
double frame_orthonormality_deviation(const FramePair& fp);

struct FrameNormBounds {
  Eigen::VectorXd tau_norm_sq;  // frame norms ||tau_i||^2
  Eigen::VectorXd nu_norm_sq;   // ||nu_a||^2
  Eigen::MatrixXd V_block;      // V_ab = -G(nu_a, T_b)
  double v = 0.0;               // tilt
  bool tau_bound_holds = false; // ||tau_i||^2 <= n(n+2) v^2
  bool nu_bound_holds = false;  // ||nu_a||^2  <= 2 m v^2
};

/// Frame norms of the adapted vectors against the background frame, the tilt,
/// and the corresponding tilt-controlled bounds.
FrameNormBounds frame_norm_bounds(const FramePair& fp);

}  // namespace mcflow
