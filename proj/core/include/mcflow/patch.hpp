#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcflow/ambient.hpp"

namespace mcflow {

/// Raised when a geometric invariant fails (induced metric not spacelike,
/// degenerate normal frame, ...).  Carries the offending node.
struct InvariantViolation : std::runtime_error {
  InvariantViolation(const std::string& what, long node_index)
      : std::runtime_error(what), node(node_index) {}
  long node = -1;
};

struct AxisSpec {
  int size = 2;
  double h = 1.0;
  double origin = 0.0;
  bool periodic = false;
  Eigen::VectorXd shift;  // ambient displacement per positive wrap; empty means zero
};

/// Structured n-dimensional grid.  Flat index is axis-0 fastest.  Periodic
/// axes wrap with an optional ambient shift so graphs may wind around the
/// torus with a linear part.
class GridTopology {
 public:
  GridTopology() = default;
  explicit GridTopology(std::vector<AxisSpec> axes);

  int rank() const { return static_cast<int>(axes_.size()); }
  long nodes() const { return nodes_; }
  const AxisSpec& axis(int k) const { return axes_[k]; }

  long index(const std::vector<int>& I) const;
  std::vector<int> unflatten(long idx) const;

  /// Wraps a possibly out-of-range multi-index along periodic axes,
  /// accumulating the ambient shift; throws if a non-periodic axis is out of
  /// range.
  long wrap(std::vector<int> I, int ambient_dim, Eigen::VectorXd& shift) const;

  /// Same wrap without shift accumulation (for fields invariant under it).
  long wrap_index(std::vector<int> I) const;

  bool interior(const std::vector<int>& I, int margin) const;
  Eigen::VectorXd coords(const std::vector<int>& I) const;

  /// Trapezoid quadrature weight (1 everywhere on periodic axes, halved on
  /// non-periodic boundary nodes) times the cell volume.
  double weight(const std::vector<int>& I) const;

 private:
  std::vector<AxisSpec> axes_;
  std::vector<long> stride_;
  long nodes_ = 0;
};

/// Discrete immersion: ambient positions stored per node.
struct ImmersedPatch {
  std::shared_ptr<const AmbientSpace> space;
  GridTopology topo;
  Eigen::MatrixXd f;  // dim x nodes
};

/// Geometry of the immersion at one node.
struct NodeGeometry {
  Eigen::VectorXd x;    // ambient position
  Eigen::MatrixXd df;   // dim x n coordinate derivatives
  Eigen::MatrixXd g;    // induced metric, n x n
  Eigen::MatrixXd ginv;
  double sqrtg = 0.0;
  double min_g_eig = 0.0;
  bool spacelike = false;

  Eigen::MatrixXd B;    // tau_i = sum_k B(i,k) d_k f
  Eigen::MatrixXd tau;  // dim x n orthonormal tangent frame
  Eigen::MatrixXd nu;   // dim x m orthonormal timelike normal frame

  Eigen::MatrixXd V;    // V(a,b) = -G(nu_a, T_b)
  double v = 0.0;       // Frobenius norm of V
  Eigen::VectorXd u;    // time function values
  Eigen::VectorXd psi;  // lapses

  std::vector<Eigen::MatrixXd> A;  // m entries, n x n: A[a](i,j)
  std::vector<Eigen::MatrixXd> C;  // n entries, m x m: C[i](a,b), antisymmetric
  Eigen::VectorXd Hfr;   // frame components of the mean curvature vector
  Eigen::VectorXd Hvec;  // ambient components
  double H2 = 0.0;       // sum_a Hfr_a^2
  double A2 = 0.0;       // sum over all components of A squared
};

struct GeometryField {
  std::vector<NodeGeometry> node;
  double sup_v = 0.0;
  double min_g_eig = 0.0;
  double sup_H2 = 0.0;
  double sup_A2 = 0.0;
  double area = 0.0;
};

struct GeometryOptions {
  bool require_spacelike = true;  // throw InvariantViolation on failure
  int margin = 2;                 // interior margin used for sup statistics
};

/// First-pass frame data from the position and coordinate derivatives alone.
NodeGeometry point_frame(const AmbientSpace& space, const Eigen::VectorXd& x,
                         const Eigen::MatrixXd& df, bool require_spacelike,
                         long node_index);

/// Full two-pass geometry of a stored patch.
GeometryField derive_geometry(const ImmersedPatch& patch,
                              const GeometryOptions& opts = {});

/// Streaming variant with O(1) storage: `f_at` must evaluate the immersion
/// for multi-indices up to 3 nodes outside the index box (periodic wrapping
/// is the closure's responsibility), `visit` is called once per node.
void derive_geometry_streaming(
    const AmbientSpace& space, const GridTopology& topo,
    const std::function<Eigen::VectorXd(const std::vector<int>&)>& f_at,
    const std::function<void(long, const std::vector<int>&, const NodeGeometry&)>& visit,
    const GeometryOptions& opts = {});

/// Divergence-form Laplace-Beltrami of a scalar node field.  Fluxes use
/// half-node averages of sqrt(g) g^{kk}; mixed terms are nested central
/// differences.  axis_shifts[k] is added to phi when wrapping axis k
/// upward (winding graphs).  Only nodes with a 2-node margin on
/// non-periodic axes are filled, the rest are zero.
Eigen::VectorXd laplace_beltrami(const GridTopology& topo,
                                 const std::vector<NodeGeometry>& node,
                                 const Eigen::VectorXd& phi,
                                 const Eigen::VectorXd& axis_shifts);

struct IdentityReport {
  double sup_slice = 0.0;    // gradient-product identity residual
  double sup_laplace = 0.0;  // Laplacian identity residual
  double sup_frame = 0.0;    // frame-completeness form of the gradient identity
};

struct IdentityOptions {
  int margin = 2;
  // optional per-axis coordinate window restricting the sups; convergence
  // studies need a resolution-independent comparison region on bounded axes
  Eigen::VectorXd window_lo, window_hi;
};

/// Pointwise residuals of the two slice identities over the interior.
IdentityReport check_identities(const ImmersedPatch& patch,
                                const GeometryField& geom,
                                const IdentityOptions& opts = {});

}  // namespace mcflow
