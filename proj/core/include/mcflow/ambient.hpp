#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "mcflow/signature.hpp"

namespace mcflow {

/// Covariant rank-4 tensor R_{abcd} at a point, dense storage.
struct Tensor4 {
  int d = 0;
  std::vector<double> a;

  explicit Tensor4(int dim = 0) : d(dim), a(static_cast<std::size_t>(dim) * dim * dim * dim, 0.0) {}
  double& operator()(int i, int j, int k, int l) {
    return a[((static_cast<std::size_t>(i) * d + j) * d + k) * d + l];
  }
  double operator()(int i, int j, int k, int l) const {
    return a[((static_cast<std::size_t>(i) * d + j) * d + k) * d + l];
  }
};

/// Multi-time data at a point: values, coordinate gradients and second
/// partials of the m time functions t_1..t_m.
struct MultiTime {
  Eigen::VectorXd t;                  // m
  Eigen::MatrixXd dt;                 // m x dim, rows are coordinate gradients
  std::vector<Eigen::MatrixXd> hess;  // m entries, dim x dim second partials
};

/// Orthonormal timelike frame derived from the multi-time functions:
/// T_a = -psi_a grad(t_a), psi_a^{-2} = -G(grad t_a, grad t_a).
struct TimelikeFrame {
  Eigen::MatrixXd T;    // dim x m, columns T_1..T_m in chart components
  Eigen::VectorXd psi;  // m lapses
};

/// Ambient manifold with a signature (n, m) metric in a single chart.
/// Curvature uses the convention
///   Rbar(X, Y)Z = -nabla_X nabla_Y Z + nabla_Y nabla_X Z + nabla_[X,Y] Z,
/// stored fully lowered as Rbar_{abcd} = G(Rbar(d_a, d_b) d_c, d_d).
class AmbientSpace {
 public:
  virtual ~AmbientSpace() = default;

  virtual std::string name() const = 0;
  virtual Signature signature() const = 0;
  int dim() const { return signature().dim(); }

  virtual bool in_domain(const Eigen::VectorXd& x) const { (void)x; return true; }

  /// True when the curvature tensor vanishes identically.
  virtual bool flat() const { return false; }

  virtual Eigen::MatrixXd metric(const Eigen::VectorXd& x) const = 0;

  /// Christoffel symbols Gamma[c](a, b) = Gamma^c_{ab}; default central
  /// differences of the metric with step fd_step.
  virtual std::vector<Eigen::MatrixXd> christoffel(const Eigen::VectorXd& x) const;

  /// Fully lowered curvature tensor; default central differences of
  /// christoffel().
  virtual Tensor4 riemann(const Eigen::VectorXd& x) const;

  virtual MultiTime multitime(const Eigen::VectorXd& x) const = 0;

  double fd_step = 1e-4;
};

/// Central-difference Christoffels from the metric of `space`.
std::vector<Eigen::MatrixXd> christoffel_fd(const AmbientSpace& space,
                                            const Eigen::VectorXd& x, double h);

/// Central-difference curvature from space.christoffel().
Tensor4 riemann_fd(const AmbientSpace& space, const Eigen::VectorXd& x, double h);

/// Timelike frame from the multi-time functions at x.
TimelikeFrame timelike_frame(const AmbientSpace& space, const Eigen::VectorXd& x);

/// Pulled-back Hessian of t_a: Hess_ab = d_a d_b t - Gamma^c_{ab} d_c t.
std::vector<Eigen::MatrixXd> multitime_hessian(const AmbientSpace& space,
                                               const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// Flat R^{n+m} with metric diag(I_n, -I_m); time functions are the last m
/// coordinates.
class FlatSpace : public AmbientSpace {
 public:
  explicit FlatSpace(Signature sig);
  std::string name() const override;
  Signature signature() const override { return sig_; }
  bool flat() const override { return true; }
  Eigen::MatrixXd metric(const Eigen::VectorXd& x) const override;
  std::vector<Eigen::MatrixXd> christoffel(const Eigen::VectorXd& x) const override;
  Tensor4 riemann(const Eigen::VectorXd& x) const override;
  MultiTime multitime(const Eigen::VectorXd& x) const override;

 private:
  Signature sig_;
};

/// Tangent bundle of R^n with the neutral metric ds^2 = sum dx^i dxdot^i,
/// signature (n, n).  Chart coordinates (x^1..x^n, xdot^1..xdot^n).  Time
/// functions t_a = (xdot^a - x^a)/2 have unit lapse.
class NeutralTangentBundle : public AmbientSpace {
 public:
  explicit NeutralTangentBundle(int n);
  std::string name() const override;
  Signature signature() const override { return {n_, n_}; }
  bool flat() const override { return true; }
  Eigen::MatrixXd metric(const Eigen::VectorXd& x) const override;
  std::vector<Eigen::MatrixXd> christoffel(const Eigen::VectorXd& x) const override;
  Tensor4 riemann(const Eigen::VectorXd& x) const override;
  MultiTime multitime(const Eigen::VectorXd& x) const override;

 private:
  int n_;
};

/// Riemannian product factor: round 2-sphere of radius r in polar chart
/// (theta, phi), or flat R^d / torus cover with the standard metric.
struct ProductFactor {
  enum class Kind { Sphere2, Flat } kind = Kind::Flat;
  int d = 1;
  double r = 1.0;  // sphere radius

  static ProductFactor sphere2(double radius) { return {Kind::Sphere2, 2, radius}; }
  static ProductFactor flat(int dim) { return {Kind::Flat, dim, 1.0}; }

  double curvature() const { return kind == Kind::Sphere2 ? 1.0 / (r * r) : 0.0; }
  Eigen::MatrixXd metric(const Eigen::VectorXd& xf) const;
  std::vector<Eigen::MatrixXd> christoffel(const Eigen::VectorXd& xf) const;
  bool in_domain(const Eigen::VectorXd& xf) const;
};

/// Product M1 x M2 with G = g1 - g2; the factor-2 coordinates serve as time
/// functions.
class ProductSpace : public AmbientSpace {
 public:
  ProductSpace(ProductFactor f1, ProductFactor f2);
  std::string name() const override;
  Signature signature() const override { return {f1_.d, f2_.d}; }
  bool in_domain(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd metric(const Eigen::VectorXd& x) const override;
  std::vector<Eigen::MatrixXd> christoffel(const Eigen::VectorXd& x) const override;
  Tensor4 riemann(const Eigen::VectorXd& x) const override;
  MultiTime multitime(const Eigen::VectorXd& x) const override;

  const ProductFactor& factor1() const { return f1_; }
  const ProductFactor& factor2() const { return f2_; }

 private:
  ProductFactor f1_, f2_;
};

/// Adapter exposing only the metric of the wrapped space analytically;
/// Christoffels and curvature go through the finite-difference fallbacks.
class NumericalView : public AmbientSpace {
 public:
  explicit NumericalView(std::shared_ptr<const AmbientSpace> base);
  std::string name() const override;
  Signature signature() const override { return base_->signature(); }
  bool in_domain(const Eigen::VectorXd& x) const override { return base_->in_domain(x); }
  Eigen::MatrixXd metric(const Eigen::VectorXd& x) const override { return base_->metric(x); }
  MultiTime multitime(const Eigen::VectorXd& x) const override { return base_->multitime(x); }

 private:
  std::shared_ptr<const AmbientSpace> base_;
};

// ---------------------------------------------------------------------------
// Timelike curvature estimator
// ---------------------------------------------------------------------------

struct Box {
  Eigen::VectorXd lo, hi;
};

struct TccOptions {
  int n_samples = 100000;
  std::uint64_t seed = 1;
  double gram_min_eig = 0.1;  // rejection threshold for raw plane draws
  int max_retries = 200;
};

struct TccResult {
  double k_est = 0.0;        // infimum over samples of the curvature ratio
  double k_sup = 0.0;        // supremum, as a spread diagnostic
  long accepted = 0;
  long rejected = 0;
  Eigen::VectorXd point;     // witness configuration
  Eigen::MatrixXd plane;     // dim x n, G-orthonormal spacelike columns
  Eigen::VectorXd X;         // unit timelike normal to the plane
};

/// Samples spacelike n-planes and timelike normals over `region` and returns
/// the infimum of sum_i G(Rbar(X, tau_i)X, tau_i) / G(X, X) with a witness.
TccResult tcc_estimate(const AmbientSpace& space, const Box& region,
                       const TccOptions& opts);

}  // namespace mcflow
