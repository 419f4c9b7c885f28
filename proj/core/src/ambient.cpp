#include "mcflow/ambient.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace mcflow {

namespace {

Eigen::MatrixXd metric_partial(const AmbientSpace& space, const Eigen::VectorXd& x,
                               int a, double h) {
  Eigen::VectorXd xp = x, xm = x;
  xp[a] += h;
  xm[a] -= h;
  return (space.metric(xp) - space.metric(xm)) / (2.0 * h);
}

}  // namespace

std::vector<Eigen::MatrixXd> christoffel_fd(const AmbientSpace& space,
                                            const Eigen::VectorXd& x, double h) {
  const int d = space.dim();
  std::vector<Eigen::MatrixXd> dG(d);
  for (int a = 0; a < d; ++a) dG[a] = metric_partial(space, x, a, h);
  const Eigen::MatrixXd Ginv = space.metric(x).inverse();
  std::vector<Eigen::MatrixXd> Gamma(d, Eigen::MatrixXd::Zero(d, d));
  for (int c = 0; c < d; ++c)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double s = 0.0;
        for (int e = 0; e < d; ++e)
          s += Ginv(c, e) * (dG[a](e, b) + dG[b](e, a) - dG[e](a, b));
        Gamma[c](a, b) = 0.5 * s;
      }
  return Gamma;
}

Tensor4 riemann_fd(const AmbientSpace& space, const Eigen::VectorXd& x, double h) {
  const int d = space.dim();
  // dGamma[a][e](b, c) = d_a Gamma^e_{bc}
  std::vector<std::vector<Eigen::MatrixXd>> dGamma(d);
  for (int a = 0; a < d; ++a) {
    Eigen::VectorXd xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    auto Gp = space.christoffel(xp);
    auto Gm = space.christoffel(xm);
    dGamma[a].resize(d);
    for (int e = 0; e < d; ++e) dGamma[a][e] = (Gp[e] - Gm[e]) / (2.0 * h);
  }
  auto Gamma = space.christoffel(x);
  const Eigen::MatrixXd G = space.metric(x);
  Tensor4 R(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int dd = 0; dd < d; ++dd) {
          double s = 0.0;
          for (int e = 0; e < d; ++e) {
            double up = -dGamma[a][e](b, c) + dGamma[b][e](a, c);
            for (int f = 0; f < d; ++f)
              up += -Gamma[f](b, c) * Gamma[e](a, f) + Gamma[f](a, c) * Gamma[e](b, f);
            s += G(dd, e) * up;
          }
          R(a, b, c, dd) = s;
        }
  return R;
}

std::vector<Eigen::MatrixXd> AmbientSpace::christoffel(const Eigen::VectorXd& x) const {
  return christoffel_fd(*this, x, fd_step);
}

Tensor4 AmbientSpace::riemann(const Eigen::VectorXd& x) const {
  return riemann_fd(*this, x, fd_step);
}

TimelikeFrame timelike_frame(const AmbientSpace& space, const Eigen::VectorXd& x) {
  const auto mt = space.multitime(x);
  const Eigen::MatrixXd G = space.metric(x);
  const Eigen::MatrixXd Ginv = G.inverse();
  const int m = space.signature().m;
  TimelikeFrame out;
  out.T.resize(space.dim(), m);
  out.psi.resize(m);
  for (int a = 0; a < m; ++a) {
    Eigen::VectorXd grad = Ginv * mt.dt.row(a).transpose();
    const double q = grad.dot(G * grad);
    if (q >= 0.0)
      throw std::runtime_error("time function gradient is not timelike at this point");
    out.psi[a] = 1.0 / std::sqrt(-q);
    out.T.col(a) = -out.psi[a] * grad;
  }
  return out;
}

std::vector<Eigen::MatrixXd> multitime_hessian(const AmbientSpace& space,
                                               const Eigen::VectorXd& x) {
  const auto mt = space.multitime(x);
  const auto Gamma = space.christoffel(x);
  const int d = space.dim();
  const int m = space.signature().m;
  std::vector<Eigen::MatrixXd> H(m);
  for (int a = 0; a < m; ++a) {
    H[a] = mt.hess[a];
    for (int c = 0; c < d; ++c) H[a] -= mt.dt(a, c) * Gamma[c];
  }
  return H;
}

// ---------------------------------------------------------------------------
// FlatSpace
// ---------------------------------------------------------------------------

FlatSpace::FlatSpace(Signature sig) : sig_(sig) { sig_.validate(); }

std::string FlatSpace::name() const {
  return "flat(" + std::to_string(sig_.n) + "," + std::to_string(sig_.m) + ")";
}

Eigen::MatrixXd FlatSpace::metric(const Eigen::VectorXd&) const {
  Eigen::MatrixXd G = Eigen::MatrixXd::Identity(sig_.dim(), sig_.dim());
  G.bottomRightCorner(sig_.m, sig_.m) *= -1.0;
  return G;
}

std::vector<Eigen::MatrixXd> FlatSpace::christoffel(const Eigen::VectorXd&) const {
  return std::vector<Eigen::MatrixXd>(sig_.dim(),
                                      Eigen::MatrixXd::Zero(sig_.dim(), sig_.dim()));
}

Tensor4 FlatSpace::riemann(const Eigen::VectorXd&) const { return Tensor4(sig_.dim()); }

MultiTime FlatSpace::multitime(const Eigen::VectorXd& x) const {
  const int d = sig_.dim();
  MultiTime mt;
  mt.t = x.tail(sig_.m);
  mt.dt = Eigen::MatrixXd::Zero(sig_.m, d);
  for (int a = 0; a < sig_.m; ++a) mt.dt(a, sig_.n + a) = 1.0;
  mt.hess.assign(sig_.m, Eigen::MatrixXd::Zero(d, d));
  return mt;
}

// ---------------------------------------------------------------------------
// NeutralTangentBundle
// ---------------------------------------------------------------------------

NeutralTangentBundle::NeutralTangentBundle(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("NeutralTangentBundle needs n >= 1");
}

std::string NeutralTangentBundle::name() const {
  return "tangent-bundle(" + std::to_string(n_) + ")";
}

Eigen::MatrixXd NeutralTangentBundle::metric(const Eigen::VectorXd&) const {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * n_, 2 * n_);
  G.topRightCorner(n_, n_) = 0.5 * Eigen::MatrixXd::Identity(n_, n_);
  G.bottomLeftCorner(n_, n_) = 0.5 * Eigen::MatrixXd::Identity(n_, n_);
  return G;
}

std::vector<Eigen::MatrixXd> NeutralTangentBundle::christoffel(const Eigen::VectorXd&) const {
  return std::vector<Eigen::MatrixXd>(2 * n_, Eigen::MatrixXd::Zero(2 * n_, 2 * n_));
}

Tensor4 NeutralTangentBundle::riemann(const Eigen::VectorXd&) const { return Tensor4(2 * n_); }

MultiTime NeutralTangentBundle::multitime(const Eigen::VectorXd& x) const {
  const int d = 2 * n_;
  MultiTime mt;
  mt.t.resize(n_);
  mt.dt = Eigen::MatrixXd::Zero(n_, d);
  for (int a = 0; a < n_; ++a) {
    mt.t[a] = 0.5 * (x[n_ + a] - x[a]);
    mt.dt(a, a) = -0.5;
    mt.dt(a, n_ + a) = 0.5;
  }
  mt.hess.assign(n_, Eigen::MatrixXd::Zero(d, d));
  return mt;
}

// ---------------------------------------------------------------------------
// ProductSpace
// ---------------------------------------------------------------------------

Eigen::MatrixXd ProductFactor::metric(const Eigen::VectorXd& xf) const {
  if (kind == Kind::Sphere2) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
    const double s = std::sin(xf[0]);
    g(0, 0) = r * r;
    g(1, 1) = r * r * s * s;
    return g;
  }
  return Eigen::MatrixXd::Identity(d, d);
}

std::vector<Eigen::MatrixXd> ProductFactor::christoffel(const Eigen::VectorXd& xf) const {
  std::vector<Eigen::MatrixXd> Gamma(d, Eigen::MatrixXd::Zero(d, d));
  if (kind == Kind::Sphere2) {
    const double th = xf[0];
    Gamma[0](1, 1) = -std::sin(th) * std::cos(th);
    Gamma[1](0, 1) = Gamma[1](1, 0) = std::cos(th) / std::sin(th);
  }
  return Gamma;
}

bool ProductFactor::in_domain(const Eigen::VectorXd& xf) const {
  if (kind == Kind::Sphere2) {
    const double margin = 1e-6;
    return xf[0] > margin && xf[0] < M_PI - margin;
  }
  return true;
}

ProductSpace::ProductSpace(ProductFactor f1, ProductFactor f2) : f1_(f1), f2_(f2) {}

std::string ProductSpace::name() const {
  auto fname = [](const ProductFactor& f) {
    if (f.kind == ProductFactor::Kind::Sphere2)
      return "S2(r=" + std::to_string(f.r) + ")";
    return "R" + std::to_string(f.d);
  };
  return "product(" + fname(f1_) + "," + fname(f2_) + ")";
}

bool ProductSpace::in_domain(const Eigen::VectorXd& x) const {
  return f1_.in_domain(x.head(f1_.d)) && f2_.in_domain(x.tail(f2_.d));
}

Eigen::MatrixXd ProductSpace::metric(const Eigen::VectorXd& x) const {
  const int d = dim();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d, d);
  G.topLeftCorner(f1_.d, f1_.d) = f1_.metric(x.head(f1_.d));
  G.bottomRightCorner(f2_.d, f2_.d) = -f2_.metric(x.tail(f2_.d));
  return G;
}

std::vector<Eigen::MatrixXd> ProductSpace::christoffel(const Eigen::VectorXd& x) const {
  const int d = dim();
  std::vector<Eigen::MatrixXd> Gamma(d, Eigen::MatrixXd::Zero(d, d));
  auto G1 = f1_.christoffel(x.head(f1_.d));
  auto G2 = f2_.christoffel(x.tail(f2_.d));
  for (int c = 0; c < f1_.d; ++c) Gamma[c].topLeftCorner(f1_.d, f1_.d) = G1[c];
  for (int c = 0; c < f2_.d; ++c)
    Gamma[f1_.d + c].bottomRightCorner(f2_.d, f2_.d) = G2[c];
  return Gamma;
}

Tensor4 ProductSpace::riemann(const Eigen::VectorXd& x) const {
  const int d = dim();
  Tensor4 R(d);
  const double K1 = f1_.curvature();
  const double K2 = f2_.curvature();
  if (K1 != 0.0) {
    const Eigen::MatrixXd g1 = f1_.metric(x.head(f1_.d));
    for (int a = 0; a < f1_.d; ++a)
      for (int b = 0; b < f1_.d; ++b)
        for (int c = 0; c < f1_.d; ++c)
          for (int e = 0; e < f1_.d; ++e)
            R(a, b, c, e) = -K1 * (g1(a, e) * g1(b, c) - g1(a, c) * g1(b, e));
  }
  if (K2 != 0.0) {
    const Eigen::MatrixXd g2 = f2_.metric(x.tail(f2_.d));
    const int o = f1_.d;
    for (int a = 0; a < f2_.d; ++a)
      for (int b = 0; b < f2_.d; ++b)
        for (int c = 0; c < f2_.d; ++c)
          for (int e = 0; e < f2_.d; ++e)
            R(o + a, o + b, o + c, o + e) =
                K2 * (g2(a, e) * g2(b, c) - g2(a, c) * g2(b, e));
  }
  return R;
}

MultiTime ProductSpace::multitime(const Eigen::VectorXd& x) const {
  const int d = dim();
  MultiTime mt;
  mt.t = x.tail(f2_.d);
  mt.dt = Eigen::MatrixXd::Zero(f2_.d, d);
  for (int a = 0; a < f2_.d; ++a) mt.dt(a, f1_.d + a) = 1.0;
  mt.hess.assign(f2_.d, Eigen::MatrixXd::Zero(d, d));
  return mt;
}

// ---------------------------------------------------------------------------
// NumericalView
// ---------------------------------------------------------------------------

NumericalView::NumericalView(std::shared_ptr<const AmbientSpace> base)
    : base_(std::move(base)) {
  fd_step = base_->fd_step;
}

std::string NumericalView::name() const { return base_->name() + "#fd"; }

// ---------------------------------------------------------------------------
// Timelike curvature estimator
// ---------------------------------------------------------------------------

TccResult tcc_estimate(const AmbientSpace& space, const Box& region,
                       const TccOptions& opts) {
  const int d = space.dim();
  const int n = space.signature().n;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  TccResult res;
  res.k_est = std::numeric_limits<double>::infinity();
  res.k_sup = -std::numeric_limits<double>::infinity();
  bool have_witness = false;

  const long draw_cap = static_cast<long>(opts.n_samples) * opts.max_retries;
  long draws = 0;
  while (res.accepted < opts.n_samples && draws < draw_cap) {
    ++draws;
    // point in region, inside the chart domain
    Eigen::VectorXd x(d);
    bool ok = false;
    for (int r = 0; r < opts.max_retries && !ok; ++r) {
      for (int i = 0; i < d; ++i)
        x[i] = region.lo[i] + unif(rng) * (region.hi[i] - region.lo[i]);
      ok = space.in_domain(x);
    }
    if (!ok) continue;
    const Eigen::MatrixXd G = space.metric(x);

    // orthonormal frame at x, spacelike legs first; Gaussian draws are taken
    // in frame components so the sampling law does not depend on the chart
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ges(G);
    Eigen::MatrixXd F(d, d);
    int ip = 0, in_ = 0;
    for (int i = 0; i < d; ++i) {
      const double lam = ges.eigenvalues()[i];
      const int col = lam > 0.0 ? ip++ : n + in_++;
      F.col(col) = ges.eigenvectors().col(i) / std::sqrt(std::abs(lam));
    }

    // spacelike n-plane from Gaussian unit directions in frame components;
    // rejected if the induced Gram matrix is close to degenerate, then
    // orthonormalized against G.  Unit columns keep the conditioning cutoff
    // meaningful, otherwise rare large draws admit arbitrarily boosted
    // planes and the infimum never settles.
    Eigen::MatrixXd A(d, n);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
    for (int j = 0; j < n; ++j) A.col(j).normalize();
    A = F * A;
    Eigen::MatrixXd gram = A.transpose() * G * A;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (es.eigenvalues().minCoeff() < opts.gram_min_eig) {
      ++res.rejected;
      continue;
    }
    Eigen::MatrixXd tau = A;
    ok = true;
    for (int j = 0; j < n && ok; ++j) {
      Eigen::VectorXd v = tau.col(j);
      for (int k = 0; k < j; ++k) v -= v.dot(G * tau.col(k)) * tau.col(k);
      const double nsq = v.dot(G * v);
      if (nsq <= 1e-12) ok = false;
      else tau.col(j) = v / std::sqrt(nsq);
    }
    if (!ok) {
      ++res.rejected;
      continue;
    }

    // unit timelike normal to the plane
    Eigen::VectorXd X(d);
    ok = false;
    for (int r = 0; r < opts.max_retries && !ok; ++r) {
      for (int i = 0; i < d; ++i) X[i] = gauss(rng);
      X = F * X;
      for (int j = 0; j < n; ++j) X -= X.dot(G * tau.col(j)) * tau.col(j);
      const double q = X.dot(G * X);
      if (q >= -1e-12) continue;
      X /= std::sqrt(-q);
      ok = true;
    }
    if (!ok) continue;

    const Tensor4 R = space.riemann(x);
    double num = 0.0;
    for (int j = 0; j < n; ++j) {
      const Eigen::VectorXd& t = tau.col(j);
      for (int a = 0; a < d; ++a) {
        if (X[a] == 0.0) continue;
        for (int b = 0; b < d; ++b) {
          if (t[b] == 0.0) continue;
          for (int c = 0; c < d; ++c) {
            if (X[c] == 0.0) continue;
            for (int e = 0; e < d; ++e)
              num += X[a] * t[b] * X[c] * t[e] * R(a, b, c, e);
          }
        }
      }
    }
    const double ratio = num / X.dot(G * X);
    ++res.accepted;
    if (ratio > res.k_sup) res.k_sup = ratio;
    if (ratio < res.k_est || !have_witness) {
      res.k_est = ratio;
      res.point = x;
      res.plane = tau;
      res.X = X;
      have_witness = true;
    }
  }
  if (!have_witness)
    throw std::runtime_error("tcc_estimate: no admissible samples in region");
  return res;
}

}  // namespace mcflow
