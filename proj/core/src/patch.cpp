#include "mcflow/patch.hpp"

#include <cmath>
#include <limits>

namespace mcflow {

GridTopology::GridTopology(std::vector<AxisSpec> axes) : axes_(std::move(axes)) {
  stride_.resize(axes_.size());
  long s = 1;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    if (axes_[k].size < 2) throw std::invalid_argument("axis needs at least 2 nodes");
    if (axes_[k].h <= 0) throw std::invalid_argument("axis spacing must be positive");
    stride_[k] = s;
    s *= axes_[k].size;
  }
  nodes_ = s;
}

long GridTopology::index(const std::vector<int>& I) const {
  long idx = 0;
  for (std::size_t k = 0; k < axes_.size(); ++k) idx += stride_[k] * I[k];
  return idx;
}

std::vector<int> GridTopology::unflatten(long idx) const {
  std::vector<int> I(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    I[k] = static_cast<int>(idx % axes_[k].size);
    idx /= axes_[k].size;
  }
  return I;
}

long GridTopology::wrap(std::vector<int> I, int ambient_dim,
                        Eigen::VectorXd& shift) const {
  shift = Eigen::VectorXd::Zero(ambient_dim);
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const AxisSpec& ax = axes_[k];
    if (ax.periodic) {
      if (ax.shift.size() && ax.shift.size() != ambient_dim)
        throw std::invalid_argument("axis shift dimension mismatch");
      while (I[k] >= ax.size) {
        I[k] -= ax.size;
        if (ax.shift.size()) shift += ax.shift;
      }
      while (I[k] < 0) {
        I[k] += ax.size;
        if (ax.shift.size()) shift -= ax.shift;
      }
    } else if (I[k] < 0 || I[k] >= ax.size) {
      throw std::out_of_range("index outside non-periodic axis");
    }
  }
  return index(I);
}

long GridTopology::wrap_index(std::vector<int> I) const {
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const AxisSpec& ax = axes_[k];
    if (ax.periodic) {
      while (I[k] >= ax.size) I[k] -= ax.size;
      while (I[k] < 0) I[k] += ax.size;
    } else if (I[k] < 0 || I[k] >= ax.size) {
      throw std::out_of_range("index outside non-periodic axis");
    }
  }
  return index(I);
}

bool GridTopology::interior(const std::vector<int>& I, int margin) const {
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const AxisSpec& ax = axes_[k];
    if (!ax.periodic && (I[k] < margin || I[k] >= ax.size - margin)) return false;
  }
  return true;
}

Eigen::VectorXd GridTopology::coords(const std::vector<int>& I) const {
  Eigen::VectorXd x(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k)
    x[k] = axes_[k].origin + I[k] * axes_[k].h;
  return x;
}

double GridTopology::weight(const std::vector<int>& I) const {
  double w = 1.0;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const AxisSpec& ax = axes_[k];
    w *= ax.h;
    if (!ax.periodic && (I[k] == 0 || I[k] == ax.size - 1)) w *= 0.5;
  }
  return w;
}

namespace {

using FAt = std::function<Eigen::VectorXd(const std::vector<int>&)>;

FAt stored_accessor(const ImmersedPatch& p) {
  const int dim = p.space->dim();
  return [&p, dim](const std::vector<int>& I) -> Eigen::VectorXd {
    Eigen::VectorXd shift;
    const long idx = p.topo.wrap(I, dim, shift);
    return p.f.col(idx) + shift;
  };
}

/// Second-order first derivative along axis k (central where possible,
/// one-sided at non-periodic edges).
Eigen::VectorXd axis_derivative(const GridTopology& topo, const FAt& f_at,
                                const std::vector<int>& I, int k) {
  const AxisSpec& ax = topo.axis(k);
  std::vector<int> J = I;
  const double h = ax.h;
  const bool central = ax.periodic || (I[k] > 0 && I[k] < ax.size - 1);
  if (central) {
    J[k] = I[k] + 1;
    Eigen::VectorXd fp = f_at(J);
    J[k] = I[k] - 1;
    Eigen::VectorXd fm = f_at(J);
    return (fp - fm) / (2.0 * h);
  }
  if (I[k] == 0) {
    Eigen::VectorXd f0 = f_at(I);
    J[k] = 1;
    Eigen::VectorXd f1 = f_at(J);
    J[k] = 2;
    Eigen::VectorXd f2 = f_at(J);
    return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
  }
  Eigen::VectorXd f0 = f_at(I);
  J[k] = I[k] - 1;
  Eigen::VectorXd f1 = f_at(J);
  J[k] = I[k] - 2;
  Eigen::VectorXd f2 = f_at(J);
  return (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h);
}

Eigen::MatrixXd patch_df(const GridTopology& topo, const FAt& f_at,
                         const std::vector<int>& I, int dim) {
  Eigen::MatrixXd df(dim, topo.rank());
  for (int k = 0; k < topo.rank(); ++k) df.col(k) = axis_derivative(topo, f_at, I, k);
  return df;
}

}  // namespace

NodeGeometry point_frame(const AmbientSpace& space, const Eigen::VectorXd& x,
                         const Eigen::MatrixXd& df, bool require_spacelike,
                         long node_index) {
  const int n = space.signature().n;
  const int m = space.signature().m;

  NodeGeometry out;
  out.x = x;
  out.df = df;

  const Eigen::MatrixXd G = space.metric(x);
  out.g = df.transpose() * G * df;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.g);
  out.min_g_eig = es.eigenvalues().minCoeff();
  out.spacelike = out.min_g_eig > 0.0;
  if (!out.spacelike) {
    if (require_spacelike)
      throw InvariantViolation("induced metric is not positive definite", node_index);
    return out;
  }
  out.ginv = out.g.inverse();
  out.sqrtg = std::sqrt(out.g.determinant());

  // tangent frame by Gram-Schmidt in the coordinate basis
  out.B = Eigen::MatrixXd::Zero(n, n);
  out.tau.resize(df.rows(), n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd row = Eigen::VectorXd::Unit(n, i);
    Eigen::VectorXd vvec = df.col(i);
    for (int j = 0; j < i; ++j) {
      const double c = vvec.dot(G * out.tau.col(j));
      row -= c * out.B.row(j).transpose();
      vvec -= c * out.tau.col(j);
    }
    const double nsq = vvec.dot(G * vvec);
    if (nsq <= 0.0)
      throw InvariantViolation("tangent frame orthogonalization degenerated", node_index);
    const double inv = 1.0 / std::sqrt(nsq);
    out.B.row(i) = inv * row.transpose();
    out.tau.col(i) = inv * vvec;
  }

  // timelike normal frame: project the reference frame off the tangent
  // space, then orthonormalize within the normal bundle
  const TimelikeFrame tf = timelike_frame(space, x);
  const MultiTime mt = space.multitime(x);
  out.nu.resize(df.rows(), m);
  for (int a = 0; a < m; ++a) {
    Eigen::VectorXd w = tf.T.col(a);
    for (int i = 0; i < n; ++i) w -= w.dot(G * out.tau.col(i)) * out.tau.col(i);
    for (int b = 0; b < a; ++b) w += w.dot(G * out.nu.col(b)) * out.nu.col(b);
    const double q = -w.dot(G * w);
    if (q <= 1e-28)
      throw InvariantViolation("normal frame orthogonalization degenerated", node_index);
    out.nu.col(a) = w / std::sqrt(q);
  }

  out.V = -(out.nu.transpose() * G * tf.T);
  out.v = out.V.norm();
  out.u = mt.t;
  out.psi = tf.psi;
  return out;
}

namespace {

/// Second pass: curvature data at node I from the first-pass frames of the
/// node and its axis neighbors.
void assemble_curvature(const AmbientSpace& space, const GridTopology& topo,
                        const std::function<const NodeGeometry&(const std::vector<int>&)>& at,
                        const std::vector<int>& I, NodeGeometry& gm) {
  const int n = space.signature().n;
  const int m = space.signature().m;
  const int dim = space.dim();

  // grid derivatives of the normal frame (frames are invariant under the
  // wrap shifts, which are ambient isometries preserving chart components)
  std::vector<Eigen::MatrixXd> Dnu(n);
  for (int k = 0; k < n; ++k) {
    const AxisSpec& ax = topo.axis(k);
    std::vector<int> J = I;
    const double h = ax.h;
    const bool central = ax.periodic || (I[k] > 0 && I[k] < ax.size - 1);
    if (central) {
      J[k] = I[k] + 1;
      Eigen::MatrixXd np = at(J).nu;
      J[k] = I[k] - 1;
      Eigen::MatrixXd nm = at(J).nu;
      Dnu[k] = (np - nm) / (2.0 * h);
    } else if (I[k] == 0) {
      J[k] = 1;
      Eigen::MatrixXd n1 = at(J).nu;
      J[k] = 2;
      Eigen::MatrixXd n2 = at(J).nu;
      Dnu[k] = (-3.0 * gm.nu + 4.0 * n1 - n2) / (2.0 * h);
    } else {
      J[k] = I[k] - 1;
      Eigen::MatrixXd n1 = at(J).nu;
      J[k] = I[k] - 2;
      Eigen::MatrixXd n2 = at(J).nu;
      Dnu[k] = (3.0 * gm.nu - 4.0 * n1 + n2) / (2.0 * h);
    }
  }

  // ambient covariant derivatives along the coordinate directions
  const auto Gamma = space.christoffel(gm.x);
  const Eigen::MatrixXd G = space.metric(gm.x);
  for (int k = 0; k < n; ++k) {
    for (int a = 0; a < m; ++a) {
      Eigen::VectorXd corr = Eigen::VectorXd::Zero(dim);
      for (int c = 0; c < dim; ++c)
        corr[c] = gm.df.col(k).transpose() * Gamma[c] * gm.nu.col(a);
      Dnu[k].col(a) += corr;
    }
  }

  gm.A.assign(m, Eigen::MatrixXd::Zero(n, n));
  gm.C.assign(n, Eigen::MatrixXd::Zero(m, m));
  std::vector<Eigen::MatrixXd> GD(n);  // G * Dnu[k]
  for (int k = 0; k < n; ++k) GD[k] = G * Dnu[k];

  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double b = gm.B(i, k);
      if (b == 0.0) continue;
      for (int a = 0; a < m; ++a) {
        for (int j = 0; j < n; ++j)
          gm.A[a](i, j) += b * gm.tau.col(j).dot(GD[k].col(a));
        for (int bb = 0; bb < m; ++bb)
          gm.C[i](a, bb) -= b * gm.nu.col(bb).dot(GD[k].col(a));
      }
    }

  gm.Hfr = Eigen::VectorXd::Zero(m);
  for (int a = 0; a < m; ++a) gm.Hfr[a] = gm.A[a].trace();
  gm.Hvec = gm.nu * gm.Hfr;
  gm.H2 = gm.Hfr.squaredNorm();
  gm.A2 = 0.0;
  for (int a = 0; a < m; ++a) gm.A2 += gm.A[a].squaredNorm();
}

}  // namespace

GeometryField derive_geometry(const ImmersedPatch& patch, const GeometryOptions& opts) {
  const AmbientSpace& space = *patch.space;
  const GridTopology& topo = patch.topo;
  const long N = topo.nodes();
  const int dim = space.dim();
  const FAt f_at = stored_accessor(patch);

  GeometryField out;
  out.node.resize(N);
  out.min_g_eig = std::numeric_limits<double>::infinity();

  for (long idx = 0; idx < N; ++idx) {
    const std::vector<int> I = topo.unflatten(idx);
    out.node[idx] = point_frame(space, patch.f.col(idx),
                                patch_df(topo, f_at, I, dim),
                                opts.require_spacelike, idx);
    out.min_g_eig = std::min(out.min_g_eig, out.node[idx].min_g_eig);
  }

  auto at = [&](const std::vector<int>& I) -> const NodeGeometry& {
    Eigen::VectorXd shift;
    return out.node[topo.wrap(I, dim, shift)];
  };

  for (long idx = 0; idx < N; ++idx) {
    const std::vector<int> I = topo.unflatten(idx);
    NodeGeometry& gm = out.node[idx];
    if (!gm.spacelike) continue;
    assemble_curvature(space, topo, at, I, gm);
    out.area += topo.weight(I) * gm.sqrtg;
    if (topo.interior(I, opts.margin)) {
      out.sup_v = std::max(out.sup_v, gm.v);
      out.sup_H2 = std::max(out.sup_H2, gm.H2);
      out.sup_A2 = std::max(out.sup_A2, gm.A2);
    }
  }
  return out;
}

void derive_geometry_streaming(
    const AmbientSpace& space, const GridTopology& topo,
    const std::function<Eigen::VectorXd(const std::vector<int>&)>& f_at,
    const std::function<void(long, const std::vector<int>&, const NodeGeometry&)>& visit,
    const GeometryOptions& opts) {
  const long N = topo.nodes();
  const int dim = space.dim();

  auto frame_at = [&](const std::vector<int>& I) -> NodeGeometry {
    return point_frame(space, f_at(I), patch_df(topo, f_at, I, dim),
                       opts.require_spacelike, topo.index(I));
  };

  for (long idx = 0; idx < N; ++idx) {
    const std::vector<int> I = topo.unflatten(idx);
    NodeGeometry gm = frame_at(I);
    if (gm.spacelike) {
      // neighbor frames recomputed on the fly; cache per call only
      std::vector<NodeGeometry> scratch;
      scratch.reserve(2 * topo.rank());
      auto at = [&](const std::vector<int>& J) -> const NodeGeometry& {
        if (J == I) return gm;
        scratch.push_back(frame_at(J));
        return scratch.back();
      };
      assemble_curvature(space, topo, at, I, gm);
    }
    visit(idx, I, gm);
  }
}

Eigen::VectorXd laplace_beltrami(const GridTopology& topo,
                                 const std::vector<NodeGeometry>& node,
                                 const Eigen::VectorXd& phi,
                                 const Eigen::VectorXd& axis_shifts) {
  const int n = topo.rank();
  const long N = topo.nodes();

  auto phi_at = [&](std::vector<int> I) -> double {
    double extra = 0.0;
    for (int k = 0; k < n; ++k) {
      const AxisSpec& ax = topo.axis(k);
      if (ax.periodic) {
        while (I[k] >= ax.size) {
          I[k] -= ax.size;
          if (axis_shifts.size()) extra += axis_shifts[k];
        }
        while (I[k] < 0) {
          I[k] += ax.size;
          if (axis_shifts.size()) extra -= axis_shifts[k];
        }
      }
    }
    return phi[topo.index(I)] + extra;
  };
  auto node_at = [&](std::vector<int> I) -> const NodeGeometry& {
    return node[topo.wrap_index(std::move(I))];
  };

  // first derivatives of phi per axis (central, for the mixed terms)
  Eigen::MatrixXd dphi = Eigen::MatrixXd::Zero(n, N);
  for (long idx = 0; idx < N; ++idx) {
    const std::vector<int> I = topo.unflatten(idx);
    if (!topo.interior(I, 1)) continue;
    for (int l = 0; l < n; ++l) {
      std::vector<int> J = I;
      J[l] = I[l] + 1;
      const double fp = phi_at(J);
      J[l] = I[l] - 1;
      const double fm = phi_at(J);
      dphi(l, idx) = (fp - fm) / (2.0 * topo.axis(l).h);
    }
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(N);
  for (long idx = 0; idx < N; ++idx) {
    const std::vector<int> I = topo.unflatten(idx);
    if (!topo.interior(I, 2)) continue;
    const NodeGeometry& g0 = node[idx];
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const double h = topo.axis(k).h;
      std::vector<int> J = I;
      J[k] = I[k] + 1;
      const NodeGeometry& gp = node_at(J);
      const double php = phi_at(J);
      J[k] = I[k] - 1;
      const NodeGeometry& gmn = node_at(J);
      const double phm = phi_at(J);
      const double w0 = g0.sqrtg * g0.ginv(k, k);
      const double wp = gp.sqrtg * gp.ginv(k, k);
      const double wm = gmn.sqrtg * gmn.ginv(k, k);
      const double Fp = 0.5 * (w0 + wp) * (php - phi[idx]) / h;
      const double Fm = 0.5 * (w0 + wm) * (phi[idx] - phm) / h;
      acc += (Fp - Fm) / h;
      // mixed fluxes: central derivative along k of sqrtg g^{kl} d_l phi
      for (int l = 0; l < n; ++l) {
        if (l == k) continue;
        J[k] = I[k] + 1;
        const long jp = topo.wrap_index(J);
        J[k] = I[k] - 1;
        const long jm = topo.wrap_index(J);
        const double qp = node[jp].sqrtg * node[jp].ginv(k, l) * dphi(l, jp);
        const double qm = node[jm].sqrtg * node[jm].ginv(k, l) * dphi(l, jm);
        acc += (qp - qm) / (2.0 * h);
      }
    }
    out[idx] = acc / g0.sqrtg;
  }
  return out;
}

IdentityReport check_identities(const ImmersedPatch& patch, const GeometryField& geom,
                                const IdentityOptions& opts) {
  const AmbientSpace& space = *patch.space;
  const GridTopology& topo = patch.topo;
  const int n = topo.rank();
  const int m = space.signature().m;
  const long N = topo.nodes();
  const int margin = opts.margin;

  auto in_window = [&](const std::vector<int>& I) {
    if (!opts.window_lo.size()) return true;
    const Eigen::VectorXd c = topo.coords(I);
    for (int k = 0; k < n; ++k)
      if (c[k] < opts.window_lo[k] || c[k] > opts.window_hi[k]) return false;
    return true;
  };

  IdentityReport rep;

  // scalar wrap shifts of the time functions, evaluated once (the catalog
  // shifts pair with coordinate-affine time functions)
  Eigen::MatrixXd shifts = Eigen::MatrixXd::Zero(m, n);
  {
    const MultiTime mt0 = space.multitime(patch.f.col(0));
    for (int k = 0; k < n; ++k)
      if (topo.axis(k).shift.size())
        shifts.col(k) = mt0.dt * topo.axis(k).shift;
  }

  // u fields and their discrete Laplacians
  Eigen::MatrixXd ufield(m, N);
  for (long idx = 0; idx < N; ++idx) ufield.col(idx) = geom.node[idx].u;
  Eigen::MatrixXd lap(m, N);
  for (int a = 0; a < m; ++a)
    lap.row(a) = laplace_beltrami(topo, geom.node, ufield.row(a).transpose(),
                                  shifts.row(a).transpose())
                     .transpose();

  auto u_at = [&](std::vector<int> I, int a) -> double {
    double extra = 0.0;
    for (int k = 0; k < n; ++k) {
      const AxisSpec& ax = topo.axis(k);
      if (ax.periodic) {
        while (I[k] >= ax.size) {
          I[k] -= ax.size;
          extra += shifts(a, k);
        }
        while (I[k] < 0) {
          I[k] += ax.size;
          extra -= shifts(a, k);
        }
      }
    }
    return ufield(a, topo.index(I)) + extra;
  };

  for (long idx = 0; idx < N; ++idx) {
    const std::vector<int> I = topo.unflatten(idx);
    if (!topo.interior(I, margin) || !in_window(I)) continue;
    const NodeGeometry& gm = geom.node[idx];
    if (!gm.spacelike) continue;
    const MultiTime mt = space.multitime(gm.x);

    // discrete gradients of the u fields
    Eigen::MatrixXd du(m, n);
    for (int a = 0; a < m; ++a)
      for (int k = 0; k < n; ++k) {
        const AxisSpec& ax = topo.axis(k);
        std::vector<int> J = I;
        const bool central = ax.periodic || (I[k] > 0 && I[k] < ax.size - 1);
        if (central) {
          J[k] = I[k] + 1;
          const double up = u_at(J, a);
          J[k] = I[k] - 1;
          const double um = u_at(J, a);
          du(a, k) = (up - um) / (2.0 * ax.h);
        } else if (I[k] == 0) {
          J[k] = 1;
          const double u1 = u_at(J, a);
          J[k] = 2;
          const double u2 = u_at(J, a);
          du(a, k) = (-3.0 * ufield(a, idx) + 4.0 * u1 - u2) / (2.0 * ax.h);
        } else {
          J[k] = I[k] - 1;
          const double u1 = u_at(J, a);
          J[k] = I[k] - 2;
          const double u2 = u_at(J, a);
          du(a, k) = (3.0 * ufield(a, idx) - 4.0 * u1 + u2) / (2.0 * ax.h);
        }
      }
    // chain-rule gradients from the same df that built the frames
    Eigen::MatrixXd du_frame = mt.dt * gm.df;

    Eigen::MatrixXd target = gm.V.transpose() * gm.V - Eigen::MatrixXd::Identity(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) target(a, b) /= gm.psi[a] * gm.psi[b];

    const Eigen::MatrixXd lhs = du * gm.ginv * du.transpose();
    const Eigen::MatrixXd lhs_frame = du_frame * gm.ginv * du_frame.transpose();
    rep.sup_slice = std::max(rep.sup_slice, (lhs - target).cwiseAbs().maxCoeff());
    rep.sup_frame = std::max(rep.sup_frame, (lhs_frame - target).cwiseAbs().maxCoeff());

    // Laplacian identity (only where the divergence-form stencil is filled)
    if (topo.interior(I, std::max(margin, 2))) {
      const auto Hess = multitime_hessian(space, gm.x);
      for (int c = 0; c < m; ++c) {
        double rhs_c = gm.V.col(c).dot(gm.Hfr) / gm.psi[c];
        const Eigen::MatrixXd pb = gm.df.transpose() * Hess[c] * gm.df;
        rhs_c += (gm.ginv * pb).trace();
        rep.sup_laplace = std::max(rep.sup_laplace, std::abs(lap(c, idx) - rhs_c));
      }
    }
  }
  return rep;
}

}  // namespace mcflow
