#include "mcflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd mean_curvature_matrix(const GeometryField& geom, int dim) {
  Eigen::MatrixXd H(dim, static_cast<long>(geom.node.size()));
  for (long i = 0; i < H.cols(); ++i) H.col(i) = geom.node[i].Hvec;
  return H;
}

bool derive_checked(const ImmersedPatch& patch, const GeometryOptions& gopts,
                    GeometryField& out, std::string& why) {
  if (!patch.f.allFinite()) {
    why = "non-finite node positions";
    return false;
  }
  try {
    out = derive_geometry(patch, gopts);
  } catch (const InvariantViolation& e) {
    why = e.what();
    return false;
  }
  if (!std::isfinite(out.area) || !std::isfinite(out.sup_A2) ||
      !std::isfinite(out.sup_H2)) {
    why = "non-finite geometry statistics";
    return false;
  }
  return true;
}

/// Sup over heights and interior nodes of
/// (u_next - u)/dt - lap(u) + tr_g Hess(t), spatial terms on the pre state.
double uflow_residual(const ImmersedPatch& patch, const GeometryField& pre,
                      const GeometryField& post, double dt, int margin) {
  const GridTopology& topo = patch.topo;
  const AmbientSpace& space = *patch.space;
  const int m = space.signature().m;
  const int rank = topo.rank();
  const long N = topo.nodes();

  MultiTime mt0 = space.multitime(pre.node[0].x);
  std::vector<Eigen::VectorXd> lap(m);
  for (int g = 0; g < m; ++g) {
    Eigen::VectorXd shifts = Eigen::VectorXd::Zero(rank);
    for (int k = 0; k < rank; ++k)
      if (topo.axis(k).shift.size() > 0)
        shifts(k) = mt0.dt.row(g).dot(topo.axis(k).shift);
    Eigen::VectorXd u(N);
    for (long i = 0; i < N; ++i) u(i) = pre.node[i].u(g);
    lap[g] = laplace_beltrami(topo, pre.node, u, shifts);
  }

  const int mg = std::max(margin, 2);
  double sup = 0.0;
  for (long i = 0; i < N; ++i) {
    std::vector<int> I = topo.unflatten(i);
    if (!topo.interior(I, mg)) continue;
    const NodeGeometry& nd = pre.node[i];
    MultiTime mt = space.multitime(nd.x);
    for (int g = 0; g < m; ++g) {
      double hess_tr =
          (nd.ginv * (nd.df.transpose() * mt.hess[g] * nd.df)).trace();
      double r = (post.node[i].u(g) - nd.u(g)) / dt - lap[g](i) + hess_tr;
      sup = std::max(sup, std::abs(r));
    }
  }
  return sup;
}

/// Interior sup of (d/ds - lap)|H|^2 + 2|DH|^2 + 2|H.A|^2 for flat ambients,
/// where DH combines tangential frame derivatives of the H components with
/// the normal-connection correction C.
double curvature_residual(const ImmersedPatch& patch, const GeometryField& pre,
                          const GeometryField& post, double dt, int margin) {
  const GridTopology& topo = patch.topo;
  const int n = topo.rank();
  const int m = patch.space->signature().m;
  const long N = topo.nodes();

  Eigen::VectorXd h2(N);
  for (long i = 0; i < N; ++i) h2(i) = pre.node[i].H2;
  Eigen::VectorXd lap =
      laplace_beltrami(topo, pre.node, h2, Eigen::VectorXd::Zero(n));

  const int mg = std::max(margin, 2);
  double sup = 0.0;
  Eigen::MatrixXd dH(n, m);
  for (long i = 0; i < N; ++i) {
    std::vector<int> I = topo.unflatten(i);
    if (!topo.interior(I, mg)) continue;
    const NodeGeometry& nd = pre.node[i];

    for (int k = 0; k < n; ++k) {
      std::vector<int> Ip = I, Im = I;
      Ip[k] += 1;
      Im[k] -= 1;
      const Eigen::VectorXd& Hp = pre.node[topo.wrap_index(Ip)].Hfr;
      const Eigen::VectorXd& Hm = pre.node[topo.wrap_index(Im)].Hfr;
      dH.row(k) = (Hp - Hm).transpose() / (2.0 * topo.axis(k).h);
    }

    double DH2 = 0.0;
    for (int ti = 0; ti < n; ++ti)
      for (int b = 0; b < m; ++b) {
        double val = 0.0;
        for (int k = 0; k < n; ++k) val += nd.B(ti, k) * dH(k, b);
        for (int a = 0; a < m; ++a) val += nd.Hfr(a) * nd.C[ti](a, b);
        DH2 += val * val;
      }

    double HA2 = 0.0;
    for (int ti = 0; ti < n; ++ti)
      for (int tj = 0; tj < n; ++tj) {
        double val = 0.0;
        for (int a = 0; a < m; ++a) val += nd.Hfr(a) * nd.A[a](ti, tj);
        HA2 += val * val;
      }

    double r = (post.node[i].H2 - nd.H2) / dt - lap(i) + 2.0 * DH2 + 2.0 * HA2;
    sup = std::max(sup, std::abs(r));
  }
  return sup;
}

/// |(area_next - area)/dt - sign * integral of G(H,H) dmu|; the integrand is
/// -|H|^2 since the normal frame metric is -I.
double area_residual(const ImmersedPatch& patch, const GeometryField& pre,
                     const GeometryField& post, double dt, double sign) {
  const GridTopology& topo = patch.topo;
  double integral = 0.0;
  for (long i = 0; i < topo.nodes(); ++i)
    integral -= topo.weight(topo.unflatten(i)) * pre.node[i].sqrtg * pre.node[i].H2;
  return std::abs((post.area - pre.area) / dt - sign * integral);
}

double k_min_monitor(const GeometryField& geom, double m_plus_V0, double M_u,
                     const std::vector<double>& grid) {
  double need = 0.0;
  for (const NodeGeometry& nd : geom.node) {
    if (nd.v <= m_plus_V0) continue;
    double d = M_u - nd.u.sum();
    if (d <= 0.0) return kInf;  // tilt exceeds the base bound at the height max
    need = std::max(need, std::log(nd.v / m_plus_V0) / d);
  }
  if (need <= 0.0) return 0.0;
  for (double k : grid)
    if (k >= need * (1.0 - 1e-12)) return k;
  return kInf;  // unbounded at this resolution
}

}  // namespace

std::vector<double> gradient_bound_grid(const FlowConfig& cfg) {
  std::vector<double> grid{0.0};
  int pts = cfg.k_grid_points - 1;
  if (pts < 1) return grid;
  if (pts == 1) {
    grid.push_back(cfg.k_grid_lo);
    return grid;
  }
  double ratio = std::pow(cfg.k_grid_hi / cfg.k_grid_lo, 1.0 / (pts - 1));
  double k = cfg.k_grid_lo;
  for (int j = 0; j < pts; ++j, k *= ratio)
    grid.push_back(j + 1 == pts ? cfg.k_grid_hi : k);
  return grid;
}

FlowTrajectory run_flow(const ImmersedPatch& initial, const FlowConfig& cfg) {
  if (cfg.dt_policy == DtPolicy::Fixed && !(cfg.dt > 0.0))
    throw std::invalid_argument("flow dt must be positive");
  if (!(cfg.c_cfl > 0.0) || cfg.c_cfl > 1.0)
    throw std::invalid_argument("flow c_cfl must lie in (0, 1]");

  const int dim = initial.space->dim();
  const int m = initial.space->signature().m;
  GeometryOptions gopts;
  gopts.margin = cfg.margin;

  FlowTrajectory traj;
  ImmersedPatch cur = initial;
  GeometryField gcur = derive_geometry(cur, gopts);  // invalid input throws

  double V0 = 0.0, M_u = -kInf;
  for (const NodeGeometry& nd : gcur.node) {
    V0 = std::max(V0, nd.v);
    M_u = std::max(M_u, nd.u.sum());
  }
  traj.V0 = V0;
  traj.M_u = M_u;
  const double m_plus_V0 = m + V0;
  const std::vector<double> kgrid = gradient_bound_grid(cfg);

  double h_min = kInf;
  for (int k = 0; k < cur.topo.rank(); ++k)
    h_min = std::min(h_min, cur.topo.axis(k).h);

  traj.snapshots.push_back({0, 0.0, cur});

  double s = 0.0;
  long step = 0;
  const bool flat = initial.space->flat();
  while (step < cfg.max_steps && s < cfg.s_end) {
    double dt = cfg.dt_policy == DtPolicy::Fixed
                    ? cfg.dt
                    : cfg.c_cfl * h_min * h_min / (1.0 + gcur.sup_A2);
    // land on s_end exactly, but never take a roundoff-sized final step
    double remaining = cfg.s_end - s;
    if (remaining <= dt * 1e-9) break;
    if (remaining <= dt * (1.0 + 1e-9)) dt = remaining;

    Eigen::MatrixXd H0 = mean_curvature_matrix(gcur, dim);
    if (!H0.allFinite()) {
      traj.halt_code = 3;
      traj.halt_reason = "non-finite mean curvature";
      break;
    }

    ImmersedPatch next = cur;
    GeometryField gnext;
    std::string why;
    bool accepted = false;
    for (int attempt = 0; attempt <= cfg.max_halvings; ++attempt) {
      bool stage_ok = true;
      if (cfg.integrator == Integrator::Rk2) {
        ImmersedPatch mid = cur;
        mid.f = cur.f + (0.5 * dt) * H0;
        GeometryField gmid;
        if (derive_checked(mid, gopts, gmid, why))
          next.f = cur.f + dt * mean_curvature_matrix(gmid, dim);
        else
          stage_ok = false;
      } else {
        next.f = cur.f + dt * H0;
      }
      if (stage_ok && derive_checked(next, gopts, gnext, why)) {
        accepted = true;
        break;
      }
      if (attempt == cfg.max_halvings) break;  // the halved dt would go untried
      dt *= 0.5;
      ++traj.total_halvings;
    }
    if (!accepted) {
      traj.halt_code = 3;
      traj.halt_reason = "step rejected after halvings: " + why;
      break;
    }

    ++step;
    s += dt;

    MonitorRow row;
    row.step = step;
    row.s = s;
    row.dt = dt;
    row.sup_v = gnext.sup_v;
    row.min_g_eig = gnext.min_g_eig;
    row.sup_H2 = gnext.sup_H2;
    row.sup_A2 = gnext.sup_A2;
    row.area = gnext.area;
    if (cfg.residual_monitors) {
      row.res_uflow = uflow_residual(cur, gcur, gnext, dt, cfg.margin);
      row.res_H2 = flat ? curvature_residual(cur, gcur, gnext, dt, cfg.margin)
                        : std::numeric_limits<double>::quiet_NaN();
      row.res_area = area_residual(cur, gcur, gnext, dt, cfg.area_sign);
    }
    for (const NodeGeometry& nd : gnext.node) M_u = std::max(M_u, nd.u.sum());
    traj.M_u = M_u;
    row.K_min = k_min_monitor(gnext, m_plus_V0, M_u, kgrid);
    traj.rows.push_back(row);

    cur = std::move(next);
    gcur = std::move(gnext);
    if (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0)
      traj.snapshots.push_back({step, s, cur});
  }

  if (traj.snapshots.back().step != step)
    traj.snapshots.push_back({step, s, cur});
  return traj;
}

BoundShapeFit fit_bound_shape(const std::vector<MonitorRow>& rows, double s1) {
  BoundShapeFit fit;
  double swH = 0.0, sw2 = 0.0, swA = 0.0;
  for (const MonitorRow& r : rows) {
    if (r.s < s1) continue;
    double w = 1.0 + 1.0 / r.s;
    swH += r.sup_H2 * w;
    swA += r.sup_A2 * w;
    sw2 += w * w;
  }
  if (sw2 == 0.0) return fit;
  fit.C_H2 = swH / sw2;
  fit.C_A2 = swA / sw2;
  for (const MonitorRow& r : rows) {
    if (r.s < s1) continue;
    double w = 1.0 + 1.0 / r.s;
    if (fit.C_H2 > 0.0) {
      double e = (r.sup_H2 - fit.C_H2 * w) / (fit.C_H2 * w);
      if (e > fit.excess_H2) {
        fit.excess_H2 = e;
        fit.witness_H2 = r.step;
      }
    }
    if (fit.C_A2 > 0.0) {
      double e = (r.sup_A2 - fit.C_A2 * w) / (fit.C_A2 * w);
      if (e > fit.excess_A2) {
        fit.excess_A2 = e;
        fit.witness_A2 = r.step;
      }
    }
  }
  return fit;
}

}  // namespace mcflow
