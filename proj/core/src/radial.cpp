#include "mcflow/radial.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "mcflow/ambient.hpp"
#include "mcflow/initdata.hpp"
#include "mcflow/patch.hpp"

namespace mcflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.4142135623730951;

/// Central differences inside, one-sided second order at the ends.
void profile_derivatives(const RadialProfile& prof, Eigen::VectorXd& Hp,
                         Eigen::VectorXd& Hpp) {
  const long N = prof.H.size();
  const double h = prof.h;
  Hp.resize(N);
  Hpp.resize(N);
  for (long k = 1; k + 1 < N; ++k) {
    Hp(k) = (prof.H(k + 1) - prof.H(k - 1)) / (2 * h);
    Hpp(k) = (prof.H(k + 1) - 2 * prof.H(k) + prof.H(k - 1)) / (h * h);
  }
  Hp(0) = (-3 * prof.H(0) + 4 * prof.H(1) - prof.H(2)) / (2 * h);
  Hp(N - 1) = (3 * prof.H(N - 1) - 4 * prof.H(N - 2) + prof.H(N - 3)) / (2 * h);
  Hpp(0) = (2 * prof.H(0) - 5 * prof.H(1) + 4 * prof.H(2) - prof.H(3)) / (h * h);
  Hpp(N - 1) =
      (2 * prof.H(N - 1) - 5 * prof.H(N - 2) + 4 * prof.H(N - 3) - prof.H(N - 4)) /
      (h * h);
}

}  // namespace

RadialProfile make_radial_profile(double R_lo, double R_hi, int nodes,
                                  const std::function<double(double)>& H0) {
  if (!(R_lo > 0.0) || !(R_hi > R_lo) || nodes < 4)
    throw std::invalid_argument("radial profile needs 0 < R_lo < R_hi, >= 4 nodes");
  RadialProfile prof;
  prof.h = (R_hi - R_lo) / (nodes - 1);
  prof.R.resize(nodes);
  prof.H.resize(nodes);
  for (int k = 0; k < nodes; ++k) {
    prof.R(k) = R_lo + k * prof.h;
    prof.H(k) = H0(prof.R(k));
  }
  prof.bc_lo = prof.H(0);
  prof.bc_hi = prof.H(nodes - 1);
  return prof;
}

SignatureClass signature_classify(double H, double Hprime) {
  int sh = (H > 0) - (H < 0);
  int sp = (Hprime > 0) - (Hprime < 0);
  if (sh < 0 && sp < 0) return {0, 3, "-3"};
  if (sh < 0 && sp == 0) return {0, 2, "(0,2)"};
  if (sh < 0) return {1, 2, "(1,2)"};
  if (sh == 0 && sp < 0) return {0, 1, "(0,1)"};
  if (sh == 0 && sp == 0) return {0, 0, "0"};
  if (sh == 0) return {1, 0, "(1,0)"};
  if (sp < 0) return {2, 1, "(2,1)"};
  if (sp == 0) return {2, 0, "(2,0)"};
  return {3, 0, "+3"};
}

RadialClosedForm closed_form_mean_curvature(const RadialProfile& prof) {
  const long N = prof.H.size();
  RadialClosedForm out;
  Eigen::VectorXd Hpp;
  profile_derivatives(prof, out.Hp, Hpp);
  out.factor.resize(N);
  out.direction.resize(2, N);
  double scale = prof.H.cwiseAbs().maxCoeff();
  for (long k = 0; k < N; ++k) {
    double R = prof.R(k), H = prof.H(k), Hp = out.Hp(k);
    double num = R * H * Hpp(k) + 2 * R * Hp * Hp - 2 * H * Hp;
    double den = kSqrt2 * 2 * R * H * Hp * Hp;
    if (std::abs(den) < 1e-14 * std::max(1.0, scale)) {
      out.degenerate.push_back(k);
      out.factor(k) = std::numeric_limits<double>::quiet_NaN();
    } else {
      out.factor(k) = -num / den;
    }
    out.direction(0, k) = 1.0;
    out.direction(1, k) = -Hp;
  }
  return out;
}

RadialStepResult radial_flow_step(RadialProfile& prof, double dt) {
  const long N = prof.H.size();
  Eigen::VectorXd Hp, Hpp;
  profile_derivatives(prof, Hp, Hpp);

  for (long k = 1; k + 1 < N; ++k) {
    if (!(prof.H(k) > 0.0))
      return {false, k, "window violated: H <= 0"};
    if (!(Hp(k) > 0.0))
      return {false, k, "window violated: H' <= 0"};
  }

  Eigen::VectorXd Hn = prof.H;
  Hn(0) = prof.bc_lo;
  Hn(N - 1) = prof.bc_hi;
  for (long k = 1; k + 1 < N; ++k) {
    double R = prof.R(k), H = prof.H(k);
    double den = 2 * R * H * Hp(k);
    if (std::abs(den) < 1e-300)
      return {false, k, "degenerate denominator"};
    double num = R * H * Hpp(k) + 2 * R * Hp(k) * Hp(k) - 2 * H * Hp(k);
    Hn(k) = H + dt * num / den;
  }

  for (long k = 1; k + 1 < N; ++k) {
    if (!(Hn(k) > 0.0))
      return {false, k, "window violated after step: H <= 0"};
    double hp = (Hn(k + 1) - Hn(k - 1)) / (2 * prof.h);
    if (!(hp > 0.0))
      return {false, k, "window violated after step: H' <= 0"};
  }

  prof.H = std::move(Hn);
  return {};
}

double radial_cfl_dt(const RadialProfile& prof, double c_cfl) {
  const long N = prof.H.size();
  Eigen::VectorXd Hp, Hpp;
  profile_derivatives(prof, Hp, Hpp);
  double inf_d = kInf, sup_rh = 0.0;
  for (long k = 1; k + 1 < N; ++k) {
    inf_d = std::min(inf_d, 2 * prof.R(k) * prof.H(k) * Hp(k));
    sup_rh = std::max(sup_rh, prof.R(k) * prof.H(k));
  }
  if (!(inf_d > 0.0) || !(sup_rh > 0.0)) return 0.0;
  return c_cfl * prof.h * prof.h * inf_d / sup_rh;
}

RadialRun run_radial(const RadialProfile& initial, const RadialConfig& cfg) {
  if (cfg.fixed_dt && !(cfg.dt > 0.0))
    throw std::invalid_argument("radial dt must be positive");
  if (!(cfg.c_cfl > 0.0) || cfg.c_cfl > 1.0)
    throw std::invalid_argument("radial c_cfl must lie in (0, 1]");

  RadialRun run;
  run.profile = initial;
  const long N = initial.H.size();

  Eigen::VectorXd ref(N);
  for (long k = 0; k < N; ++k)
    ref(k) = cfg.reference ? cfg.reference(initial.R(k)) : initial.H(k);

  double t = 0.0;
  long step = 0;
  while (step < cfg.max_steps && t < cfg.t_end) {
    double bound = radial_cfl_dt(run.profile, cfg.c_cfl);
    double dt = cfg.fixed_dt ? cfg.dt : bound;
    double remaining = cfg.t_end - t;
    if (remaining <= dt * 1e-9) break;
    if (remaining <= dt * (1.0 + 1e-9)) dt = remaining;

    bool accepted = false;
    std::string why;
    for (int attempt = 0; attempt <= cfg.max_halvings; ++attempt) {
      bool bound_ok = !(cfg.fixed_dt && dt > bound * (1.0 + 1e-12));
      if (bound_ok) {
        auto res = radial_flow_step(run.profile, dt);
        if (res.accepted) {
          accepted = true;
          break;
        }
        why = res.reason;
      } else {
        why = "step bound exceeded";
      }
      if (attempt == cfg.max_halvings) break;  // the halved dt would go untried
      dt *= 0.5;
      ++run.total_halvings;
    }
    if (!accepted) {
      run.halt_code = 3;
      run.halt_reason = "step rejected after halvings: " + why;
      break;
    }

    ++step;
    t += dt;
    RadialRow row;
    row.step = step;
    row.t = t;
    row.dt = dt;
    row.sup_dev = (run.profile.H - ref).cwiseAbs().maxCoeff();
    Eigen::VectorXd Hp, Hpp;
    profile_derivatives(run.profile, Hp, Hpp);
    row.min_H = run.profile.H.segment(1, N - 2).minCoeff();
    row.min_Hprime = Hp.segment(1, N - 2).minCoeff();
    run.rows.push_back(row);
  }
  return run;
}

CrossCheckReport cross_check_against_generic(
    const std::function<double(double)>& H, double R_lo, double R_hi,
    double h_R, const CrossCheckOptions& opts) {
  const int nR = static_cast<int>(std::lround((R_hi - R_lo) / h_R)) + 1;
  RadialProfile prof = make_radial_profile(R_lo, R_hi, nR, H);
  RadialClosedForm cf = closed_form_mean_curvature(prof);

  const double th_span = M_PI - 2 * opts.theta_margin;
  const double h_ang = opts.angular_coarsening * h_R;
  const int n_th = std::max(8, static_cast<int>(std::lround(th_span / h_ang)) + 1);
  const int n_ph = std::max(8, static_cast<int>(std::lround(2 * M_PI / h_ang)));

  auto space = std::make_shared<NeutralTangentBundle>(3);
  GridTopology topo =
      shell_topology(nR, n_th, n_ph, R_lo, R_hi, opts.theta_margin);
  auto f_at = shell_closure(topo, H);

  Eigen::MatrixXd G = space->metric(Eigen::VectorXd::Zero(6));
  CrossCheckReport rep;
  std::vector<char> degen(nR, 0);
  for (long k : cf.degenerate) degen[static_cast<std::size_t>(k)] = 1;

  GeometryOptions gopts;
  gopts.margin = opts.margin;
  derive_geometry_streaming(
      *space, topo, f_at,
      [&](long, const std::vector<int>& I, const NodeGeometry& nd) {
        if (!topo.interior(I, opts.margin)) return;
        Eigen::VectorXd c = topo.coords(I);
        if (c(0) < opts.window_R_lo || c(0) > opts.window_R_hi) return;
        if (c(1) < opts.window_th_lo || c(1) > opts.window_th_hi) return;
        int k = I[0];
        if (degen[static_cast<std::size_t>(k)]) {
          ++rep.degenerate;
          return;
        }
        double th = c(1), ph = c(2);
        Eigen::Vector3d nhat(std::sin(th) * std::cos(ph),
                             std::sin(th) * std::sin(ph), std::cos(th));
        Eigen::VectorXd D(6);
        D.head(3) = nhat;
        D.tail(3) = -cf.Hp(k) * nhat;
        Eigen::VectorXd Hc = kSqrt2 * cf.factor(k) * D;

        double hc_norm = Hc.norm();
        if (hc_norm < 1e-14) return;
        rep.max_rel_dev =
            std::max(rep.max_rel_dev, (nd.Hvec - Hc).norm() / hc_norm);

        double h2 = std::max(nd.H2, 1e-28);
        double tang2 = 0.0;
        for (int i = 0; i < nd.tau.cols(); ++i) {
          double gi = nd.Hvec.dot(G * nd.tau.col(i));
          tang2 += gi * gi;
        }
        rep.max_tangency = std::max(rep.max_tangency, std::sqrt(tang2 / h2));

        Eigen::VectorXd Dhat = D / D.norm();
        double hn = nd.Hvec.norm();
        if (hn > 1e-14) {
          Eigen::VectorXd ortho = nd.Hvec - nd.Hvec.dot(Dhat) * Dhat;
          rep.max_direction_dev =
              std::max(rep.max_direction_dev, ortho.norm() / hn);
        }
        ++rep.compared;
      },
      gopts);
  return rep;
}

}  // namespace mcflow
