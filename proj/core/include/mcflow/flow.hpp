#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mcflow/patch.hpp"

namespace mcflow {

enum class DtPolicy { Fixed, Cfl };
enum class Integrator { Euler, Rk2 };

struct FlowConfig {
  DtPolicy dt_policy = DtPolicy::Cfl;
  double dt = 1e-3;     // step size under the fixed policy
  double c_cfl = 0.2;   // dt <= c_cfl * h_min^2 / (1 + sup|A|^2) under Cfl
  Integrator integrator = Integrator::Euler;

  long max_steps = 100;
  double s_end = std::numeric_limits<double>::infinity();
  long snapshot_every = 0;  // 0 keeps only the initial and final states
  int max_halvings = 10;    // per-step dt halvings before giving up
  int margin = 2;           // interior margin for sup statistics and residuals

  bool residual_monitors = true;  // uflow / curvature / area residual columns

  // search grid for the tilt-bound constant: {0} plus a geometric range
  double k_grid_lo = 1e-2;
  double k_grid_hi = 1e3;
  int k_grid_points = 61;  // total including the leading 0

  // first-variation sign of area under df/ds = H, fixed by calibration
  double area_sign = -1.0;
};

/// One row of the monitor series, written per accepted step.  Sup statistics
/// describe the post-step state; the residual columns describe the transition
/// into it, with spatial operators evaluated on the pre-step state:
///   res_uflow  sup over heights and interior nodes of
///              (u(s+dt) - u(s))/dt - lap(u) + tr_g Hess(t)
///   res_H2     interior sup of (d/ds - lap)|H|^2 + 2|DH|^2 + 2|H.A|^2,
///              flat ambients only (NaN otherwise)
///   res_area   (area(s+dt) - area(s))/dt - area_sign * integral G(H,H) dmu
/// K_min is the smallest grid value K with
///   v(p) <= (m + sup_0 v) * exp(K * (max_hist u - u(p)))  at every node,
/// +inf when even the largest grid value fails.
struct MonitorRow {
  long step = 0;
  double s = 0.0;
  double dt = 0.0;
  double sup_v = 0.0;
  double min_g_eig = 0.0;
  double sup_H2 = 0.0;
  double sup_A2 = 0.0;
  double area = 0.0;
  double K_min = 0.0;
  double res_uflow = 0.0;
  double res_H2 = 0.0;
  double res_area = 0.0;
};

struct FlowSnapshot {
  long step = 0;
  double s = 0.0;
  ImmersedPatch patch;
};

struct FlowTrajectory {
  std::vector<FlowSnapshot> snapshots;  // always starts with the initial state
  std::vector<MonitorRow> rows;         // one per accepted step
  int halt_code = 0;          // 0 completed, 3 step rejection exhausted
  std::string halt_reason;
  long total_halvings = 0;
  double V0 = 0.0;   // sup of the tilt over the initial state
  double M_u = 0.0;  // running max of the total height over the run
};

/// Integrates df/ds = H from the initial patch.  Forward Euler or midpoint
/// RK2; a step whose post state (or RK2 midpoint) loses spacelikeness is
/// retried with halved dt, and the flow halts on the last valid state once
/// the halvings are exhausted.  An invalid *initial* state still throws.
FlowTrajectory run_flow(const ImmersedPatch& initial, const FlowConfig& cfg = {});

/// Least-squares fit of a sup series against C * (1 + 1/s) over rows with
/// s >= s1; reports the fitted C, the max relative excess of the series over
/// the fit, and the step where it occurs.
struct BoundShapeFit {
  double C_H2 = 0.0;
  double excess_H2 = 0.0;
  long witness_H2 = 0;
  double C_A2 = 0.0;
  double excess_A2 = 0.0;
  long witness_A2 = 0;
};

BoundShapeFit fit_bound_shape(const std::vector<MonitorRow>& rows, double s1);

/// The K grid used by the monitor: {0} then k_grid_points-1 geometric values.
std::vector<double> gradient_bound_grid(const FlowConfig& cfg);

}  // namespace mcflow
