#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace mcflow {

/// Rotationally symmetric radial vector-field profile H(R) on a uniform grid
/// over [R_lo, R_hi], R_lo > 0, with Dirichlet end values.
struct RadialProfile {
  Eigen::VectorXd R;
  Eigen::VectorXd H;
  double h = 0.0;
  double bc_lo = 0.0, bc_hi = 0.0;
};

RadialProfile make_radial_profile(double R_lo, double R_hi, int nodes,
                                  const std::function<double(double)>& H0);

/// Signature of the induced metric on the section, keyed by the signs of H
/// and H'.  plus/minus count the positive and negative directions; labels
/// are "-3", "(0,2)", "(1,2)", "(0,1)", "0", "(1,0)", "(2,1)", "(2,0)", "+3".
struct SignatureClass {
  int plus = 0;
  int minus = 0;
  std::string label;
};

SignatureClass signature_classify(double H, double Hprime);

/// Closed-form mean curvature of the section.  Per node,
///   factor = -(R H H'' + 2 R H'^2 - 2 H H') / (sqrt(2) * 2 R H H'^2)
/// with H', H'' by central differences (one-sided second order at the ends),
/// and direction = (1, -H') in the (R, Rdot) plane.  The ambient chart vector
/// is sqrt(2) * factor * direction lifted along the radial unit vector; the
/// sqrt(2) cancellation against the factor's normalization is verified
/// numerically by the cross-check below.
struct RadialClosedForm {
  Eigen::VectorXd factor;
  Eigen::VectorXd Hp;             // discrete H' per node
  Eigen::MatrixXd direction;      // 2 x nodes, rows (R, Rdot)
  std::vector<long> degenerate;   // nodes with vanishing denominator
};

RadialClosedForm closed_form_mean_curvature(const RadialProfile& prof);

/// One forward-Euler step of
///   dH/dt = (R H H'' + 2 R H'^2 - 2 H H') / (2 R H H'),
/// Dirichlet ends.  Returns accepted = false (profile untouched) when the
/// current or stepped interior leaves the window H > 0, H' > 0 or the
/// denominator degenerates; `node` then points at the first offender.
struct RadialStepResult {
  bool accepted = true;
  long node = -1;
  std::string reason;
};

RadialStepResult radial_flow_step(RadialProfile& prof, double dt);

/// Diffusion-coefficient step bound c_cfl * h^2 * inf(2 R H H') / sup(R H)
/// over interior nodes.
double radial_cfl_dt(const RadialProfile& prof, double c_cfl);

struct RadialConfig {
  bool fixed_dt = false;
  double dt = 1e-4;     // used when fixed_dt; must still satisfy the bound
  double c_cfl = 0.2;
  long max_steps = 100;
  double t_end = std::numeric_limits<double>::infinity();
  int max_halvings = 10;
  // reference profile for the deviation column; empty compares against the
  // initial state
  std::function<double(double)> reference;
};

struct RadialRow {
  long step = 0;
  double t = 0.0;
  double dt = 0.0;
  double sup_dev = 0.0;     // sup |H - H_ref|
  double min_H = 0.0;       // window margins over interior nodes
  double min_Hprime = 0.0;
};

struct RadialRun {
  RadialProfile profile;  // final state
  std::vector<RadialRow> rows;
  int halt_code = 0;      // 0 completed, 3 rejection exhausted
  std::string halt_reason;
  long total_halvings = 0;
};

/// Steps the profile with per-step dt halving on window violations or (under
/// fixed dt) on violations of the step bound.
RadialRun run_radial(const RadialProfile& initial, const RadialConfig& cfg = {});

/// Embeds the section {(R nhat, H(R) nhat)} on a spherical-shell grid inside
/// the six-dimensional tangent-bundle chart and compares the generic mean
/// curvature vector against the closed form, streaming node by node.
struct CrossCheckOptions {
  double theta_margin = 0.2;
  int angular_coarsening = 2;  // angular spacing target = coarsening * h_R
  int margin = 2;
  // fixed comparison window (resolution-independent sups)
  double window_R_lo = -std::numeric_limits<double>::infinity();
  double window_R_hi = std::numeric_limits<double>::infinity();
  double window_th_lo = -std::numeric_limits<double>::infinity();
  double window_th_hi = std::numeric_limits<double>::infinity();
};

struct CrossCheckReport {
  double max_rel_dev = 0.0;        // |H_generic - H_closed| / |H_closed|
  double max_tangency = 0.0;       // tangential part of H_generic, relative
  double max_direction_dev = 0.0;  // chart-orthogonal part vs the direction
  long compared = 0;
  long degenerate = 0;
};

CrossCheckReport cross_check_against_generic(
    const std::function<double(double)>& H, double R_lo, double R_hi,
    double h_R, const CrossCheckOptions& opts = {});

}  // namespace mcflow
