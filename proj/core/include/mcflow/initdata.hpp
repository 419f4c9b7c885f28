#pragma once

#include <functional>
#include <memory>

#include "mcflow/patch.hpp"

namespace mcflow {

/// Graph over the flat torus [0, period)^n in flat (n, m) space:
/// f(x) = (x, tilt * x + osc(x)).  Each axis wraps with the ambient shift
/// period * (e_k + sum_a tilt(a,k) e_{n+a}) so tilted graphs wind correctly.
/// `osc` may be empty (pure affine data); it must be period-periodic.
ImmersedPatch flat_graph(
    std::shared_ptr<const AmbientSpace> space, const std::vector<int>& sizes,
    double period, const Eigen::MatrixXd& tilt,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& osc = {});

/// Graph over the first (sphere) factor of a product space:
/// f(theta, phi) = (theta, phi, w(theta, phi)).  The theta axis spans
/// [margin, pi - margin] closed, the phi axis is periodic with period 2 pi.
ImmersedPatch product_graph(
    std::shared_ptr<const ProductSpace> space, int n_theta, int n_phi,
    double theta_margin,
    const std::function<Eigen::VectorXd(double, double)>& w);

/// Rotationally symmetric section of the tangent bundle of R^3 over the
/// shell Ra <= R <= Rb: f(R, nhat) = (R nhat, H(R) nhat) in chart
/// (R, theta, phi).
ImmersedPatch shell_section(std::shared_ptr<const AmbientSpace> space, int nR,
                            int n_theta, int n_phi, double Ra, double Rb,
                            double theta_margin,
                            const std::function<double(double)>& H);

/// Analytic evaluation closure for the same section, for streaming grids
/// that never store node positions.
std::function<Eigen::VectorXd(const std::vector<int>&)> shell_closure(
    const GridTopology& topo, const std::function<double(double)>& H);

/// Topology of shell_section without building the position matrix.
GridTopology shell_topology(int nR, int n_theta, int n_phi, double Ra, double Rb,
                            double theta_margin);

}  // namespace mcflow
