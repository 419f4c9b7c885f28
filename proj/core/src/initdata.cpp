#include "mcflow/initdata.hpp"

#include <cmath>

namespace mcflow {

ImmersedPatch flat_graph(
    std::shared_ptr<const AmbientSpace> space, const std::vector<int>& sizes,
    double period, const Eigen::MatrixXd& tilt,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& osc) {
  const int n = space->signature().n;
  const int m = space->signature().m;
  if (static_cast<int>(sizes.size()) != n)
    throw std::invalid_argument("flat_graph: one size per base dimension");
  if (tilt.rows() != m || tilt.cols() != n)
    throw std::invalid_argument("flat_graph: tilt must be m x n");

  std::vector<AxisSpec> axes(n);
  for (int k = 0; k < n; ++k) {
    axes[k].size = sizes[k];
    axes[k].h = period / sizes[k];
    axes[k].origin = 0.0;
    axes[k].periodic = true;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n + m);
    s[k] = period;
    for (int a = 0; a < m; ++a) s[n + a] = period * tilt(a, k);
    axes[k].shift = s;
  }

  ImmersedPatch p;
  p.space = std::move(space);
  p.topo = GridTopology(axes);
  p.f.resize(n + m, p.topo.nodes());
  for (long idx = 0; idx < p.topo.nodes(); ++idx) {
    const Eigen::VectorXd x = p.topo.coords(p.topo.unflatten(idx));
    p.f.col(idx).head(n) = x;
    p.f.col(idx).tail(m) = tilt * x;
    if (osc) p.f.col(idx).tail(m) += osc(x);
  }
  return p;
}

ImmersedPatch product_graph(
    std::shared_ptr<const ProductSpace> space, int n_theta, int n_phi,
    double theta_margin,
    const std::function<Eigen::VectorXd(double, double)>& w) {
  const int m = space->signature().m;

  std::vector<AxisSpec> axes(2);
  axes[0].size = n_theta;
  axes[0].origin = theta_margin;
  axes[0].h = (M_PI - 2.0 * theta_margin) / (n_theta - 1);
  axes[0].periodic = false;
  axes[1].size = n_phi;
  axes[1].origin = 0.0;
  axes[1].h = 2.0 * M_PI / n_phi;
  axes[1].periodic = true;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(2 + m);
  s[1] = 2.0 * M_PI;
  axes[1].shift = s;

  ImmersedPatch p;
  p.space = std::move(space);
  p.topo = GridTopology(axes);
  p.f.resize(2 + m, p.topo.nodes());
  for (long idx = 0; idx < p.topo.nodes(); ++idx) {
    const Eigen::VectorXd x = p.topo.coords(p.topo.unflatten(idx));
    p.f.col(idx).head(2) = x;
    p.f.col(idx).tail(m) = w(x[0], x[1]);
  }
  return p;
}

GridTopology shell_topology(int nR, int n_theta, int n_phi, double Ra, double Rb,
                            double theta_margin) {
  std::vector<AxisSpec> axes(3);
  axes[0].size = nR;
  axes[0].origin = Ra;
  axes[0].h = (Rb - Ra) / (nR - 1);
  axes[0].periodic = false;
  axes[1].size = n_theta;
  axes[1].origin = theta_margin;
  axes[1].h = (M_PI - 2.0 * theta_margin) / (n_theta - 1);
  axes[1].periodic = false;
  axes[2].size = n_phi;
  axes[2].origin = 0.0;
  axes[2].h = 2.0 * M_PI / n_phi;
  axes[2].periodic = true;
  // the embedding is literally 2 pi periodic in phi, no ambient shift
  return GridTopology(axes);
}

std::function<Eigen::VectorXd(const std::vector<int>&)> shell_closure(
    const GridTopology& topo, const std::function<double(double)>& H) {
  return [topo, H](const std::vector<int>& I) -> Eigen::VectorXd {
    const double R = topo.axis(0).origin + I[0] * topo.axis(0).h;
    const double th = topo.axis(1).origin + I[1] * topo.axis(1).h;
    const double ph = topo.axis(2).origin + I[2] * topo.axis(2).h;
    Eigen::Vector3d nhat(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                         std::cos(th));
    Eigen::VectorXd f(6);
    f.head(3) = R * nhat;
    f.tail(3) = H(R) * nhat;
    return f;
  };
}

ImmersedPatch shell_section(std::shared_ptr<const AmbientSpace> space, int nR,
                            int n_theta, int n_phi, double Ra, double Rb,
                            double theta_margin,
                            const std::function<double(double)>& H) {
  ImmersedPatch p;
  p.space = std::move(space);
  p.topo = shell_topology(nR, n_theta, n_phi, Ra, Rb, theta_margin);
  auto eval = shell_closure(p.topo, H);
  p.f.resize(6, p.topo.nodes());
  for (long idx = 0; idx < p.topo.nodes(); ++idx)
    p.f.col(idx) = eval(p.topo.unflatten(idx));
  return p;
}

}  // namespace mcflow
