#include "mcflow/selfcheck.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

#include "mcflow/csvio.hpp"
#include "mcflow/flow.hpp"
#include "mcflow/initdata.hpp"
#include "mcflow/radial.hpp"
#include "mcflow/runconfig.hpp"
#include "mcflow/sampling.hpp"

namespace mcflow {

namespace {

std::string msg(const char* fmt, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

ImmersedPatch sine_graph(int N, double eps) {
  auto space = std::make_shared<FlatSpace>(Signature{2, 1});
  return flat_graph(space, {N, N}, 2 * M_PI, Eigen::MatrixXd::Zero(1, 2),
                    [eps](const Eigen::VectorXd& x) {
                      Eigen::VectorXd w(1);
                      w(0) = eps * std::sin(x(0)) * std::sin(x(1));
                      return w;
                    });
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::vector<CheckResult> run_self_checks() {
  std::vector<CheckResult> out;
  auto run = [&](const char* name,
                 const std::function<std::pair<bool, std::string>()>& fn) {
    CheckResult r;
    r.name = name;
    auto t0 = std::chrono::steady_clock::now();
    try {
      auto [p, d] = fn();
      r.pass = p;
      r.detail = d;
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(r);
  };

  // shared between consecutive checks
  double worst_inv = -1.0;
  std::vector<MonitorRow> affine_rows;
  FlowTrajectory decay;

  run("config-parse", [&]() -> std::pair<bool, std::string> {
    auto cfg = KeyValueConfig::from_text("a = 1\nflow.dt = 2.5  # comment\n");
    cfg.set_pair("flow.dt=3.5");
    bool ok = cfg.get_int("a", 0) == 1 && cfg.get_num("flow.dt", 0) == 3.5;
    bool caught = false;
    try {
      KeyValueConfig::from_text("no equals sign\n");
    } catch (const ConfigError&) {
      caught = true;
    }
    ok = ok && caught;
    caught = false;
    auto c2 = KeyValueConfig::from_text("typo.key = 1\n");
    try {
      c2.reject_unread();
    } catch (const ConfigError&) {
      caught = true;
    }
    ok = ok && caught;
    return {ok, ok ? "overrides, errors, unknown keys" : "parser misbehaved"};
  });

  run("onm-roundtrip", [&]() -> std::pair<bool, std::string> {
    Rng rng(7);
    std::uniform_int_distribution<int> dn(1, 5), dm(1, 3);
    double worst = 0.0;
    worst_inv = 0.0;
    for (int k = 0; k < 200; ++k) {
      Signature sig{dn(rng), dm(rng)};
      auto M = random_onm(sig, rng);
      auto nf = onm_normal_form(M);
      auto rec = reconstruct(nf);
      worst = std::max(worst,
                       (rec.assembled() - M.assembled()).cwiseAbs().maxCoeff());
      double i1 = (nf.D1.array().square() - nf.D3.array().square() - 1.0)
                      .abs().maxCoeff();
      double i2 = (nf.D2.array().square() - nf.D4.array().square() - 1.0)
                      .abs().maxCoeff();
      double i3 = std::abs(nf.D1.squaredNorm() - nf.D2.squaredNorm());
      worst_inv = std::max({worst_inv, i1, i2, i3});
    }
    return {worst <= 1e-10, msg("max roundtrip dev %.3g (tol 1e-10)", worst)};
  });

  run("onm-canonical-invariants", [&]() -> std::pair<bool, std::string> {
    if (worst_inv < 0) return {false, "roundtrip check did not run"};
    return {worst_inv <= 1e-10, msg("max invariant dev %.3g (tol 1e-10)", worst_inv)};
  });

  run("frame-bounds", [&]() -> std::pair<bool, std::string> {
    Rng rng(11);
    std::uniform_int_distribution<int> dn(1, 4), dm(1, 3);
    int bad = 0;
    for (int k = 0; k < 2000; ++k) {
      Signature sig{dn(rng), dm(rng)};
      auto fp = random_flat_frame_pair(sig, rng);
      auto b = frame_norm_bounds(fp);
      if (!b.tau_bound_holds || !b.nu_bound_holds) ++bad;
    }
    return {bad == 0, msg("%.0f violations in 2000 draws", bad)};
  });

  run("tilt-closed-form", [&]() -> std::pair<bool, std::string> {
    auto space = std::make_shared<FlatSpace>(Signature{2, 1});
    Eigen::MatrixXd tilt(1, 2);
    tilt << 0.6, 0.0;
    auto p = flat_graph(space, {12, 12}, 1.0, tilt);
    auto geom = derive_geometry(p);
    double dev = 0.0;
    for (const auto& nd : geom.node) dev = std::max(dev, std::abs(nd.v - 1.25));
    return {dev <= 1e-10, msg("max |v - 1.25| = %.3g (tol 1e-10)", dev)};
  });

  run("slice-identities-flat", [&]() -> std::pair<bool, std::string> {
    double res[2], slice = 0.0;
    int grids[2] = {16, 32};
    for (int j = 0; j < 2; ++j) {
      auto p = sine_graph(grids[j], 0.3);
      auto geom = derive_geometry(p);
      auto rep = check_identities(p, geom);
      res[j] = rep.sup_laplace;
      slice = std::max(slice, rep.sup_slice);
    }
    double order = std::log2(res[0] / res[1]);
    bool ok = order >= 1.7 && slice <= 1e-12;
    return {ok, msg("laplace order %.2f, slice dev %.3g", order, slice)};
  });

  run("slice-identities-product", [&]() -> std::pair<bool, std::string> {
    auto sp = std::make_shared<ProductSpace>(ProductFactor::sphere2(1.0),
                                             ProductFactor::flat(1));
    auto p = product_graph(sp, 24, 24, 0.4, [](double th, double ph) {
      Eigen::VectorXd w(1);
      w(0) = 0.05 * std::sin(th) * std::sin(th) * std::cos(ph);
      return w;
    });
    auto geom = derive_geometry(p);
    auto rep = check_identities(p, geom);
    double dev = std::max(rep.sup_slice, rep.sup_frame);
    return {dev <= 1e-12, msg("gradient identity dev %.3g (tol 1e-12)", dev)};
  });

  run("flow-fixed-point", [&]() -> std::pair<bool, std::string> {
    auto space = std::make_shared<FlatSpace>(Signature{2, 1});
    Eigen::MatrixXd tilt(1, 2);
    tilt << 0.6, 0.0;
    auto p = flat_graph(space, {12, 12}, 1.0, tilt);
    FlowConfig cfg;
    cfg.max_steps = 5;
    auto tr = run_flow(p, cfg);
    affine_rows = tr.rows;
    double drift = (tr.snapshots.back().patch.f - p.f).cwiseAbs().maxCoeff();
    bool ok = tr.halt_code == 0 && drift <= 1e-13;
    return {ok, msg("tilted-plane drift %.3g over 5 steps", drift)};
  });

  run("flow-heat-decay", [&]() -> std::pair<bool, std::string> {
    FlowConfig cfg;
    cfg.max_steps = 1000000;
    cfg.s_end = 0.05;
    decay = run_flow(sine_graph(24, 1e-3), cfg);
    double amp = decay.snapshots.back().patch.f.row(2).cwiseAbs().maxCoeff();
    double oracle = 1e-3 * std::exp(-2.0 * decay.rows.back().s);
    double rel = std::abs(amp - oracle) / oracle;
    bool ok = decay.halt_code == 0 && rel <= 0.05 &&
              decay.rows.back().sup_v <= decay.rows.front().sup_v;
    return {ok, msg("amplitude vs heat oracle rel dev %.3g", rel)};
  });

  run("flow-positivity", [&]() -> std::pair<bool, std::string> {
    bool ok = !decay.rows.empty();
    for (const auto& r : decay.rows) ok = ok && r.sup_H2 >= 0.0 && r.sup_A2 >= 0.0;
    auto geom = derive_geometry(decay.snapshots.back().patch);
    for (const auto& nd : geom.node) ok = ok && nd.H2 >= 0.0 && nd.A2 >= 0.0;
    return {ok, ok ? "H2, A2 nonnegative at every node and step"
                   : "negative squared norm found"};
  });

  run("flow-gradient-monitor", [&]() -> std::pair<bool, std::string> {
    bool ok = !decay.rows.empty() && !affine_rows.empty();
    double kmax = 0.0;
    for (const auto& r : decay.rows) {
      ok = ok && std::isfinite(r.K_min);
      kmax = std::max(kmax, r.K_min);
    }
    for (const auto& r : affine_rows) ok = ok && r.K_min == 0.0;
    return {ok, msg("K_min finite (max %.3g), zero on tilted plane", kmax)};
  });

  run("flow-halving-halt", [&]() -> std::pair<bool, std::string> {
    FlowConfig cfg;
    cfg.dt_policy = DtPolicy::Fixed;
    cfg.dt = 1e9;
    cfg.max_steps = 1;
    auto p = sine_graph(12, 0.8);
    auto tr = run_flow(p, cfg);
    bool ok = tr.halt_code == 3 && tr.rows.empty() &&
              (tr.snapshots.back().patch.f - p.f).cwiseAbs().maxCoeff() == 0.0;
    return {ok, msg("halt code %.0f after %.0f halvings",
                    tr.halt_code, static_cast<double>(tr.total_halvings))};
  });

  run("radial-signature-table", [&]() -> std::pair<bool, std::string> {
    struct Cell {
      double H, Hp;
      const char* label;
    };
    const Cell table[9] = {{-1, -1, "-3"},    {-1, 0, "(0,2)"}, {-1, 1, "(1,2)"},
                           {0, -1, "(0,1)"},  {0, 0, "0"},      {0, 1, "(1,0)"},
                           {1, -1, "(2,1)"},  {1, 0, "(2,0)"},  {1, 1, "+3"}};
    int good = 0;
    for (const auto& c : table)
      if (signature_classify(c.H, c.Hp).label == c.label) ++good;
    return {good == 9, msg("%.0f/9 cells", good)};
  });

  run("radial-line-stationary", [&]() -> std::pair<bool, std::string> {
    auto prof = make_radial_profile(0.5, 2.0, 49, [](double R) { return 1.3 * R; });
    RadialConfig cfg;
    cfg.max_steps = 20;
    auto rr = run_radial(prof, cfg);
    double drift = (rr.profile.H - prof.H).cwiseAbs().maxCoeff();
    bool ok = rr.halt_code == 0 && drift <= 1e-12;
    return {ok, msg("line profile drift %.3g over 20 steps", drift)};
  });

  run("radial-cross-check", [&]() -> std::pair<bool, std::string> {
    CrossCheckOptions o;
    o.window_R_lo = 0.7;
    o.window_R_hi = 1.8;
    o.window_th_lo = 0.6;
    o.window_th_hi = M_PI - 0.6;
    auto rep = cross_check_against_generic(
        [](double R) { return R + R * R * R; }, 0.5, 2.0, 1.0 / 16, o);
    bool ok = rep.max_rel_dev < 0.01 && rep.max_tangency < 1e-12 &&
              rep.degenerate == 0 && rep.compared > 1000;
    return {ok, msg("closed form vs generic rel dev %.3g, tangency %.3g",
                    rep.max_rel_dev, rep.max_tangency)};
  });

  run("tcc-flat-zero", [&]() -> std::pair<bool, std::string> {
    FlatSpace space(Signature{2, 1});
    Box box{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3)};
    TccOptions opts;
    opts.n_samples = 2000;
    opts.seed = 3;
    auto res = tcc_estimate(space, box, opts);
    bool ok = std::abs(res.k_est) <= 1e-12 && res.accepted == 2000;
    return {ok, msg("flat estimate %.3g (tol 1e-12)", res.k_est)};
  });

  run("tcc-product-window", [&]() -> std::pair<bool, std::string> {
    ProductSpace space(ProductFactor::sphere2(1.0),
                       ProductFactor::sphere2(std::sqrt(2.0)));
    Eigen::VectorXd lo(4), hi(4);
    lo << 0.3, 0.0, 0.3, 0.0;
    hi << M_PI - 0.3, 2 * M_PI, M_PI - 0.3, 2 * M_PI;
    TccOptions opts;
    opts.n_samples = 2000;
    opts.seed = 3;
    auto res = tcc_estimate(space, Box{lo, hi}, opts);
    bool ok = res.k_est < 0.0 && res.k_est > -100.0 && res.accepted == 2000;
    return {ok, msg("sphere-product estimate %.4g", res.k_est)};
  });

  run("monitor-rerun-bytes", [&]() -> std::pair<bool, std::string> {
    FlowConfig cfg;
    cfg.max_steps = 3;
    auto dir = std::filesystem::temp_directory_path();
    auto pa = dir / "mcflow_selfcheck_a.csv", pb = dir / "mcflow_selfcheck_b.csv";
    write_monitor_csv(pa.string(), run_flow(sine_graph(16, 1e-2), cfg).rows);
    write_monitor_csv(pb.string(), run_flow(sine_graph(16, 1e-2), cfg).rows);
    std::string a = slurp(pa), b = slurp(pb);
    std::filesystem::remove(pa);
    std::filesystem::remove(pb);
    bool ok = !a.empty() && a == b;
    return {ok, msg("%.0f bytes, reruns identical", static_cast<double>(a.size()))};
  });

  return out;
}

bool all_pass(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return !results.empty();
}

}  // namespace mcflow
