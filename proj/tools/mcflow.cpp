// mcflow: mean curvature flow of spacelike submanifolds in split-signature
// ambient spaces.  Subcommands: decompose, flow, radial, tcc, check.
//
// Configuration is a key = value file plus repeatable --set overrides plus
// dedicated flags (highest precedence).  Exit codes: 0 success, 1 failed
// check suite, 2 configuration errors, 3 numerical halt, 4 invariant
// violation in the input data.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcflow/ambient.hpp"
#include "mcflow/csvio.hpp"
#include "mcflow/flow.hpp"
#include "mcflow/initdata.hpp"
#include "mcflow/radial.hpp"
#include "mcflow/runconfig.hpp"
#include "mcflow/selfcheck.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CliOptions {
  std::string config_file;
  std::vector<std::string> sets;
  std::string out_dir;
  std::optional<long> seed;
};

void add_common(CLI::App* sub, CliOptions& opts) {
  sub->add_option("--config", opts.config_file, "key = value configuration file");
  sub->add_option("--set", opts.sets, "override: --set key=value (repeatable)");
  sub->add_option("--out", opts.out_dir, "output directory name");
  sub->add_option("--seed", opts.seed, "seed for randomized estimators");
}

mcflow::KeyValueConfig layered_config(const CliOptions& opts) {
  mcflow::KeyValueConfig cfg;
  if (!opts.config_file.empty())
    cfg = mcflow::KeyValueConfig::from_file(opts.config_file);
  for (const auto& s : opts.sets) cfg.set_pair(s);
  if (!opts.out_dir.empty()) cfg.set("out", opts.out_dir);
  if (opts.seed) cfg.set("seed", std::to_string(*opts.seed));
  return cfg;
}

fs::path resolve_out_dir(const mcflow::KeyValueConfig& cfg,
                         const std::string& fallback) {
  const char* root = std::getenv("MCFLOW_OUTPUT_ROOT");
  fs::path dir = root ? fs::path(root) : fs::path(".");
  dir /= cfg.get_str("out", fallback);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw mcflow::ConfigError("cannot create output directory '" +
                                    dir.string() + "': " + ec.message());
  return dir;
}

struct Manifest {
  ordered_json j;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  Manifest(const std::string& subcommand, const mcflow::KeyValueConfig& cfg) {
    j["subcommand"] = subcommand;
    ordered_json conf;
    for (const auto& [k, v] : cfg.items()) conf[k] = v;
    j["config"] = conf;
    j["versions"] = {{"mcflow", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"compiler", __VERSION__}};
    j["outputs"] = ordered_json::array();
  }

  void add_output(const fs::path& rel) { j["outputs"].push_back(rel.string()); }

  void write(const fs::path& dir) {
    j["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream out(dir / "run_manifest.json");
    out << j.dump(2) << '\n';
  }
};

std::shared_ptr<mcflow::AmbientSpace> build_ambient(const mcflow::KeyValueConfig& cfg) {
  std::string name = cfg.get_str("ambient", "flat");
  if (name == "flat") {
    int n = static_cast<int>(cfg.get_int("ambient.n", 2));
    int m = static_cast<int>(cfg.get_int("ambient.m", 1));
    return std::make_shared<mcflow::FlatSpace>(mcflow::Signature{n, m});
  }
  if (name == "tangent") {
    int n = static_cast<int>(cfg.get_int("ambient.n", 3));
    return std::make_shared<mcflow::NeutralTangentBundle>(n);
  }
  if (name == "sphere_flat") {
    double r = cfg.get_num("ambient.r", 1.0);
    int m = static_cast<int>(cfg.get_int("ambient.m", 1));
    return std::make_shared<mcflow::ProductSpace>(
        mcflow::ProductFactor::sphere2(r), mcflow::ProductFactor::flat(m));
  }
  if (name == "spheres") {
    double r1 = cfg.get_num("ambient.r1", 1.0);
    double r2 = cfg.get_num("ambient.r2", std::sqrt(2.0));
    return std::make_shared<mcflow::ProductSpace>(
        mcflow::ProductFactor::sphere2(r1), mcflow::ProductFactor::sphere2(r2));
  }
  throw mcflow::ConfigError(
      "unknown ambient '" + name +
      "' (expected flat, tangent, sphere_flat, or spheres)");
}

Eigen::MatrixXd tilt_matrix(const mcflow::KeyValueConfig& cfg,
                            const mcflow::Signature& sig) {
  Eigen::VectorXd flat_tilt =
      cfg.get_list("init.tilt", Eigen::VectorXd::Zero(sig.m * sig.n));
  if (flat_tilt.size() != sig.m * sig.n)
    throw mcflow::ConfigError("init.tilt needs m*n = " +
                              std::to_string(sig.m * sig.n) + " entries");
  Eigen::MatrixXd tilt(sig.m, sig.n);
  for (int a = 0; a < sig.m; ++a)
    for (int i = 0; i < sig.n; ++i) tilt(a, i) = flat_tilt(a * sig.n + i);
  return tilt;
}

mcflow::ImmersedPatch build_initial(
    const mcflow::KeyValueConfig& cfg,
    const std::shared_ptr<mcflow::AmbientSpace>& space) {
  std::string family = cfg.get_str("init", "sine");
  auto sig = space->signature();

  if (family == "affine" || family == "sine" || family == "boosted") {
    auto flat = std::dynamic_pointer_cast<mcflow::FlatSpace>(space);
    if (!flat)
      throw mcflow::ConfigError("init '" + family + "' needs ambient = flat");
    int N = static_cast<int>(cfg.get_int("init.N", 32));
    std::vector<int> sizes(sig.n, N);
    if (family == "affine") {
      double period = cfg.get_num("init.period", 1.0);
      return mcflow::flat_graph(space, sizes, period, tilt_matrix(cfg, sig));
    }
    if (family == "boosted") {
      double chi = cfg.get_num("init.chi", 0.5);
      Eigen::MatrixXd tilt = Eigen::MatrixXd::Zero(sig.m, sig.n);
      tilt(0, 0) = std::tanh(chi);
      double period = cfg.get_num("init.period", 1.0);
      return mcflow::flat_graph(space, sizes, period, tilt);
    }
    double eps = cfg.get_num("init.eps", 1e-3);
    int m = sig.m, n = sig.n;
    return mcflow::flat_graph(
        space, sizes, 2 * M_PI, tilt_matrix(cfg, sig),
        [eps, m, n](const Eigen::VectorXd& x) {
          Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
          double prod = eps;
          for (int k = 0; k < n; ++k) prod *= std::sin(x(k));
          w(0) = prod;
          return w;
        });
  }

  if (family == "product_sine") {
    auto prod = std::dynamic_pointer_cast<mcflow::ProductSpace>(space);
    if (!prod)
      throw mcflow::ConfigError("init 'product_sine' needs a product ambient");
    int nth = static_cast<int>(cfg.get_int("init.ntheta", 24));
    int nph = static_cast<int>(cfg.get_int("init.nphi", 24));
    double margin = cfg.get_num("init.margin", 0.4);
    double eps = cfg.get_num("init.eps", 0.05);
    int m = sig.m;
    return mcflow::product_graph(prod, nth, nph, margin,
                                 [eps, m](double th, double ph) {
                                   Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
                                   w(0) = eps * std::sin(th) * std::sin(th) *
                                          std::cos(ph);
                                   return w;
                                 });
  }

  if (family == "shell") {
    auto tb = std::dynamic_pointer_cast<mcflow::NeutralTangentBundle>(space);
    if (!tb || sig.n != 3)
      throw mcflow::ConfigError("init 'shell' needs ambient = tangent with n = 3");
    int nR = static_cast<int>(cfg.get_int("init.nR", 13));
    int nth = static_cast<int>(cfg.get_int("init.ntheta", 13));
    int nph = static_cast<int>(cfg.get_int("init.nphi", 28));
    double Ra = cfg.get_num("init.Ra", 0.5);
    double Rb = cfg.get_num("init.Rb", 2.0);
    double margin = cfg.get_num("init.margin", 0.3);
    double a = cfg.get_num("init.a", 1.3);
    return mcflow::shell_section(space, nR, nth, nph, Ra, Rb, margin,
                                 [a](double R) { return a * R; });
  }

  throw mcflow::ConfigError(
      "unknown init '" + family +
      "' (expected affine, sine, boosted, product_sine, or shell)");
}

mcflow::FlowConfig build_flow_config(const mcflow::KeyValueConfig& cfg) {
  mcflow::FlowConfig fc;
  std::string policy = cfg.get_str("flow.dt_policy", "cfl");
  if (policy == "cfl")
    fc.dt_policy = mcflow::DtPolicy::Cfl;
  else if (policy == "fixed")
    fc.dt_policy = mcflow::DtPolicy::Fixed;
  else
    throw mcflow::ConfigError("flow.dt_policy must be cfl or fixed");
  fc.dt = cfg.get_num("flow.dt", fc.dt);
  fc.c_cfl = cfg.get_num("flow.c_cfl", fc.c_cfl);
  std::string integ = cfg.get_str("flow.integrator", "euler");
  if (integ == "euler")
    fc.integrator = mcflow::Integrator::Euler;
  else if (integ == "rk2")
    fc.integrator = mcflow::Integrator::Rk2;
  else
    throw mcflow::ConfigError("flow.integrator must be euler or rk2");
  fc.max_steps = cfg.get_int("flow.max_steps", fc.max_steps);
  fc.s_end = cfg.get_num("flow.s_end", fc.s_end);
  fc.snapshot_every = cfg.get_int("flow.snapshot_every", fc.snapshot_every);
  fc.max_halvings = static_cast<int>(cfg.get_int("flow.max_halvings", fc.max_halvings));
  fc.margin = static_cast<int>(cfg.get_int("flow.margin", fc.margin));
  fc.residual_monitors = cfg.get_bool("flow.residual_monitors", fc.residual_monitors);
  fc.k_grid_lo = cfg.get_num("flow.k_grid_lo", fc.k_grid_lo);
  fc.k_grid_hi = cfg.get_num("flow.k_grid_hi", fc.k_grid_hi);
  fc.k_grid_points = static_cast<int>(cfg.get_int("flow.k_grid_points", fc.k_grid_points));
  return fc;
}

int cmd_flow(const mcflow::KeyValueConfig& cfg) {
  auto space = build_ambient(cfg);
  auto patch = build_initial(cfg, space);
  auto fc = build_flow_config(cfg);
  cfg.get_int("seed", 1);  // accepted for uniformity; the flow is deterministic
  auto out_dir = resolve_out_dir(cfg, "flow_out");
  cfg.reject_unread();
  Manifest man("flow", cfg);

  auto tr = mcflow::run_flow(patch, fc);

  mcflow::write_monitor_csv((out_dir / "monitor.csv").string(), tr.rows);
  man.add_output("monitor.csv");
  fs::create_directories(out_dir / "snapshots");
  for (const auto& snap : tr.snapshots) {
    char name[48];
    std::snprintf(name, sizeof name, "snapshots/snap_%06ld.csv", snap.step);
    mcflow::write_snapshot_csv((out_dir / name).string(), snap.patch, snap.s);
    man.add_output(name);
  }
  man.j["halt_code"] = tr.halt_code;
  man.j["halt_reason"] = tr.halt_reason;
  man.j["steps"] = static_cast<long>(tr.rows.size());
  man.write(out_dir);

  std::printf("flow: %zu steps, s = %.6g, halt = %d%s%s\n", tr.rows.size(),
              tr.rows.empty() ? 0.0 : tr.rows.back().s, tr.halt_code,
              tr.halt_reason.empty() ? "" : ", ", tr.halt_reason.c_str());
  if (!tr.rows.empty())
    std::printf("flow: sup_v = %.6g, area = %.6g, K_min = %.6g\n",
                tr.rows.back().sup_v, tr.rows.back().area, tr.rows.back().K_min);
  std::printf("flow: outputs in %s\n", out_dir.string().c_str());
  return tr.halt_code == 0 ? 0 : 3;
}

int cmd_radial(const mcflow::KeyValueConfig& cfg) {
  double R_lo = cfg.get_num("radial.R_lo", 0.5);
  double R_hi = cfg.get_num("radial.R_hi", 2.0);
  int nodes = static_cast<int>(cfg.get_int("radial.nodes", 49));
  double a = cfg.get_num("radial.a", 1.0);
  std::string family = cfg.get_str("radial.profile", "linear");

  mcflow::RadialProfile prof;
  if (family == "linear") {
    prof = mcflow::make_radial_profile(R_lo, R_hi, nodes,
                                       [a](double R) { return a * R; });
  } else if (family == "perturbed") {
    double eps = cfg.get_num("radial.eps", 0.1);
    double span = R_hi - R_lo;
    prof = mcflow::make_radial_profile(
        R_lo, R_hi, nodes, [a, eps, R_lo, span](double R) {
          return a * R + eps * std::sin(M_PI * (R - R_lo) / span);
        });
  } else if (family == "file") {
    std::string path = cfg.get_str("radial.input", "");
    if (path.empty())
      throw mcflow::ConfigError("radial.profile = file needs radial.input");
    prof = mcflow::read_radial_profile_csv(path);
  } else {
    throw mcflow::ConfigError("unknown radial.profile '" + family +
                              "' (expected linear, perturbed, or file)");
  }

  mcflow::RadialConfig rc;
  std::string policy = cfg.get_str("radial.dt_policy", "cfl");
  if (policy == "fixed")
    rc.fixed_dt = true;
  else if (policy != "cfl")
    throw mcflow::ConfigError("radial.dt_policy must be cfl or fixed");
  rc.dt = cfg.get_num("radial.dt", rc.dt);
  rc.c_cfl = cfg.get_num("radial.c_cfl", rc.c_cfl);
  rc.max_steps = cfg.get_int("radial.max_steps", rc.max_steps);
  rc.t_end = cfg.get_num("radial.t_end", rc.t_end);
  rc.max_halvings = static_cast<int>(cfg.get_int("radial.max_halvings", rc.max_halvings));
  std::string ref = cfg.get_str("radial.reference", "initial");
  if (ref == "linear")
    rc.reference = [a](double R) { return a * R; };
  else if (ref != "initial")
    throw mcflow::ConfigError("radial.reference must be initial or linear");

  auto out_dir = resolve_out_dir(cfg, "radial_out");
  cfg.reject_unread();
  Manifest man("radial", cfg);

  mcflow::write_radial_profile_csv((out_dir / "profile_initial.csv").string(), prof);
  man.add_output("profile_initial.csv");

  auto rr = mcflow::run_radial(prof, rc);

  mcflow::write_radial_monitor_csv((out_dir / "radial_monitor.csv").string(), rr.rows);
  man.add_output("radial_monitor.csv");
  mcflow::write_radial_profile_csv((out_dir / "profile_final.csv").string(), rr.profile);
  man.add_output("profile_final.csv");
  man.j["halt_code"] = rr.halt_code;
  man.j["halt_reason"] = rr.halt_reason;
  man.j["steps"] = static_cast<long>(rr.rows.size());
  man.write(out_dir);

  std::printf("radial: %zu steps, t = %.6g, halt = %d%s%s\n", rr.rows.size(),
              rr.rows.empty() ? 0.0 : rr.rows.back().t, rr.halt_code,
              rr.halt_reason.empty() ? "" : ", ", rr.halt_reason.c_str());
  if (!rr.rows.empty())
    std::printf("radial: sup_dev = %.6g, window margins H = %.6g, H' = %.6g\n",
                rr.rows.back().sup_dev, rr.rows.back().min_H,
                rr.rows.back().min_Hprime);
  std::printf("radial: outputs in %s\n", out_dir.string().c_str());
  return rr.halt_code == 0 ? 0 : 3;
}

int cmd_decompose(const mcflow::KeyValueConfig& cfg) {
  std::string input = cfg.get_str("decompose.input", "");
  if (input.empty()) throw mcflow::ConfigError("decompose needs --input FILE");
  int n = static_cast<int>(cfg.get_int("decompose.n", 2));
  int m = static_cast<int>(cfg.get_int("decompose.m", 1));
  double tol = cfg.get_num("decompose.tol", 1e-9);
  auto out_dir = resolve_out_dir(cfg, "decompose_out");
  cfg.reject_unread();
  Manifest man("decompose", cfg);

  Eigen::MatrixXd M = mcflow::read_matrix_csv(input);
  if (M.rows() != n + m || M.cols() != n + m)
    throw mcflow::ConfigError("expected a " + std::to_string(n + m) + "x" +
                              std::to_string(n + m) + " matrix, got " +
                              std::to_string(M.rows()) + "x" +
                              std::to_string(M.cols()));
  auto P = mcflow::PseudoOrthogonalMatrix::from_assembled(M, {n, m});
  double dev = mcflow::onm_deviation(P);
  if (dev > tol) {
    std::fprintf(stderr,
                 "decompose: input is not in O(%d,%d): block-identity "
                 "deviation %.3g exceeds tol %.3g\n", n, m, dev, tol);
    return 4;
  }
  auto nf = mcflow::onm_normal_form(P, tol);
  std::string json = mcflow::normal_form_json(nf);
  std::fputs(json.c_str(), stdout);
  std::ofstream(out_dir / "normal_form.json") << json;
  man.add_output("normal_form.json");
  man.write(out_dir);
  return 0;
}

int cmd_tcc(const mcflow::KeyValueConfig& cfg) {
  auto space = build_ambient(cfg);
  int dim = space->dim();

  Eigen::VectorXd lo, hi;
  std::string name = cfg.get_str("ambient", "flat");
  double margin = cfg.get_num("tcc.margin", 0.3);
  if (name == "spheres") {
    lo = Eigen::VectorXd::Zero(4);
    hi = Eigen::VectorXd::Zero(4);
    lo << margin, 0.0, margin, 0.0;
    hi << M_PI - margin, 2 * M_PI, M_PI - margin, 2 * M_PI;
  } else if (name == "sphere_flat") {
    lo = -Eigen::VectorXd::Ones(dim);
    hi = Eigen::VectorXd::Ones(dim);
    lo(0) = margin;
    hi(0) = M_PI - margin;
    lo(1) = 0.0;
    hi(1) = 2 * M_PI;
  } else {
    lo = Eigen::VectorXd::Zero(dim);
    hi = Eigen::VectorXd::Ones(dim);
  }
  lo = cfg.get_list("tcc.lo", lo);
  hi = cfg.get_list("tcc.hi", hi);
  if (lo.size() != dim || hi.size() != dim)
    throw mcflow::ConfigError("tcc.lo / tcc.hi need " + std::to_string(dim) +
                              " entries");

  mcflow::TccOptions opts;
  opts.n_samples = static_cast<int>(cfg.get_int("tcc.samples", 20000));
  opts.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  opts.gram_min_eig = cfg.get_num("tcc.gram_min_eig", opts.gram_min_eig);
  opts.max_retries = static_cast<int>(cfg.get_int("tcc.max_retries", opts.max_retries));

  auto out_dir = resolve_out_dir(cfg, "tcc_out");
  cfg.reject_unread();
  Manifest man("tcc", cfg);

  auto res = mcflow::tcc_estimate(*space, mcflow::Box{lo, hi}, opts);

  ordered_json j;
  j["ambient"] = space->name();
  j["k_est"] = res.k_est;
  j["k_sup"] = res.k_sup;
  j["accepted"] = res.accepted;
  j["rejected"] = res.rejected;
  j["seed"] = opts.seed;
  ordered_json w = ordered_json::array();
  for (long i = 0; i < res.point.size(); ++i) w.push_back(res.point(i));
  j["witness_point"] = w;
  std::ofstream(out_dir / "tcc.json") << j.dump(2) << '\n';
  man.add_output("tcc.json");
  man.write(out_dir);

  std::printf("tcc: %s k_est = %.8g (sup %.8g), %ld accepted, %ld rejected\n",
              space->name().c_str(), res.k_est, res.k_sup, res.accepted,
              res.rejected);
  std::printf("tcc: outputs in %s\n", out_dir.string().c_str());
  return 0;
}

int cmd_check(const mcflow::KeyValueConfig& cfg) {
  cfg.reject_unread();
  auto results = mcflow::run_self_checks();
  std::printf("%-28s %-6s %9s  detail\n", "check", "status", "time");
  for (const auto& r : results)
    std::printf("%-28s %-6s %8.2fs  %s\n", r.name.c_str(),
                r.pass ? "pass" : "FAIL", r.seconds, r.detail.c_str());
  int failed = 0;
  for (const auto& r : results)
    if (!r.pass) ++failed;
  std::printf("%zu checks, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}

int dispatch(const std::string& name, const CliOptions& opts) {
  try {
    auto cfg = layered_config(opts);
    if (name == "flow") return cmd_flow(cfg);
    if (name == "radial") return cmd_radial(cfg);
    if (name == "decompose") return cmd_decompose(cfg);
    if (name == "tcc") return cmd_tcc(cfg);
    return cmd_check(cfg);
  } catch (const mcflow::ConfigError& e) {
    std::fprintf(stderr, "mcflow %s: config error: %s\n", name.c_str(), e.what());
    return 2;
  } catch (const mcflow::IoError& e) {
    std::fprintf(stderr, "mcflow %s: %s\n", name.c_str(), e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "mcflow %s: config error: %s\n", name.c_str(), e.what());
    return 2;
  } catch (const mcflow::InvariantViolation& e) {
    std::fprintf(stderr, "mcflow %s: invariant violation: %s\n", name.c_str(),
                 e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mcflow %s: %s\n", name.c_str(), e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean curvature flow of spacelike submanifolds in "
               "split-signature ambient spaces"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  struct SubSpec {
    CLI::App* sub = nullptr;
    CliOptions opts;
  };
  std::map<std::string, SubSpec> subs;

  auto make_sub = [&](const char* name, const char* desc) -> SubSpec& {
    auto& spec = subs[name];
    spec.sub = app.add_subcommand(name, desc);
    add_common(spec.sub, spec.opts);
    return spec;
  };

  auto& dec = make_sub("decompose",
                       "reduce an O(n,m) matrix to its boost normal form");
  std::string dec_input;
  std::string dec_n, dec_m, dec_tol;
  dec.sub->add_option("--input", dec_input, "CSV matrix file")->required();
  dec.sub->add_option("--n", dec_n, "spacelike dimension (default 2)")
      ->check(CLI::Number);
  dec.sub->add_option("--m", dec_m, "timelike dimension (default 1)")
      ->check(CLI::Number);
  dec.sub->add_option("--tol", dec_tol, "membership tolerance (default 1e-9)")
      ->check(CLI::Number);

  auto& flw = make_sub("flow", "run the mean curvature flow on a patch");
  std::string flw_ambient, flw_init, flw_eps, flw_N, flw_steps, flw_dt, flw_send,
      flw_integ, flw_snap;
  flw.sub->add_option("--ambient", flw_ambient, "flat | tangent | sphere_flat");
  flw.sub->add_option("--init", flw_init,
                      "affine | sine | boosted | product_sine | shell");
  flw.sub->add_option("--eps", flw_eps, "oscillation amplitude")->check(CLI::Number);
  flw.sub->add_option("--N", flw_N, "grid nodes per axis")->check(CLI::Number);
  flw.sub->add_option("--steps", flw_steps, "max steps")->check(CLI::Number);
  flw.sub->add_option("--dt", flw_dt, "fixed step size (switches policy)")
      ->check(CLI::Number);
  flw.sub->add_option("--s-end", flw_send, "end time")->check(CLI::Number);
  flw.sub->add_option("--integrator", flw_integ, "euler | rk2");
  flw.sub->add_option("--snapshot-every", flw_snap, "snapshot cadence in steps")
      ->check(CLI::Number);

  auto& rad = make_sub("radial", "run the rotationally symmetric reduction");
  std::string rad_profile, rad_a, rad_eps, rad_steps, rad_dt, rad_tend, rad_nodes,
      rad_input, rad_ref;
  rad.sub->add_option("--profile", rad_profile, "linear | perturbed | file");
  rad.sub->add_option("--a", rad_a, "slope of the linear profile")->check(CLI::Number);
  rad.sub->add_option("--eps", rad_eps, "perturbation amplitude")->check(CLI::Number);
  rad.sub->add_option("--steps", rad_steps, "max steps")->check(CLI::Number);
  rad.sub->add_option("--dt", rad_dt, "fixed step size (switches policy)")
      ->check(CLI::Number);
  rad.sub->add_option("--t-end", rad_tend, "end time")->check(CLI::Number);
  rad.sub->add_option("--nodes", rad_nodes, "profile nodes")->check(CLI::Number);
  rad.sub->add_option("--input", rad_input, "two-column R,H CSV profile");
  rad.sub->add_option("--reference", rad_ref, "initial | linear");

  auto& tcc = make_sub("tcc", "sample the timelike curvature ratio over a box");
  std::string tcc_ambient, tcc_samples, tcc_r1, tcc_r2;
  tcc.sub->add_option("--ambient", tcc_ambient, "flat | tangent | sphere_flat | spheres");
  tcc.sub->add_option("--samples", tcc_samples, "accepted sample count")
      ->check(CLI::Number);
  tcc.sub->add_option("--r1", tcc_r1, "first sphere radius")->check(CLI::Number);
  tcc.sub->add_option("--r2", tcc_r2, "second sphere radius")->check(CLI::Number);

  make_sub("check", "run the built-in property suite and print a table");

  CLI11_PARSE(app, argc, argv);

  // dedicated flags become config assignments after --config and --set
  auto push = [&](const std::string& sub, const std::string& key,
                  const std::string& val) {
    if (!val.empty()) subs[sub].opts.sets.push_back(key + "=" + val);
  };
  push("decompose", "decompose.input", dec_input);
  push("decompose", "decompose.n", dec_n);
  push("decompose", "decompose.m", dec_m);
  push("decompose", "decompose.tol", dec_tol);
  push("flow", "ambient", flw_ambient);
  push("flow", "init", flw_init);
  push("flow", "init.eps", flw_eps);
  push("flow", "init.N", flw_N);
  push("flow", "flow.max_steps", flw_steps);
  push("flow", "flow.dt", flw_dt);
  if (!flw_dt.empty()) subs["flow"].opts.sets.push_back("flow.dt_policy=fixed");
  push("flow", "flow.s_end", flw_send);
  push("flow", "flow.integrator", flw_integ);
  push("flow", "flow.snapshot_every", flw_snap);
  push("radial", "radial.profile", rad_profile);
  push("radial", "radial.a", rad_a);
  push("radial", "radial.eps", rad_eps);
  push("radial", "radial.max_steps", rad_steps);
  push("radial", "radial.dt", rad_dt);
  if (!rad_dt.empty()) subs["radial"].opts.sets.push_back("radial.dt_policy=fixed");
  push("radial", "radial.t_end", rad_tend);
  push("radial", "radial.nodes", rad_nodes);
  if (!rad_input.empty()) {
    subs["radial"].opts.sets.push_back("radial.input=" + rad_input);
    subs["radial"].opts.sets.push_back("radial.profile=file");
  }
  push("radial", "radial.reference", rad_ref);
  push("tcc", "ambient", tcc_ambient);
  push("tcc", "tcc.samples", tcc_samples);
  push("tcc", "ambient.r1", tcc_r1);
  push("tcc", "ambient.r2", tcc_r2);

  for (auto& [name, spec] : subs)
    if (spec.sub->parsed()) return dispatch(name, spec.opts);
  return 2;
}
