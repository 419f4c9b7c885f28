#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <memory>

#include "doctest.h"
#include "mcflow/ambient.hpp"
#include "mcflow/initdata.hpp"
#include "mcflow/patch.hpp"
#include "mcflow/radial.hpp"

using namespace mcflow;

namespace {

double cubic(double R) { return R + R * R * R; }

double cubic_factor(double R) {
  double H = cubic(R), Hp = 1 + 3 * R * R, Hpp = 6 * R;
  double num = R * H * Hpp + 2 * R * Hp * Hp - 2 * H * Hp;
  return -num / (std::sqrt(2.0) * 2 * R * H * Hp * Hp);
}

}  // namespace

TEST_CASE("signature classification covers all nine sign cells") {
  struct Cell {
    double H, Hp;
    int plus, minus;
    const char* label;
  };
  const Cell table[9] = {
      {-1, -1, 0, 3, "-3"},   {-1, 0, 0, 2, "(0,2)"}, {-1, 1, 1, 2, "(1,2)"},
      {0, -1, 0, 1, "(0,1)"}, {0, 0, 0, 0, "0"},      {0, 1, 1, 0, "(1,0)"},
      {1, -1, 2, 1, "(2,1)"}, {1, 0, 2, 0, "(2,0)"},  {1, 1, 3, 0, "+3"}};
  for (const Cell& c : table) {
    auto s = signature_classify(c.H, c.Hp);
    CHECK(s.plus == c.plus);
    CHECK(s.minus == c.minus);
    CHECK(s.label == c.label);
    // magnitudes are irrelevant, only signs enter
    auto s2 = signature_classify(c.H * 7.3, c.Hp * 0.2);
    CHECK(s2.label == s.label);
  }
  CHECK(signature_classify(1.0, 1.0).label == "+3");
  CHECK(signature_classify(1.0, -1.0).label == "(2,1)");
  CHECK(signature_classify(0.0, 0.0).label == "0");
}

TEST_CASE("closed-form factor matches hand values and converges") {
  auto prof = make_radial_profile(0.5, 2.0, 193, cubic);
  auto cf = closed_form_mean_curvature(prof);
  CHECK(cf.degenerate.empty());

  long k1 = std::lround((1.0 - 0.5) / prof.h);
  CHECK(prof.R(k1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(cf.factor(k1) - (-28.0 / (64.0 * std::sqrt(2.0)))) < 2e-5);

  // the chart vector scale is sqrt(2) times the factor; against the analytic
  // curvature scale 1/(R H') - 1/H - H''/(2 H'^2) of the section
  for (double Rq : {0.7, 0.8, 1.3, 1.7}) {
    long k = std::lround((Rq - 0.5) / prof.h);
    double R = prof.R(k), H = cubic(R), Hp = 1 + 3 * R * R, Hpp = 6 * R;
    double P = 1 / (R * Hp) - 1 / H - Hpp / (2 * Hp * Hp);
    CHECK(std::sqrt(2.0) * cf.factor(k) == doctest::Approx(P).epsilon(1e-4));
  }

  SUBCASE("line profiles give zero factor") {
    auto line = make_radial_profile(0.5, 2.0, 49, [](double R) { return 1.3 * R; });
    auto c = closed_form_mean_curvature(line);
    CHECK(c.degenerate.empty());
    CHECK(c.factor.cwiseAbs().maxCoeff() < 1e-12);
    CHECK((c.Hp.array() - 1.3).abs().maxCoeff() < 1e-12);
  }

  SUBCASE("flat profiles are flagged degenerate") {
    auto flat = make_radial_profile(0.5, 2.0, 49, [](double) { return 1.0; });
    auto c = closed_form_mean_curvature(flat);
    CHECK(c.degenerate.size() == 49);
    CHECK(std::isnan(c.factor(10)));
  }

  SUBCASE("discrete factor converges inside a fixed window") {
    double prev = 0.0;
    int grids[4] = {25, 49, 97, 193};
    for (int j = 0; j < 4; ++j) {
      auto p = make_radial_profile(0.5, 2.0, grids[j], cubic);
      auto c = closed_form_mean_curvature(p);
      double sup = 0.0;
      for (long k = 1; k + 1 < p.H.size(); ++k) {
        if (p.R(k) < 0.6 || p.R(k) > 1.9) continue;
        sup = std::max(sup, std::abs(c.factor(k) - cubic_factor(p.R(k))));
      }
      if (j > 0) CHECK(std::log2(prev / sup) > 1.8);
      prev = sup;
    }
  }
}

TEST_CASE("line profiles are exact fixed points of the radial flow") {
  auto prof = make_radial_profile(0.5, 2.0, 97, [](double R) { return 1.3 * R; });
  RadialConfig cfg;
  cfg.max_steps = 100;
  auto run = run_radial(prof, cfg);
  CHECK(run.halt_code == 0);
  CHECK(run.rows.size() == 100);
  CHECK((run.profile.H - prof.H).cwiseAbs().maxCoeff() < 1e-12);
  for (const auto& r : run.rows) {
    CHECK(r.sup_dev < 1e-12);
    CHECK(r.min_H > 0.0);
    CHECK(r.min_Hprime > 1.0);
  }
}

TEST_CASE("perturbed line converges back to the steady state") {
  auto prof = make_radial_profile(0.5, 2.0, 25, [](double R) {
    return R + 0.1 * std::sin(M_PI * (R - 0.5) / 1.5);
  });
  RadialConfig cfg;
  cfg.max_steps = 1000000;
  cfg.t_end = 0.5;
  cfg.reference = [](double R) { return R; };
  auto run = run_radial(prof, cfg);
  CHECK(run.halt_code == 0);
  CHECK(run.rows.front().sup_dev <= 0.1 + 1e-12);
  CHECK(run.rows.back().sup_dev < 0.03);
  for (std::size_t i = 1; i < run.rows.size(); ++i)
    CHECK(run.rows[i].sup_dev <= run.rows[i - 1].sup_dev * (1.0 + 1e-12));
  std::printf("  [tabulate] steady-state attraction: dev %.4f -> %.6f over t=%.2f (%zu steps)\n",
              run.rows.front().sup_dev, run.rows.back().sup_dev,
              run.rows.back().t, run.rows.size());
}

TEST_CASE("window and step-bound violations reject steps") {
  SUBCASE("negative slope region rejects immediately") {
    auto bad = make_radial_profile(0.5, 2.0, 33, [](double R) {
      return R + 0.45 * std::sin(2 * M_PI * (R - 0.5) / 1.5);
    });
    auto res = radial_flow_step(bad, 1e-6);
    CHECK_FALSE(res.accepted);
    CHECK(res.reason.find("H'") != std::string::npos);
    RadialConfig cfg;
    cfg.max_steps = 3;
    auto run = run_radial(bad, cfg);
    CHECK(run.halt_code == 3);
    CHECK(run.rows.empty());
  }

  SUBCASE("oversized fixed step is halved until the bound holds") {
    auto prof = make_radial_profile(0.5, 2.0, 25, cubic);
    double bound = radial_cfl_dt(prof, 0.2);
    REQUIRE(bound > 0.0);
    RadialConfig cfg;
    cfg.fixed_dt = true;
    cfg.dt = 8.0 * bound;
    cfg.max_steps = 3;
    auto run = run_radial(prof, cfg);
    CHECK(run.halt_code == 0);
    CHECK(run.total_halvings >= 3);
    CHECK(run.rows.size() == 3);
    CHECK(run.rows.front().dt <= bound * (1.0 + 1e-9));

    cfg.dt = 5000.0 * bound;
    auto dead = run_radial(prof, cfg);
    CHECK(dead.halt_code == 3);
    CHECK(dead.rows.empty());
  }
}

TEST_CASE("generic pipeline agrees with the closed form on shells") {
  SUBCASE("line section has vanishing mean curvature in both pipelines") {
    auto space = std::make_shared<NeutralTangentBundle>(3);
    GridTopology topo = shell_topology(25, 23, 50, 0.5, 2.0, 0.2);
    auto f_at = shell_closure(topo, [](double R) { return 1.3 * R; });
    double sup = 0.0;
    derive_geometry_streaming(
        *space, topo, f_at,
        [&](long, const std::vector<int>& I, const NodeGeometry& nd) {
          if (topo.interior(I, 2)) sup = std::max(sup, nd.Hvec.norm());
        });
    CHECK(sup < 1e-9);
  }

  SUBCASE("cubic section deviation converges") {
    CrossCheckOptions o;
    o.window_R_lo = 0.7;
    o.window_R_hi = 1.8;
    o.window_th_lo = 0.6;
    o.window_th_hi = M_PI - 0.6;
    double rel[2];
    for (int j = 0; j < 2; ++j) {
      double h = j ? 1.0 / 32 : 1.0 / 16;
      auto rep = cross_check_against_generic(cubic, 0.5, 2.0, h, o);
      rel[j] = rep.max_rel_dev;
      CHECK(rep.degenerate == 0);
      CHECK(rep.compared > 10000);
      CHECK(rep.max_tangency < 1e-12);
      CHECK(rep.max_direction_dev < 3e-3);
      std::printf("  [tabulate] shell cross-check h=1/%d: rel=%.5f dir=%.2e nodes=%ld\n",
                  j ? 32 : 16, rep.max_rel_dev, rep.max_direction_dev, rep.compared);
    }
    CHECK(rel[0] < 0.01);
    CHECK(std::log2(rel[0] / rel[1]) > 1.5);
  }
}
