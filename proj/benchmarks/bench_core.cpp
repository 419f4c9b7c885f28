#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "mcflow/ambient.hpp"
#include "mcflow/flow.hpp"
#include "mcflow/indefinite.hpp"
#include "mcflow/initdata.hpp"
#include "mcflow/patch.hpp"
#include "mcflow/radial.hpp"
#include "mcflow/sampling.hpp"

using namespace mcflow;

namespace {

ImmersedPatch sine_graph(int N, double eps) {
  auto space = std::make_shared<FlatSpace>(Signature{2, 1});
  return flat_graph(space, {N, N}, 2 * M_PI, Eigen::MatrixXd::Zero(1, 2),
                    [eps](const Eigen::VectorXd& x) {
                      Eigen::VectorXd w(1);
                      w(0) = eps * std::sin(x(0)) * std::sin(x(1));
                      return w;
                    });
}

}  // namespace

static void BM_NormalForm(benchmark::State& state) {
  Rng rng(7);
  auto M = random_onm(Signature{5, 3}, rng);
  for (auto _ : state) {
    auto nf = onm_normal_form(M);
    benchmark::DoNotOptimize(nf.D1);
  }
}
BENCHMARK(BM_NormalForm);

static void BM_DeriveGeometry(benchmark::State& state) {
  auto p = sine_graph(static_cast<int>(state.range(0)), 0.3);
  for (auto _ : state) {
    auto geom = derive_geometry(p);
    benchmark::DoNotOptimize(geom.node.data());
  }
  state.SetItemsProcessed(state.iterations() * p.topo.nodes());
}
BENCHMARK(BM_DeriveGeometry)->Arg(32)->Arg(64);

static void BM_FlowStep(benchmark::State& state) {
  auto p = sine_graph(32, 1e-2);
  FlowConfig cfg;
  cfg.max_steps = 1;
  for (auto _ : state) {
    auto tr = run_flow(p, cfg);
    benchmark::DoNotOptimize(tr.rows.data());
  }
}
BENCHMARK(BM_FlowStep);

static void BM_RadialClosedForm(benchmark::State& state) {
  auto prof = make_radial_profile(0.5, 2.0, 193,
                                  [](double R) { return R + R * R * R; });
  for (auto _ : state) {
    auto cf = closed_form_mean_curvature(prof);
    benchmark::DoNotOptimize(cf.factor.data());
  }
}
BENCHMARK(BM_RadialClosedForm);

static void BM_TccSample(benchmark::State& state) {
  ProductSpace spheres(ProductFactor::sphere2(1.0),
                       ProductFactor::sphere2(std::sqrt(2.0)));
  Eigen::VectorXd lo(4), hi(4);
  lo << 0.3, 0.0, 0.3, 0.0;
  hi << M_PI - 0.3, 2 * M_PI, M_PI - 0.3, 2 * M_PI;
  TccOptions opts;
  opts.n_samples = 1000;
  for (auto _ : state) {
    auto res = tcc_estimate(spheres, Box{lo, hi}, opts);
    benchmark::DoNotOptimize(res.k_est);
  }
  state.SetItemsProcessed(state.iterations() * opts.n_samples);
}
BENCHMARK(BM_TccSample);

BENCHMARK_MAIN();
