#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "wheelforge/fem2d.hpp"
#include "wheelforge/topo.hpp"

using namespace wheelforge;

namespace {

/// Cantilever plate: left edge clamped, unit downward tip load.
fem2d::LoadCase2D cantilever(const fem2d::GridModel2D& m) {
  fem2d::LoadCase2D lc;
  for (int iy = 0; iy <= m.ny; ++iy) {
    lc.fixed_dofs.push_back(2 * m.node_id(0, iy));
    lc.fixed_dofs.push_back(2 * m.node_id(0, iy) + 1);
  }
  lc.nodal_forces[2 * m.node_id(m.nx, m.ny / 2) + 1] = -1.0;
  return lc;
}

void bench_solve(benchmark::State& state) {
  fem2d::GridModel2D m;
  m.nx = int(state.range(0));
  m.ny = int(state.range(0)) / 3;
  const fem2d::LoadCase2D lc = cantilever(m);
  const Eigen::VectorXd x =
      Eigen::VectorXd::Constant(m.element_count(), 0.5);
  for (auto _ : state) {
    auto u = fem2d::assemble_and_solve(m, x, lc);
    benchmark::DoNotOptimize(u.data());
  }
  state.SetItemsProcessed(state.iterations() * m.dof_count());
}

void bench_optimize_segment(benchmark::State& state) {
  fem2d::GridModel2D m;
  m.nx = 18;
  m.ny = 28;
  topo::TopoParams params;
  params.volume_fraction = 0.45;
  params.max_iters = int(state.range(0));
  params.change_tol = 1e-12;  // effectively: run the full iteration budget
  topo::ReferenceDesign ref;
  ref.densities = Eigen::VectorXd::Constant(m.element_count(), 0.45);
  ref.source_id = "bench";
  const fem2d::LoadCase2D lc = topo::segment_load_case(m, 1.0);
  const auto roles = topo::wheel_passive_rows(m.nx, m.ny, 2, 2);
  for (auto _ : state) {
    auto r = topo::optimize_segment(params, ref, m, lc, &roles);
    benchmark::DoNotOptimize(r.field.segment.data());
  }
}

}  // namespace

BENCHMARK(bench_solve)->Arg(60)->Arg(120)->Arg(180)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bench_optimize_segment)->Arg(10)->Arg(40)
    ->Unit(benchmark::kMillisecond);
