#include <benchmark/benchmark.h>

#include <cmath>

#include "wheelforge/recon.hpp"

using namespace wheelforge;

namespace {

/// Signed-distance sphere sampled on an n^3 node grid.
recon::VoxelGrid sphere_grid(int n, double radius) {
  recon::VoxelGrid g;
  g.nx = g.ny = g.nz = n;
  g.voxel_size = 1.0 / (n - 1);
  g.origin = Eigen::Vector3d(-0.5, -0.5, -0.5);
  g.field.resize(g.node_count());
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const Eigen::Vector3d p = g.node_position(ix, iy, iz);
        g.field[g.index(ix, iy, iz)] = float(radius - p.norm());
      }
  return g;
}

void bench_marching_cubes(benchmark::State& state) {
  const recon::VoxelGrid g = sphere_grid(int(state.range(0)), 0.4);
  std::size_t tris = 0;
  for (auto _ : state) {
    const mesh::TriMesh m = recon::marching_cubes(g, 0.0);
    tris = m.triangles.size();
    benchmark::DoNotOptimize(tris);
  }
  state.counters["triangles"] = double(tris);
}

void bench_postprocess(benchmark::State& state) {
  const recon::VoxelGrid g = sphere_grid(96, 0.4);
  const mesh::TriMesh m = recon::marching_cubes(g, 0.0);
  for (auto _ : state) {
    const mesh::TriMesh r =
        recon::postprocess(m, 5, int(state.range(0)), 0.5);
    benchmark::DoNotOptimize(r.triangles.data());
  }
}

}  // namespace

BENCHMARK(bench_marching_cubes)->Arg(64)->Arg(128)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bench_postprocess)->Arg(2000)->Arg(10000)
    ->Unit(benchmark::kMillisecond);
