#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "wheelforge/metrics3d.hpp"
#include "wheelforge/trimesh.hpp"

using namespace wheelforge;

namespace {

/// Icosphere by subdivision; radius r.
mesh::TriMesh icosphere(double r, int levels) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  mesh::TriMesh m;
  const double v[12][3] = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0},
                           {1, -phi, 0}, {0, -1, phi},  {0, 1, phi},
                           {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1},
                           {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (const auto& p : v)
    m.vertices.push_back(Eigen::Vector3d(p[0], p[1], p[2]).normalized() * r);
  const int f[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10},
                        {0, 10, 11}, {1, 5, 9}, {5, 11, 4},  {11, 10, 2},
                        {10, 7, 6}, {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
                        {3, 2, 6},  {3, 6, 8},  {3, 8, 9},   {4, 9, 5},
                        {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (const auto& t : f) m.triangles.push_back({t[0], t[1], t[2]});
  for (int l = 0; l < levels; ++l) {
    mesh::TriMesh next;
    next.vertices = m.vertices;
    auto midpoint = [&next, r](int a, int b,
                               std::map<std::pair<int, int>, int>& cache) {
      const auto key = std::minmax(a, b);
      const auto it = cache.find(key);
      if (it != cache.end()) return it->second;
      const Eigen::Vector3d p =
          ((next.vertices[a] + next.vertices[b]) * 0.5).normalized() * r;
      next.vertices.push_back(p);
      const int id = int(next.vertices.size()) - 1;
      cache.emplace(key, id);
      return id;
    };
    std::map<std::pair<int, int>, int> cache;
    for (const auto& t : m.triangles) {
      const int ab = midpoint(t[0], t[1], cache);
      const int bc = midpoint(t[1], t[2], cache);
      const int ca = midpoint(t[2], t[0], cache);
      next.triangles.push_back({t[0], ab, ca});
      next.triangles.push_back({t[1], bc, ab});
      next.triangles.push_back({t[2], ca, bc});
      next.triangles.push_back({ab, bc, ca});
    }
    m = std::move(next);
  }
  return m;
}

void bench_chamfer(benchmark::State& state) {
  const mesh::TriMesh a = icosphere(40.0, 3);
  mesh::TriMesh b = a;
  for (auto& p : b.vertices) p += Eigen::Vector3d(1.5, -0.5, 0.25);
  const int n = int(state.range(0));
  for (auto _ : state) {
    const double cd = metrics::chamfer(a, b, n, 42);
    benchmark::DoNotOptimize(cd);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void bench_mesh_iou(benchmark::State& state) {
  const mesh::TriMesh a = icosphere(40.0, 3);
  mesh::TriMesh b = a;
  for (auto& p : b.vertices) p += Eigen::Vector3d(4.0, 0.0, 0.0);
  const double voxel = double(state.range(0));
  for (auto _ : state) {
    const double v = metrics::mesh_iou(a, b, voxel);
    benchmark::DoNotOptimize(v);
  }
}

}  // namespace

BENCHMARK(bench_chamfer)->Arg(1000)->Arg(10000)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bench_mesh_iou)->Arg(2)->Arg(1)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
