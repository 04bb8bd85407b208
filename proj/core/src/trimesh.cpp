#include "wheelforge/trimesh.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include "wheelforge/errors.hpp"

namespace wheelforge::mesh {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

std::unordered_map<std::uint64_t, int> edge_valences(const TriMesh& mesh) {
  std::unordered_map<std::uint64_t, int> val;
  val.reserve(mesh.triangles.size() * 2);
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) ++val[edge_key(t[k], t[(k + 1) % 3])];
  return val;
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = int(i);
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a), b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

/// Union triangles sharing an edge; returns per-triangle component root.
std::vector<int> triangle_components(const TriMesh& mesh) {
  DisjointSet ds(mesh.triangles.size());
  std::unordered_map<std::uint64_t, int> first_tri;
  first_tri.reserve(mesh.triangles.size() * 2);
  for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
    const auto& t = mesh.triangles[ti];
    for (int k = 0; k < 3; ++k) {
      const auto key = edge_key(t[k], t[(k + 1) % 3]);
      auto [it, inserted] = first_tri.try_emplace(key, int(ti));
      if (!inserted) ds.unite(it->second, int(ti));
    }
  }
  std::vector<int> root(mesh.triangles.size());
  for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti)
    root[ti] = ds.find(int(ti));
  return root;
}

double triangle_area(const TriMesh& m, const std::array<int, 3>& t) {
  const Eigen::Vector3d a = m.vertices[t[1]] - m.vertices[t[0]];
  const Eigen::Vector3d b = m.vertices[t[2]] - m.vertices[t[0]];
  return 0.5 * a.cross(b).norm();
}

}  // namespace

std::size_t edge_count(const TriMesh& mesh) { return edge_valences(mesh).size(); }

bool is_watertight(const TriMesh& mesh) {
  if (mesh.empty()) return false;
  for (const auto& [key, v] : edge_valences(mesh))
    if (v != 2) return false;
  return true;
}

long long euler_characteristic(const TriMesh& mesh) {
  const TriMesh m = compact(mesh);
  return (long long)m.vertices.size() - (long long)edge_count(m) +
         (long long)m.triangles.size();
}

double signed_volume(const TriMesh& mesh) {
  double six_v = 0.0;
  for (const auto& t : mesh.triangles) {
    const Eigen::Vector3d& a = mesh.vertices[t[0]];
    const Eigen::Vector3d& b = mesh.vertices[t[1]];
    const Eigen::Vector3d& c = mesh.vertices[t[2]];
    six_v += a.dot(b.cross(c));
  }
  return six_v / 6.0;
}

double surface_area(const TriMesh& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles) area += triangle_area(mesh, t);
  return area;
}

void bounding_box(const TriMesh& mesh, Eigen::Vector3d& lo, Eigen::Vector3d& hi) {
  if (mesh.vertices.empty()) throw EmptyMesh("bounding_box: no vertices");
  lo = hi = mesh.vertices[0];
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
}

int component_count(const TriMesh& mesh) {
  if (mesh.empty()) return 0;
  auto root = triangle_components(mesh);
  std::sort(root.begin(), root.end());
  return int(std::unique(root.begin(), root.end()) - root.begin());
}

TriMesh largest_component(const TriMesh& mesh) {
  if (mesh.empty()) throw EmptyMesh("largest_component: no triangles");
  const auto root = triangle_components(mesh);
  std::unordered_map<int, std::size_t> sizes;
  for (int r : root) ++sizes[r];
  int best = root[0];
  for (const auto& [r, n] : sizes)
    if (n > sizes[best] || (n == sizes[best] && r < best)) best = r;
  TriMesh out;
  out.vertices = mesh.vertices;
  for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti)
    if (root[ti] == best) out.triangles.push_back(mesh.triangles[ti]);
  return compact(out);
}

TriMesh drop_degenerate_triangles(const TriMesh& mesh, double min_area) {
  TriMesh out;
  out.vertices = mesh.vertices;
  for (const auto& t : mesh.triangles)
    if (t[0] != t[1] && t[1] != t[2] && t[0] != t[2] &&
        triangle_area(mesh, t) >= min_area)
      out.triangles.push_back(t);
  return compact(out);
}

TriMesh compact(const TriMesh& mesh) {
  // Referenced vertices keep their relative order, so a mesh that uses every
  // vertex passes through unchanged.
  std::vector<int> remap(mesh.vertices.size(), -1);
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) remap[t[k]] = 0;
  TriMesh out;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (remap[v] < 0) continue;
    remap[v] = int(out.vertices.size());
    out.vertices.push_back(mesh.vertices[v]);
  }
  out.triangles.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles)
    out.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
  return out;
}

}  // namespace wheelforge::mesh
