#include "wheelforge/meshproc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wheelforge/errors.hpp"
#include "wheelforge/recon.hpp"

namespace wheelforge::mesh {

TriMesh laplacian_smooth(const TriMesh& mesh, int iterations, double step) {
  if (iterations <= 0) return mesh;
  const int nv = int(mesh.vertices.size());

  // Unique edge neighbors per vertex.
  std::vector<std::vector<int>> nbr(nv);
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      nbr[a].push_back(b);
      nbr[b].push_back(a);
    }
  for (auto& v : nbr) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  TriMesh out = mesh;
  std::vector<Eigen::Vector3d> next(nv);
  for (int it = 0; it < iterations; ++it) {
    for (int v = 0; v < nv; ++v) {
      if (nbr[v].empty()) {
        next[v] = out.vertices[v];
        continue;
      }
      Eigen::Vector3d avg = Eigen::Vector3d::Zero();
      for (int u : nbr[v]) avg += out.vertices[u];
      avg /= double(nbr[v].size());
      next[v] = out.vertices[v] + step * (avg - out.vertices[v]);
    }
    out.vertices.swap(next);
  }
  return out;
}

namespace {

Eigen::Matrix4d plane_quadric(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                              const Eigen::Vector3d& c) {
  const Eigen::Vector3d n = (b - a).cross(c - a);
  const double area2 = n.norm();  // twice the area
  if (area2 < 1e-14) return Eigen::Matrix4d::Zero();
  const Eigen::Vector3d un = n / area2;
  Eigen::Vector4d p;
  p << un, -un.dot(a);
  return (0.5 * area2) * (p * p.transpose());  // area-weighted
}

double quadric_cost(const Eigen::Matrix4d& Q, const Eigen::Vector3d& v) {
  Eigen::Vector4d h;
  h << v, 1.0;
  return h.dot(Q * h);
}

/// Minimizer of the summed quadric; falls back to the best of the two
/// endpoints and their midpoint when the system is near-singular.
Eigen::Vector3d optimal_point(const Eigen::Matrix4d& Q, const Eigen::Vector3d& a,
                              const Eigen::Vector3d& b) {
  const Eigen::Matrix3d A = Q.topLeftCorner<3, 3>();
  const Eigen::Vector3d rhs = -Q.topRightCorner<3, 1>();
  const double scale = A.cwiseAbs().maxCoeff();
  if (scale > 0.0 && std::abs(A.determinant()) > 1e-10 * scale * scale * scale) {
    const Eigen::Vector3d x = A.partialPivLu().solve(rhs);
    if (x.allFinite()) return x;
  }
  const Eigen::Vector3d mid = 0.5 * (a + b);
  Eigen::Vector3d best = a;
  double best_cost = quadric_cost(Q, a);
  for (const Eigen::Vector3d& cand : {b, mid}) {
    const double c = quadric_cost(Q, cand);
    if (c < best_cost) {
      best_cost = c;
      best = cand;
    }
  }
  return best;
}

struct CollapseEntry {
  double cost;
  int a, b;                    // a < b
  std::uint32_t va_ver, vb_ver;
  Eigen::Vector3d vbar;
};

struct EntryOrder {
  bool operator()(const CollapseEntry& x, const CollapseEntry& y) const {
    // priority_queue keeps the "largest"; we want the cheapest first with a
    // deterministic total order on ties.
    if (x.cost != y.cost) return x.cost > y.cost;
    if (x.a != y.a) return x.a > y.a;
    if (x.b != y.b) return x.b > y.b;
    if (x.va_ver != y.va_ver) return x.va_ver > y.va_ver;
    return x.vb_ver > y.vb_ver;
  }
};

}  // namespace

TriMesh decimate_quadric(const TriMesh& mesh, int target_triangles) {
  if (target_triangles < 0)
    throw ConfigInvalid("decimate_quadric: negative target");
  if (int(mesh.triangle_count()) <= target_triangles) return mesh;

  const int nv = int(mesh.vertices.size());
  std::vector<Eigen::Vector3d> verts = mesh.vertices;
  std::vector<std::array<int, 3>> tris = mesh.triangles;
  std::vector<bool> tri_alive(tris.size(), true);
  int alive = int(tris.size());

  std::vector<Eigen::Matrix4d> Q(nv, Eigen::Matrix4d::Zero());
  std::vector<std::vector<int>> vtris(nv);
  for (int t = 0; t < int(tris.size()); ++t) {
    const auto& tr = tris[t];
    const Eigen::Matrix4d K =
        plane_quadric(verts[tr[0]], verts[tr[1]], verts[tr[2]]);
    for (int e = 0; e < 3; ++e) {
      Q[tr[e]] += K;
      vtris[tr[e]].push_back(t);
    }
  }

  std::vector<std::uint32_t> version(nv, 0);
  std::priority_queue<CollapseEntry, std::vector<CollapseEntry>, EntryOrder> pq;

  auto push_edge = [&](int a, int b) {
    if (a == b) return;
    if (a > b) std::swap(a, b);
    const Eigen::Matrix4d Qs = Q[a] + Q[b];
    const Eigen::Vector3d vbar = optimal_point(Qs, verts[a], verts[b]);
    pq.push({quadric_cost(Qs, vbar), a, b, version[a], version[b], vbar});
  };

  {
    std::unordered_set<std::uint64_t> seen;
    for (const auto& tr : tris)
      for (int e = 0; e < 3; ++e) {
        int a = tr[e], b = tr[(e + 1) % 3];
        if (a > b) std::swap(a, b);
        const std::uint64_t key = (std::uint64_t(a) << 32) | std::uint32_t(b);
        if (seen.insert(key).second) push_edge(a, b);
      }
  }

  // Vertices sharing a live triangle with v, excluding v itself.
  auto neighbor_set = [&](int v) {
    std::vector<int> out;
    for (int t : vtris[v]) {
      if (!tri_alive[t]) continue;
      for (int x : tris[t])
        if (x != v) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };

  while (alive > target_triangles && !pq.empty()) {
    const CollapseEntry e = pq.top();
    pq.pop();
    if (e.va_ver != version[e.a] || e.vb_ver != version[e.b]) continue;

    // Triangles on the edge (a,b) and their opposite vertices.
    std::vector<int> edge_tris;
    std::vector<int> opposites;
    for (int t : vtris[e.a]) {
      if (!tri_alive[t]) continue;
      const auto& tr = tris[t];
      const bool has_b = tr[0] == e.b || tr[1] == e.b || tr[2] == e.b;
      if (!has_b) continue;
      edge_tris.push_back(t);
      for (int x : tr)
        if (x != e.a && x != e.b) opposites.push_back(x);
    }
    if (edge_tris.empty() || edge_tris.size() > 2) continue;  // gone/non-manifold

    // Link condition: shared neighbors must be exactly the opposite vertices.
    std::vector<int> na = neighbor_set(e.a), nb = neighbor_set(e.b);
    std::vector<int> common;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(),
                          std::back_inserter(common));
    std::sort(opposites.begin(), opposites.end());
    opposites.erase(std::unique(opposites.begin(), opposites.end()),
                    opposites.end());
    if (common != opposites) continue;

    // Reject collapses that fold surviving triangles over.
    bool folds = false;
    for (int side = 0; side < 2 && !folds; ++side) {
      const int v = side == 0 ? e.a : e.b;
      for (int t : vtris[v]) {
        if (!tri_alive[t]) continue;
        const auto& tr = tris[t];
        if ((tr[0] == e.a || tr[1] == e.a || tr[2] == e.a) &&
            (tr[0] == e.b || tr[1] == e.b || tr[2] == e.b))
          continue;  // dies with the collapse
        Eigen::Vector3d p[3], q[3];
        for (int k = 0; k < 3; ++k) {
          p[k] = verts[tr[k]];
          q[k] = (tr[k] == e.a || tr[k] == e.b) ? e.vbar : verts[tr[k]];
        }
        const Eigen::Vector3d n0 = (p[1] - p[0]).cross(p[2] - p[0]);
        const Eigen::Vector3d n1 = (q[1] - q[0]).cross(q[2] - q[0]);
        if (n0.dot(n1) <= 0.0) {
          folds = true;
          break;
        }
      }
    }
    if (folds) continue;

    // Commit: b merges into a at vbar.
    verts[e.a] = e.vbar;
    Q[e.a] += Q[e.b];
    for (int t : edge_tris) {
      if (tri_alive[t]) {
        tri_alive[t] = false;
        --alive;
      }
    }
    for (int t : vtris[e.b]) {
      if (!tri_alive[t]) continue;
      for (int& x : tris[t])
        if (x == e.b) x = e.a;
      vtris[e.a].push_back(t);
    }
    vtris[e.b].clear();
    // Drop stale ids so incidence lists stay tight.
    auto& ta = vtris[e.a];
    ta.erase(std::remove_if(ta.begin(), ta.end(),
                            [&](int t) { return !tri_alive[t]; }),
             ta.end());
    std::sort(ta.begin(), ta.end());
    ta.erase(std::unique(ta.begin(), ta.end()), ta.end());
    ++version[e.a];
    ++version[e.b];

    for (int u : neighbor_set(e.a)) push_edge(e.a, u);
  }

  TriMesh out;
  out.vertices = std::move(verts);
  out.triangles.reserve(std::size_t(alive));
  for (int t = 0; t < int(tris.size()); ++t)
    if (tri_alive[t]) out.triangles.push_back(tris[t]);
  return compact(out);
}

int fill_small_holes(TriMesh& mesh, int max_loop_edges) {
  if (max_loop_edges < 3) return 0;

  // Directed edges that lack a mate are boundary edges.
  std::unordered_set<std::uint64_t> directed;
  auto key = [](int a, int b) {
    return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
  };
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) directed.insert(key(t[e], t[(e + 1) % 3]));

  // successor[u] = smallest v with boundary edge u->v (deterministic pick).
  std::unordered_map<int, std::vector<int>> succ;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      if (!directed.count(key(b, a))) succ[a].push_back(b);
    }
  for (auto& [u, vs] : succ) std::sort(vs.begin(), vs.end());

  std::unordered_set<std::uint64_t> used;
  int filled = 0;
  std::vector<int> starts;
  starts.reserve(succ.size());
  for (const auto& [u, vs] : succ) starts.push_back(u);
  std::sort(starts.begin(), starts.end());

  for (int start : starts) {
    for (int first : succ[start]) {
      if (used.count(key(start, first))) continue;
      // Walk the loop.
      std::vector<int> loop{start};
      int prev = start, cur = first;
      bool closed = false;
      while (int(loop.size()) <= max_loop_edges) {
        loop.push_back(cur);
        if (cur == start) {
          closed = true;
          break;
        }
        auto it = succ.find(cur);
        if (it == succ.end()) break;
        int nxt = -1;
        for (int v : it->second)
          if (v != prev && !used.count(key(cur, v))) {
            nxt = v;
            break;
          }
        if (nxt < 0 && !it->second.empty()) nxt = it->second.front();
        if (nxt < 0) break;
        prev = cur;
        cur = nxt;
      }
      if (!closed) continue;
      loop.pop_back();  // drop repeated start
      const int k = int(loop.size());
      if (k < 3 || k > max_loop_edges) continue;
      for (int i = 0; i < k; ++i) used.insert(key(loop[i], loop[(i + 1) % k]));
      // Fan fill with orientation mating the boundary direction.
      for (int i = 1; i + 1 < k; ++i)
        mesh.triangles.push_back({loop[0], loop[i + 1], loop[i]});
      ++filled;
    }
  }
  return filled;
}

void orient_outward(TriMesh& mesh) {
  if (signed_volume(mesh) < 0.0)
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
}

}  // namespace wheelforge::mesh

namespace wheelforge::recon {

mesh::TriMesh postprocess(const mesh::TriMesh& input, int smooth_iters,
                          int target_triangles, double smooth_step) {
  if (input.empty()) throw EmptyMesh("postprocess: empty mesh");
  if (target_triangles < 4)
    throw ConfigInvalid("postprocess: target_triangles must be at least 4");

  mesh::TriMesh m = mesh::largest_component(input);
  m = mesh::laplacian_smooth(m, smooth_iters, smooth_step);
  if (int(m.triangle_count()) > target_triangles)
    m = mesh::decimate_quadric(m, target_triangles);
  m = mesh::drop_degenerate_triangles(m, 1e-6);
  mesh::fill_small_holes(m, 8);
  m = mesh::compact(m);
  mesh::orient_outward(m);

  // Manifold sanity: no edge may border more than two triangles.
  std::unordered_map<std::uint64_t, int> valence;
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) {
      int a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++valence[(std::uint64_t(a) << 32) | std::uint32_t(b)];
    }
  for (const auto& kv : valence)
    if (kv.second > 2)
      throw DegenerateMesh("postprocess: non-manifold edge after cleanup");
  return m;
}

}  // namespace wheelforge::recon
