#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "wheelforge/errors.hpp"
#include "wheelforge/recon.hpp"

namespace wheelforge::recon {

namespace {

// Each cube is cut into the six Kuhn tetrahedra around its main diagonal
// (corner code = dx + 2*dy + 4*dz). All cubes use the same split, so every
// shared cube face carries the same diagonal on both sides and the extracted
// surface is watertight for any sign configuration. Each tetrahedron below
// is listed with positive orientation (det of its edge vectors = +1).
constexpr int kTets[6][4] = {
    {0, 1, 3, 7}, {0, 1, 7, 5}, {0, 2, 7, 3},
    {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 7, 6},
};

// For a positively oriented tetrahedron (v0,v1,v2,v3), the other three
// vertices of vertex m in an order that keeps (m, o0, o1, o2) positively
// oriented.
constexpr int kOthers[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

int permutation_inversions(const std::array<int, 4>& p) {
  int inv = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] > p[j]) ++inv;
  return inv;
}

struct VertexWelder {
  std::unordered_map<std::uint64_t, int> by_edge;
  mesh::TriMesh* out;

  // Crossing vertex on the grid segment between node ids ga < gb, with
  // signed values sa, sb of opposite sign. Callers pass the endpoints in
  // canonical (low id first) order so every tetrahedron touching the edge
  // computes the identical vertex and reuses it.
  int vertex(std::int64_t ga, const Eigen::Vector3d& pa, double sa,
             std::int64_t gb, const Eigen::Vector3d& pb, double sb) {
    const std::uint64_t key =
        (std::uint64_t(ga) << 32) | std::uint64_t(std::uint32_t(gb));
    auto it = by_edge.find(key);
    if (it != by_edge.end()) return it->second;
    const double t = sa / (sa - sb);
    const int id = int(out->vertices.size());
    out->vertices.push_back(pa + t * (pb - pa));
    by_edge.emplace(key, id);
    return id;
  }
};

}  // namespace

mesh::TriMesh marching_cubes(const VoxelGrid& grid, double iso) {
  if (grid.nx < 2 || grid.ny < 2 || grid.nz < 2)
    throw ConfigInvalid("marching_cubes: grid needs at least 2 nodes per axis");
  if (!(grid.voxel_size > 0.0))
    throw ConfigInvalid("marching_cubes: voxel_size must be positive");
  if (grid.field.size() != grid.node_count())
    throw DimensionMismatch("marching_cubes: field size does not match dims");

  // Signed values with exact-iso nodes nudged to the positive side so every
  // crossing lies strictly inside its edge's sign change.
  auto signed_value = [&](std::size_t node) {
    const double s = double(grid.field[node]) - iso;
    return s == 0.0 ? 1e-300 : s;
  };

  bool any_neg = false, any_pos = false;
  for (std::size_t i = 0; i < grid.field.size() && !(any_neg && any_pos); ++i) {
    (signed_value(i) < 0.0 ? any_neg : any_pos) = true;
  }
  if (!any_neg || !any_pos)
    throw NoSurface("marching_cubes: field is single-sided about iso");

  mesh::TriMesh out;
  VertexWelder weld;
  weld.out = &out;

  const std::size_t sx = 1;
  const std::size_t sy = std::size_t(grid.nx);
  const std::size_t sz = std::size_t(grid.nx) * grid.ny;

  std::int64_t gid[8];
  double sv[8];
  Eigen::Vector3d pos[8];

  for (int iz = 0; iz + 1 < grid.nz; ++iz) {
    for (int iy = 0; iy + 1 < grid.ny; ++iy) {
      for (int ix = 0; ix + 1 < grid.nx; ++ix) {
        const std::size_t base = grid.index(ix, iy, iz);
        bool neg = false, pos_side = false;
        for (int c = 0; c < 8; ++c) {
          const std::size_t node =
              base + (c & 1 ? sx : 0) + (c & 2 ? sy : 0) + (c & 4 ? sz : 0);
          gid[c] = std::int64_t(node);
          sv[c] = signed_value(node);
          (sv[c] < 0.0 ? neg : pos_side) = true;
        }
        if (!neg || !pos_side) continue;  // uncut cube
        for (int c = 0; c < 8; ++c)
          pos[c] = grid.node_position(ix + ((c & 1) ? 1 : 0),
                                      iy + ((c & 2) ? 1 : 0),
                                      iz + ((c & 4) ? 1 : 0));

        for (const auto& tet : kTets) {
          int mask = 0;
          for (int m = 0; m < 4; ++m)
            if (sv[tet[m]] < 0.0) mask |= 1 << m;
          if (mask == 0 || mask == 15) continue;

          auto cross = [&](int la, int lb) {
            const int a = tet[la], b = tet[lb];
            if (gid[a] <= gid[b])
              return weld.vertex(gid[a], pos[a], sv[a], gid[b], pos[b], sv[b]);
            return weld.vertex(gid[b], pos[b], sv[b], gid[a], pos[a], sv[a]);
          };

          const int inside_count =
              (mask & 1) + ((mask >> 1) & 1) + ((mask >> 2) & 1) + ((mask >> 3) & 1);
          if (inside_count == 1 || inside_count == 3) {
            int m = 0;
            while ((((mask >> m) & 1) != 0) != (inside_count == 1)) ++m;
            const int* o = kOthers[m];
            const int p0 = cross(m, o[0]);
            const int p1 = cross(m, o[1]);
            const int p2 = cross(m, o[2]);
            if (inside_count == 1)
              out.triangles.push_back({p0, p1, p2});
            else
              out.triangles.push_back({p0, p2, p1});
          } else {  // two inside, two outside
            int in[2], ot[2], ni = 0, no = 0;
            for (int m = 0; m < 4; ++m)
              ((mask >> m) & 1) ? in[ni++] = m : ot[no++] = m;
            if (permutation_inversions({in[0], in[1], ot[0], ot[1]}) % 2 == 1)
              std::swap(ot[0], ot[1]);
            const int q0 = cross(in[0], ot[0]);
            const int q1 = cross(in[0], ot[1]);
            const int q2 = cross(in[1], ot[1]);
            const int q3 = cross(in[1], ot[0]);
            out.triangles.push_back({q0, q1, q2});
            out.triangles.push_back({q0, q2, q3});
          }
        }
      }
    }
  }
  return out;
}

}  // namespace wheelforge::recon
