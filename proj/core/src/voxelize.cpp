#include "wheelforge/voxelize.hpp"

#include <algorithm>
#include <cmath>

namespace wheelforge::voxelize {

namespace {

/// Sign of orient2d(a, b, p) where ties are broken by perturbing p to
/// (p.x + d, p.y + d^2) with d -> 0+. The same perturbation is applied for
/// every query, so a vertical line through a shared edge or vertex of the
/// projected surface is assigned to exactly one incident triangle and the
/// crossing parity stays exact.
int orient_sign(double ax, double ay, double bx, double by, double px,
                double py) {
  const double v = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  if (by != ay) return by < ay ? 1 : -1;  // -(by - ay) * d dominates
  if (bx != ax) return bx > ax ? 1 : -1;  // +(bx - ax) * d^2 next
  return 0;                               // zero-length projected edge
}

}  // namespace

int axis_cells(double extent, double h) {
  const int n = int(std::ceil(extent / h - 1e-9));
  return std::max(n, 1);
}

std::vector<std::uint8_t> occupancy(const mesh::TriMesh& tri,
                                    const Eigen::Vector3d& origin, double h,
                                    int nx, int ny, int nz) {
  // Bucket triangles by the grid columns their xy-projection overlaps.
  std::vector<std::vector<int>> buckets(std::size_t(nx) * ny);
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const auto& f = tri.triangles[t];
    double bx0 = 1e300, bx1 = -1e300, by0 = 1e300, by1 = -1e300;
    for (int k = 0; k < 3; ++k) {
      const auto& p = tri.vertices[f[k]];
      bx0 = std::min(bx0, p.x());
      bx1 = std::max(bx1, p.x());
      by0 = std::min(by0, p.y());
      by1 = std::max(by1, p.y());
    }
    const int ix0 = std::max(0, int(std::floor((bx0 - origin.x()) / h - 0.5)));
    const int ix1 = std::min(nx - 1, int(std::floor((bx1 - origin.x()) / h)));
    const int iy0 = std::max(0, int(std::floor((by0 - origin.y()) / h - 0.5)));
    const int iy1 = std::min(ny - 1, int(std::floor((by1 - origin.y()) / h)));
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix)
        buckets[std::size_t(iy) * nx + ix].push_back(int(t));
  }

  std::vector<std::uint8_t> occ(std::size_t(nx) * ny * nz, 0);
  std::vector<double> zs;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const double cx = origin.x() + (ix + 0.5) * h;
      const double cy = origin.y() + (iy + 0.5) * h;
      zs.clear();
      for (int t : buckets[std::size_t(iy) * nx + ix]) {
        const auto& f = tri.triangles[std::size_t(t)];
        const Eigen::Vector3d& A = tri.vertices[f[0]];
        const Eigen::Vector3d& B = tri.vertices[f[1]];
        const Eigen::Vector3d& C = tri.vertices[f[2]];
        const Eigen::Vector3d n = (B - A).cross(C - A);
        if (n.z() == 0.0) continue;  // projected area zero: ray-parallel
        const int sa = n.z() > 0.0 ? 1 : -1;
        if (orient_sign(A.x(), A.y(), B.x(), B.y(), cx, cy) != sa) continue;
        if (orient_sign(B.x(), B.y(), C.x(), C.y(), cx, cy) != sa) continue;
        if (orient_sign(C.x(), C.y(), A.x(), A.y(), cx, cy) != sa) continue;
        zs.push_back(A.z() -
                     (n.x() * (cx - A.x()) + n.y() * (cy - A.y())) / n.z());
      }
      std::sort(zs.begin(), zs.end());
      for (int iz = 0; iz < nz; ++iz) {
        const double cz = origin.z() + (iz + 0.5) * h;
        const auto above =
            zs.end() - std::lower_bound(zs.begin(), zs.end(), cz);
        if (above % 2 == 1) occ[(std::size_t(iz) * ny + iy) * nx + ix] = 1;
      }
    }
  return occ;
}

}  // namespace wheelforge::voxelize
