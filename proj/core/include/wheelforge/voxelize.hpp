#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "wheelforge/trimesh.hpp"

namespace wheelforge::voxelize {

/// Number of cells of size h needed to span `extent` (at least 1); exact
/// multiples stay exact (60 mm at 6 mm -> 10 cells, not 11).
int axis_cells(double extent, double h);

/// Cell-center parity occupancy of a closed surface on the lattice whose
/// cell (ix, iy, iz) spans origin + h*[i, i+1] per axis. A cell is solid
/// when its center sees an odd number of surface crossings along +z; ties
/// (rays through projected edges or vertices) are broken by a consistent
/// symbolic perturbation so the parity stays exact for any watertight
/// input. Output is indexed (iz * ny + iy) * nx + ix. The caller is
/// responsible for watertightness validation.
std::vector<std::uint8_t> occupancy(const mesh::TriMesh& tri,
                                    const Eigen::Vector3d& origin, double h,
                                    int nx, int ny, int nz);

}  // namespace wheelforge::voxelize
