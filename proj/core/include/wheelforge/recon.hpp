#pragma once

#include <Eigen/Core>
#include <vector>

#include "wheelforge/depthsynth.hpp"
#include "wheelforge/rim_template.hpp"
#include "wheelforge/trimesh.hpp"

namespace wheelforge::recon {

enum class SourceTag { Spoke, RimOuter, RimInner, Disc };

/// Tagged point set in millimeters.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  SourceTag source_tag = SourceTag::Spoke;
};

/// Scalar field sampled at the nodes of a regular grid. Node (ix,iy,iz)
/// sits at origin + voxel_size * (ix,iy,iz); storage is x-fastest.
struct VoxelGrid {
  int nx = 0, ny = 0, nz = 0;  ///< node counts per axis (>= 2 each)
  double voxel_size = 0.0;     ///< mm between neighboring nodes
  Eigen::Vector3d origin{0.0, 0.0, 0.0};
  std::vector<float> field;

  [[nodiscard]] std::size_t node_count() const {
    return std::size_t(nx) * ny * nz;
  }
  [[nodiscard]] std::size_t index(int ix, int iy, int iz) const {
    return std::size_t(ix) + std::size_t(nx) * (std::size_t(iy) + std::size_t(ny) * iz);
  }
  [[nodiscard]] float at(int ix, int iy, int iz) const {
    return field[index(ix, iy, iz)];
  }
  [[nodiscard]] Eigen::Vector3d node_position(int ix, int iy, int iz) const {
    return origin + voxel_size * Eigen::Vector3d(ix, iy, iz);
  }
};

/// Knobs for the depth-to-mesh pipeline.
struct ReconConfig {
  double voxel_size = 3.0;      ///< mm; fusion grid resolution
  int smooth_iters = 10;        ///< Laplacian smoothing iterations
  double smooth_step = 0.5;     ///< smoothing step size
  int target_triangles = 50000; ///< decimation budget
  int angular_samples = 1024;   ///< rim reference sampling around the axis
  int axial_samples = 128;      ///< rim reference sampling along each run
  double iso = 0.5;             ///< occupancy iso level
  /// Material depth behind the visible spoke face (mm). The depth map only
  /// carries the front surface; extruding it rearward turns the spoke sheet
  /// into a solid slab, which volumetric consumers (voxel meshing) need.
  /// 0 keeps the bare front-surface shell.
  double spoke_thickness_mm = 0.0;

  void validate() const;  // throws ConfigInvalid
};

/// Back-project every valid depth pixel inside the face-design disc into a
/// 3D point (x, y in mm from the wheel axis, z = depth). Pixels beyond
/// the map's face radius belong to the rim ring and are skipped; a zero
/// face radius keeps every valid pixel. Throws EmptyMask when nothing
/// survives.
PointCloud spoke_to_points(const depthsynth::DepthMap& d);

/// Sample the template-defined rim surfaces as tagged clouds: outer barrel
/// plus front flange (RimOuter), inner barrel plus rear flange (RimInner),
/// and the hub group: side wall, rear annulus, and bore tube (Disc). Each
/// run places `angular_samples` points per ring and `axial_samples` rings
/// along its extent. Axisymmetric by construction.
std::vector<PointCloud> rim_reference_points(const RimTemplate& tpl,
                                             int angular_samples,
                                             int axial_samples);

/// Every cloud a wheel reconstruction fuses: the spoke face (extruded
/// rearward in voxel-sized steps when cfg.spoke_thickness_mm > 0) plus the
/// rim reference surfaces. Shared by reconstruct_wheel and any caller that
/// wants the raw pre-postprocess solid for comparison.
std::vector<PointCloud> wheel_point_clouds(const depthsynth::DepthMap& d,
                                           const RimTemplate& tpl,
                                           const ReconConfig& cfg);

/// Translate the combined cloud so its centroid lands at the grid center,
/// then build a smoothed occupancy field in [0,1]: each point stamps its
/// cell's 8 corner nodes to full occupancy (idempotent), then a separable
/// binomial blur smooths the band. The grid is padded so occupied space
/// never touches the boundary. Throws EmptyList when the clouds are empty,
/// ConfigInvalid on nonpositive voxel size or nonfinite points.
VoxelGrid fuse_to_grid(const std::vector<PointCloud>& clouds, double voxel_size);

/// Extract the isosurface of the node field at `iso` with linearly
/// interpolated vertices. The surface is closed (watertight) whenever the
/// iso-region stays off the grid boundary. Throws NoSurface when every
/// field value sits on one side of iso.
mesh::TriMesh marching_cubes(const VoxelGrid& grid, double iso);

/// Largest component -> Laplacian smoothing -> quadric-error decimation to
/// at most target_triangles -> degenerate-triangle cleanup -> small-hole
/// fill -> outward orientation. Throws DegenerateMesh when cleanup cannot
/// restore a manifold surface, EmptyMesh on empty input.
mesh::TriMesh postprocess(const mesh::TriMesh& mesh, int smooth_iters,
                          int target_triangles, double smooth_step = 0.5);

/// Full depth-to-mesh pipeline: spoke back-projection + rim reference
/// surfaces -> occupancy fusion -> isosurface -> postprocess. Returns a
/// watertight mesh or throws (NotWatertight and stage errors propagate so
/// callers can record per-design failures).
mesh::TriMesh reconstruct_wheel(const depthsynth::DepthMap& d,
                                const RimTemplate& tpl, const ReconConfig& cfg);

}  // namespace wheelforge::recon
