#include "wheelforge/recon.hpp"

#include <algorithm>
#include <cmath>

#include "wheelforge/errors.hpp"
#include "wheelforge/meshproc.hpp"

namespace wheelforge::recon {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void ReconConfig::validate() const {
  if (!(voxel_size > 0.0))
    throw ConfigInvalid("recon: voxel_size must be positive");
  if (smooth_iters < 0)
    throw ConfigInvalid("recon: smooth_iters must be nonnegative");
  if (!(smooth_step > 0.0) || smooth_step > 1.0)
    throw ConfigInvalid("recon: smooth_step must lie in (0, 1]");
  if (target_triangles < 4)
    throw ConfigInvalid("recon: target_triangles must be at least 4");
  if (angular_samples < 4 || axial_samples < 4)
    throw ConfigInvalid("recon: need at least 4 samples per direction");
  if (!(iso > 0.0) || !(iso < 1.0))
    throw ConfigInvalid("recon: iso must lie strictly inside (0, 1)");
  if (spoke_thickness_mm < 0.0)
    throw ConfigInvalid("recon: spoke_thickness_mm must be nonnegative");
}

PointCloud spoke_to_points(const depthsynth::DepthMap& d) {
  if (d.width < 1 || d.height < 1 ||
      d.values.size() != d.pixel_count() || d.valid.size() != d.pixel_count())
    throw DimensionMismatch("spoke_to_points: malformed depth map");
  if (!(d.mm_per_pixel > 0.0))
    throw ConfigInvalid("spoke_to_points: depth map lacks a physical scale");

  const double cx = (d.width - 1) / 2.0;
  const double cy = (d.height - 1) / 2.0;
  PointCloud out;
  out.source_tag = SourceTag::Spoke;
  for (int py = 0; py < d.height; ++py) {
    for (int px = 0; px < d.width; ++px) {
      const std::size_t i = std::size_t(py) * d.width + px;
      if (!d.valid[i]) continue;
      const double x = (px - cx) * d.mm_per_pixel;
      const double y = (py - cy) * d.mm_per_pixel;
      if (d.face_radius_mm > 0.0 &&
          x * x + y * y > d.face_radius_mm * d.face_radius_mm)
        continue;
      out.points.emplace_back(x, y, double(d.values[i]));
    }
  }
  if (out.points.empty())
    throw EmptyMask("spoke_to_points: no valid pixel inside the face disc");
  return out;
}

namespace {

/// Append `axial` rings of `angular` points each, sweeping linearly from
/// (r0, z0) to (r1, z1) around the axis.
void sweep_run(std::vector<Eigen::Vector3d>& pts, double r0, double z0,
               double r1, double z1, int angular, int axial) {
  for (int i = 0; i < axial; ++i) {
    const double t = double(i) / double(axial - 1);
    const double r = r0 + t * (r1 - r0);
    const double z = z0 + t * (z1 - z0);
    for (int k = 0; k < angular; ++k) {
      const double th = 2.0 * kPi * double(k) / double(angular);
      pts.emplace_back(r * std::cos(th), r * std::sin(th), z);
    }
  }
}

}  // namespace

std::vector<PointCloud> rim_reference_points(const RimTemplate& tpl,
                                             int angular_samples,
                                             int axial_samples) {
  tpl.validate();
  if (angular_samples < 4 || axial_samples < 4)
    throw ConfigInvalid("rim_reference_points: need at least 4 samples");

  const double r_rim = tpl.rim_radius();
  const double r_face = tpl.design_outer_radius();
  const double r_disc = tpl.disc_radius();
  const double r_bore = tpl.bore_radius();
  const double z_face = tpl.spoke_depth_profile(r_face);   // flange depth
  const double z_back = tpl.rim_width;                     // barrel rear
  const double z_hub_face = tpl.spoke_depth_profile(r_disc);
  const double z_bore_face = tpl.spoke_depth_profile(r_bore);
  const double z_hub_rear = z_hub_face + 30.0;             // hub slab depth

  std::vector<PointCloud> clouds(3);

  // Outer group: front flange annulus + outer barrel.
  clouds[0].source_tag = SourceTag::RimOuter;
  sweep_run(clouds[0].points, r_face, z_face, r_rim, z_face, angular_samples,
            axial_samples);
  sweep_run(clouds[0].points, r_rim, z_face, r_rim, z_back, angular_samples,
            axial_samples);

  // Inner group: inner barrel + rear flange annulus.
  clouds[1].source_tag = SourceTag::RimInner;
  sweep_run(clouds[1].points, r_face, z_face, r_face, z_back, angular_samples,
            axial_samples);
  sweep_run(clouds[1].points, r_face, z_back, r_rim, z_back, angular_samples,
            axial_samples);

  // Hub group: side wall, rear annulus, bore tube.
  clouds[2].source_tag = SourceTag::Disc;
  sweep_run(clouds[2].points, r_disc, z_hub_face, r_disc, z_hub_rear,
            angular_samples, axial_samples);
  sweep_run(clouds[2].points, r_bore, z_hub_rear, r_disc, z_hub_rear,
            angular_samples, axial_samples);
  sweep_run(clouds[2].points, r_bore, z_bore_face, r_bore, z_hub_rear,
            angular_samples, axial_samples);

  return clouds;
}

VoxelGrid fuse_to_grid(const std::vector<PointCloud>& clouds, double voxel_size) {
  if (!(voxel_size > 0.0))
    throw ConfigInvalid("fuse_to_grid: voxel_size must be positive");
  std::size_t n = 0;
  for (const auto& c : clouds) n += c.points.size();
  if (n == 0) throw EmptyList("fuse_to_grid: combined cloud is empty");

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& c : clouds)
    for (const auto& p : c.points) {
      if (!p.allFinite())
        throw ConfigInvalid("fuse_to_grid: nonfinite point coordinate");
      centroid += p;
    }
  centroid /= double(n);

  // Half-extent about the centroid, per axis, so the centroid can sit at
  // the exact grid center.
  Eigen::Vector3d half = Eigen::Vector3d::Zero();
  for (const auto& c : clouds)
    for (const auto& p : c.points)
      half = half.cwiseMax((p - centroid).cwiseAbs());

  const int pad = 4;  // keeps splat + blur support away from the boundary
  VoxelGrid grid;
  grid.voxel_size = voxel_size;
  int dims[3];
  for (int a = 0; a < 3; ++a) {
    const int inner = int(std::ceil(2.0 * half[a] / voxel_size));
    dims[a] = inner + 1 + 2 * pad;
  }
  grid.nx = dims[0];
  grid.ny = dims[1];
  grid.nz = dims[2];
  // Work in centroid-centered coordinates: grid center = centroid.
  grid.origin = -0.5 * voxel_size *
                Eigen::Vector3d(grid.nx - 1, grid.ny - 1, grid.nz - 1);
  grid.field.assign(grid.node_count(), 0.0f);

  // Stamp the 8 corners of each point's cell with full occupancy. The
  // binary stamp is idempotent under cloud duplication, and the two-plane
  // band it paints around a dense point sheet blurs to a peak of 10/16
  // regardless of where the sheet sits relative to the grid, so the 0.5
  // iso level always finds it.
  for (const auto& c : clouds)
    for (const auto& p : c.points) {
      const Eigen::Vector3d g = (p - centroid - grid.origin) / voxel_size;
      const int i0 = int(std::floor(g.x()));
      const int j0 = int(std::floor(g.y()));
      const int k0 = int(std::floor(g.z()));
      for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const int ix = i0 + dx, iy = j0 + dy, iz = k0 + dz;
            if (ix < 0 || iy < 0 || iz < 0 || ix >= grid.nx || iy >= grid.ny ||
                iz >= grid.nz)
              continue;
            grid.field[grid.index(ix, iy, iz)] = 1.0f;
          }
    }

  // Separable binomial blur [1,4,6,4,1]/16, zero-padded: keeps values in
  // [0,1] and closes sub-voxel sampling gaps.
  const double kKernel[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  std::vector<float> tmp(grid.field.size());
  const int nxyz[3] = {grid.nx, grid.ny, grid.nz};
  const std::size_t stride[3] = {1, std::size_t(grid.nx),
                                 std::size_t(grid.nx) * grid.ny};
  for (int axis = 0; axis < 3; ++axis) {
    const int len = nxyz[axis];
    const std::size_t st = stride[axis];
    for (int iz = 0; iz < grid.nz; ++iz)
      for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
          const int along = axis == 0 ? ix : (axis == 1 ? iy : iz);
          const std::size_t base = grid.index(ix, iy, iz);
          double acc = 0.0;
          for (int o = -2; o <= 2; ++o) {
            const int q = along + o;
            if (q < 0 || q >= len) continue;
            acc += kKernel[o + 2] * grid.field[base + std::size_t(o) * st];
          }
          tmp[base] = float(acc);
        }
    grid.field.swap(tmp);
  }
  return grid;
}

std::vector<PointCloud> wheel_point_clouds(const depthsynth::DepthMap& d,
                                           const RimTemplate& tpl,
                                           const ReconConfig& cfg) {
  cfg.validate();
  std::vector<PointCloud> clouds;
  clouds.push_back(spoke_to_points(d));
  if (cfg.spoke_thickness_mm > 0.0) {
    // Extrude the face sheet rearward in steps no wider than one voxel so
    // the fused occupancy stays gap-free through the slab. Copy the face
    // points: push_back below reallocates the cloud vector.
    const std::vector<Eigen::Vector3d> face = clouds.front().points;
    const int layers =
        int(std::ceil(cfg.spoke_thickness_mm / cfg.voxel_size));
    for (int k = 1; k <= layers; ++k) {
      const double dz = cfg.spoke_thickness_mm * double(k) / double(layers);
      PointCloud layer;
      layer.source_tag = SourceTag::Spoke;
      layer.points.reserve(face.size());
      for (const auto& p : face)
        layer.points.emplace_back(p.x(), p.y(), p.z() + dz);
      clouds.push_back(std::move(layer));
    }
  }
  auto rims = rim_reference_points(tpl, cfg.angular_samples, cfg.axial_samples);
  for (auto& c : rims) clouds.push_back(std::move(c));
  return clouds;
}

mesh::TriMesh reconstruct_wheel(const depthsynth::DepthMap& d,
                                const RimTemplate& tpl, const ReconConfig& cfg) {
  const std::vector<PointCloud> clouds = wheel_point_clouds(d, tpl, cfg);
  const VoxelGrid grid = fuse_to_grid(clouds, cfg.voxel_size);
  const mesh::TriMesh raw = marching_cubes(grid, cfg.iso);
  mesh::TriMesh out =
      postprocess(raw, cfg.smooth_iters, cfg.target_triangles, cfg.smooth_step);
  if (!mesh::is_watertight(out))
    throw NotWatertight("reconstruct_wheel: surface failed closure");
  if (!(mesh::signed_volume(out) > 0.0))
    throw DegenerateMesh("reconstruct_wheel: nonpositive enclosed volume");
  return out;
}

}  // namespace wheelforge::recon
