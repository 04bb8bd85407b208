#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "wheelforge/depthsynth.hpp"
#include "wheelforge/trimesh.hpp"

namespace wheelforge::metrics {

/// Depth-prediction error suite over the jointly valid pixels of a
/// prediction / ground-truth pair.
struct DepthErrorReport {
  double rmse = 0.0;       // same units as the depth values
  double absrel = 0.0;     // dimensionless
  double delta_125 = 0.0;  // fraction of pixels with max(d^/d, d/d^) < 1.25
  std::size_t valid_pixels = 0;
};

/// Volumetric / surface similarity of a mesh pair, as written to the
/// evaluation CSV.
struct MeshSimilarityReport {
  double iou = 0.0;      // [0, 1]
  double chamfer = 0.0;  // squared length units (mm^2 for wheel meshes)
  double voxel_size = 0.0;
  int samples_per_mesh = 0;
};

/// RMSE / AbsRel / delta<1.25 over pixels valid in both maps.
/// Throws DimensionMismatch, NoOverlap (no jointly valid pixel), and
/// NonPositiveGroundTruth (gt <= 0 on a counted pixel).
DepthErrorReport depth_errors(const depthsynth::DepthMap& pred,
                              const depthsynth::DepthMap& gt);

/// Volumetric intersection-over-union: both solids are voxelized by parity
/// ray casting on one shared lattice covering the union of their bounding
/// boxes. Exactly symmetric in its arguments. Throws NotWatertight and
/// EmptyVolume (neither solid occupies a cell).
double mesh_iou(const mesh::TriMesh& pred, const mesh::TriMesh& gt,
                double voxel_size);

/// Uniform area-weighted surface samples with a deterministic generator.
/// Pure in (mesh, n_points, seed): the same call always returns the same
/// points, regardless of which argument slot the mesh occupies upstream.
std::vector<Eigen::Vector3d> sample_surface(const mesh::TriMesh& m,
                                            int n_points, std::uint64_t seed);

/// Symmetric Chamfer distance between two point sets: mean squared
/// nearest-neighbor distance in both directions, summed. Exact neighbors
/// (k-d tree), deterministic accumulation in sample order.
double chamfer_points(const std::vector<Eigen::Vector3d>& p,
                      const std::vector<Eigen::Vector3d>& q);

/// Chamfer distance between surface samples of two meshes. Both meshes are
/// sampled with the same seed, so chamfer(a, b, n, s) == chamfer(b, a, n, s)
/// exactly and a mesh compared against itself gives exactly zero.
/// Requires n_points >= 100; throws EmptyMesh for empty or zero-area input.
double chamfer(const mesh::TriMesh& pred, const mesh::TriMesh& gt,
               int n_points, std::uint64_t seed);

}  // namespace wheelforge::metrics
