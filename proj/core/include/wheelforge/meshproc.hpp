#pragma once

#include "wheelforge/trimesh.hpp"

namespace wheelforge::mesh {

/// Uniform Laplacian smoothing: each iteration moves every vertex by
/// step * (average of its edge neighbors - itself). Isolated vertices stay
/// put. Returns the smoothed copy.
TriMesh laplacian_smooth(const TriMesh& mesh, int iterations, double step);

/// Quadric-error edge-collapse decimation down to at most target_triangles.
/// Collapses preserve manifoldness (link condition) and reject normal
/// flips; ties in cost break deterministically by vertex indices. May stop
/// early above the target when no legal collapse remains.
TriMesh decimate_quadric(const TriMesh& mesh, int target_triangles);

/// Triangulate boundary loops of at most max_loop_edges edges with a fan
/// (orientation mates the surrounding triangles). Longer loops are left
/// open. Returns the number of loops filled.
int fill_small_holes(TriMesh& mesh, int max_loop_edges);

/// Flip every triangle when the signed volume is negative so closed
/// surfaces end up outward-oriented.
void orient_outward(TriMesh& mesh);

}  // namespace wheelforge::mesh
