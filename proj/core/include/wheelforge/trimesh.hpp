#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace wheelforge::mesh {

/// Indexed triangle mesh in millimeters.
struct TriMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }
  bool empty() const { return triangles.empty(); }
};

/// Number of undirected edges (each counted once).
std::size_t edge_count(const TriMesh& mesh);

/// True when every undirected edge borders exactly two triangles.
bool is_watertight(const TriMesh& mesh);

/// V - E + F (2 for a topological sphere).
long long euler_characteristic(const TriMesh& mesh);

/// Signed enclosed volume via the divergence theorem; positive for
/// outward-oriented closed surfaces. Units follow the vertices (mm^3).
double signed_volume(const TriMesh& mesh);

/// Total surface area.
double surface_area(const TriMesh& mesh);

/// Axis-aligned bounds. Throws EmptyMesh on a mesh without vertices.
void bounding_box(const TriMesh& mesh, Eigen::Vector3d& lo, Eigen::Vector3d& hi);

/// Number of edge-connected triangle components.
int component_count(const TriMesh& mesh);

/// Keep only the component with the largest triangle count (ties: the one
/// containing the lowest triangle index); drops unreferenced vertices.
TriMesh largest_component(const TriMesh& mesh);

/// Drop triangles whose area falls below min_area and remove the vertices
/// nothing references any more.
TriMesh drop_degenerate_triangles(const TriMesh& mesh, double min_area);

/// Remove unreferenced vertices, remapping triangle indices.
TriMesh compact(const TriMesh& mesh);

}  // namespace wheelforge::mesh
