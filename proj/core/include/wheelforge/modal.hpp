#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <cstdint>
#include <vector>

#include "wheelforge/trimesh.hpp"

namespace wheelforge::modal {

/// Isotropic linear-elastic material. SI units throughout: kg/m³ and Pa.
struct Material {
  double density = 0.0;            // kg/m³
  double youngs_modulus = 0.0;     // Pa
  double poisson_ratio = 0.0;      // dimensionless, < 0.5
  double yield_strength = 0.0;     // Pa
  double ultimate_strength = 0.0;  // Pa

  void validate() const;  // throws ConfigInvalid

  /// Cast aluminum alloy used for the wheel batch runs.
  static Material cast_aluminum() {
    return Material{2680.0, 72e9, 0.33, 175e6, 250e6};
  }

  /// Structural steel, used by the slender-beam verification fixtures.
  static Material structural_steel() {
    return Material{7850.0, 210e9, 0.30, 250e6, 400e6};
  }
};

/// Uniform voxel hexahedral model. Geometry is kept in millimeters; the
/// assembly / mass routines convert to meters internally so frequencies come
/// out in Hz and masses in kg.
struct HexModel {
  double elem_size_mm = 0.0;
  /// Node positions in millimeters.
  std::vector<Eigen::Vector3d> nodes_mm;
  /// Eight node indices per element, corner order code dx + 2*dy + 4*dz.
  std::vector<std::array<int, 8>> elements;

  std::size_t node_count() const { return nodes_mm.size(); }
  std::size_t element_count() const { return elements.size(); }
  std::size_t dof_count() const { return 3 * nodes_mm.size(); }

  /// Total solid volume in cubic meters (element count x cell volume).
  double volume_m3() const {
    const double a = elem_size_mm * 1e-3;
    return double(elements.size()) * a * a * a;
  }
};

/// Free-free modal analysis output. Frequencies are sorted ascending and
/// include the rigid-body modes at (numerically) zero Hz.
struct ModalResult {
  double mass = 0.0;  // kg
  std::vector<double> frequencies;  // Hz, ascending
  int rigid_mode_count = 0;
  double mode7_hz = 0.0;   // 7th entry of the ascending list (1-based)
  double mode11_hz = 0.0;  // 11th entry of the ascending list (1-based)
  bool converged = false;
};

/// Batch-normalized design score; every term lies in [0, 1].
struct PerformanceScore {
  double norm_mode7 = 0.0;
  double norm_mode11 = 0.0;
  double norm_mass = 0.0;  // inverted: lighter designs score higher
  double overall = 0.0;    // mean of the three terms
};

/// Flags set when a metric is constant across the batch and its normalized
/// column was pinned at 0.5: [mode7, mode11, mass].
using DegenerateRangeFlags = std::array<bool, 3>;

/// Fill a watertight surface mesh with uniform 8-node hexahedra. A voxel is
/// solid when its center lies inside the mesh (parity ray casting along +z
/// with a deterministic tie-break). The voxel lattice is centered on the
/// mesh bounding box so symmetric inputs voxelize symmetrically.
/// Throws NotWatertight for open input, Disconnected when the solid voxel
/// set is empty or splits into multiple 6-connected components.
HexModel voxel_hex_mesh(const mesh::TriMesh& mesh, double elem_size_mm);

/// Assembled global stiffness (N/m) and consistent mass (kg) matrices,
/// 3 DOF per node, exactly symmetric by construction.
struct SystemMatrices {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::SparseMatrix<double> mass;
};
SystemMatrices assemble_system(const HexModel& model, const Material& mat);

/// Free-free normal modes: solves K phi = omega^2 M phi with a shift-invert
/// subspace iteration (full reorthogonalization, deterministic start block).
/// The shift sigma = (2*pi*shift_hz)^2 steps over the six-dimensional
/// rigid-body null space of K. n_modes must be at least 12 so the 7th and
/// 11th entries exist. Throws EigenNonConvergence when the iteration fails
/// to settle.
ModalResult modal_analysis(const HexModel& model, const Material& mat,
                           int n_modes, double shift_hz = 10.0);

/// Min-max normalization of (mode7, mode11, mass) across a batch; mass is
/// inverted so lighter is better; overall = mean of the three terms. A
/// metric that is constant across the batch yields 0.5 for every design and
/// sets the matching flag (pass `flags` to observe them).
std::vector<PerformanceScore> performance_score(
    const std::vector<ModalResult>& results,
    DegenerateRangeFlags* flags = nullptr);

}  // namespace wheelforge::modal
