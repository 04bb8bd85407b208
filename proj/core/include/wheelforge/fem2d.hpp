#pragma once

#include <Eigen/Core>
#include <map>
#include <vector>

namespace wheelforge::fem2d {

/// Regular grid of bilinear 4-node plane-stress quads. nx columns, ny rows of
/// elements; nodes are (nx+1) x (ny+1). Element e = ex + ey*nx, node
/// n = ix + iy*(nx+1), dofs (2n, 2n+1) for (ux, uy).
struct GridModel2D {
  int nx = 0;
  int ny = 0;
  double elem_size = 1.0;
  double youngs_modulus_solid = 1.0;
  double youngs_modulus_void = 1e-9;  // ersatz stiffness floor
  double poisson_ratio = 0.3;
  double penal = 3.0;  // SIMP exponent

  int element_count() const { return nx * ny; }
  int node_count() const { return (nx + 1) * (ny + 1); }
  int dof_count() const { return 2 * node_count(); }
  int node_id(int ix, int iy) const { return ix + iy * (nx + 1); }

  /// SIMP-interpolated Young's modulus for element density x in [0,1].
  double modulus(double x) const;

  void validate() const;  // throws ConfigInvalid on bad fields
};

struct LoadCase2D {
  std::vector<int> fixed_dofs;           // sorted, unique
  std::map<int, double> nodal_forces;    // dof -> force
  double normal_shear_ratio = 1.0;

  void validate(const GridModel2D& model) const;
};

using DisplacementVector = Eigen::VectorXd;

/// 8x8 stiffness matrix of a unit-modulus square plane-stress quad,
/// thickness 1, integrated with 2x2 Gauss quadrature. Node order
/// (0,0),(1,0),(1,1),(0,1); dof order [u0 v0 u1 v1 u2 v2 u3 v3].
Eigen::Matrix<double, 8, 8> unit_element_stiffness(double poisson_ratio);

/// Gathers the 8 element dofs of element (ex, ey) into `dofs`.
void element_dofs(const GridModel2D& model, int ex, int ey, int dofs[8]);

/// Assembles K(x) with fixed dofs removed and solves K U = F.
/// Returns the full-length displacement vector (fixed dofs zero).
/// Throws SingularSystem if the constrained matrix is not positive definite
/// or the relative residual exceeds 1e-8.
DisplacementVector assemble_and_solve(const GridModel2D& model,
                                      const Eigen::VectorXd& densities,
                                      const LoadCase2D& loads);

/// Per-element strain energy u_e^T k_e(x_e) u_e with the SIMP modulus
/// applied; the sum over elements equals the total compliance U^T K U.
Eigen::VectorXd element_compliances(const GridModel2D& model,
                                    const Eigen::VectorXd& densities,
                                    const DisplacementVector& u);

/// Total compliance U^T K(x) U.
double total_compliance(const GridModel2D& model,
                        const Eigen::VectorXd& densities,
                        const DisplacementVector& u);

}  // namespace wheelforge::fem2d
