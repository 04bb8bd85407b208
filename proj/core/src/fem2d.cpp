#include "wheelforge/fem2d.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <cmath>

#include "wheelforge/errors.hpp"

namespace wheelforge::fem2d {

double GridModel2D::modulus(double x) const {
  return youngs_modulus_void +
         std::pow(x, penal) * (youngs_modulus_solid - youngs_modulus_void);
}

void GridModel2D::validate() const {
  if (nx < 1 || ny < 1) throw ConfigInvalid("grid must have nx,ny >= 1");
  if (!(youngs_modulus_void > 0.0) ||
      !(youngs_modulus_void < youngs_modulus_solid))
    throw ConfigInvalid("need 0 < E_void < E_solid");
  if (!(poisson_ratio > 0.0 && poisson_ratio < 0.5))
    throw ConfigInvalid("poisson_ratio must lie in (0, 0.5)");
  if (penal < 1.0) throw ConfigInvalid("penal must be >= 1");
  if (!(elem_size > 0.0)) throw ConfigInvalid("elem_size must be > 0");
}

void LoadCase2D::validate(const GridModel2D& model) const {
  if (fixed_dofs.empty()) throw ConfigInvalid("load case has no fixed dofs");
  bool any_force = false;
  for (const auto& [dof, f] : nodal_forces) {
    if (dof < 0 || dof >= model.dof_count())
      throw ConfigInvalid("force dof out of range");
    if (f != 0.0) any_force = true;
  }
  if (!any_force) throw ConfigInvalid("load case has no nonzero force");
  for (int d : fixed_dofs)
    if (d < 0 || d >= model.dof_count())
      throw ConfigInvalid("fixed dof out of range");
}

Eigen::Matrix<double, 8, 8> unit_element_stiffness(double nu) {
  // Plane stress D for E = 1, unit square, 2x2 Gauss.
  Eigen::Matrix3d D;
  const double c = 1.0 / (1.0 - nu * nu);
  D << c, c * nu, 0.0,
       c * nu, c, 0.0,
       0.0, 0.0, c * (1.0 - nu) / 2.0;

  Eigen::Matrix<double, 8, 8> ke = Eigen::Matrix<double, 8, 8>::Zero();
  const double g = 1.0 / std::sqrt(3.0);
  const double pts[2] = {-g, g};
  // Natural coords (xi, eta) in [-1,1]^2; node order (0,0),(1,0),(1,1),(0,1)
  // maps to corners (-1,-1),(1,-1),(1,1),(-1,1). Jacobian is diag(1/2,1/2)
  // for the unit square, det J = 1/4.
  for (double xi : pts) {
    for (double eta : pts) {
      const double dn_dxi[4] = {-(1 - eta) / 4, (1 - eta) / 4, (1 + eta) / 4,
                                -(1 + eta) / 4};
      const double dn_deta[4] = {-(1 - xi) / 4, -(1 + xi) / 4, (1 + xi) / 4,
                                 (1 - xi) / 4};
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        const double dx = 2.0 * dn_dxi[a];   // chain rule, J^-1 = diag(2,2)
        const double dy = 2.0 * dn_deta[a];
        B(0, 2 * a) = dx;
        B(1, 2 * a + 1) = dy;
        B(2, 2 * a) = dy;
        B(2, 2 * a + 1) = dx;
      }
      ke += 0.25 * B.transpose() * D * B;  // weight 1*1, det J = 1/4
    }
  }
  // Exact symmetrization: quadrature already symmetric up to rounding.
  ke = ((ke + ke.transpose()) * 0.5).eval();
  return ke;
}

void element_dofs(const GridModel2D& model, int ex, int ey, int dofs[8]) {
  const int n0 = model.node_id(ex, ey);
  const int n1 = model.node_id(ex + 1, ey);
  const int n2 = model.node_id(ex + 1, ey + 1);
  const int n3 = model.node_id(ex, ey + 1);
  const int nodes[4] = {n0, n1, n2, n3};
  for (int a = 0; a < 4; ++a) {
    dofs[2 * a] = 2 * nodes[a];
    dofs[2 * a + 1] = 2 * nodes[a] + 1;
  }
}

DisplacementVector assemble_and_solve(const GridModel2D& model,
                                      const Eigen::VectorXd& densities,
                                      const LoadCase2D& loads) {
  model.validate();
  loads.validate(model);
  if (densities.size() != model.element_count())
    throw DimensionMismatch("densities length != nx*ny");
  for (int e = 0; e < densities.size(); ++e)
    if (!(densities[e] >= 0.0 && densities[e] <= 1.0))
      throw ConfigInvalid("density outside [0,1]");

  const int ndof = model.dof_count();
  std::vector<char> fixed(ndof, 0);
  for (int d : loads.fixed_dofs) fixed[d] = 1;
  std::vector<int> full_to_red(ndof, -1);
  int nred = 0;
  for (int d = 0; d < ndof; ++d)
    if (!fixed[d]) full_to_red[d] = nred++;

  const Eigen::Matrix<double, 8, 8> ke = unit_element_stiffness(model.poisson_ratio);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(model.element_count()) * 64);
  int dofs[8];
  for (int ey = 0; ey < model.ny; ++ey) {
    for (int ex = 0; ex < model.nx; ++ex) {
      const int e = ex + ey * model.nx;
      const double Ee = model.modulus(densities[e]);
      element_dofs(model, ex, ey, dofs);
      for (int a = 0; a < 8; ++a) {
        const int ra = full_to_red[dofs[a]];
        if (ra < 0) continue;
        for (int b = 0; b < 8; ++b) {
          const int rb = full_to_red[dofs[b]];
          if (rb < 0) continue;
          trips.emplace_back(ra, rb, Ee * ke(a, b));
        }
      }
    }
  }

  Eigen::SparseMatrix<double> K(nred, nred);
  K.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd f = Eigen::VectorXd::Zero(nred);
  for (const auto& [dof, val] : loads.nodal_forces) {
    const int r = full_to_red[dof];
    if (r >= 0) f[r] += val;
  }

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(K);
  if (llt.info() != Eigen::Success)
    throw SingularSystem("constrained stiffness matrix is not positive definite");
  Eigen::VectorXd u_red = llt.solve(f);

  const double fn = f.norm();
  if (fn > 0.0) {
    const double rel = (K * u_red - f).norm() / fn;
    if (!(rel <= 1e-8))
      throw SingularSystem("linear solve residual too large (ill-conditioned system)");
  }

  DisplacementVector u = DisplacementVector::Zero(ndof);
  for (int d = 0; d < ndof; ++d)
    if (full_to_red[d] >= 0) u[d] = u_red[full_to_red[d]];
  return u;
}

Eigen::VectorXd element_compliances(const GridModel2D& model,
                                    const Eigen::VectorXd& densities,
                                    const DisplacementVector& u) {
  if (densities.size() != model.element_count())
    throw DimensionMismatch("densities length != nx*ny");
  if (u.size() != model.dof_count())
    throw DimensionMismatch("displacement length != dof count");

  const Eigen::Matrix<double, 8, 8> ke = unit_element_stiffness(model.poisson_ratio);
  Eigen::VectorXd out(model.element_count());
  int dofs[8];
  Eigen::Matrix<double, 8, 1> ue;
  for (int ey = 0; ey < model.ny; ++ey) {
    for (int ex = 0; ex < model.nx; ++ex) {
      const int e = ex + ey * model.nx;
      element_dofs(model, ex, ey, dofs);
      for (int a = 0; a < 8; ++a) ue[a] = u[dofs[a]];
      out[e] = model.modulus(densities[e]) * ue.dot(ke * ue);
    }
  }
  return out;
}

double total_compliance(const GridModel2D& model,
                        const Eigen::VectorXd& densities,
                        const DisplacementVector& u) {
  return element_compliances(model, densities, u).sum();
}

}  // namespace wheelforge::fem2d
