#include "wheelforge/modal.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "wheelforge/errors.hpp"
#include "wheelforge/rng.hpp"
#include "wheelforge/voxelize.hpp"

namespace wheelforge::modal {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// 24x24 stiffness and consistent mass for a cube element of side a_m
/// (meters), 2x2x2 Gauss quadrature (exact for the trilinear basis on an
/// axis-aligned cube). Both outputs are bitwise symmetric.
void element_matrices(double a_m, const Material& mat,
                      Eigen::Matrix<double, 24, 24>& Ke,
                      Eigen::Matrix<double, 24, 24>& Me) {
  const double E = mat.youngs_modulus;
  const double nu = mat.poisson_ratio;
  const double lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double mu = E / (2.0 * (1.0 + nu));

  Eigen::Matrix<double, 6, 6> D = Eigen::Matrix<double, 6, 6>::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) D(i, j) = lam;
    D(i, i) = lam + 2.0 * mu;
    D(i + 3, i + 3) = mu;
  }

  const double g = 1.0 / std::sqrt(3.0);
  const double det_j = std::pow(a_m / 2.0, 3);
  const double dscale = 2.0 / a_m;  // d/dx = (2/a) d/dxi

  Ke.setZero();
  Me.setZero();
  for (int gp = 0; gp < 8; ++gp) {
    const double xi = (gp & 1) ? g : -g;
    const double eta = (gp & 2) ? g : -g;
    const double zeta = (gp & 4) ? g : -g;

    double N[8], dNdx[8], dNdy[8], dNdz[8];
    for (int c = 0; c < 8; ++c) {
      const double sx = (c & 1) ? 1.0 : -1.0;
      const double sy = (c & 2) ? 1.0 : -1.0;
      const double sz = (c & 4) ? 1.0 : -1.0;
      N[c] = (1.0 + xi * sx) * (1.0 + eta * sy) * (1.0 + zeta * sz) / 8.0;
      dNdx[c] = sx * (1.0 + eta * sy) * (1.0 + zeta * sz) / 8.0 * dscale;
      dNdy[c] = sy * (1.0 + xi * sx) * (1.0 + zeta * sz) / 8.0 * dscale;
      dNdz[c] = sz * (1.0 + xi * sx) * (1.0 + eta * sy) / 8.0 * dscale;
    }

    Eigen::Matrix<double, 6, 24> B = Eigen::Matrix<double, 6, 24>::Zero();
    for (int c = 0; c < 8; ++c) {
      B(0, 3 * c + 0) = dNdx[c];
      B(1, 3 * c + 1) = dNdy[c];
      B(2, 3 * c + 2) = dNdz[c];
      B(3, 3 * c + 0) = dNdy[c];
      B(3, 3 * c + 1) = dNdx[c];
      B(4, 3 * c + 1) = dNdz[c];
      B(4, 3 * c + 2) = dNdy[c];
      B(5, 3 * c + 0) = dNdz[c];
      B(5, 3 * c + 2) = dNdx[c];
    }
    Ke.noalias() += B.transpose() * D * B * det_j;

    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        const double m = mat.density * N[i] * N[j] * det_j;
        for (int d = 0; d < 3; ++d) Me(3 * i + d, 3 * j + d) += m;
      }
  }
  Ke = 0.5 * (Ke + Ke.transpose()).eval();
  Me = 0.5 * (Me + Me.transpose()).eval();
}

/// Assemble the lower triangle into a sparse matrix, then mirror it so the
/// result is exactly symmetric (each off-diagonal pair shares one stored
/// value).
Eigen::SparseMatrix<double> assemble_symmetric(
    const HexModel& model, const Eigen::Matrix<double, 24, 24>& elem,
    int n_dof) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(model.elements.size() * 300);
  for (const auto& e : model.elements) {
    int dof[24];
    for (int c = 0; c < 8; ++c)
      for (int d = 0; d < 3; ++d) dof[3 * c + d] = 3 * e[c] + d;
    for (int p = 0; p < 24; ++p)
      for (int r = 0; r < 24; ++r) {
        const int I = dof[p], J = dof[r];
        if (I >= J) trips.emplace_back(I, J, elem(p, r));
      }
  }
  Eigen::SparseMatrix<double> lower(n_dof, n_dof);
  lower.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseMatrix<double> upper =
      lower.triangularView<Eigen::StrictlyLower>().transpose();
  return lower + upper;
}

/// In-place modified Gram-Schmidt in the M-inner product, two passes per
/// column; numerically dead columns are redrawn deterministically.
void m_orthonormalize(Eigen::MatrixXd& X,
                      const Eigen::SparseMatrix<double>& M, Rng& rng) {
  const Eigen::Index q = X.cols();
  Eigen::MatrixXd MX(X.rows(), q);
  for (Eigen::Index j = 0; j < q; ++j) {
    for (int attempt = 0;; ++attempt) {
      Eigen::VectorXd v = X.col(j);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index i = 0; i < j; ++i)
          v.noalias() -= (MX.col(i).dot(v)) * X.col(i);
      const Eigen::VectorXd mv = M * v;
      const double nrm2 = v.dot(mv);
      if (nrm2 > 1e-300 && std::isfinite(nrm2)) {
        const double inv = 1.0 / std::sqrt(nrm2);
        X.col(j) = v * inv;
        MX.col(j) = mv * inv;
        break;
      }
      if (attempt > 8)
        throw EigenNonConvergence(
            "m_orthonormalize: could not build an independent subspace");
      for (Eigen::Index r = 0; r < X.rows(); ++r)
        X(r, j) = rng.next_double() - 0.5;
    }
  }
}

}  // namespace

void Material::validate() const {
  const double fields[5] = {density, youngs_modulus, poisson_ratio,
                            yield_strength, ultimate_strength};
  for (double f : fields)
    if (!(f > 0.0) || !std::isfinite(f))
      throw ConfigInvalid("Material: all properties must be positive finite");
  if (poisson_ratio >= 0.5)
    throw ConfigInvalid("Material: poisson_ratio must be < 0.5");
}

HexModel voxel_hex_mesh(const mesh::TriMesh& tri, double elem_size_mm) {
  if (!(elem_size_mm > 0.0) || !std::isfinite(elem_size_mm))
    throw ConfigInvalid("voxel_hex_mesh: element size must be positive");
  if (tri.empty()) throw EmptyMesh("voxel_hex_mesh: empty mesh");
  if (!mesh::is_watertight(tri))
    throw NotWatertight("voxel_hex_mesh: surface has boundary or non-manifold edges");

  Eigen::Vector3d lo, hi;
  mesh::bounding_box(tri, lo, hi);
  const Eigen::Vector3d center = 0.5 * (lo + hi);
  const double h = elem_size_mm;
  const int nx = voxelize::axis_cells(hi.x() - lo.x(), h);
  const int ny = voxelize::axis_cells(hi.y() - lo.y(), h);
  const int nz = voxelize::axis_cells(hi.z() - lo.z(), h);
  const Eigen::Vector3d origin =
      center - 0.5 * h * Eigen::Vector3d(nx, ny, nz);

  const std::vector<std::uint8_t> occ =
      voxelize::occupancy(tri, origin, h, nx, ny, nz);
  std::size_t n_solid = 0;
  for (std::uint8_t o : occ) n_solid += o;
  if (n_solid == 0)
    throw Disconnected("voxel_hex_mesh: no cell centers fall inside the mesh");

  // Flood fill over face-adjacent solid cells; more than one island means
  // the reconstruction left separated material.
  std::vector<std::int32_t> comp(occ.size(), -1);
  std::vector<std::size_t> stack;
  int n_comp = 0;
  for (std::size_t seed = 0; seed < occ.size(); ++seed) {
    if (!occ[seed] || comp[seed] >= 0) continue;
    if (n_comp == 1)
      throw Disconnected("voxel_hex_mesh: solid splits into multiple parts");
    stack.assign(1, seed);
    comp[seed] = n_comp;
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      const int ix = int(cur % nx);
      const int iy = int((cur / nx) % ny);
      const int iz = int(cur / (std::size_t(nx) * ny));
      const int d[6][3] = {{-1, 0, 0}, {1, 0, 0},  {0, -1, 0},
                           {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
      for (const auto& s : d) {
        const int jx = ix + s[0], jy = iy + s[1], jz = iz + s[2];
        if (jx < 0 || jy < 0 || jz < 0 || jx >= nx || jy >= ny || jz >= nz)
          continue;
        const std::size_t nb = (std::size_t(jz) * ny + jy) * nx + jx;
        if (!occ[nb] || comp[nb] >= 0) continue;
        comp[nb] = n_comp;
        stack.push_back(nb);
      }
    }
    ++n_comp;
  }

  // Node lattice: assign ids in x-fastest scan order over referenced nodes.
  HexModel model;
  model.elem_size_mm = h;
  const std::size_t lx = std::size_t(nx) + 1, ly = std::size_t(ny) + 1;
  std::vector<std::int32_t> node_id(lx * ly * (std::size_t(nz) + 1), -1);
  auto lattice = [&](int ix, int iy, int iz) {
    return (std::size_t(iz) * ly + iy) * lx + ix;
  };
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        if (!occ[(std::size_t(iz) * ny + iy) * nx + ix]) continue;
        for (int dz = 0; dz <= 1; ++dz)
          for (int dy = 0; dy <= 1; ++dy)
            for (int dx = 0; dx <= 1; ++dx)
              node_id[lattice(ix + dx, iy + dy, iz + dz)] = 0;
      }
  for (int iz = 0; iz <= nz; ++iz)
    for (int iy = 0; iy <= ny; ++iy)
      for (int ix = 0; ix <= nx; ++ix) {
        auto& id = node_id[lattice(ix, iy, iz)];
        if (id < 0) continue;
        id = std::int32_t(model.nodes_mm.size());
        model.nodes_mm.push_back(origin +
                                 h * Eigen::Vector3d(ix, iy, iz));
      }
  model.elements.reserve(n_solid);
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        if (!occ[(std::size_t(iz) * ny + iy) * nx + ix]) continue;
        std::array<int, 8> e{};
        for (int c = 0; c < 8; ++c)
          e[c] = node_id[lattice(ix + (c & 1), iy + ((c >> 1) & 1),
                                 iz + ((c >> 2) & 1))];
        model.elements.push_back(e);
      }
  return model;
}

SystemMatrices assemble_system(const HexModel& model, const Material& mat) {
  mat.validate();
  if (model.element_count() == 0)
    throw ConfigInvalid("assemble_system: model has no elements");
  if (!(model.elem_size_mm > 0.0))
    throw ConfigInvalid("assemble_system: nonpositive element size");

  Eigen::Matrix<double, 24, 24> Ke, Me;
  element_matrices(model.elem_size_mm * 1e-3, mat, Ke, Me);
  const int n_dof = int(model.dof_count());
  SystemMatrices sys;
  sys.stiffness = assemble_symmetric(model, Ke, n_dof);
  sys.mass = assemble_symmetric(model, Me, n_dof);
  return sys;
}

ModalResult modal_analysis(const HexModel& model, const Material& mat,
                           int n_modes, double shift_hz) {
  if (n_modes < 12)
    throw ConfigInvalid("modal_analysis: need at least 12 modes");
  if (!(shift_hz > 0.0) || !std::isfinite(shift_hz))
    throw ConfigInvalid("modal_analysis: shift must be positive");
  const SystemMatrices sys = assemble_system(model, mat);
  const int n_dof = int(model.dof_count());
  if (n_dof < n_modes)
    throw ConfigInvalid("modal_analysis: more modes requested than DOFs");

  const double sigma = std::pow(2.0 * kPi * shift_hz, 2);
  Eigen::SparseMatrix<double> shifted = sys.stiffness - sigma * sys.mass;

  // The shifted operator is symmetric indefinite (six pencil eigenvalues sit
  // below any positive shift). LDLT without pivoting almost always succeeds
  // for a shift inside the spectral gap and halves the solve cost; fall back
  // to pivoted LU when it does not.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool use_ldlt = true;
  ldlt.compute(shifted);
  if (ldlt.info() != Eigen::Success) {
    use_ldlt = false;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success)
      throw SingularSystem("modal_analysis: shifted factorization failed");
  }
  auto shifted_solve = [&](const Eigen::MatrixXd& rhs) -> Eigen::MatrixXd {
    Eigen::MatrixXd out = use_ldlt ? ldlt.solve(rhs).eval()
                                   : lu.solve(rhs).eval();
    if ((use_ldlt ? ldlt.info() : lu.info()) != Eigen::Success)
      throw SingularSystem("modal_analysis: shifted solve failed");
    if (!out.allFinite())
      throw SingularSystem("modal_analysis: shifted solve overflowed");
    return out;
  };

  const int q = std::min(std::min(2 * n_modes, n_modes + 8), n_dof);
  Rng rng(0x5eedb10cULL);
  Eigen::MatrixXd X(n_dof, q);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < n_dof; ++i) X(i, j) = rng.next_double() - 0.5;
  m_orthonormalize(X, sys.mass, rng);

  Eigen::VectorXd prev = Eigen::VectorXd::Constant(n_modes, -1.0);
  Eigen::VectorXd lam;
  int ok_streak = 0;
  for (int sweep = 0; sweep < 500; ++sweep) {
    Eigen::MatrixXd Y = shifted_solve(sys.mass * X);
    m_orthonormalize(Y, sys.mass, rng);
    Eigen::MatrixXd hk = Y.transpose() * (sys.stiffness * Y);
    Eigen::MatrixXd hm = Y.transpose() * (sys.mass * Y);
    hk = 0.5 * (hk + hk.transpose()).eval();
    hm = 0.5 * (hm + hm.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(hk, hm);
    if (ges.info() != Eigen::Success)
      throw EigenNonConvergence("modal_analysis: projected eigensolve failed");
    X = Y * ges.eigenvectors();
    lam = ges.eigenvalues().head(n_modes);
    // Rigid-body Ritz values sit at roundoff level of the spectrum scale,
    // so the absolute floor must track the largest wanted eigenvalue, not
    // the shift.
    const double lam_ref = std::max(std::abs(lam[n_modes - 1]), sigma);
    bool ok = sweep > 0;
    for (int i = 0; i < n_modes && ok; ++i)
      ok = std::abs(lam[i] - prev[i]) <=
           1e-10 * std::abs(lam[i]) + 1e-12 * lam_ref;
    prev = lam;
    ok_streak = ok ? ok_streak + 1 : 0;
    if (ok_streak >= 2) break;
  }
  if (ok_streak < 2)
    throw EigenNonConvergence("modal_analysis: subspace iteration stalled");

  ModalResult res;
  res.mass = mat.density * model.volume_m3();
  res.frequencies.resize(std::size_t(n_modes));
  for (int i = 0; i < n_modes; ++i)
    res.frequencies[std::size_t(i)] =
        std::sqrt(std::max(lam[i], 0.0)) / (2.0 * kPi);
  std::sort(res.frequencies.begin(), res.frequencies.end());
  const double rigid_cut = 1e-3 * res.frequencies[6];
  int rigid = 0;
  while (rigid < n_modes && res.frequencies[std::size_t(rigid)] <= rigid_cut)
    ++rigid;
  res.rigid_mode_count = rigid;
  res.mode7_hz = res.frequencies[6];
  res.mode11_hz = res.frequencies[10];
  res.converged = true;
  return res;
}

std::vector<PerformanceScore> performance_score(
    const std::vector<ModalResult>& results, DegenerateRangeFlags* flags) {
  if (results.size() < 2)
    throw InsufficientDesigns("performance_score: need at least two results");

  const std::size_t n = results.size();
  std::array<std::vector<double>, 3> cols;
  for (auto& c : cols) c.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cols[0][i] = results[i].mode7_hz;
    cols[1][i] = results[i].mode11_hz;
    cols[2][i] = results[i].mass;
  }

  DegenerateRangeFlags local{false, false, false};
  std::array<double, 3> lo{}, inv_range{};
  for (int m = 0; m < 3; ++m) {
    const auto [mn, mx] = std::minmax_element(cols[m].begin(), cols[m].end());
    lo[std::size_t(m)] = *mn;
    if (*mx == *mn) {
      local[std::size_t(m)] = true;
      inv_range[std::size_t(m)] = 0.0;
    } else {
      inv_range[std::size_t(m)] = 1.0 / (*mx - *mn);
    }
  }

  std::vector<PerformanceScore> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto norm = [&](int m) {
      if (local[std::size_t(m)]) return 0.5;
      return (cols[std::size_t(m)][i] - lo[std::size_t(m)]) *
             inv_range[std::size_t(m)];
    };
    out[i].norm_mode7 = norm(0);
    out[i].norm_mode11 = norm(1);
    out[i].norm_mass = local[2] ? 0.5 : 1.0 - norm(2);
    out[i].overall =
        (out[i].norm_mode7 + out[i].norm_mode11 + out[i].norm_mass) / 3.0;
  }
  if (flags) *flags = local;
  return out;
}

}  // namespace wheelforge::modal
