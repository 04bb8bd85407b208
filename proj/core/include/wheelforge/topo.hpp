#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "wheelforge/fem2d.hpp"
#include "wheelforge/rim_template.hpp"

namespace wheelforge::topo {

/// Parameters of one similarity-regularized compliance minimization.
struct TopoParams {
  double lambda_sim = 0.0;      ///< weight of the L1 pull toward the reference
  double volume_fraction = 0.5; ///< target mean density
  double normal_shear_ratio = 1.0;
  int n_seg = 5;                ///< rotational copies of the segment
  double filter_radius = 1.5;   ///< cone sensitivity filter radius (elements)
  int max_iters = 200;
  double move_limit = 0.2;
  double change_tol = 0.01;

  void validate() const;  // throws ConfigInvalid
};

/// A reference layout the optimizer is pulled toward, as per-element
/// densities on the same segment grid the optimizer runs on.
struct ReferenceDesign {
  Eigen::VectorXd densities;
  std::string source_id;
};

/// Optimized segment densities plus, once replicated, the full-wheel raster.
struct DensityField {
  Eigen::VectorXd segment;  ///< n_radial*n_theta densities, ring-major
  int n_radial = 0;
  int n_theta = 0;  ///< angular cells per segment
  int n_seg = 5;
  std::vector<float> wheel_raster;  ///< raster_size^2 gray densities in [0,1]
  int raster_size = 0;

  double segment_at(int ring, int col) const {
    return segment[ring * n_theta + col];
  }
};

struct ConvergenceTrace {
  std::vector<double> objective;   ///< compliance + lambda * L1 distance
  std::vector<double> compliance;
  std::vector<double> change;      ///< max absolute density step
  int iterations = 0;
  bool converged = false;          ///< change dropped below tolerance
};

struct OptimizeResult {
  DensityField field;
  ConvergenceTrace trace;
};

/// Per-element role in the design domain.
enum class ElementRole : std::uint8_t { Free = 0, FrozenSolid = 1, FrozenVoid = 2 };

/// L1 similarity subgradient: lambda * sign(x - x_ref), componentwise,
/// with sign(0) = 0. Added to the compliance sensitivities before the
/// density update.
Eigen::VectorXd similarity_subgradient(const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& x_ref,
                                       double lambda);

/// Cone-weighted sensitivity filter on the regular element grid
/// (weights max(0, radius - center distance), density-scaled).
Eigen::VectorXd cone_filter_sensitivities(int nx, int ny, double radius,
                                          const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& dc);

/// Similarity anchor handed to oc_update so the update can resolve the
/// kink the L1 term puts at the reference density.
struct SimilarityAnchor {
  const Eigen::VectorXd* reference = nullptr;
  double lambda = 0.0;
};

/// One density update step. `sensitivities` are the filtered compliance
/// sensitivities with the similarity subgradient already added;
/// `volume_sensitivities` is typically all ones. The volume multiplier is
/// found by bisection so the mean of the result matches
/// params.volume_fraction within 1e-4 (throws BisectionFailure otherwise).
/// Each element moves at most params.move_limit and stays in [0, 1].
/// With a nonzero anchor the per-element step minimizes the separable
/// reciprocal-compliance model including the L1 kink, so a dominant
/// lambda lands exactly on the reference density.
Eigen::VectorXd oc_update(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& sensitivities,
                          const Eigen::VectorXd& volume_sensitivities,
                          const TopoParams& params,
                          const SimilarityAnchor* anchor = nullptr,
                          const std::vector<ElementRole>* roles = nullptr);

/// Spoke-segment load case: inner radial edge clamped, outer radial edge
/// carries a distributed load mixing radial (normal) and tangential
/// (shear) components per normal_shear_ratio; angular edges free.
fem2d::LoadCase2D segment_load_case(const fem2d::GridModel2D& model,
                                    double normal_shear_ratio);

/// Frozen rows at both radial extremes of the segment grid so hub and rim
/// attachments stay solid. Returns one role per element.
std::vector<ElementRole> wheel_passive_rows(int n_theta, int n_radial,
                                            int inner_rows, int outer_rows);

/// Similarity-regularized SIMP compliance minimization on the segment
/// grid (model.nx angular cells, model.ny radial rings). Runs optimality
/// criteria updates until the density change drops below change_tol or
/// max_iters is hit; the trace reports which.
OptimizeResult optimize_segment(const TopoParams& params,
                                const ReferenceDesign& reference,
                                const fem2d::GridModel2D& model,
                                const fem2d::LoadCase2D& loads,
                                const std::vector<ElementRole>* roles = nullptr);

/// Tile the segment n_seg times in the angular direction: full polar
/// density array with n_seg * n_theta columns, ring-major like segment.
Eigen::VectorXd replicate_polar(const Eigen::VectorXd& segment, int n_radial,
                                int n_theta, int n_seg);

/// Angular cell index of raster pixel offset (u, v) = doubled integer
/// coordinates relative to the image center, for a wheel with n_total
/// angular cells. Exactly 90-degree-rotation covariant when n_total is a
/// multiple of 4. (u, v) must not be (0, 0).
int angular_cell(long long u, long long v, int n_total);

/// Rasterize the replicated field onto a raster_size^2 frontal-view gray
/// image: bore and bolt holes void, center disc and rim ring solid, spoke
/// annulus sampled from the polar density array. Pixel membership tests
/// use exact integer arithmetic so the raster of a 4-segment wheel is
/// exactly invariant under 90-degree image rotation. Bolt holes follow
/// n_seg (one per segment) so replication symmetry survives.
void rasterize_wheel(DensityField& field, int raster_size,
                     const RimTemplate& tpl);

/// Grid of sweep parameters; the cartesian product over all four lists
/// (reference-major, then lambda, volume fraction, ratio, n_seg) defines
/// the design set.
struct SweepGrid {
  std::vector<double> lambdas;
  std::vector<double> volume_fractions;
  std::vector<double> normal_shear_ratios;
  std::vector<int> n_segs;
  TopoParams base;  ///< filter/move/iteration settings shared by all runs
};

struct SweepItem {
  std::string design_id;
  TopoParams params;
  std::size_t reference_index = 0;
  bool ok = false;
  std::string error;
  DensityField field;
  ConvergenceTrace trace;
};

/// Run the full sweep. Throws EmptyList if any parameter list or the
/// reference list is empty. Individual run failures are recorded on the
/// item, not thrown.
std::vector<SweepItem> sweep_designs(const SweepGrid& grid,
                                     const std::vector<ReferenceDesign>& references,
                                     const fem2d::GridModel2D& model,
                                     int raster_size, const RimTemplate& tpl,
                                     const std::vector<ElementRole>* roles = nullptr);

}  // namespace wheelforge::topo
