#include "wheelforge/topo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wheelforge/errors.hpp"
#include "wheelforge/raster_geom.hpp"

namespace wheelforge::topo {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

void TopoParams::validate() const {
  if (!(lambda_sim >= 0.0) || !std::isfinite(lambda_sim))
    throw ConfigInvalid("lambda_sim must be finite and nonnegative");
  if (!(volume_fraction > 0.0) || !(volume_fraction < 1.0))
    throw ConfigInvalid("volume_fraction must lie in (0, 1)");
  if (!(normal_shear_ratio >= 0.0) || !std::isfinite(normal_shear_ratio))
    throw ConfigInvalid("normal_shear_ratio must be finite and nonnegative");
  if (n_seg < 4 || n_seg > 6) throw ConfigInvalid("n_seg must be 4, 5 or 6");
  if (!(filter_radius >= 1.0)) throw ConfigInvalid("filter_radius must be at least 1");
  if (max_iters < 1) throw ConfigInvalid("max_iters must be at least 1");
  if (!(move_limit > 0.0) || !(move_limit <= 1.0))
    throw ConfigInvalid("move_limit must lie in (0, 1]");
  if (!(change_tol > 0.0)) throw ConfigInvalid("change_tol must be positive");
}

Eigen::VectorXd similarity_subgradient(const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& x_ref,
                                       double lambda) {
  if (x.size() != x_ref.size())
    throw DimensionMismatch("similarity_subgradient: size mismatch");
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = lambda * sgn(x[i] - x_ref[i]);
  return g;
}

Eigen::VectorXd cone_filter_sensitivities(int nx, int ny, double radius,
                                          const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& dc) {
  if (nx < 1 || ny < 1) throw EmptyGrid("cone_filter_sensitivities: empty grid");
  if (x.size() != nx * ny || dc.size() != x.size())
    throw DimensionMismatch("cone_filter_sensitivities: size mismatch");
  const int reach = static_cast<int>(std::ceil(radius)) - 1;
  // Offsets with positive cone weight, shared by every element.
  struct Tap {
    int di, dj;
    double w;
  };
  std::vector<Tap> taps;
  for (int dj = -reach; dj <= reach; ++dj)
    for (int di = -reach; di <= reach; ++di) {
      const double w = radius - std::sqrt(double(di * di + dj * dj));
      if (w > 0.0) taps.push_back({di, dj, w});
    }
  Eigen::VectorXd out(x.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double acc = 0.0, wsum = 0.0;
      for (const Tap& t : taps) {
        const int ii = i + t.di, jj = j + t.dj;
        if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) continue;
        const int e = ii + jj * nx;
        acc += t.w * x[e] * dc[e];
        wsum += t.w;
      }
      const int e = i + j * nx;
      out[e] = acc / (std::max(1e-3, x[e]) * wsum);
    }
  return out;
}

namespace {

/// Exact minimizer, over the move box, of the separable model
///   D(y) = dc (x/y)^2 + mu dv y + lam |y - xr|
/// where dc <= 0 is the filtered compliance sensitivity expressed through
/// the reciprocal approximation. With lam = 0 this reduces to the classic
/// fixed-point step x sqrt(-dc / (mu dv)).
double oc_element(double x, double s, double dv, double mu, double lo,
                  double hi, double lam, double xr) {
  double y;
  if (lam <= 0.0) {
    const double denom = mu * dv;
    if (denom <= 0.0) {
      y = hi;
    } else {
      const double b = -s / denom;
      y = (b > 0.0) ? x * std::sqrt(b) : 0.0;
    }
  } else {
    double dc = s - lam * sgn(x - xr);  // strip the subgradient back off
    if (dc > 0.0) dc = 0.0;
    const double a = -dc;
    const double dhi = mu * dv + lam;
    const double yhi = (dhi > 0.0) ? x * std::sqrt(a / dhi) : hi;
    if (yhi > xr) {
      y = yhi;
    } else {
      const double dlo = mu * dv - lam;
      if (dlo > 0.0) {
        const double ylo = x * std::sqrt(a / dlo);
        y = (ylo < xr) ? ylo : xr;
      } else {
        y = xr;  // slope is negative below the kink and positive above
      }
    }
  }
  return std::clamp(y, lo, hi);
}

}  // namespace

Eigen::VectorXd oc_update(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& sensitivities,
                          const Eigen::VectorXd& volume_sensitivities,
                          const TopoParams& params,
                          const SimilarityAnchor* anchor,
                          const std::vector<ElementRole>* roles) {
  params.validate();
  const Eigen::Index n = x.size();
  if (n == 0) throw EmptyGrid("oc_update: empty density vector");
  if (sensitivities.size() != n || volume_sensitivities.size() != n)
    throw DimensionMismatch("oc_update: sensitivity size mismatch");
  if (anchor && anchor->reference && anchor->reference->size() != n)
    throw DimensionMismatch("oc_update: reference size mismatch");
  if (roles && static_cast<Eigen::Index>(roles->size()) != n)
    throw DimensionMismatch("oc_update: roles size mismatch");

  const double lam = (anchor && anchor->reference) ? anchor->lambda : 0.0;
  const Eigen::VectorXd* xr = (anchor && anchor->reference) ? anchor->reference : nullptr;
  const double move = params.move_limit;
  const double target = params.volume_fraction;

  Eigen::VectorXd out(n);
  auto eval_mean = [&](double mu) {
    double sum = 0.0;
    for (Eigen::Index e = 0; e < n; ++e) {
      if (roles && (*roles)[e] != ElementRole::Free) {
        out[e] = ((*roles)[e] == ElementRole::FrozenSolid) ? 1.0 : 0.0;
      } else {
        const double lo = std::max(0.0, x[e] - move);
        const double hi = std::min(1.0, x[e] + move);
        out[e] = oc_element(x[e], sensitivities[e], volume_sensitivities[e], mu,
                            lo, hi, lam, xr ? (*xr)[e] : 0.0);
      }
      sum += out[e];
    }
    return sum / double(n);
  };

  for (Eigen::Index e = 0; e < n; ++e)
    if (!(volume_sensitivities[e] > 0.0))
      throw ConfigInvalid("oc_update: volume sensitivities must be positive");

  // The mean of the update is continuous and nonincreasing in the volume
  // multiplier. With a similarity term the multiplier may need to be
  // negative (raising the mean above the reference costs lam per unit),
  // bounded below by -lam / max(dv) where the model loses convexity.
  const double mu_floor =
      (lam > 0.0) ? -lam / volume_sensitivities.maxCoeff() : 0.0;
  constexpr double kMeanTol = 1e-4;
  if (eval_mean(mu_floor) < target - kMeanTol)
    throw BisectionFailure("oc_update: volume target unreachable from below");
  double hi_mu = 1.0;
  while (eval_mean(hi_mu) > target && hi_mu < 1e35) hi_mu *= 16.0;
  if (eval_mean(hi_mu) > target + kMeanTol)
    throw BisectionFailure("oc_update: volume target unreachable from above");

  double lo_mu = mu_floor;
  double mean = eval_mean(hi_mu);
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo_mu + hi_mu);
    mean = eval_mean(mid);
    if (std::abs(mean - target) <= 1e-6) return out;
    if (mean > target)
      lo_mu = mid;
    else
      hi_mu = mid;
  }
  mean = eval_mean(0.5 * (lo_mu + hi_mu));
  if (std::abs(mean - target) > kMeanTol)
    throw BisectionFailure("oc_update: bisection did not meet the volume target");
  return out;
}

fem2d::LoadCase2D segment_load_case(const fem2d::GridModel2D& model,
                                    double normal_shear_ratio) {
  if (!(normal_shear_ratio >= 0.0) || !std::isfinite(normal_shear_ratio))
    throw ConfigInvalid("normal_shear_ratio must be finite and nonnegative");
  fem2d::LoadCase2D lc;
  lc.normal_shear_ratio = normal_shear_ratio;
  // Clamp every node on the inner (hub-side) edge.
  for (int ix = 0; ix <= model.nx; ++ix) {
    const int nid = model.node_id(ix, 0);
    lc.fixed_dofs.push_back(2 * nid);
    lc.fixed_dofs.push_back(2 * nid + 1);
  }
  // Unit total load on the outer edge, split between the radial (+y) and
  // tangential (+x) directions by the requested ratio; trapezoidal node
  // weights so the resultant is exactly one.
  const double norm = std::sqrt(1.0 + normal_shear_ratio * normal_shear_ratio);
  const double fx = 1.0 / norm;
  const double fy = normal_shear_ratio / norm;
  for (int ix = 0; ix <= model.nx; ++ix) {
    const double w = (ix == 0 || ix == model.nx) ? 0.5 / model.nx : 1.0 / model.nx;
    const int nid = model.node_id(ix, model.ny);
    lc.nodal_forces[2 * nid] += w * fx;
    lc.nodal_forces[2 * nid + 1] += w * fy;
  }
  return lc;
}

std::vector<ElementRole> wheel_passive_rows(int n_theta, int n_radial,
                                            int inner_rows, int outer_rows) {
  if (n_theta < 1 || n_radial < 1) throw EmptyGrid("wheel_passive_rows: empty grid");
  if (inner_rows < 0 || outer_rows < 0 || inner_rows + outer_rows > n_radial)
    throw ConfigInvalid("wheel_passive_rows: frozen rows exceed the grid");
  std::vector<ElementRole> roles(std::size_t(n_theta) * n_radial, ElementRole::Free);
  for (int j = 0; j < n_radial; ++j) {
    if (j >= inner_rows && j < n_radial - outer_rows) continue;
    for (int i = 0; i < n_theta; ++i)
      roles[std::size_t(j) * n_theta + i] = ElementRole::FrozenSolid;
  }
  return roles;
}

OptimizeResult optimize_segment(const TopoParams& params,
                                const ReferenceDesign& reference,
                                const fem2d::GridModel2D& model,
                                const fem2d::LoadCase2D& loads,
                                const std::vector<ElementRole>* roles) {
  params.validate();
  model.validate();
  const int n = model.element_count();
  if (reference.densities.size() != n)
    throw DimensionMismatch("optimize_segment: reference does not match the grid");
  if (roles && static_cast<int>(roles->size()) != n)
    throw DimensionMismatch("optimize_segment: roles do not match the grid");

  const Eigen::VectorXd& xr = reference.densities;
  const double lam = params.lambda_sim;
  const double dE = model.youngs_modulus_solid - model.youngs_modulus_void;

  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, params.volume_fraction);
  if (roles)
    for (int e = 0; e < n; ++e) {
      if ((*roles)[e] == ElementRole::FrozenSolid) x[e] = 1.0;
      if ((*roles)[e] == ElementRole::FrozenVoid) x[e] = 0.0;
    }
  const Eigen::VectorXd dv = Eigen::VectorXd::Ones(n);

  OptimizeResult res;
  res.field.n_radial = model.ny;
  res.field.n_theta = model.nx;
  res.field.n_seg = params.n_seg;
  ConvergenceTrace& tr = res.trace;

  SimilarityAnchor anchor{&xr, lam};
  auto record = [&](const Eigen::VectorXd& dens, double compliance) {
    tr.compliance.push_back(compliance);
    tr.objective.push_back(compliance + lam * (dens - xr).lpNorm<1>());
  };

  for (int it = 0; it < params.max_iters; ++it) {
    const Eigen::VectorXd u = fem2d::assemble_and_solve(model, x, loads);
    const Eigen::VectorXd ce = fem2d::element_compliances(model, x, u);
    record(x, ce.sum());

    Eigen::VectorXd dc(n);
    for (int e = 0; e < n; ++e) {
      const double xp = std::pow(std::max(0.0, x[e]), model.penal - 1.0);
      dc[e] = -model.penal * xp * dE * ce[e] / model.modulus(x[e]);
    }
    dc = cone_filter_sensitivities(model.nx, model.ny, params.filter_radius, x, dc);
    const Eigen::VectorXd s = dc + similarity_subgradient(x, xr, lam);

    const Eigen::VectorXd xn =
        oc_update(x, s, dv, params, lam > 0.0 ? &anchor : nullptr, roles);
    const double change = (xn - x).cwiseAbs().maxCoeff();
    tr.change.push_back(change);
    x = xn;
    tr.iterations = it + 1;
    if (change < params.change_tol) {
      tr.converged = true;
      break;
    }
  }
  {
    const Eigen::VectorXd u = fem2d::assemble_and_solve(model, x, loads);
    record(x, fem2d::element_compliances(model, x, u).sum());
  }
  res.field.segment = std::move(x);
  return res;
}

Eigen::VectorXd replicate_polar(const Eigen::VectorXd& segment, int n_radial,
                                int n_theta, int n_seg) {
  if (n_seg < 1) throw ConfigInvalid("replicate_polar: n_seg must be at least 1");
  if (n_radial < 1 || n_theta < 1) throw EmptyGrid("replicate_polar: empty grid");
  if (segment.size() != Eigen::Index(n_radial) * n_theta)
    throw DimensionMismatch("replicate_polar: segment does not match the grid");
  const int w = n_seg * n_theta;
  Eigen::VectorXd full(Eigen::Index(n_radial) * w);
  for (int j = 0; j < n_radial; ++j)
    for (int s = 0; s < n_seg; ++s)
      for (int c = 0; c < n_theta; ++c)
        full[Eigen::Index(j) * w + s * n_theta + c] = segment[Eigen::Index(j) * n_theta + c];
  return full;
}

int angular_cell(long long u, long long v, int n_total) {
  if (n_total < 1) throw ConfigInvalid("angular_cell: n_total must be positive");
  if (u == 0 && v == 0) throw ConfigInvalid("angular_cell: undefined at the center");
  // Reduce to the first quadrant by exact quarter turns: (u, v) = q turns
  // applied to (a, b) with a > 0, b >= 0.
  int q;
  long long a, b;
  if (u > 0 && v >= 0) {
    q = 0, a = u, b = v;
  } else if (v > 0) {  // u <= 0
    q = 1, a = v, b = -u;
  } else if (u < 0) {  // v <= 0
    q = 2, a = -u, b = -v;
  } else {  // v < 0, u >= 0
    q = 3, a = -v, b = u;
  }
  const double frac = std::atan2(double(b), double(a)) / (kPi / 2.0);  // [0, 1)
  if (n_total % 4 == 0) {
    const int quarter = n_total / 4;
    int k = static_cast<int>(frac * quarter);
    k = std::clamp(k, 0, quarter - 1);
    return q * quarter + k;
  }
  int k = static_cast<int>((double(q) + frac) / 4.0 * n_total);
  return std::clamp(k, 0, n_total - 1);
}

void rasterize_wheel(DensityField& field, int raster_size, const RimTemplate& tpl) {
  tpl.validate();
  if (raster_size < 128) throw ConfigInvalid("rasterize_wheel: raster must be >= 128");
  if (field.n_seg < 4 || field.n_seg > 6)
    throw ConfigInvalid("rasterize_wheel: n_seg must be 4, 5 or 6");
  if (field.n_radial < 1 || field.n_theta < 1 ||
      field.segment.size() != Eigen::Index(field.n_radial) * field.n_theta)
    throw DimensionMismatch("rasterize_wheel: field grid is inconsistent");

  const Eigen::VectorXd polar =
      replicate_polar(field.segment, field.n_radial, field.n_theta, field.n_seg);
  const int n_total = field.n_seg * field.n_theta;

  const int N = raster_size;
  const double mm_per_px = raster::mm_per_pixel(tpl, N);
  // Radii in doubled-pixel units (pixel p maps to 2p - (N-1)).
  const double rim2 = 2.0 * tpl.rim_radius() / mm_per_px;
  const double douter2 = 2.0 * tpl.design_outer_radius() / mm_per_px;
  const double disc2 = 2.0 * tpl.disc_radius() / mm_per_px;
  const double bore2 = 2.0 * tpl.bore_radius() / mm_per_px;

  const double rim_sq = rim2 * rim2;
  const double douter_sq = douter2 * douter2;
  const double disc_sq = disc2 * disc2;
  const double bore_sq = bore2 * bore2;
  const double bolt_sq = raster::bolt_radius_sq_doubled(tpl, N);

  // Bolt holes: one per segment, centered mid-segment. The shared helper
  // keeps hole placement bit-identical with the depth synthesizer and makes
  // quarter-turn rotations exact when the count is a multiple of four.
  const std::vector<std::pair<double, double>> bolts =
      raster::bolt_centers_doubled(tpl, N, field.n_seg);

  field.raster_size = N;
  field.wheel_raster.assign(std::size_t(N) * N, 0.0f);
  const double ring_scale = double(field.n_radial) / (douter2 - disc2);
  for (int py = 0; py < N; ++py) {
    const long long v = 2LL * py - (N - 1);
    for (int px = 0; px < N; ++px) {
      const long long u = 2LL * px - (N - 1);
      const double r_sq = double(u * u + v * v);
      float val = 0.0f;
      if (r_sq >= rim_sq) {
        val = 0.0f;
      } else if (r_sq >= douter_sq) {
        val = 1.0f;
      } else if (r_sq < bore_sq) {
        val = 0.0f;
      } else {
        if (raster::in_bolt_hole(double(u), double(v), bolts, bolt_sq)) {
          val = 0.0f;
        } else if (r_sq < disc_sq) {
          val = 1.0f;
        } else {
          const double r = std::sqrt(r_sq);
          int ring = static_cast<int>((r - disc2) * ring_scale);
          ring = std::clamp(ring, 0, field.n_radial - 1);
          const int k = angular_cell(u, v, n_total);
          val = static_cast<float>(polar[Eigen::Index(ring) * n_total + k]);
        }
      }
      field.wheel_raster[std::size_t(py) * N + px] = val;
    }
  }
}

std::vector<SweepItem> sweep_designs(const SweepGrid& grid,
                                     const std::vector<ReferenceDesign>& references,
                                     const fem2d::GridModel2D& model,
                                     int raster_size, const RimTemplate& tpl,
                                     const std::vector<ElementRole>* roles) {
  if (references.empty()) throw EmptyList("sweep_designs: no references");
  if (grid.lambdas.empty() || grid.volume_fractions.empty() ||
      grid.normal_shear_ratios.empty() || grid.n_segs.empty())
    throw EmptyList("sweep_designs: empty parameter list");

  std::vector<SweepItem> items;
  std::size_t idx = 0;
  for (std::size_t ri = 0; ri < references.size(); ++ri)
    for (double lam : grid.lambdas)
      for (double vf : grid.volume_fractions)
        for (double ratio : grid.normal_shear_ratios)
          for (int ns : grid.n_segs) {
            SweepItem item;
            char buf[32];
            std::snprintf(buf, sizeof buf, "d%04zu", idx++);
            item.design_id = buf;
            item.params = grid.base;
            item.params.lambda_sim = lam;
            item.params.volume_fraction = vf;
            item.params.normal_shear_ratio = ratio;
            item.params.n_seg = ns;
            item.reference_index = ri;
            try {
              const fem2d::LoadCase2D lc = segment_load_case(model, ratio);
              OptimizeResult r =
                  optimize_segment(item.params, references[ri], model, lc, roles);
              rasterize_wheel(r.field, raster_size, tpl);
              item.field = std::move(r.field);
              item.trace = std::move(r.trace);
              item.ok = true;
            } catch (const std::exception& e) {
              item.ok = false;
              item.error = e.what();
            }
            items.push_back(std::move(item));
          }
  return items;
}

}  // namespace wheelforge::topo
