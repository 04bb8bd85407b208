#include "wheelforge/metrics3d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wheelforge/errors.hpp"
#include "wheelforge/rng.hpp"
#include "wheelforge/voxelize.hpp"

namespace wheelforge::metrics {

namespace {

/// Exact nearest-neighbor structure: balanced k-d tree over a point set,
/// built deterministically (ties in the median split broken by index).
class KdTree {
public:
  explicit KdTree(const std::vector<Eigen::Vector3d>& pts) : pts_(pts) {
    order_.resize(pts.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(pts.size());
    root_ = build(0, pts.size());
  }

  /// Squared distance to the nearest stored point.
  double nearest_sq(const Eigen::Vector3d& query) const {
    double best = std::numeric_limits<double>::infinity();
    descend(root_, query, best);
    return best;
  }

private:
  struct Node {
    std::size_t point;
    int axis;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build(std::size_t lo, std::size_t hi) {
    if (lo >= hi) return -1;
    // split along the widest axis of this subset
    Eigen::Vector3d mn = pts_[order_[lo]], mx = mn;
    for (std::size_t i = lo; i < hi; ++i) {
      mn = mn.cwiseMin(pts_[order_[i]]);
      mx = mx.cwiseMax(pts_[order_[i]]);
    }
    int axis = 0;
    (mx - mn).maxCoeff(&axis);
    const std::size_t mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + long(lo), order_.begin() + long(mid),
                     order_.begin() + long(hi),
                     [&](std::size_t a, std::size_t b) {
                       const double ca = pts_[a][axis], cb = pts_[b][axis];
                       return ca < cb || (ca == cb && a < b);
                     });
    const std::int32_t id = std::int32_t(nodes_.size());
    nodes_.push_back({order_[mid], axis, -1, -1});
    const std::int32_t l = build(lo, mid);
    const std::int32_t r = build(mid + 1, hi);
    nodes_[std::size_t(id)].left = l;
    nodes_[std::size_t(id)].right = r;
    return id;
  }

  void descend(std::int32_t id, const Eigen::Vector3d& q, double& best) const {
    if (id < 0) return;
    const Node& n = nodes_[std::size_t(id)];
    const Eigen::Vector3d& p = pts_[n.point];
    best = std::min(best, (q - p).squaredNorm());
    const double diff = q[n.axis] - p[n.axis];
    const std::int32_t near = diff < 0.0 ? n.left : n.right;
    const std::int32_t far = diff < 0.0 ? n.right : n.left;
    descend(near, q, best);
    if (diff * diff < best) descend(far, q, best);
  }

  const std::vector<Eigen::Vector3d>& pts_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

double directed_mean_sq(const std::vector<Eigen::Vector3d>& from,
                        const KdTree& to) {
  double sum = 0.0;
  for (const auto& p : from) sum += to.nearest_sq(p);
  return sum / double(from.size());
}

}  // namespace

DepthErrorReport depth_errors(const depthsynth::DepthMap& pred,
                              const depthsynth::DepthMap& gt) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw DimensionMismatch("depth_errors: map sizes differ");
  if (pred.values.size() != pred.pixel_count() ||
      pred.valid.size() != pred.pixel_count() ||
      gt.values.size() != gt.pixel_count() ||
      gt.valid.size() != gt.pixel_count())
    throw DimensionMismatch("depth_errors: malformed map buffers");

  double sum_sq = 0.0, sum_rel = 0.0;
  std::size_t m = 0, hits = 0;
  for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
    if (!pred.valid[i] || !gt.valid[i]) continue;
    const double d_hat = pred.values[i];
    const double d = gt.values[i];
    if (!(d > 0.0))
      throw NonPositiveGroundTruth(
          "depth_errors: ground truth must be positive on counted pixels");
    const double e = d_hat - d;
    sum_sq += e * e;
    sum_rel += std::abs(e) / d;
    const double ratio = d_hat > 0.0 ? std::max(d_hat / d, d / d_hat)
                                     : std::numeric_limits<double>::infinity();
    if (ratio < 1.25) ++hits;
    ++m;
  }
  if (m == 0) throw NoOverlap("depth_errors: no jointly valid pixels");

  DepthErrorReport rep;
  rep.valid_pixels = m;
  rep.rmse = std::sqrt(sum_sq / double(m));
  rep.absrel = sum_rel / double(m);
  rep.delta_125 = double(hits) / double(m);
  return rep;
}

double mesh_iou(const mesh::TriMesh& pred, const mesh::TriMesh& gt,
                double voxel_size) {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size))
    throw ConfigInvalid("mesh_iou: voxel size must be positive");
  if (pred.empty() || gt.empty())
    throw EmptyMesh("mesh_iou: empty mesh");
  if (!mesh::is_watertight(pred) || !mesh::is_watertight(gt))
    throw NotWatertight("mesh_iou: both meshes must be closed");

  Eigen::Vector3d lo_a, hi_a, lo_b, hi_b;
  mesh::bounding_box(pred, lo_a, hi_a);
  mesh::bounding_box(gt, lo_b, hi_b);
  const Eigen::Vector3d lo = lo_a.cwiseMin(lo_b);
  const Eigen::Vector3d hi = hi_a.cwiseMax(hi_b);
  const Eigen::Vector3d center = 0.5 * (lo + hi);
  const double h = voxel_size;
  const int nx = voxelize::axis_cells(hi.x() - lo.x(), h);
  const int ny = voxelize::axis_cells(hi.y() - lo.y(), h);
  const int nz = voxelize::axis_cells(hi.z() - lo.z(), h);
  if (double(nx) * ny * nz > 5.4e8)
    throw ConfigInvalid("mesh_iou: voxel grid too large for this pair");
  const Eigen::Vector3d origin =
      center - 0.5 * h * Eigen::Vector3d(nx, ny, nz);

  const auto occ_a = voxelize::occupancy(pred, origin, h, nx, ny, nz);
  const auto occ_b = voxelize::occupancy(gt, origin, h, nx, ny, nz);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < occ_a.size(); ++i) {
    inter += occ_a[i] & occ_b[i];
    uni += occ_a[i] | occ_b[i];
  }
  if (uni == 0)
    throw EmptyVolume("mesh_iou: neither solid occupies a voxel");
  return double(inter) / double(uni);
}

std::vector<Eigen::Vector3d> sample_surface(const mesh::TriMesh& m,
                                            int n_points,
                                            std::uint64_t seed) {
  if (m.empty()) throw EmptyMesh("sample_surface: empty mesh");
  if (n_points < 1)
    throw ConfigInvalid("sample_surface: need at least one point");

  std::vector<double> cum(m.triangles.size());
  double total = 0.0;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& f = m.triangles[t];
    const Eigen::Vector3d e1 = m.vertices[f[1]] - m.vertices[f[0]];
    const Eigen::Vector3d e2 = m.vertices[f[2]] - m.vertices[f[0]];
    total += 0.5 * e1.cross(e2).norm();
    cum[t] = total;
  }
  if (!(total > 0.0))
    throw EmptyMesh("sample_surface: surface has zero area");

  Rng rng(seed);
  std::vector<Eigen::Vector3d> out;
  out.reserve(std::size_t(n_points));
  for (int i = 0; i < n_points; ++i) {
    const double u = rng.next_double() * total;
    const std::size_t t = std::size_t(
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    const auto& f = m.triangles[std::min(t, m.triangles.size() - 1)];
    const double r1 = std::sqrt(rng.next_double());
    const double r2 = rng.next_double();
    const double w0 = 1.0 - r1;
    const double w1 = r1 * (1.0 - r2);
    const double w2 = r1 * r2;
    out.push_back(w0 * m.vertices[f[0]] + w1 * m.vertices[f[1]] +
                  w2 * m.vertices[f[2]]);
  }
  return out;
}

double chamfer_points(const std::vector<Eigen::Vector3d>& p,
                      const std::vector<Eigen::Vector3d>& q) {
  if (p.empty() || q.empty())
    throw EmptyList("chamfer_points: empty point set");
  const KdTree tree_q(q);
  const KdTree tree_p(p);
  return directed_mean_sq(p, tree_q) + directed_mean_sq(q, tree_p);
}

double chamfer(const mesh::TriMesh& pred, const mesh::TriMesh& gt,
               int n_points, std::uint64_t seed) {
  if (n_points < 100)
    throw ConfigInvalid("chamfer: need at least 100 sample points");
  const auto p = sample_surface(pred, n_points, seed);
  const auto q = sample_surface(gt, n_points, seed);
  return chamfer_points(p, q);
}

}  // namespace wheelforge::metrics
