#include "wheelforge/designspace.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "wheelforge/errors.hpp"
#include "wheelforge/rng.hpp"

namespace wheelforge::designspace {

namespace {

Eigen::Vector2d as_vec(const Embedding2D& e) { return {e.x, e.y}; }

}  // namespace

FeatureVector depth_features(const depthsynth::DepthMap& d,
                             const std::string& design_id, int grid) {
  if (grid < 1) throw ConfigInvalid("feature grid must be at least 1");
  if (d.width < 1 || d.height < 1 ||
      d.values.size() != d.pixel_count() || d.valid.size() != d.pixel_count())
    throw DimensionMismatch("depth map buffers do not match its dimensions");

  float max_depth = 0.0f;
  for (std::size_t i = 0; i < d.pixel_count(); ++i)
    if (d.valid[i]) max_depth = std::max(max_depth, d.values[i]);

  FeatureVector out;
  out.design_id = design_id;
  out.values = Eigen::VectorXd::Zero(std::size_t(grid) * grid);
  if (max_depth <= 0.0f) return out;  // nothing valid (or all-zero depths)

  for (int by = 0; by < grid; ++by) {
    const int y0 = int(std::int64_t(by) * d.height / grid);
    const int y1 = int(std::int64_t(by + 1) * d.height / grid);
    for (int bx = 0; bx < grid; ++bx) {
      const int x0 = int(std::int64_t(bx) * d.width / grid);
      const int x1 = int(std::int64_t(bx + 1) * d.width / grid);
      double sum = 0.0;
      std::size_t n = 0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
          const std::size_t idx = std::size_t(y) * d.width + x;
          if (!d.valid[idx]) continue;
          sum += double(d.values[idx]) / double(max_depth);
          ++n;
        }
      if (n > 0) out.values[std::size_t(by) * grid + bx] = sum / double(n);
    }
  }
  return out;
}

Pca2Result pca2(const std::vector<FeatureVector>& features) {
  const std::size_t n = features.size();
  if (n < 3)
    throw InsufficientDesigns("reduction needs at least 3 feature vectors");
  const Eigen::Index dim = features[0].values.size();
  if (dim < 1) throw DimensionMismatch("feature vectors are empty");
  for (const auto& f : features) {
    if (f.values.size() != dim)
      throw DimensionMismatch("feature vectors differ in length");
    if (!f.values.allFinite())
      throw ConfigInvalid("feature vector has non-finite entries");
  }

  Eigen::MatrixXd x(n, dim);
  for (std::size_t i = 0; i < n; ++i) x.row(i) = features[i].values;
  Pca2Result out;
  out.mean = x.colwise().mean();
  x.rowwise() -= out.mean.transpose();

  const Eigen::MatrixXd cov =
      (x.transpose() * x) / double(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw EigenNonConvergence("covariance eigendecomposition failed");

  auto oriented = [](Eigen::VectorXd v) {
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
    return v;
  };
  out.component1 = oriented(eig.eigenvectors().col(dim - 1));
  out.variance1 = std::max(0.0, eig.eigenvalues()[dim - 1]);
  if (dim >= 2) {
    out.component2 = oriented(eig.eigenvectors().col(dim - 2));
    out.variance2 = std::max(0.0, eig.eigenvalues()[dim - 2]);
  } else {
    out.component2 = Eigen::VectorXd::Zero(dim);
    out.variance2 = 0.0;
  }
  out.rank_deficient = out.variance2 <= 1e-12 * std::max(out.variance1, 1e-300);

  out.embedding.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.embedding[i].design_id = features[i].design_id;
    out.embedding[i].x = x.row(i).dot(out.component1);
    out.embedding[i].y = x.row(i).dot(out.component2);
  }
  return out;
}

std::vector<Embedding2D> reduce_2d(const std::vector<FeatureVector>& features,
                                   bool* rank_deficient_out) {
  Pca2Result r = pca2(features);
  if (rank_deficient_out) *rank_deficient_out = r.rank_deficient;
  return std::move(r.embedding);
}

KMeansResult kmeans(const std::vector<Embedding2D>& points, int k,
                    std::uint64_t seed) {
  const std::size_t n = points.size();
  if (k < 1) throw ConfigInvalid("cluster count must be at least 1");
  if (n < std::size_t(k))
    throw InsufficientDesigns("fewer points than requested clusters");

  Rng rng(seed);
  KMeansResult res;
  res.centroids.reserve(k);

  // k-means++ seeding: first centroid uniform, then distance-squared
  // weighted draws; a zero total weight (all points already covered)
  // falls back to a uniform draw.
  res.centroids.push_back(as_vec(points[rng.next_below(n)]));
  std::vector<double> d2(n);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& ctr : res.centroids)
        best = std::min(best, (as_vec(points[i]) - ctr).squaredNorm());
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double u = rng.next_double() * total;
      double cum = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (u < cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.next_below(n);
    }
    res.centroids.push_back(as_vec(points[pick]));
  }

  res.labels.assign(n, -1);
  constexpr int kMaxIterations = 1000;
  for (int it = 1; it <= kMaxIterations; ++it) {
    res.iterations = it;
    // assignment step; ties go to the lower cluster index
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (as_vec(points[i]) - res.centroids[0]).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (as_vec(points[i]) - res.centroids[c]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (res.labels[i] != best) {
        res.labels[i] = best;
        changed = true;
      }
    }

    // update step
    std::vector<Eigen::Vector2d> sums(k, Eigen::Vector2d::Zero());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[res.labels[i]] += as_vec(points[i]);
      ++counts[res.labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        res.centroids[c] = sums[c] / double(counts[c]);
        continue;
      }
      // reseed an emptied cluster with the point farthest from its own
      // centroid (lowest index on ties), then force another sweep
      std::size_t far_i = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d =
            (as_vec(points[i]) - res.centroids[res.labels[i]]).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far_i = i;
        }
      }
      res.centroids[c] = as_vec(points[far_i]);
      changed = true;
    }
    if (!changed) break;
  }

  res.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    res.inertia +=
        (as_vec(points[i]) - res.centroids[res.labels[i]]).squaredNorm();
  return res;
}

ClusterQuality cluster_quality(const std::vector<Embedding2D>& points,
                               const std::vector<int>& labels) {
  const std::size_t n = points.size();
  if (labels.size() != n)
    throw DimensionMismatch("one label required per point");
  if (n < 2) throw InsufficientDesigns("need at least 2 labeled points");
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw ConfigInvalid("negative cluster label");
    k = std::max(k, l + 1);
  }
  if (k < 2) throw ConfigInvalid("need at least 2 clusters");
  std::vector<std::size_t> counts(k, 0);
  for (int l : labels) ++counts[l];
  for (int c = 0; c < k; ++c)
    if (counts[c] == 0) throw ConfigInvalid("empty cluster label");

  // silhouette: mean over points of (b-a)/max(a,b); singleton's term is 0
  double sil_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[labels[i]] == 1) continue;  // contributes 0
    std::vector<double> mean_d(k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      mean_d[labels[j]] += (as_vec(points[i]) - as_vec(points[j])).norm();
    }
    double a = 0.0;
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == labels[i]) {
        a = mean_d[c] / double(counts[c] - 1);
      } else {
        b = std::min(b, mean_d[c] / double(counts[c]));
      }
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) sil_sum += (b - a) / denom;
  }

  // centroids and within-cluster scatter
  std::vector<Eigen::Vector2d> ctr(k, Eigen::Vector2d::Zero());
  for (std::size_t i = 0; i < n; ++i) ctr[labels[i]] += as_vec(points[i]);
  for (int c = 0; c < k; ++c) ctr[c] /= double(counts[c]);

  std::vector<double> spread(k, 0.0);  // mean distance to own centroid
  double wss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (as_vec(points[i]) - ctr[labels[i]]).norm();
    spread[labels[i]] += d;
    wss += d * d;
  }
  for (int c = 0; c < k; ++c) spread[c] /= double(counts[c]);

  double dbi = 0.0;
  for (int i = 0; i < k; ++i) {
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      const double dij = (ctr[i] - ctr[j]).norm();
      if (dij <= 0.0)
        throw DegenerateRange(
            "coincident cluster centroids make the index undefined");
      worst = std::max(worst, (spread[i] + spread[j]) / dij);
    }
    dbi += worst;
  }

  Eigen::Vector2d overall = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < n; ++i) overall += as_vec(points[i]);
  overall /= double(n);
  double bss = 0.0;
  for (int c = 0; c < k; ++c)
    bss += double(counts[c]) * (ctr[c] - overall).squaredNorm();

  ClusterQuality q;
  q.silhouette = sil_sum / double(n);
  q.davies_bouldin = dbi / double(k);
  if (n == std::size_t(k) || wss <= 0.0)
    q.calinski_harabasz = std::numeric_limits<double>::infinity();
  else
    q.calinski_harabasz =
        (bss / double(k - 1)) / (wss / double(n - std::size_t(k)));
  return q;
}

std::vector<Eigen::Vector2d> lhs_points(const Eigen::Vector2d& lo,
                                        const Eigen::Vector2d& hi,
                                        std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigInvalid("sample count must be at least 1");
  if (!(lo.x() <= hi.x()) || !(lo.y() <= hi.y()))
    throw ConfigInvalid("box lower corner exceeds upper corner");
  Rng rng(seed);
  const std::vector<std::size_t> bins_x = rng.permutation(n);
  const std::vector<std::size_t> bins_y = rng.permutation(n);
  const double wx = (hi.x() - lo.x()) / double(n);
  const double wy = (hi.y() - lo.y()) / double(n);
  std::vector<Eigen::Vector2d> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double jx = rng.next_double();
    const double jy = rng.next_double();
    pts[i].x() = lo.x() + (double(bins_x[i]) + jx) * wx;
    pts[i].y() = lo.y() + (double(bins_y[i]) + jy) * wy;
  }
  return pts;
}

std::vector<std::string> lhs_sample(const std::vector<Embedding2D>& points,
                                    std::size_t n_samples,
                                    std::uint64_t seed) {
  if (n_samples < 1) throw ConfigInvalid("sample count must be at least 1");
  if (n_samples > points.size())
    throw InsufficientDesigns("more samples requested than designs exist");

  Eigen::Vector2d lo(points[0].x, points[0].y), hi = lo;
  for (const auto& p : points) {
    lo.x() = std::min(lo.x(), p.x);
    lo.y() = std::min(lo.y(), p.y);
    hi.x() = std::max(hi.x(), p.x);
    hi.y() = std::max(hi.y(), p.y);
  }
  const auto targets = lhs_points(lo, hi, n_samples, seed);

  std::vector<char> claimed(points.size(), 0);
  std::vector<std::string> ids;
  ids.reserve(n_samples);
  for (const auto& t : targets) {
    std::size_t best = points.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (claimed[i]) continue;
      const double d = (as_vec(points[i]) - t).squaredNorm();
      if (d < best_d ||
          (d == best_d && best < points.size() &&
           points[i].design_id < points[best].design_id)) {
        best_d = d;
        best = i;
      }
    }
    claimed[best] = 1;
    ids.push_back(points[best].design_id);
  }
  return ids;
}

DiversityResult diversity(const std::vector<Eigen::VectorXd>& vectors,
                          std::size_t subset_size, std::uint64_t seed) {
  if (subset_size < 2)
    throw ConfigInvalid("diversity needs a subset of at least 2");
  if (subset_size > vectors.size())
    throw InsufficientDesigns("subset larger than the dataset");
  const Eigen::Index dim = vectors[0].size();
  for (const auto& v : vectors)
    if (v.size() != dim)
      throw DimensionMismatch("vectors differ in length");

  DiversityResult out;
  if (subset_size == vectors.size()) {
    out.subset.resize(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) out.subset[i] = i;
  } else {
    Rng rng(seed);
    auto perm = rng.permutation(vectors.size());
    out.subset.assign(perm.begin(), perm.begin() + subset_size);
    std::sort(out.subset.begin(), out.subset.end());
  }

  const std::size_t n = out.subset.size();
  out.s_div.assign(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    double sum = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      sum += (vectors[out.subset[a]] - vectors[out.subset[b]]).norm();
    }
    out.s_div[a] = sum / double(n - 1);
  }
  double total = 0.0;
  for (double s : out.s_div) total += s;
  out.mean = total / double(n);
  return out;
}

}  // namespace wheelforge::designspace
