#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "wheelforge/designspace.hpp"
#include "wheelforge/errors.hpp"
#include "wheelforge/rng.hpp"

using namespace wheelforge;
using designspace::Embedding2D;
using designspace::FeatureVector;
using depthsynth::DepthMap;

namespace {

DepthMap blank_map(int n) {
  DepthMap d;
  d.width = d.height = n;
  d.mm_per_pixel = 1.0;
  d.values.assign(d.pixel_count(), 0.0f);
  d.valid.assign(d.pixel_count(), 0);
  return d;
}

/// Disc of radius `r_px` (in pixels, about the raster center) at constant
/// depth `depth`.
DepthMap disc_map(int n, double r_px, float depth) {
  DepthMap d = blank_map(n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double u = 2.0 * x - (n - 1), v = 2.0 * y - (n - 1);
      if (u * u + v * v <= 4.0 * r_px * r_px) {
        d.values[std::size_t(y) * n + x] = depth;
        d.valid[std::size_t(y) * n + x] = 1;
      }
    }
  return d;
}

/// Four-spoke pattern that is exactly invariant under a quarter-turn of the
/// raster: validity keyed on sign(u*v*(u^2-v^2)) (the quartic harmonic) and
/// depth keyed on radius only, both computed in exact integer arithmetic.
DepthMap fourfold_map(int n) {
  DepthMap d = blank_map(n);
  const std::int64_t r_lim = std::int64_t(0.9 * (n - 1));
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const std::int64_t u = 2 * std::int64_t(x) - (n - 1);
      const std::int64_t v = 2 * std::int64_t(y) - (n - 1);
      const std::int64_t r2 = u * u + v * v;
      if (r2 > r_lim * r_lim) continue;
      if (u * v * (u * u - v * v) <= 0) continue;
      d.values[std::size_t(y) * n + x] =
          float(10.0 + 30.0 * double(r2) / double(r_lim * r_lim));
      d.valid[std::size_t(y) * n + x] = 1;
    }
  return d;
}

DepthMap rotated_quarter(const DepthMap& m) {
  DepthMap r = blank_map(m.width);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      // (u, v) -> (-v, u): destination pixel (N-1-y, x)
      const std::size_t src = std::size_t(y) * m.width + x;
      const std::size_t dst =
          std::size_t(x) * m.width + (m.width - 1 - y);
      r.values[dst] = m.values[src];
      r.valid[dst] = m.valid[src];
    }
  return r;
}

std::vector<Embedding2D> to_embedding(
    const std::vector<Eigen::Vector2d>& pts) {
  std::vector<Embedding2D> e(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    e[i].design_id = "d" + std::to_string(1000 + i);
    e[i].x = pts[i].x();
    e[i].y = pts[i].y();
  }
  return e;
}

struct QualityOracle {
  long double silhouette, dbi, ch;
};

/// Direct-formula recomputation of all three indices, independent of the
/// library implementation (explicit distance matrix, long double sums).
QualityOracle quality_oracle(const std::vector<Embedding2D>& pts,
                             const std::vector<int>& labels, int k) {
  const std::size_t n = pts.size();
  auto dist = [&](std::size_t i, std::size_t j) {
    const long double dx = (long double)(pts[i].x) - pts[j].x;
    const long double dy = (long double)(pts[i].y) - pts[j].y;
    return sqrtl(dx * dx + dy * dy);
  };
  std::vector<std::size_t> sz(k, 0);
  for (int l : labels) ++sz[l];

  long double sil = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    if (sz[labels[i]] == 1) continue;
    long double a = 0.0L;
    long double b = 1e30L;
    for (int c = 0; c < k; ++c) {
      long double s = 0.0L;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && labels[j] == c) s += dist(i, j);
      if (c == labels[i])
        a = s / (long double)(sz[c] - 1);
      else
        b = std::min(b, s / (long double)sz[c]);
    }
    if (std::max(a, b) > 0.0L) sil += (b - a) / std::max(a, b);
  }
  sil /= (long double)n;

  std::vector<long double> cx(k, 0.0L), cy(k, 0.0L), sp(k, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    cx[labels[i]] += pts[i].x;
    cy[labels[i]] += pts[i].y;
  }
  for (int c = 0; c < k; ++c) {
    cx[c] /= (long double)sz[c];
    cy[c] /= (long double)sz[c];
  }
  long double wss = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const long double dx = pts[i].x - cx[labels[i]];
    const long double dy = pts[i].y - cy[labels[i]];
    sp[labels[i]] += sqrtl(dx * dx + dy * dy);
    wss += dx * dx + dy * dy;
  }
  for (int c = 0; c < k; ++c) sp[c] /= (long double)sz[c];

  long double dbi = 0.0L;
  for (int i = 0; i < k; ++i) {
    long double worst = 0.0L;
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      const long double dx = cx[i] - cx[j], dy = cy[i] - cy[j];
      worst = std::max(worst, (sp[i] + sp[j]) / sqrtl(dx * dx + dy * dy));
    }
    dbi += worst;
  }
  dbi /= (long double)k;

  long double gx = 0.0L, gy = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    gx += pts[i].x;
    gy += pts[i].y;
  }
  gx /= (long double)n;
  gy /= (long double)n;
  long double bss = 0.0L;
  for (int c = 0; c < k; ++c)
    bss += (long double)sz[c] *
           ((cx[c] - gx) * (cx[c] - gx) + (cy[c] - gy) * (cy[c] - gy));
  const long double ch =
      (bss / (long double)(k - 1)) / (wss / (long double)(n - k));
  return {sil, dbi, ch};
}

}  // namespace

TEST_CASE("depth_features: block averaging of normalized depths") {
  SUBCASE("constant-depth disc: every occupied block reads 1") {
    const DepthMap d = disc_map(64, 26.0, 25.0f);
    const auto f = designspace::depth_features(d, "disc");
    REQUIRE(f.values.size() == 256);
    int occupied = 0, empty = 0;
    for (Eigen::Index i = 0; i < f.values.size(); ++i) {
      if (f.values[i] == 0.0) {
        ++empty;
      } else {
        CHECK(f.values[i] == 1.0);
        ++occupied;
      }
    }
    CHECK(occupied > 100);  // disc covers the central blocks
    CHECK(empty > 50);      // corners stay empty
  }

  SUBCASE("identical maps give bitwise-identical vectors") {
    const DepthMap d = fourfold_map(256);
    const auto f1 = designspace::depth_features(d, "a");
    const auto f2 = designspace::depth_features(d, "b");
    for (Eigen::Index i = 0; i < f1.values.size(); ++i)
      CHECK(f1.values[i] == f2.values[i]);
  }

  SUBCASE("4-fold content: quarter-turned raster gives the same vector") {
    const DepthMap d = fourfold_map(256);
    const auto f = designspace::depth_features(d, "a");
    const auto fr = designspace::depth_features(rotated_quarter(d), "a90");
    int nonzero = 0;
    double max_diff = 0.0;
    for (Eigen::Index i = 0; i < f.values.size(); ++i) {
      max_diff = std::max(max_diff, std::abs(f.values[i] - fr.values[i]));
      if (f.values[i] != 0.0) ++nonzero;
    }
    CHECK(max_diff <= 1e-6);
    CHECK(nonzero > 60);  // the pattern actually populates many blocks
  }

  SUBCASE("hand-computed block with partial validity") {
    DepthMap d = blank_map(32);  // 2x2-pixel blocks
    d.values[0] = 2.0f;
    d.valid[0] = 1;
    d.values[1] = 4.0f;  // same top-left block
    d.valid[1] = 1;
    const auto f = designspace::depth_features(d, "two");
    CHECK(f.values[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(f.values.sum() == doctest::Approx(0.75).epsilon(1e-12));
  }

  SUBCASE("all-invalid map gives the zero vector") {
    const auto f = designspace::depth_features(blank_map(16), "void");
    CHECK(f.values.norm() == 0.0);
  }
}

TEST_CASE("pca2/reduce_2d") {
  SUBCASE("exact rank-2 data embed losslessly") {
    Rng rng(42);
    const Eigen::Index dim = 20;
    Eigen::VectorXd b1(dim), b2(dim), center(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      b1[i] = rng.next_double() - 0.5;
      b2[i] = rng.next_double() - 0.5;
      center[i] = 10.0 * rng.next_double();
    }
    b1.normalize();
    b2 = (b2 - b1.dot(b2) * b1).normalized();
    std::vector<FeatureVector> feats(40);
    for (std::size_t i = 0; i < feats.size(); ++i) {
      feats[i].design_id = "p" + std::to_string(i);
      feats[i].values = center + (6.0 * rng.next_double() - 3.0) * b1 +
                        (2.0 * rng.next_double() - 1.0) * b2;
    }
    const auto r = designspace::pca2(feats);
    CHECK_FALSE(r.rank_deficient);
    for (std::size_t i = 0; i < feats.size(); ++i) {
      const Eigen::VectorXd rebuilt = r.mean +
                                      r.embedding[i].x * r.component1 +
                                      r.embedding[i].y * r.component2;
      CHECK((rebuilt - feats[i].values).norm() <= 1e-9);
    }
    // pairwise distances survive the projection
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t j = i + 1; j < 10; ++j) {
        const double de = std::hypot(r.embedding[i].x - r.embedding[j].x,
                                     r.embedding[i].y - r.embedding[j].y);
        const double df = (feats[i].values - feats[j].values).norm();
        CHECK(de == doctest::Approx(df).epsilon(1e-9));
      }
  }

  SUBCASE("duplicated dataset embeds each duplicate to the same point") {
    Rng rng(7);
    std::vector<FeatureVector> feats;
    for (int i = 0; i < 12; ++i) {
      FeatureVector f;
      f.design_id = "p" + std::to_string(i);
      f.values = Eigen::VectorXd::NullaryExpr(
          9, [&](Eigen::Index) { return rng.next_double(); });
      feats.push_back(f);
      feats.push_back(f);
    }
    const auto emb = designspace::reduce_2d(feats);
    for (std::size_t i = 0; i < emb.size(); i += 2) {
      CHECK(emb[i].x == emb[i + 1].x);
      CHECK(emb[i].y == emb[i + 1].y);
    }
  }

  SUBCASE("projected variance equals the top covariance eigenvalues") {
    Rng rng(1234);
    const std::size_t n = 50;
    const Eigen::Index dim = 256;
    std::vector<FeatureVector> feats(n);
    Eigen::MatrixXd x(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
      feats[i].design_id = "r" + std::to_string(i);
      feats[i].values = Eigen::VectorXd::NullaryExpr(
          dim, [&](Eigen::Index) { return rng.next_double(); });
      x.row(i) = feats[i].values;
    }
    // independent dense eigen-oracle on the covariance
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / double(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const double lam1 = eig.eigenvalues()[dim - 1];
    const double lam2 = eig.eigenvalues()[dim - 2];

    const auto r = designspace::pca2(feats);
    double vx = 0.0, vy = 0.0;
    for (const auto& e : r.embedding) {
      vx += e.x * e.x;
      vy += e.y * e.y;
    }
    vx /= double(n - 1);
    vy /= double(n - 1);
    CHECK(vx == doctest::Approx(lam1).epsilon(1e-9));
    CHECK(vy == doctest::Approx(lam2).epsilon(1e-9));
    CHECK(r.component1.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(r.component1.dot(r.component2)) <= 1e-9);

    // sign convention: the dominant loading of each axis is positive
    Eigen::Index i1 = 0, i2 = 0;
    r.component1.cwiseAbs().maxCoeff(&i1);
    r.component2.cwiseAbs().maxCoeff(&i2);
    CHECK(r.component1[i1] > 0.0);
    CHECK(r.component2[i2] > 0.0);
  }

  SUBCASE("collinear data are flagged rank-deficient but still embedded") {
    std::vector<FeatureVector> feats(5);
    const Eigen::VectorXd dir =
        Eigen::VectorXd::LinSpaced(6, 1.0, 2.0).normalized();
    for (std::size_t i = 0; i < feats.size(); ++i) {
      feats[i].design_id = "l" + std::to_string(i);
      feats[i].values = double(i) * dir;
    }
    bool deficient = false;
    const auto emb = designspace::reduce_2d(feats, &deficient);
    CHECK(deficient);
    CHECK(emb.size() == 5);
    double span_x = 0.0;
    for (const auto& e : emb) span_x = std::max(span_x, std::abs(e.x));
    CHECK(span_x > 0.5);  // the line still spreads along the first axis
  }

  SUBCASE("errors") {
    std::vector<FeatureVector> two(2);
    two[0].values = Eigen::VectorXd::Zero(4);
    two[1].values = Eigen::VectorXd::Zero(4);
    CHECK_THROWS_AS(designspace::pca2(two), InsufficientDesigns);

    std::vector<FeatureVector> ragged(3);
    ragged[0].values = Eigen::VectorXd::Zero(4);
    ragged[1].values = Eigen::VectorXd::Zero(4);
    ragged[2].values = Eigen::VectorXd::Zero(5);
    CHECK_THROWS_AS(designspace::pca2(ragged), DimensionMismatch);
  }
}

TEST_CASE("kmeans") {
  SUBCASE("k equal to n isolates every point at zero inertia") {
    Rng rng(5);
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 12; ++i)
      pts.emplace_back(10.0 * rng.next_double(), 10.0 * rng.next_double());
    const auto r = designspace::kmeans(to_embedding(pts), 12, 99);
    CHECK(r.inertia == 0.0);
    std::set<int> labels(r.labels.begin(), r.labels.end());
    CHECK(labels.size() == 12);
  }

  SUBCASE("two separated blobs split exactly at k=2") {
    Rng rng(17);
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 30; ++i)
      pts.emplace_back(2.0 * rng.next_double() - 1.0,
                       2.0 * rng.next_double() - 1.0);
    for (int i = 0; i < 30; ++i)
      pts.emplace_back(100.0 + 2.0 * rng.next_double() - 1.0,
                       100.0 + 2.0 * rng.next_double() - 1.0);
    const auto r = designspace::kmeans(to_embedding(pts), 2, 3);
    for (int i = 1; i < 30; ++i) CHECK(r.labels[i] == r.labels[0]);
    for (int i = 31; i < 60; ++i) CHECK(r.labels[i] == r.labels[30]);
    CHECK(r.labels[0] != r.labels[30]);
  }

  SUBCASE("k=1 returns the mean as centroid") {
    Rng rng(23);
    std::vector<Eigen::Vector2d> pts;
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (int i = 0; i < 17; ++i) {
      pts.emplace_back(rng.next_double(), rng.next_double());
      sum += pts.back();
    }
    const auto r = designspace::kmeans(to_embedding(pts), 1, 0);
    CHECK((r.centroids[0] - sum / 17.0).norm() <= 1e-12);
  }

  SUBCASE("fixed seed reproduces labels bit-identically") {
    Rng rng(31);
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 200; ++i)
      pts.emplace_back(rng.next_double() * 40, rng.next_double() * 40);
    const auto a = designspace::kmeans(to_embedding(pts), 10, 777);
    const auto b = designspace::kmeans(to_embedding(pts), 10, 777);
    CHECK(a.labels == b.labels);
    for (int c = 0; c < 10; ++c) CHECK(a.centroids[c] == b.centroids[c]);
  }

  SUBCASE("duplicate-heavy input still yields nonempty clusters") {
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 5; ++i) pts.emplace_back(0.0, 0.0);
    for (int i = 0; i < 5; ++i) pts.emplace_back(10.0, 0.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto r = designspace::kmeans(to_embedding(pts), 2, seed);
      std::vector<int> counts(2, 0);
      for (int l : r.labels) ++counts[l];
      CHECK(counts[0] == 5);
      CHECK(counts[1] == 5);
      CHECK(r.inertia == 0.0);
    }
  }

  SUBCASE("errors") {
    std::vector<Eigen::Vector2d> pts{{0, 0}, {1, 1}};
    CHECK_THROWS_AS(designspace::kmeans(to_embedding(pts), 3, 0),
                    InsufficientDesigns);
    CHECK_THROWS_AS(designspace::kmeans(to_embedding(pts), 0, 0),
                    ConfigInvalid);
  }
}

TEST_CASE("cluster_quality") {
  SUBCASE("two far, tight blobs score silhouette above 0.9") {
    Rng rng(47);
    std::vector<Eigen::Vector2d> pts;
    std::vector<int> labels;
    for (int i = 0; i < 20; ++i) {
      pts.emplace_back(rng.next_double(), rng.next_double());
      labels.push_back(0);
    }
    for (int i = 0; i < 20; ++i) {
      pts.emplace_back(500.0 + rng.next_double(), rng.next_double());
      labels.push_back(1);
    }
    const auto q = designspace::cluster_quality(to_embedding(pts), labels);
    CHECK(q.silhouette > 0.9);
    CHECK(q.davies_bouldin < 0.1);
    CHECK(q.calinski_harabasz > 1000.0);
  }

  SUBCASE("coincident centroids surface an error") {
    std::vector<Eigen::Vector2d> pts(6, Eigen::Vector2d(3.0, 4.0));
    const std::vector<int> labels{0, 1, 0, 1, 0, 1};
    CHECK_THROWS_AS(designspace::cluster_quality(to_embedding(pts), labels),
                    DegenerateRange);
  }

  SUBCASE("singleton cluster contributes a zero silhouette term") {
    // two near points in cluster 0, one far singleton in cluster 1
    std::vector<Eigen::Vector2d> pts{{0, 0}, {1, 0}, {10, 0}};
    const std::vector<int> labels{0, 0, 1};
    const auto q = designspace::cluster_quality(to_embedding(pts), labels);
    // point 0: a=1, b=10   -> 9/10
    // point 1: a=1, b=9    -> 8/9
    // point 2: singleton   -> 0
    const double expected = (0.9 + 8.0 / 9.0 + 0.0) / 3.0;
    CHECK(q.silhouette == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("random instances match the direct-formula recomputation") {
    Rng rng(59);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Eigen::Vector2d> pts;
      for (int i = 0; i < 60; ++i)
        pts.emplace_back(10.0 * rng.next_double(), 10.0 * rng.next_double());
      const auto emb = to_embedding(pts);
      const auto km = designspace::kmeans(emb, 3, rng.next_u64());
      const auto q = designspace::cluster_quality(emb, km.labels);
      const auto o = quality_oracle(emb, km.labels, 3);
      CHECK(q.silhouette == doctest::Approx(double(o.silhouette)).epsilon(1e-9));
      CHECK(q.davies_bouldin == doctest::Approx(double(o.dbi)).epsilon(1e-9));
      CHECK(q.calinski_harabasz == doctest::Approx(double(o.ch)).epsilon(1e-9));
    }
  }

  SUBCASE("errors") {
    std::vector<Eigen::Vector2d> pts{{0, 0}, {1, 1}, {2, 2}};
    CHECK_THROWS_AS(
        designspace::cluster_quality(to_embedding(pts), {0, 0, 0}),
        ConfigInvalid);  // single cluster
    CHECK_THROWS_AS(
        designspace::cluster_quality(to_embedding(pts), {0, 2, 2}),
        ConfigInvalid);  // label 1 empty
    CHECK_THROWS_AS(designspace::cluster_quality(to_embedding(pts), {0, 1}),
                    DimensionMismatch);
  }
}

TEST_CASE("latin hypercube sampling") {
  SUBCASE("each axis bin is occupied exactly once") {
    for (std::size_t n : {10ul, 100ul}) {
      const Eigen::Vector2d lo(-3.0, 5.0), hi(7.0, 6.0);
      const auto pts = designspace::lhs_points(lo, hi, n, 2024);
      REQUIRE(pts.size() == n);
      std::vector<int> occ_x(n, 0), occ_y(n, 0);
      for (const auto& p : pts) {
        CHECK(p.x() >= lo.x());
        CHECK(p.x() <= hi.x());
        CHECK(p.y() >= lo.y());
        CHECK(p.y() <= hi.y());
        const auto bx = std::min<std::size_t>(
            n - 1, std::size_t((p.x() - lo.x()) / ((hi.x() - lo.x()) / n)));
        const auto by = std::min<std::size_t>(
            n - 1, std::size_t((p.y() - lo.y()) / ((hi.y() - lo.y()) / n)));
        ++occ_x[bx];
        ++occ_y[by];
      }
      for (std::size_t b = 0; b < n; ++b) {
        CHECK(occ_x[b] == 1);
        CHECK(occ_y[b] == 1);
      }
    }
  }

  SUBCASE("sampling the whole dataset returns every id") {
    Rng rng(61);
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 25; ++i)
      pts.emplace_back(rng.next_double(), rng.next_double());
    const auto emb = to_embedding(pts);
    const auto ids = designspace::lhs_sample(emb, 25, 1);
    std::set<std::string> got(ids.begin(), ids.end());
    CHECK(got.size() == 25);
    for (const auto& e : emb) CHECK(got.count(e.design_id) == 1);
  }

  SUBCASE("a single sample claims the design nearest the LHS point") {
    Rng rng(67);
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 30; ++i)
      pts.emplace_back(rng.next_double() * 8, rng.next_double() * 8);
    const auto emb = to_embedding(pts);
    const auto ids = designspace::lhs_sample(emb, 1, 54321);

    Eigen::Vector2d lo = pts[0], hi = pts[0];
    for (const auto& p : pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const auto target = designspace::lhs_points(lo, hi, 1, 54321)[0];
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      if ((pts[i] - target).squaredNorm() < (pts[best] - target).squaredNorm())
        best = i;
    REQUIRE(ids.size() == 1);
    CHECK(ids[0] == emb[best].design_id);
  }

  SUBCASE("distinct ids, deterministic reruns") {
    Rng rng(71);
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 100; ++i)
      pts.emplace_back(double(i % 10), double(i / 10));  // uniform grid
    const auto emb = to_embedding(pts);
    const auto a = designspace::lhs_sample(emb, 10, 9);
    const auto b = designspace::lhs_sample(emb, 10, 9);
    CHECK(a == b);
    CHECK(std::set<std::string>(a.begin(), a.end()).size() == 10);
  }

  SUBCASE("errors") {
    std::vector<Eigen::Vector2d> pts{{0, 0}, {1, 1}};
    CHECK_THROWS_AS(designspace::lhs_sample(to_embedding(pts), 3, 0),
                    InsufficientDesigns);
    CHECK_THROWS_AS(designspace::lhs_sample(to_embedding(pts), 0, 0),
                    ConfigInvalid);
  }
}

TEST_CASE("diversity") {
  SUBCASE("identical vectors have zero diversity") {
    std::vector<Eigen::VectorXd> v(8, Eigen::VectorXd::Constant(5, 3.25));
    const auto r = designspace::diversity(v, 8, 0);
    for (double s : r.s_div) CHECK(s == 0.0);
    CHECK(r.mean == 0.0);
  }

  SUBCASE("a pair scores its separation distance") {
    std::vector<Eigen::VectorXd> v(2);
    v[0] = Eigen::Vector3d(0, 0, 0);
    v[1] = Eigen::Vector3d(3, 4, 0);
    const auto r = designspace::diversity(v, 2, 0);
    CHECK(r.s_div[0] == 5.0);
    CHECK(r.s_div[1] == 5.0);
    CHECK(r.mean == 5.0);
  }

  SUBCASE("matches the brute-force pairwise average") {
    Rng rng(73);
    std::vector<Eigen::VectorXd> v(30);
    for (auto& w : v)
      w = Eigen::VectorXd::NullaryExpr(
          7, [&](Eigen::Index) { return 10.0 * rng.next_double(); });
    const auto r = designspace::diversity(v, 30, 0);
    long double mean_acc = 0.0L;
    for (std::size_t i = 0; i < v.size(); ++i) {
      long double s = 0.0L;
      for (std::size_t j = 0; j < v.size(); ++j)
        if (j != i) s += (long double)((v[i] - v[j]).norm());
      s /= (long double)(v.size() - 1);
      CHECK(r.s_div[i] == doctest::Approx(double(s)).epsilon(1e-12));
      mean_acc += s;
    }
    CHECK(r.mean ==
          doctest::Approx(double(mean_acc / (long double)v.size()))
              .epsilon(1e-12));
  }

  SUBCASE("translation leaves scores unchanged; scaling multiplies them") {
    Rng rng(79);
    std::vector<Eigen::VectorXd> v(12);
    for (auto& w : v)
      w = Eigen::VectorXd::NullaryExpr(
          4, [&](Eigen::Index) { return rng.next_double(); });
    const auto base = designspace::diversity(v, 12, 0);

    std::vector<Eigen::VectorXd> shifted = v, doubled = v, stretched = v;
    const Eigen::VectorXd offset = Eigen::VectorXd::Constant(4, 17.5);
    for (auto& w : shifted) w += offset;
    for (auto& w : doubled) w *= -2.0;
    for (auto& w : stretched) w *= 1.3;

    const auto t = designspace::diversity(shifted, 12, 0);
    const auto d = designspace::diversity(doubled, 12, 0);
    const auto s = designspace::diversity(stretched, 12, 0);
    for (std::size_t i = 0; i < 12; ++i) {
      CHECK(t.s_div[i] == doctest::Approx(base.s_div[i]).epsilon(1e-9));
      CHECK(d.s_div[i] == 2.0 * base.s_div[i]);  // power-of-two: exact
      CHECK(s.s_div[i] ==
            doctest::Approx(1.3 * base.s_div[i]).epsilon(1e-12));
    }
  }

  SUBCASE("subsets are distinct, in-range, ascending, and deterministic") {
    std::vector<Eigen::VectorXd> v(50, Eigen::VectorXd::Zero(3));
    for (std::size_t i = 0; i < v.size(); ++i) v[i][0] = double(i);
    const auto a = designspace::diversity(v, 20, 11);
    const auto b = designspace::diversity(v, 20, 11);
    CHECK(a.subset == b.subset);
    REQUIRE(a.subset.size() == 20);
    for (std::size_t i = 1; i < a.subset.size(); ++i)
      CHECK(a.subset[i - 1] < a.subset[i]);
    CHECK(a.subset.back() < 50);
  }

  SUBCASE("errors") {
    std::vector<Eigen::VectorXd> v(3, Eigen::VectorXd::Zero(3));
    CHECK_THROWS_AS(designspace::diversity(v, 1, 0), ConfigInvalid);
    CHECK_THROWS_AS(designspace::diversity(v, 4, 0), InsufficientDesigns);
    v[2] = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(designspace::diversity(v, 3, 0), DimensionMismatch);
  }
}
