#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "wheelforge/depthsynth.hpp"

namespace wheelforge::designspace {

/// Compact per-design descriptor derived from a depth map.
struct FeatureVector {
  std::string design_id;
  Eigen::VectorXd values;  ///< fixed length across a dataset; finite
};

/// Planar coordinates of one design in the reduced design space.
struct Embedding2D {
  std::string design_id;
  double x = 0.0;
  double y = 0.0;
};

/// Diversity scores for a named group of designs.
struct DiversityReport {
  double dsd = 0.0;               ///< design-space diversity (feature vectors)
  double psd = 0.0;               ///< performance-space diversity
  std::string group_label;        ///< "reference" or "overall"
};

/// Block-averaged depth descriptor. The map is divided into grid x grid
/// blocks; each entry is the mean of the valid pixels' depths inside that
/// block, scaled by the map's largest valid depth so entries land in [0, 1].
/// Blocks without a valid pixel contribute 0. A map with no valid pixel (or
/// an all-zero one) yields the zero vector. Deterministic.
FeatureVector depth_features(const depthsynth::DepthMap& d,
                             const std::string& design_id, int grid = 16);

/// Full output of the two-component reduction, kept around so callers can
/// reconstruct points or audit the projection.
struct Pca2Result {
  std::vector<Embedding2D> embedding;
  Eigen::VectorXd mean;        ///< feature-space mean that was subtracted
  Eigen::VectorXd component1;  ///< unit loading of the first axis
  Eigen::VectorXd component2;  ///< unit loading of the second axis (zero
                               ///< vector when the data are 1-dimensional)
  double variance1 = 0.0;      ///< data variance captured by each axis
  double variance2 = 0.0;
  bool rank_deficient = false;  ///< true when variance2 is (numerically) zero
};

/// Principal-component reduction of the centered feature matrix to its top
/// two axes. Sign convention: within each component the loading of largest
/// magnitude is made positive, so the result is reproducible across runs.
/// Needs at least 3 vectors of uniform length. A dataset whose second
/// component carries zero variance is still embedded, with the
/// `rank_deficient` flag set (mirrored into `*rank_deficient_out` when the
/// caller passes one to `reduce_2d`).
Pca2Result pca2(const std::vector<FeatureVector>& features);
std::vector<Embedding2D> reduce_2d(const std::vector<FeatureVector>& features,
                                   bool* rank_deficient_out = nullptr);

struct KMeansResult {
  std::vector<int> labels;  ///< cluster index per input point
  std::vector<Eigen::Vector2d> centroids;
  double inertia = 0.0;  ///< sum of squared point-to-centroid distances
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding driven by the project generator,
/// so a fixed seed yields bit-identical labels. Assignment ties go to the
/// lower cluster index. A cluster that empties mid-run is reseeded with the
/// point currently farthest from its assigned centroid, so every returned
/// cluster is nonempty. Converges when the assignment stops changing.
KMeansResult kmeans(const std::vector<Embedding2D>& points, int k,
                    std::uint64_t seed);

struct ClusterQuality {
  double silhouette = 0.0;          ///< mean (b-a)/max(a,b); higher is better
  double davies_bouldin = 0.0;      ///< lower is better
  double calinski_harabasz = 0.0;   ///< higher is better
};

/// Textbook quality indices over a labeled 2-D embedding. Requires at least
/// two clusters and no empty cluster label in [0, max(labels)]. Policy: a
/// singleton cluster contributes silhouette term 0 for its point. Coincident
/// cluster centroids make the Davies-Bouldin ratio undefined and throw
/// DegenerateRange. A zero within-cluster dispersion makes Calinski-Harabasz
/// infinite.
ClusterQuality cluster_quality(const std::vector<Embedding2D>& points,
                               const std::vector<int>& labels);

/// Latin-hypercube points over the axis-aligned box [lo, hi]: each axis is
/// split into n equal bins, and the n points occupy every bin of every axis
/// exactly once (random bin pairing and in-bin jitter under `seed`).
std::vector<Eigen::Vector2d> lhs_points(const Eigen::Vector2d& lo,
                                        const Eigen::Vector2d& hi,
                                        std::size_t n, std::uint64_t seed);

/// Pick n_samples spread-out designs: lay a Latin-hypercube sample over the
/// embedding's bounding box, then map each sample point to the nearest
/// not-yet-claimed design (ties to the lexicographically lower design_id).
/// Returns n_samples distinct ids, in sample-point order.
std::vector<std::string> lhs_sample(const std::vector<Embedding2D>& points,
                                    std::size_t n_samples, std::uint64_t seed);

struct DiversityResult {
  std::vector<std::size_t> subset;  ///< ascending indices into the input
  std::vector<double> s_div;        ///< per-subset-item diversity score
  double mean = 0.0;
};

/// Mean pairwise Euclidean separation, itemwise: for each member i of a
/// size-n subset P, s_div(i) = 1/(n-1) * sum_{j in P, j != i} |v_i - v_j|.
/// The subset is drawn without replacement under `seed` (the whole dataset
/// when subset_size equals the input size). Needs subset_size >= 2 and
/// uniform vector length.
DiversityResult diversity(const std::vector<Eigen::VectorXd>& vectors,
                          std::size_t subset_size, std::uint64_t seed);

}  // namespace wheelforge::designspace
