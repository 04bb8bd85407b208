#include "wheelforge/depthsynth.hpp"

#include <cmath>

#include "wheelforge/errors.hpp"
#include "wheelforge/raster_geom.hpp"

namespace wheelforge::depthsynth {

DepthMap synthesize_depth(const std::vector<std::uint8_t>& mask, int width,
                          int height, const RimTemplate& tpl) {
  tpl.validate();
  if (width < 1 || height < 1 || width != height)
    throw ConfigInvalid("synthesize_depth: raster must be square and non-empty");
  if (mask.size() != std::size_t(width) * std::size_t(height))
    throw DimensionMismatch("synthesize_depth: mask size does not match raster");

  const int N = width;
  const double mm_per_px = raster::mm_per_pixel(tpl, N);
  const auto bolts = raster::bolt_centers_doubled(tpl, N, tpl.n_bolts);
  const double bolt_sq = raster::bolt_radius_sq_doubled(tpl, N);

  DepthMap map;
  map.width = N;
  map.height = N;
  map.mm_per_pixel = mm_per_px;
  map.face_radius_mm = tpl.design_outer_radius();
  map.values.assign(map.pixel_count(), 0.0f);
  map.valid.assign(map.pixel_count(), 0);

  std::size_t n_valid = 0;
  for (int py = 0; py < N; ++py) {
    const long long v = 2LL * py - (N - 1);
    for (int px = 0; px < N; ++px) {
      const std::size_t idx = std::size_t(py) * N + px;
      if (!mask[idx]) continue;
      const long long u = 2LL * px - (N - 1);
      if (raster::in_bolt_hole(double(u), double(v), bolts, bolt_sq)) continue;
      const double r_mm = std::sqrt(double(u * u + v * v)) * 0.5 * mm_per_px;
      map.values[idx] = static_cast<float>(tpl.spoke_depth_profile(r_mm));
      map.valid[idx] = 1;
      ++n_valid;
    }
  }
  if (n_valid == 0) throw EmptyMask("synthesize_depth: no valid pixel");
  return map;
}

Eigen::Vector2d depth_centroid(const DepthMap& map) {
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (int py = 0; py < map.height; ++py) {
    for (int px = 0; px < map.width; ++px) {
      if (!map.valid[std::size_t(py) * map.width + px]) continue;
      sx += px;
      sy += py;
      ++n;
    }
  }
  if (n == 0) throw EmptyMask("depth_centroid: no valid pixel");
  return {sx / double(n), sy / double(n)};
}

CentroidStats centroid_statistics(const std::vector<Eigen::Vector2d>& centroids) {
  if (centroids.empty()) throw EmptyList("centroid_statistics: empty set");
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& c : centroids) mean += c;
  mean /= double(centroids.size());
  Eigen::Vector2d var = Eigen::Vector2d::Zero();
  for (const auto& c : centroids) {
    const Eigen::Vector2d d = c - mean;
    var += d.cwiseProduct(d);
  }
  var /= double(centroids.size());
  return {mean, var.cwiseSqrt()};
}

}  // namespace wheelforge::depthsynth
