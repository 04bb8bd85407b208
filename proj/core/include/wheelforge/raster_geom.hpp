#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "wheelforge/rim_template.hpp"

namespace wheelforge::raster {

/// Shared raster geometry. Pixels are addressed by doubled center offsets
/// u = 2*px - (N-1), v = 2*py - (N-1), which are exact integers, so radius
/// comparisons and 90-degree rotations stay bit-exact.

/// Millimeters per pixel chosen so the rim outer radius spans 46% of the
/// raster width (a small margin all around).
inline double mm_per_pixel(const RimTemplate& tpl, int raster_size) {
  return tpl.rim_radius() / (0.46 * raster_size);
}

/// Bolt hole centers in doubled-pixel coordinates, one at angle
/// (2j+1)*pi/n (mid-segment when n matches the segment count). When n is
/// a multiple of four the centers are produced by exact quarter-turn
/// rotations of the first quadrant's so that a 90-degree image rotation
/// maps holes onto holes bit-exactly.
inline std::vector<std::pair<double, double>> bolt_centers_doubled(
    const RimTemplate& tpl, int raster_size, int n_bolts) {
  const double pcd2 = tpl.pcd_radius() / mm_per_pixel(tpl, raster_size) * 2.0;
  constexpr double kPi = 3.14159265358979323846;
  std::vector<std::pair<double, double>> centers;
  auto angle = [&](int j) { return (2.0 * j + 1.0) * kPi / n_bolts; };
  if (n_bolts % 4 == 0) {
    for (int j = 0; j < n_bolts / 4; ++j) {
      const double cx = pcd2 * std::cos(angle(j));
      const double cy = pcd2 * std::sin(angle(j));
      centers.push_back({cx, cy});
      centers.push_back({-cy, cx});
      centers.push_back({-cx, -cy});
      centers.push_back({cy, -cx});
    }
  } else {
    for (int j = 0; j < n_bolts; ++j)
      centers.push_back({pcd2 * std::cos(angle(j)), pcd2 * std::sin(angle(j))});
  }
  return centers;
}

/// Squared bolt-hole radius in doubled-pixel units.
inline double bolt_radius_sq_doubled(const RimTemplate& tpl, int raster_size) {
  const double r2 = tpl.bolt_hole_diameter / mm_per_pixel(tpl, raster_size);
  return r2 * r2;
}

inline bool in_bolt_hole(double u, double v,
                         const std::vector<std::pair<double, double>>& centers,
                         double radius_sq_doubled) {
  for (const auto& [cx, cy] : centers) {
    const double du = u - cx, dv = v - cy;
    if (du * du + dv * dv < radius_sq_doubled) return true;
  }
  return false;
}

}  // namespace wheelforge::raster
