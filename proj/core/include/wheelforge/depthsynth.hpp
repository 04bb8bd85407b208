#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "wheelforge/rim_template.hpp"

namespace wheelforge::depthsynth {

/// Dense depth map over a square raster. Values are millimeters measured
/// from the outboard face into the wheel (larger = deeper / farther from
/// the viewer); `valid` marks pixels that carry a depth at all.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;         ///< row-major, mm; 0 where invalid
  std::vector<std::uint8_t> valid;   ///< row-major, 1 = carries depth
  double mm_per_pixel = 0.0;
  /// Radius (mm) of the face-design disc the map describes; pixels beyond it
  /// belong to the rim ring. 0 means "no cutoff known" (hand-built maps).
  double face_radius_mm = 0.0;

  [[nodiscard]] std::size_t pixel_count() const {
    return std::size_t(width) * std::size_t(height);
  }
};

/// Turn a binary wheel mask (row-major, nonzero = solid) into a depth map.
/// Solid pixels get the template's radial depth profile evaluated at their
/// physical radius; bolt-hole pixels and void pixels are marked invalid.
/// The raster must be square; throws EmptyMask when no pixel ends up valid.
DepthMap synthesize_depth(const std::vector<std::uint8_t>& mask, int width,
                          int height, const RimTemplate& tpl);

/// Unweighted mean (x, y) of the valid pixel coordinates.
/// Throws EmptyMask when the map has no valid pixel.
Eigen::Vector2d depth_centroid(const DepthMap& map);

struct CentroidStats {
  Eigen::Vector2d mean;
  Eigen::Vector2d stddev;  ///< population standard deviation, per axis
};

/// Elementwise mean and population standard deviation of a set of centroids.
/// Throws EmptyList when the set is empty.
CentroidStats centroid_statistics(const std::vector<Eigen::Vector2d>& centroids);

}  // namespace wheelforge::depthsynth
