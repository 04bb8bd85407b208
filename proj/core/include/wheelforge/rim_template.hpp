#pragma once

namespace wheelforge {

/// Parametric rim geometry in millimeters. Defaults follow a 19-inch
/// aluminum wheel: 482.6 mm rim diameter, 216 mm width, 45 mm offset,
/// 114.3 mm PCD, 66 mm hub bore, 156.2 mm center disc.
struct RimTemplate {
  double rim_diameter = 482.6;
  double rim_width = 216.0;
  double offset = 45.0;
  double pcd = 114.3;
  double hub_bore = 66.0;
  double disc_diameter = 156.2;
  int n_bolts = 5;
  double bolt_hole_diameter = 15.0;

  /// Radial width of the rim ring visible in the frontal view; the spoke
  /// design annulus ends where this ring begins.
  double rim_ring_width = 25.0;

  /// Linear monotone frontal depth profile (mm), evaluated by radius:
  /// depth_at_hub at the bore edge rising to depth_at_rim at the rim edge.
  double depth_at_hub = 10.0;
  double depth_at_rim = 45.0;

  double rim_radius() const { return rim_diameter / 2.0; }
  double bore_radius() const { return hub_bore / 2.0; }
  double disc_radius() const { return disc_diameter / 2.0; }
  double pcd_radius() const { return pcd / 2.0; }
  double design_outer_radius() const { return rim_radius() - rim_ring_width; }

  /// Monotone spoke depth profile: radius (mm from axis) -> depth (mm,
  /// larger = farther from the camera).
  double spoke_depth_profile(double radius_mm) const {
    const double r0 = bore_radius();
    const double r1 = rim_radius();
    double t = (radius_mm - r0) / (r1 - r0);
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    return depth_at_hub + t * (depth_at_rim - depth_at_hub);
  }

  void validate() const;  // throws ConfigInvalid
};

}  // namespace wheelforge
