#include "wheelforge/rim_template.hpp"

#include "wheelforge/errors.hpp"

namespace wheelforge {

void RimTemplate::validate() const {
  auto positive = [](double v) { return v > 0.0; };
  if (!positive(rim_diameter) || !positive(rim_width) || !positive(pcd) ||
      !positive(hub_bore) || !positive(disc_diameter) ||
      !positive(bolt_hole_diameter) || !positive(rim_ring_width))
    throw ConfigInvalid("rim template: dimensions must be positive");
  if (n_bolts < 1) throw ConfigInvalid("rim template: n_bolts must be at least 1");
  if (!(bore_radius() < disc_radius()))
    throw ConfigInvalid("rim template: hub bore must fit inside the disc");
  if (!(disc_radius() < design_outer_radius()))
    throw ConfigInvalid("rim template: no room for the spoke annulus");
  if (!(design_outer_radius() < rim_radius()))
    throw ConfigInvalid("rim template: rim ring exceeds the rim radius");
  const double hole_r = bolt_hole_diameter / 2.0;
  if (!(pcd_radius() - hole_r > bore_radius()) ||
      !(pcd_radius() + hole_r < disc_radius()))
    throw ConfigInvalid("rim template: bolt circle must lie inside the disc");
  if (depth_at_hub < 0.0 || depth_at_rim < depth_at_hub)
    throw ConfigInvalid("rim template: depth profile must be monotone from the hub");
  if (depth_at_rim > rim_width + offset)
    throw ConfigInvalid("rim template: depth profile exceeds the rim envelope");
}

}  // namespace wheelforge
