#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vesselforge/distance.hpp"
#include "vesselforge/volume.hpp"

namespace vesselforge {

struct Skeleton {
  std::vector<Index3> points;
  std::vector<double> radius_mm;  // EDT at each point
  Geometry source;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  // Binary mask (1 on skeleton points) on the source geometry.
  LabelMask to_mask() const;
};

// 3x3x3 neighborhood, index (dx+1) + 3*(dy+1) + 9*(dz+1); entry 13 is the center.
using Neighborhood = std::array<bool, 27>;

// Simple point for (26, 6) topology: deleting the center from the foreground
// preserves the number of foreground 26-components, background 6-components
// and cavities. The center entry is ignored.
bool is_simple_point(const Neighborhood& n);

// Iterative topology-preserving thinning: six directional sub-iterations per
// pass, each deleting simple non-endpoint border voxels in ascending EDT order
// (ties by linear index). Voxels outside the grid count as background.
// Each point's radius is the EDT there. Empty foreground gives an empty skeleton.
Skeleton skeletonize(const LabelMask& mask, Foreground fg, unsigned threads = 1);

// Number of 26-connected components of the selected foreground.
std::size_t count_components_26(const LabelMask& mask, Foreground fg);

}  // namespace vesselforge
