#pragma once

#include <cstdint>
#include <vector>

#include "vesselforge/volume.hpp"

namespace vesselforge {

// Selects the foreground of a label mask: one label, or every nonzero label.
class Foreground {
 public:
  static Foreground label(std::uint8_t l) { return Foreground(l, false); }
  static Foreground nonzero() { return Foreground(0, true); }

  bool operator()(std::uint8_t v) const { return any_ ? v != 0 : v == label_; }
  bool any() const { return any_; }
  std::uint8_t value() const { return label_; }

 private:
  Foreground(std::uint8_t l, bool any) : label_(l), any_(any) {}
  std::uint8_t label_;
  bool any_;
};

// Per-voxel distances in mm, kept in double precision.
using DistanceMap = Grid<double>;

// Exact Euclidean distance from each foreground voxel center to the nearest
// background voxel center, spacing-aware; background maps to 0. When the mask
// has no background every voxel gets the volume diagonal as a sentinel.
// Throws DataError when the foreground is empty.
DistanceMap euclidean_distance_transform(const LabelMask& mask, Foreground fg, unsigned threads = 1);

double volume_diagonal_mm(const Geometry& g);

// Nearest site per voxel under the spacing-aware Euclidean metric.
struct FeatureTransform {
  std::vector<double> squared_mm2;    // +inf when there are no sites
  std::vector<std::int64_t> nearest;  // linear index of the nearest site, -1 when none
};

// Separable lower-envelope transform over sites[i] != 0. Exact.
FeatureTransform feature_transform(const Geometry& g, const std::vector<std::uint8_t>& sites, unsigned threads = 1);

}  // namespace vesselforge
