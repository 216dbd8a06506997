#pragma once

#include <cstdint>

#include "vesselforge/distance.hpp"
#include "vesselforge/skeleton.hpp"
#include "vesselforge/volume.hpp"

namespace vesselforge {

// CSA map labels.
enum class CsaClass : std::uint8_t { None = 0, Small = 1, Medium = 2, Large = 3 };

// Small below small_mm2, Large above large_mm2, Medium on the closed interval
// between them.
struct CsaThresholds {
  double small_mm2 = 5.0;
  double large_mm2 = 10.0;
};

CsaClass classify_area(double csa_mm2, const CsaThresholds& t = {});

// Circular cross-section from the medial radius.
double csa_from_radius(double radius_mm);

// Skeletonizes the selection, classifies each skeleton point by
// pi*radius^2, then gives every foreground voxel the class of its nearest
// skeleton point. Background stays 0.
LabelMask classify_csa(const LabelMask& mask, Foreground fg, const CsaThresholds& t = {}, unsigned threads = 1);

// classify_csa run separately for every nonzero label present in the mask,
// merged into one map (labels never share voxels).
LabelMask classify_csa_per_label(const LabelMask& mask, const CsaThresholds& t = {}, unsigned threads = 1);

struct StrataVolumes {
  double small_mm3 = 0.0;
  double medium_mm3 = 0.0;
  double large_mm3 = 0.0;
};

// Volume of nonzero mask voxels per CSA class.
StrataVolumes stratified_volume(const LabelMask& mask, const LabelMask& csa_map);

}  // namespace vesselforge
