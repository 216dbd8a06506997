#include "vesselforge/csa.hpp"

#include <array>
#include <numbers>

namespace vesselforge {

CsaClass classify_area(double csa_mm2, const CsaThresholds& t) {
  if (csa_mm2 < t.small_mm2) return CsaClass::Small;
  if (csa_mm2 > t.large_mm2) return CsaClass::Large;
  return CsaClass::Medium;
}

double csa_from_radius(double radius_mm) { return std::numbers::pi * radius_mm * radius_mm; }

LabelMask classify_csa(const LabelMask& mask, Foreground fg, const CsaThresholds& t, unsigned threads) {
  LabelMask out(mask.geometry(), 0);
  const Skeleton skel = skeletonize(mask, fg, threads);
  if (skel.empty()) return out;

  std::vector<std::uint8_t> sites(mask.size(), 0);
  std::vector<std::uint8_t> site_class(mask.size(), 0);
  for (std::size_t k = 0; k < skel.size(); ++k) {
    const std::size_t i = mask.linear_index(skel.points[k]);
    sites[i] = 1;
    site_class[i] = static_cast<std::uint8_t>(classify_area(csa_from_radius(skel.radius_mm[k]), t));
  }
  const FeatureTransform ft = feature_transform(mask.geometry(), sites, threads);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (fg(mask[i])) out[i] = site_class[static_cast<std::size_t>(ft.nearest[i])];
  }
  return out;
}

LabelMask classify_csa_per_label(const LabelMask& mask, const CsaThresholds& t, unsigned threads) {
  std::array<bool, 256> present{};
  for (std::uint8_t v : mask.values()) present[v] = true;
  LabelMask out(mask.geometry(), 0);
  for (int l = 1; l < 256; ++l) {
    if (!present[l]) continue;
    const auto label = static_cast<std::uint8_t>(l);
    const LabelMask part = classify_csa(mask, Foreground::label(label), t, threads);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i] == label) out[i] = part[i];
    }
  }
  return out;
}

StrataVolumes stratified_volume(const LabelMask& mask, const LabelMask& csa_map) {
  require_same_lattice(mask.geometry(), csa_map.geometry(), "stratified_volume");
  std::array<std::size_t, 4> counts{};
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0 && csa_map[i] >= 1 && csa_map[i] <= 3) ++counts[csa_map[i]];
  }
  const double vv = mask.geometry().voxel_volume_mm3();
  return {static_cast<double>(counts[1]) * vv, static_cast<double>(counts[2]) * vv,
          static_cast<double>(counts[3]) * vv};
}

}  // namespace vesselforge
