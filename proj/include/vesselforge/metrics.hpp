#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vesselforge/volume.hpp"

namespace vesselforge {

// Metric functions take an optional region: when mask is non-null only voxels
// with mask == label are scored. An empty selection throws DataError.

double mae(const Volume& a, const Volume& b, const LabelMask* mask = nullptr, std::uint8_t label = 1);

struct PsnrOptions {
  double max_value = 4095.0;
  bool clip = true;  // clip both inputs to [clip_lo, clip_hi] before the MSE
  double clip_lo = -1024.0;
  double clip_hi = 3071.0;
};

// 10*log10(MAX^2/MSE); +infinity when MSE is zero.
double psnr(const Volume& a, const Volume& b, const LabelMask* mask = nullptr, std::uint8_t label = 1,
            const PsnrOptions& options = {});

struct SsimParams {
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 4095.0;
  int window_edge = 7;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
  void validate() const;
};

// Mean of local SSIM over cubic windows centered at each (selected) voxel.
// Windows are clipped at the volume border; moments use the population form.
double ssim(const Volume& a, const Volume& b, const LabelMask* mask = nullptr, std::uint8_t label = 1,
            const SsimParams& params = {});

// 2|A and B| / (|A| + |B|); 1.0 when both are empty.
double dice(const LabelMask& p, const LabelMask& g, std::uint8_t label);

struct ClStats {
  double cl_precision = 0.0;
  double cl_recall = 0.0;
  double cl_dice = 0.0;
};

// Centerline precision |S(P) and G|/|S(P)|, recall |S(G) and P|/|S(G)| and
// their harmonic mean; every 0/0 is 0.
ClStats cl_stats(const LabelMask& p, const LabelMask& g, std::uint8_t label, unsigned threads = 1);

enum class Region { Artery, Vein, Average };
std::string region_name(Region r);
Region region_from_name(const std::string& s);

struct SimilarityRecord {
  Region region = Region::Average;
  double mae_hu = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct SegRecord {
  Region region = Region::Average;
  double dice = 0.0;
  double cl_dice = 0.0;
  double cl_precision = 0.0;
  double cl_recall = 0.0;
};

struct RegionMask {
  const LabelMask& mask;
  std::uint8_t label;
};

struct SimilarityParams {
  PsnrOptions psnr;
  SsimParams ssim;
};

// Artery, Vein and their unweighted mean.
std::vector<SimilarityRecord> similarity_report(const Volume& pred, const Volume& ref, RegionMask artery,
                                                RegionMask vein, const SimilarityParams& params = {});

SegRecord segmentation_record(const LabelMask& pred, const LabelMask& gt, std::uint8_t label, Region region,
                              unsigned threads = 1);

// Artery (label 1), Vein (label 2) and their unweighted mean.
std::vector<SegRecord> segmentation_report(const LabelMask& pred, const LabelMask& gt, unsigned threads = 1);

}  // namespace vesselforge
