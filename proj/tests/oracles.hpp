#pragma once

// Independent brute-force evaluations used as test oracles. Nothing here
// calls the library code path it is checked against.

#include <cstdint>
#include <vector>

#include "vesselforge/volume.hpp"

namespace oracle {

using vesselforge::Geometry;
using vesselforge::LabelMask;
using vesselforge::Volume;

// Nearest background voxel center by exhaustive search (mm).
std::vector<double> brute_edt(const LabelMask& mask, std::uint8_t label);

// Binary mask of a straight cylinder along x through voxel-center line
// (cy, cz), radius in mm, voxel membership by center distance <= radius.
LabelMask straight_tube_x(const Geometry& g, double cy_vox, double cz_vox, double radius_mm,
                          std::uint8_t label = 1);

double mae(const std::vector<double>& a, const std::vector<double>& b);
double mse(const std::vector<double>& a, const std::vector<double>& b);
// Single-window SSIM over two sample sets (population moments).
double ssim_window(const std::vector<double>& x, const std::vector<double>& y, double c1, double c2);
// Mean local SSIM with border-clipped cubic windows, directly enumerated.
double ssim_brute(const Volume& a, const Volume& b, const LabelMask* mask, std::uint8_t label, int window,
                  double L);
double dice_brute(const LabelMask& p, const LabelMask& g, std::uint8_t label);

struct IccParts {
  double ms_rows, ms_cols, ms_err;
};
// Two-way ANOVA; the residual sum of squares is total minus rows minus columns.
IccParts anova_two_way(const std::vector<double>& a, const std::vector<double>& b);
double icc21_brute(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace oracle
