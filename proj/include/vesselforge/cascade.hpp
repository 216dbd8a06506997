#pragma once

// Two-stage synthesis: a global sliding-window pass with the stage-1
// generator, then stage-2 refinement on windows whose central box touches the
// Small CSA stratum, blended back over the stage-1 result with Gaussian
// weights.

#include <cstdint>
#include <string>
#include <vector>

#include "vesselforge/backend.hpp"
#include "vesselforge/csa.hpp"
#include "vesselforge/volume.hpp"

#include "json.hpp"

namespace vesselforge {

struct CascadeConfig {
  Dims g1_patch{96, 96, 96};
  Dims g2_patch{64, 64, 64};
  double overlap = 0.5;
  double gaussian_sigma_frac = 0.125;
  double central_frac = 0.5;
  double csa_small_mm2 = 5.0;
  // Lower bound on the stage-2 blend weight wherever stage-2 coverage exists.
  double g2_blend_floor = 0.0;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static CascadeConfig from_json(const nlohmann::json& j);
};

// Separable Gaussian centered at (p-1)/2 per axis with sigma = p*sigma_frac.
// Every weight is at least FLT_MIN so coverage never collapses to zero.
Volume gaussian_weight_map(const Dims& size, double sigma_frac);

// Per-axis origins 0, s, 2s, ... with s = max(1, floor(p*(1-overlap))), the
// last clamped to dims-p; the Cartesian product is ordered x-fastest.
std::vector<std::int64_t> axis_origins(std::int64_t extent, std::int64_t patch, double overlap);
std::vector<Index3> tile_origins(const Dims& dims, const Dims& patch, double overlap);

struct RoutingDecision {
  Index3 patch_origin;
  bool routed = false;
  std::int64_t small_voxels_in_center = 0;
};

// Axis-aligned central box of edge ceil(p*central_frac), centered in the patch.
struct Box {
  Index3 lo;
  Dims size;
};
Box central_box(const Index3& origin, const Dims& patch, double central_frac);

RoutingDecision route_patch(const LabelMask& csa_map, const Index3& origin, const Dims& patch, double central_frac);

// Same decisions as route_patch for many windows, answered from one
// summed-volume table over the Small stratum.
std::vector<RoutingDecision> route_patches(const LabelMask& csa_map, const std::vector<Index3>& origins,
                                           const Dims& patch, double central_frac);

// Weighted accumulation buffers of one stage, kept in double precision.
struct StageBuffers {
  Grid<double> num;
  Grid<double> den;
};

// Runs backend on every origin and accumulates in origin order. Backend calls
// may run concurrently; accumulation order never depends on threads.
StageBuffers accumulate_stage(const Volume& input, SynthBackend& backend, int stage,
                              const std::vector<Index3>& origins, const Dims& patch, double sigma_frac,
                              unsigned threads = 1);

Volume run_stage(const Volume& input, SynthBackend& backend, int stage, const Dims& patch, double overlap,
                 double sigma_frac, unsigned threads = 1);

// alpha = min(1, max(den, floor)); den == 0 keeps the stage-1 value.
float blend_over(float g1_value, double num, double den, double blend_floor = 0.0);

Volume fuse_g2_over_g1(const Volume& g1_out, const Volume& input, SynthBackend& backend2,
                       const std::vector<Index3>& routed_origins, const CascadeConfig& cfg, unsigned threads = 1);

struct CascadeResult {
  Volume output;
  Volume g1_output;
  LabelMask csa_map;
  std::vector<RoutingDecision> routing;
  Dims g1_patch;  // effective sizes after clamping to the volume
  Dims g2_patch;
  double seconds_csa = 0.0;
  double seconds_g1 = 0.0;
  double seconds_g2 = 0.0;

  std::size_t routed_count() const;
};

// Patch sizes larger than the volume are clamped to the volume extent.
CascadeResult run_cascade(const Volume& ncct, const LabelMask& vessel_mask, SynthBackend& b1, SynthBackend& b2,
                          const CascadeConfig& cfg, unsigned threads = 1);

Dims clamp_patch(const Dims& patch, const Dims& dims);

}  // namespace vesselforge
