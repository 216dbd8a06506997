#pragma once

// Paired NCCT/CTPA vascular phantoms with analytic ground truth.
//
// Random streams are SplitMix64 generators. Tree geometry uses the stream
// seeded with derive_seed(seed, 0); the NCCT and CTPA noise fields use
// derive_seed(seed, 1) and derive_seed(seed, 2). Gaussian deviates come from
// the Box-Muller transform on consecutive uniform pairs (both outputs used).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vesselforge/volume.hpp"

namespace vesselforge {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

// Standard normal deviates via Box-Muller over a SplitMix64 stream.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}
  double next();

 private:
  SplitMix64 rng_;
  std::optional<double> spare_;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct PhantomSpec {
  Dims dims{64, 64, 64};
  Vec3 spacing{0.5, 0.5, 0.5};
  float parenchyma_hu = -850.0f;
  float vessel_hu_ncct = 40.0f;
  float artery_hu_ctpa = 350.0f;
  float vein_hu_ctpa = 250.0f;
  float noise_sigma_hu = 0.0f;
  int tube_count = 6;
  double radius_min_mm = 1.0;
  double radius_max_mm = 3.0;
  std::uint64_t seed = 1;

  // Throws InvalidArgument on any violated invariant.
  void validate() const;
  Geometry geometry() const { return Geometry{dims, spacing, {0.0, 0.0, 0.0}}; }
};

// One branch: a piecewise-linear axis (physical mm) with constant radius.
struct Tube {
  std::vector<Vec3> axis;
  double radius_mm = 0.0;
  std::uint8_t label = labels::kArtery;
  int parent = -1;  // index into the tube table, -1 for a trunk
  int generation = 0;
};

struct PhantomCase {
  Volume ncct;
  Volume ctpa;
  LabelMask vessel_mask;
  std::vector<Tube> tubes;
};

// Child radius = parent radius * this factor.
inline constexpr double kBranchRadiusFactor = 0.7;

double distance_to_segment(const Vec3& p, const Vec3& a, const Vec3& b);
double distance_to_polyline(const Vec3& p, std::span<const Vec3> axis);

// Random branching trees: tube_count branches in total, trees alternating
// artery/vein, each branch spawning 0-2 children. Each tree may use at most
// ceil(tube_count / T) branches with T = max(2, (tube_count + 2) / 3) trees
// (T = 1 for a single branch); a tree that stops early leaves the rest to the
// next one.
std::vector<Tube> generate_tubes(const PhantomSpec& spec);

// Rasterizes explicit tubes with the spec's palette and noise. A voxel is
// lumen when its center lies within radius of the tube axis; where tubes of
// different labels overlap, the later tube in the table wins.
PhantomCase render_case(const PhantomSpec& spec, std::vector<Tube> tubes);

PhantomCase generate_case(const PhantomSpec& spec);

// Case k uses seed base.seed + k*seed_stride.
std::vector<PhantomCase> generate_cohort(const PhantomSpec& base, int n_cases, std::uint64_t seed_stride,
                                         unsigned threads = 1);

}  // namespace vesselforge
