#include "vesselforge/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <string>

#include "vesselforge/parallel.hpp"

namespace vesselforge {

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double GaussianStream::next() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  const double u1 = 1.0 - rng_.uniform();  // (0, 1]
  const double u2 = rng_.uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 mix(seed ^ (stream * 0xD1B54A32D192ED03ull));
  return mix.next();
}

void PhantomSpec::validate() const {
  validate_geometry(geometry());
  if (!(artery_hu_ctpa > vessel_hu_ncct) || !(vein_hu_ctpa > vessel_hu_ncct)) {
    throw InvalidArgument("phantom: CTPA lumen HU must exceed NCCT lumen HU for both labels");
  }
  if (!(noise_sigma_hu >= 0.0f) || !std::isfinite(noise_sigma_hu)) {
    throw InvalidArgument("phantom: noise_sigma_hu must be finite and >= 0");
  }
  if (tube_count < 1) throw InvalidArgument("phantom: tube_count must be >= 1");
  if (!(radius_min_mm > 0.0) || !(radius_min_mm <= radius_max_mm)) {
    throw InvalidArgument("phantom: radius range must satisfy 0 < rmin <= rmax");
  }
  const double max_spacing = std::max({spacing.x, spacing.y, spacing.z});
  if (radius_min_mm < max_spacing) {
    throw InvalidArgument("phantom: rmin " + std::to_string(radius_min_mm) +
                          " mm is below the largest spacing component " + std::to_string(max_spacing));
  }
}

namespace {

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
Vec3 normalized(const Vec3& a) { return (1.0 / std::sqrt(dot(a, a))) * a; }

Vec3 random_unit(SplitMix64& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

// Rotates unit vector d by angle about a random axis perpendicular to d.
Vec3 deflect(const Vec3& d, double angle, SplitMix64& rng) {
  Vec3 helper = std::abs(d.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 u = normalized(cross(d, helper));
  const Vec3 v = cross(d, u);
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const Vec3 perp = std::cos(phi) * u + std::sin(phi) * v;
  return normalized(std::cos(angle) * d + std::sin(angle) * perp);
}

// Two-segment axis starting at start along dir with a mild kink halfway.
std::vector<Vec3> kinked_axis(const Vec3& start, const Vec3& dir, double length, SplitMix64& rng) {
  const double kink = rng.uniform(0.0, 20.0) * std::numbers::pi / 180.0;
  const Vec3 mid = start + (0.5 * length) * dir;
  const Vec3 end = mid + (0.5 * length) * deflect(dir, kink, rng);
  return {start, mid, end};
}

// Point and local direction at fraction t of the axis arc length.
std::pair<Vec3, Vec3> point_along(const std::vector<Vec3>& axis, double t) {
  double total = 0.0;
  for (std::size_t i = 1; i < axis.size(); ++i) total += std::sqrt(dot(axis[i] - axis[i - 1], axis[i] - axis[i - 1]));
  double target = t * total;
  for (std::size_t i = 1; i < axis.size(); ++i) {
    const Vec3 seg = axis[i] - axis[i - 1];
    const double len = std::sqrt(dot(seg, seg));
    if (target <= len || i + 1 == axis.size()) {
      const double f = len > 0.0 ? std::min(1.0, target / len) : 0.0;
      return {axis[i - 1] + f * seg, normalized(seg)};
    }
    target -= len;
  }
  return {axis.front(), Vec3{1, 0, 0}};
}

}  // namespace

double distance_to_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec3 d = p - (a + t * ab);
  return std::sqrt(dot(d, d));
}

double distance_to_polyline(const Vec3& p, std::span<const Vec3> axis) {
  if (axis.size() == 1) return distance_to_segment(p, axis[0], axis[0]);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < axis.size(); ++i) best = std::min(best, distance_to_segment(p, axis[i - 1], axis[i]));
  return best;
}

std::vector<Tube> generate_tubes(const PhantomSpec& spec) {
  spec.validate();
  SplitMix64 rng(derive_seed(spec.seed, 0));
  const Vec3 extent{static_cast<double>(spec.dims.nx - 1) * spec.spacing.x,
                    static_cast<double>(spec.dims.ny - 1) * spec.spacing.y,
                    static_cast<double>(spec.dims.nz - 1) * spec.spacing.z};
  const double min_extent = std::max(1.0, std::min({extent.x, extent.y, extent.z}));

  // Branches are shared evenly between at least two trees so both labels occur.
  const int n_trees = spec.tube_count < 2 ? 1 : std::max(2, (spec.tube_count + 2) / 3);
  const int tree_budget = (spec.tube_count + n_trees - 1) / n_trees;

  std::vector<Tube> tubes;
  int tree = 0;
  while (static_cast<int>(tubes.size()) < spec.tube_count) {
    const int tree_end = std::min(spec.tube_count, static_cast<int>(tubes.size()) + tree_budget);
    Tube trunk;
    trunk.label = tree % 2 == 0 ? labels::kArtery : labels::kVein;
    trunk.radius_mm = rng.uniform(spec.radius_min_mm, spec.radius_max_mm);
    const Vec3 start{rng.uniform(0.15, 0.85) * extent.x, rng.uniform(0.15, 0.85) * extent.y,
                     rng.uniform(0.15, 0.85) * extent.z};
    trunk.axis = kinked_axis(start, random_unit(rng), rng.uniform(0.5, 0.9) * min_extent, rng);
    tubes.push_back(std::move(trunk));
    ++tree;

    std::deque<int> open{static_cast<int>(tubes.size()) - 1};
    while (!open.empty() && static_cast<int>(tubes.size()) < tree_end) {
      const int parent = open.front();
      open.pop_front();
      const double child_radius = tubes[parent].radius_mm * kBranchRadiusFactor;
      const auto children = static_cast<int>(rng.next() % 3);
      if (child_radius < spec.radius_min_mm) continue;
      for (int c = 0; c < children && static_cast<int>(tubes.size()) < tree_end; ++c) {
        const auto [at, dir] = point_along(tubes[parent].axis, rng.uniform(0.3, 0.9));
        const double angle = rng.uniform(30.0, 70.0) * std::numbers::pi / 180.0;
        double parent_len = 0.0;
        for (std::size_t i = 1; i < tubes[parent].axis.size(); ++i) {
          const Vec3 s = tubes[parent].axis[i] - tubes[parent].axis[i - 1];
          parent_len += std::sqrt(dot(s, s));
        }
        Tube child;
        child.label = tubes[parent].label;
        child.radius_mm = child_radius;
        child.parent = parent;
        child.generation = tubes[parent].generation + 1;
        child.axis = kinked_axis(at, deflect(dir, angle, rng), 0.7 * parent_len, rng);
        tubes.push_back(std::move(child));
        open.push_back(static_cast<int>(tubes.size()) - 1);
      }
    }
  }
  return tubes;
}

PhantomCase render_case(const PhantomSpec& spec, std::vector<Tube> tubes) {
  const Geometry g = spec.geometry();
  validate_geometry(g);
  PhantomCase out;
  out.vessel_mask = LabelMask(g, labels::kBackground);

  for (const Tube& tube : tubes) {
    if (!(tube.radius_mm > 0.0) || tube.axis.empty()) throw InvalidArgument("phantom: tubes need radius > 0 and an axis");
    Index3 lo, hi;
    for (int a = 0; a < 3; ++a) {
      double mn = tube.axis[0][a], mx = tube.axis[0][a];
      for (const Vec3& p : tube.axis) {
        mn = std::min(mn, p[a]);
        mx = std::max(mx, p[a]);
      }
      lo[a] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((mn - tube.radius_mm - g.origin[a]) / g.spacing[a])));
      hi[a] = std::min<std::int64_t>(g.dims[a] - 1,
                                     static_cast<std::int64_t>(std::ceil((mx + tube.radius_mm - g.origin[a]) / g.spacing[a])));
    }
    for (std::int64_t z = lo.z; z <= hi.z; ++z) {
      for (std::int64_t y = lo.y; y <= hi.y; ++y) {
        for (std::int64_t x = lo.x; x <= hi.x; ++x) {
          if (distance_to_polyline(g.voxel_center({x, y, z}), tube.axis) <= tube.radius_mm) {
            out.vessel_mask.at(x, y, z) = tube.label;
          }
        }
      }
    }
  }

  out.ncct = Volume(g, spec.parenchyma_hu);
  out.ctpa = Volume(g, spec.parenchyma_hu);
  for (std::size_t i = 0; i < out.vessel_mask.size(); ++i) {
    const std::uint8_t l = out.vessel_mask[i];
    if (l == labels::kBackground) continue;
    out.ncct[i] = spec.vessel_hu_ncct;
    out.ctpa[i] = l == labels::kArtery ? spec.artery_hu_ctpa : spec.vein_hu_ctpa;
  }
  if (spec.noise_sigma_hu > 0.0f) {
    GaussianStream ncct_noise(derive_seed(spec.seed, 1));
    GaussianStream ctpa_noise(derive_seed(spec.seed, 2));
    const double sigma = spec.noise_sigma_hu;
    for (std::size_t i = 0; i < out.ncct.size(); ++i) {
      out.ncct[i] += static_cast<float>(sigma * ncct_noise.next());
      out.ctpa[i] += static_cast<float>(sigma * ctpa_noise.next());
    }
  }
  out.tubes = std::move(tubes);
  return out;
}

PhantomCase generate_case(const PhantomSpec& spec) { return render_case(spec, generate_tubes(spec)); }

std::vector<PhantomCase> generate_cohort(const PhantomSpec& base, int n_cases, std::uint64_t seed_stride,
                                         unsigned threads) {
  if (n_cases < 1) throw InvalidArgument("phantom: n_cases must be >= 1");
  base.validate();
  std::vector<PhantomCase> cases(static_cast<std::size_t>(n_cases));
  parallel_for(cases.size(), threads, [&](std::size_t k) {
    PhantomSpec spec = base;
    spec.seed = base.seed + static_cast<std::uint64_t>(k) * seed_stride;
    cases[k] = generate_case(spec);
  });
  return cases;
}

}  // namespace vesselforge
