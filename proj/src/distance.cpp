#include "vesselforge/distance.hpp"

#include <cmath>
#include <limits>

#include "vesselforge/parallel.hpp"

namespace vesselforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Scratch for one 1D pass; reused across the lines of a plane.
struct LineScratch {
  std::vector<double> f, d;
  std::vector<std::int64_t> feat_in, feat_out;
  std::vector<std::int64_t> v;
  std::vector<double> z;

  void resize(std::size_t n) {
    f.resize(n);
    d.resize(n);
    feat_in.resize(n);
    feat_out.resize(n);
    v.resize(n);
    z.resize(n + 1);
  }
};

// d[q] = min_p w*(q-p)^2 + f[p] over the lower envelope of parabolas rooted
// at finite f[p] (Felzenszwalb-Huttenlocher). feat_out carries feat_in of the
// minimizing p.
void envelope_1d(std::size_t n, double w, LineScratch& s) {
  std::int64_t k = -1;
  for (std::size_t q = 0; q < n; ++q) {
    if (!std::isfinite(s.f[q])) continue;
    const auto qi = static_cast<std::int64_t>(q);
    if (k < 0) {
      k = 0;
      s.v[0] = qi;
      s.z[0] = -kInf;
      s.z[1] = kInf;
      continue;
    }
    auto intersect = [&](std::int64_t p) {
      const double fq = s.f[q] + w * static_cast<double>(qi * qi);
      const double fp = s.f[p] + w * static_cast<double>(p * p);
      return (fq - fp) / (2.0 * w * static_cast<double>(qi - p));
    };
    double x = intersect(s.v[k]);
    while (x <= s.z[k]) {
      --k;
      x = intersect(s.v[k]);
    }
    ++k;
    s.v[k] = qi;
    s.z[k] = x;
    s.z[k + 1] = kInf;
  }
  if (k < 0) {
    for (std::size_t q = 0; q < n; ++q) {
      s.d[q] = kInf;
      s.feat_out[q] = -1;
    }
    return;
  }
  std::int64_t j = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (s.z[j + 1] < static_cast<double>(q)) ++j;
    const auto p = s.v[j];
    const double dq = static_cast<double>(static_cast<std::int64_t>(q) - p);
    s.d[q] = w * dq * dq + s.f[p];
    s.feat_out[q] = s.feat_in[p];
  }
}

void pass_along_axis(const Geometry& g, int axis, FeatureTransform& ft, unsigned threads) {
  const Dims& d = g.dims;
  const std::int64_t n = d[axis];
  const std::int64_t stride = axis == 0 ? 1 : axis == 1 ? d.nx : d.nx * d.ny;
  const double w = g.spacing[axis] * g.spacing[axis];
  // Lines are enumerated by the two other axes; parallelize over the outer one.
  const int a1 = axis == 0 ? 1 : 0;
  const int a2 = axis == 2 ? 1 : 2;
  const std::int64_t s1 = a1 == 0 ? 1 : d.nx;
  const std::int64_t s2 = a2 == 1 ? d.nx : d.nx * d.ny;
  parallel_for(static_cast<std::size_t>(d[a2]), threads, [&](std::size_t outer) {
    LineScratch s;
    s.resize(static_cast<std::size_t>(n));
    for (std::int64_t inner = 0; inner < d[a1]; ++inner) {
      const std::int64_t base = inner * s1 + static_cast<std::int64_t>(outer) * s2;
      for (std::int64_t q = 0; q < n; ++q) {
        s.f[q] = ft.squared_mm2[base + q * stride];
        s.feat_in[q] = ft.nearest[base + q * stride];
      }
      envelope_1d(static_cast<std::size_t>(n), w, s);
      for (std::int64_t q = 0; q < n; ++q) {
        ft.squared_mm2[base + q * stride] = s.d[q];
        ft.nearest[base + q * stride] = s.feat_out[q];
      }
    }
  });
}

}  // namespace

double volume_diagonal_mm(const Geometry& g) {
  double sum = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double e = static_cast<double>(g.dims[a]) * g.spacing[a];
    sum += e * e;
  }
  return std::sqrt(sum);
}

FeatureTransform feature_transform(const Geometry& g, const std::vector<std::uint8_t>& sites, unsigned threads) {
  if (sites.size() != g.dims.count()) throw GeometryError("feature_transform: site count does not match dims");
  FeatureTransform ft;
  ft.squared_mm2.resize(sites.size());
  ft.nearest.resize(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    ft.squared_mm2[i] = sites[i] ? 0.0 : kInf;
    ft.nearest[i] = sites[i] ? static_cast<std::int64_t>(i) : -1;
  }
  for (int axis = 0; axis < 3; ++axis) pass_along_axis(g, axis, ft, threads);
  return ft;
}

DistanceMap euclidean_distance_transform(const LabelMask& mask, Foreground fg, unsigned threads) {
  std::vector<std::uint8_t> background(mask.size());
  std::size_t fg_count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const bool in = fg(mask[i]);
    fg_count += in;
    background[i] = !in;
  }
  if (fg_count == 0) throw DataError("distance transform: mask has no foreground voxels");
  DistanceMap out(mask.geometry(), 0.0);
  if (fg_count == mask.size()) {
    const double diag = volume_diagonal_mm(mask.geometry());
    for (auto& v : out.values()) v = diag;
    return out;
  }
  const FeatureTransform ft = feature_transform(mask.geometry(), background, threads);
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = background[i] ? 0.0 : std::sqrt(ft.squared_mm2[i]);
  return out;
}

}  // namespace vesselforge
