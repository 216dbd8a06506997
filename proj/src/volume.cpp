#include "vesselforge/volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vesselforge {

namespace {
const char* axis_name(int a) { return a == 0 ? "x" : a == 1 ? "y" : "z"; }
}  // namespace

void validate_geometry(const Geometry& g) {
  for (int a = 0; a < 3; ++a) {
    if (g.dims[a] < 1) {
      throw InvalidArgument(std::string("geometry: dims along ") + axis_name(a) + " must be >= 1");
    }
    if (!(g.spacing[a] > 0.0) || !std::isfinite(g.spacing[a])) {
      throw InvalidArgument(std::string("geometry: spacing along ") + axis_name(a) +
                            " must be finite and > 0");
    }
    if (!std::isfinite(g.origin[a])) {
      throw InvalidArgument(std::string("geometry: origin along ") + axis_name(a) + " is not finite");
    }
  }
}

VolumeStats compute_stats(const Volume& v) {
  VolumeStats s;
  s.voxel_count = v.size();
  s.min_hu = std::numeric_limits<float>::infinity();
  s.max_hu = -std::numeric_limits<float>::infinity();
  double sum = 0.0;
  for (float x : v.values()) {
    s.min_hu = std::min(s.min_hu, x);
    s.max_hu = std::max(s.max_hu, x);
    sum += x;
  }
  s.mean_hu = sum / static_cast<double>(s.voxel_count);
  // Summation error can push the mean a hair outside [min, max].
  s.mean_hu = std::clamp(s.mean_hu, static_cast<double>(s.min_hu), static_cast<double>(s.max_hu));
  return s;
}

void require_finite(const Volume& v) {
  const auto values = v.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      const Index3 c = v.coord(i);
      throw DataError("non-finite value at voxel (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                      "," + std::to_string(c.z) + ")");
    }
  }
}

bool same_lattice(const Geometry& a, const Geometry& b) {
  return a.dims == b.dims && a.spacing == b.spacing;
}

void require_same_lattice(const Geometry& a, const Geometry& b, const std::string& what) {
  if (a.dims != b.dims) throw GeometryError(what + ": dims differ");
  if (a.spacing != b.spacing) throw GeometryError(what + ": spacing differs");
}

void check_window(const Dims& dims, const Index3& origin, const Dims& size) {
  for (int a = 0; a < 3; ++a) {
    if (size[a] < 1) throw GeometryError(std::string("window size along ") + axis_name(a) + " must be >= 1");
    if (origin[a] < 0 || origin[a] + size[a] > dims[a]) {
      throw GeometryError(std::string("window out of bounds along ") + axis_name(a) + ": [" +
                          std::to_string(origin[a]) + ", " + std::to_string(origin[a] + size[a]) +
                          ") exceeds extent " + std::to_string(dims[a]));
    }
  }
}

Volume subtract(const Volume& a, const Volume& b) {
  require_same_lattice(a.geometry(), b.geometry(), "subtract");
  Volume out(a.geometry());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

}  // namespace vesselforge
