#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vesselforge/error.hpp"

namespace vesselforge {

// Voxel counts per axis.
struct Dims {
  std::int64_t nx = 1;
  std::int64_t ny = 1;
  std::int64_t nz = 1;

  std::int64_t operator[](int axis) const { return axis == 0 ? nx : axis == 1 ? ny : nz; }
  std::int64_t& operator[](int axis) { return axis == 0 ? nx : axis == 1 ? ny : nz; }
  std::size_t count() const { return static_cast<std::size_t>(nx * ny * nz); }
  friend bool operator==(const Dims&, const Dims&) = default;
};

// Integer voxel coordinate (also used for patch origins).
struct Index3 {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  std::int64_t operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
  std::int64_t& operator[](int axis) { return axis == 0 ? x : axis == 1 ? y : z; }
  friend bool operator==(const Index3&, const Index3&) = default;
  friend auto operator<=>(const Index3&, const Index3&) = default;
};

// Physical triple in millimeters.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
  double& operator[](int axis) { return axis == 0 ? x : axis == 1 ? y : z; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

// Placement of a voxel grid in space. spacing is mm per voxel, origin is the
// physical position of voxel (0,0,0).
struct Geometry {
  Dims dims;
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};

  friend bool operator==(const Geometry&, const Geometry&) = default;

  double voxel_volume_mm3() const { return spacing.x * spacing.y * spacing.z; }
  Vec3 voxel_center(const Index3& i) const {
    return {origin.x + static_cast<double>(i.x) * spacing.x,
            origin.y + static_cast<double>(i.y) * spacing.y,
            origin.z + static_cast<double>(i.z) * spacing.z};
  }
};

// Throws InvalidArgument unless dims >= 1 and spacing > 0 on every axis.
void validate_geometry(const Geometry& g);

// Dense 3D grid, x-fastest: value at (x,y,z) lives at x + nx*y + nx*ny*z.
template <class T>
class Grid {
 public:
  using value_type = T;

  Grid() : values_(1) {}
  explicit Grid(const Geometry& geometry, T fill = T{})
      : geometry_(geometry), values_(checked_count(geometry), fill) {}
  Grid(const Geometry& geometry, std::vector<T> values)
      : geometry_(geometry), values_(std::move(values)) {
    if (values_.size() != checked_count(geometry_)) {
      throw InvalidArgument("grid: values length " + std::to_string(values_.size()) +
                            " does not match dims product " +
                            std::to_string(geometry_.dims.count()));
    }
  }

  const Geometry& geometry() const { return geometry_; }
  const Dims& dims() const { return geometry_.dims; }
  const Vec3& spacing() const { return geometry_.spacing; }
  const Vec3& origin() const { return geometry_.origin; }
  std::size_t size() const { return values_.size(); }

  std::size_t linear_index(std::int64_t x, std::int64_t y, std::int64_t z) const {
    const auto& d = geometry_.dims;
    return static_cast<std::size_t>(x + d.nx * (y + d.ny * z));
  }
  std::size_t linear_index(const Index3& i) const { return linear_index(i.x, i.y, i.z); }
  Index3 coord(std::size_t linear) const {
    const auto& d = geometry_.dims;
    const auto l = static_cast<std::int64_t>(linear);
    return {l % d.nx, (l / d.nx) % d.ny, l / (d.nx * d.ny)};
  }
  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
    const auto& d = geometry_.dims;
    return x >= 0 && y >= 0 && z >= 0 && x < d.nx && y < d.ny && z < d.nz;
  }

  T& at(std::int64_t x, std::int64_t y, std::int64_t z) { return values_[linear_index(x, y, z)]; }
  const T& at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return values_[linear_index(x, y, z)];
  }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static std::size_t checked_count(const Geometry& g) {
    validate_geometry(g);
    return g.dims.count();
  }

  Geometry geometry_;
  std::vector<T> values_;
};

// HU intensities. Every value must be finite.
using Volume = Grid<float>;
// 8-bit labels. Vessel masks: 0 background, 1 artery, 2 vein.
using LabelMask = Grid<std::uint8_t>;

namespace labels {
inline constexpr std::uint8_t kBackground = 0;
inline constexpr std::uint8_t kArtery = 1;
inline constexpr std::uint8_t kVein = 2;
}  // namespace labels

struct VolumeStats {
  float min_hu = 0.0f;
  float max_hu = 0.0f;
  double mean_hu = 0.0;
  std::size_t voxel_count = 0;
};

VolumeStats compute_stats(const Volume& v);

// Throws DataError naming the first non-finite voxel.
void require_finite(const Volume& v);

// True when dims and spacing agree (origin is ignored).
bool same_lattice(const Geometry& a, const Geometry& b);
void require_same_lattice(const Geometry& a, const Geometry& b, const std::string& what);

// Throws GeometryError naming the offending axis if origin+size exceeds dims.
void check_window(const Dims& dims, const Index3& origin, const Dims& size);

// Copies the window [origin, origin+size) into a new grid whose origin_mm is
// shifted by origin*spacing.
template <class T>
Grid<T> extract_patch(const Grid<T>& src, const Index3& origin, const Dims& size) {
  check_window(src.dims(), origin, size);
  Geometry g = src.geometry();
  g.dims = size;
  for (int a = 0; a < 3; ++a) g.origin[a] += static_cast<double>(origin[a]) * g.spacing[a];
  Grid<T> out(g);
  for (std::int64_t z = 0; z < size.nz; ++z) {
    for (std::int64_t y = 0; y < size.ny; ++y) {
      const T* row = &src.at(origin.x, origin.y + y, origin.z + z);
      T* dst = &out.at(0, y, z);
      for (std::int64_t x = 0; x < size.nx; ++x) dst[x] = row[x];
    }
  }
  return out;
}

// num[region] += weight*patch, den[region] += weight. Accumulators may be
// float or double grids.
template <class Acc>
void paste_accumulate(Grid<Acc>& num, Grid<Acc>& den, const Volume& patch, const Volume& weight,
                      const Index3& origin) {
  if (patch.dims() != weight.dims()) throw GeometryError("paste_accumulate: patch/weight dims differ");
  if (num.dims() != den.dims()) throw GeometryError("paste_accumulate: num/den dims differ");
  check_window(num.dims(), origin, patch.dims());
  for (float w : weight.values()) {
    if (!(w >= 0.0f)) throw InvalidArgument("paste_accumulate: weights must be >= 0");
  }
  const Dims& size = patch.dims();
  for (std::int64_t z = 0; z < size.nz; ++z) {
    for (std::int64_t y = 0; y < size.ny; ++y) {
      Acc* n = &num.at(origin.x, origin.y + y, origin.z + z);
      Acc* d = &den.at(origin.x, origin.y + y, origin.z + z);
      const float* p = &patch.at(0, y, z);
      const float* w = &weight.at(0, y, z);
      for (std::int64_t x = 0; x < size.nx; ++x) {
        n[x] += static_cast<Acc>(w[x]) * static_cast<Acc>(p[x]);
        d[x] += static_cast<Acc>(w[x]);
      }
    }
  }
}

// Elementwise a - b; dims and spacing must agree. The result takes a's origin.
Volume subtract(const Volume& a, const Volume& b);

}  // namespace vesselforge
