#include <cmath>

#include "doctest.h"
#include "vesselforge/volume.hpp"

using namespace vesselforge;

namespace {

Volume ramp(const Dims& d) {
  Volume v(Geometry{d, {1.0, 2.0, 3.0}, {10.0, 20.0, 30.0}});
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(i);
  return v;
}

}  // namespace

TEST_CASE("x-fastest index convention") {
  const Volume v = ramp({4, 3, 2});
  for (std::int64_t z = 0; z < 2; ++z)
    for (std::int64_t y = 0; y < 3; ++y)
      for (std::int64_t x = 0; x < 4; ++x) CHECK(v.at(x, y, z) == static_cast<float>(x + 4 * y + 12 * z));
  CHECK(v.coord(17) == Index3{1, 1, 1});
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(Volume(Geometry{{0, 1, 1}, {1, 1, 1}, {}}), InvalidArgument);
  CHECK_THROWS_AS(Volume(Geometry{{1, 1, 1}, {1, 0, 1}, {}}), InvalidArgument);
  CHECK_THROWS_AS(Volume(Geometry{{2, 1, 1}, {1, 1, 1}, {}}, std::vector<float>{1.0f}), InvalidArgument);
}

TEST_CASE("extract_patch") {
  const Volume v = ramp({4, 4, 4});
  SUBCASE("full window copies") {
    const Volume p = extract_patch(v, {0, 0, 0}, v.dims());
    CHECK(p == v);
  }
  SUBCASE("ramp sub-block") {
    const Volume p = extract_patch(v, {1, 1, 1}, {2, 2, 2});
    const std::vector<float> expect{21, 22, 25, 26, 37, 38, 41, 42};
    CHECK(std::vector<float>(p.values().begin(), p.values().end()) == expect);
    CHECK(p.origin() == Vec3{11.0, 22.0, 33.0});
    CHECK(p.spacing() == v.spacing());
  }
  SUBCASE("out of bounds names the axis") {
    const Volume line(Geometry{{4, 1, 1}, {1, 1, 1}, {}});
    try {
      extract_patch(line, {3, 0, 0}, {2, 1, 1});
      FAIL("expected GeometryError");
    } catch (const GeometryError& e) {
      CHECK(std::string(e.what()).find('x') != std::string::npos);
    }
    CHECK_THROWS_AS(extract_patch(line, {0, 0, 0}, {1, 2, 1}), GeometryError);
    CHECK_THROWS_AS(extract_patch(line, {-1, 0, 0}, {1, 1, 1}), GeometryError);
  }
}

TEST_CASE("paste_accumulate") {
  const Geometry g{{6, 1, 1}, {1, 1, 1}, {}};
  SUBCASE("zero weight leaves buffers unchanged") {
    Grid<double> num(g, 0.0), den(g, 0.0);
    const Volume patch(Geometry{{3, 1, 1}, {1, 1, 1}, {}}, 5.0f);
    const Volume w(patch.geometry(), 0.0f);
    paste_accumulate(num, den, patch, w, {1, 0, 0});
    for (std::size_t i = 0; i < num.size(); ++i) {
      CHECK(num[i] == 0.0);
      CHECK(den[i] == 0.0);
    }
  }
  SUBCASE("unit weight reconstructs the patch") {
    const Volume v = ramp({6, 1, 1});
    Grid<double> num(g, 0.0), den(g, 0.0);
    const Volume p = extract_patch(v, {2, 0, 0}, {3, 1, 1});
    paste_accumulate(num, den, p, Volume(p.geometry(), 1.0f), {2, 0, 0});
    for (std::int64_t x = 2; x < 5; ++x) CHECK(num.at(x, 0, 0) / den.at(x, 0, 0) == v.at(x, 0, 0));
  }
  SUBCASE("overlapping pastes average") {
    Grid<double> num(g, 0.0), den(g, 0.0);
    const Geometry pg{{4, 1, 1}, {1, 1, 1}, {}};
    paste_accumulate(num, den, Volume(pg, 10.0f), Volume(pg, 1.0f), {0, 0, 0});
    paste_accumulate(num, den, Volume(pg, 30.0f), Volume(pg, 1.0f), {2, 0, 0});
    CHECK(num.at(1, 0, 0) / den.at(1, 0, 0) == 10.0);
    CHECK(num.at(2, 0, 0) / den.at(2, 0, 0) == 20.0);
    CHECK(num.at(3, 0, 0) / den.at(3, 0, 0) == 20.0);
    CHECK(num.at(5, 0, 0) / den.at(5, 0, 0) == 30.0);
  }
  SUBCASE("errors") {
    Grid<float> num(g, 0.0f), den(g, 0.0f);
    const Volume p(Geometry{{2, 1, 1}, {1, 1, 1}, {}}, 1.0f);
    CHECK_THROWS_AS(paste_accumulate(num, den, p, Volume(Geometry{{3, 1, 1}, {1, 1, 1}, {}}, 1.0f), {0, 0, 0}),
                    GeometryError);
    CHECK_THROWS_AS(paste_accumulate(num, den, p, Volume(p.geometry(), 1.0f), {5, 0, 0}), GeometryError);
    CHECK_THROWS_AS(paste_accumulate(num, den, p, Volume(p.geometry(), -1.0f), {0, 0, 0}), InvalidArgument);
  }
}

TEST_CASE("subtract") {
  const Geometry g{{2, 1, 1}, {1, 1, 1}, {}};
  const Volume a(g, std::vector<float>{100, 50});
  const Volume b(g, std::vector<float>{40, 60});
  const Volume d = subtract(a, b);
  CHECK(d[0] == 60.0f);
  CHECK(d[1] == -10.0f);
  CHECK(subtract(a, a) == Volume(g, 0.0f));
  CHECK(subtract(a, Volume(g, 0.0f)) == a);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(d[i] + b[i] == a[i]);
  CHECK_THROWS_AS(subtract(a, Volume(Geometry{{2, 1, 1}, {2, 1, 1}, {}})), GeometryError);
  CHECK_THROWS_AS(subtract(a, Volume(Geometry{{1, 2, 1}, {1, 1, 1}, {}})), GeometryError);
}

TEST_CASE("stats and finiteness") {
  const Geometry g{{3, 1, 1}, {1, 1, 1}, {}};
  const VolumeStats s = compute_stats(Volume(g, std::vector<float>{-1, 2, 5}));
  CHECK(s.min_hu == -1.0f);
  CHECK(s.max_hu == 5.0f);
  CHECK(s.mean_hu == doctest::Approx(2.0));
  CHECK(s.voxel_count == 3);
  const VolumeStats c = compute_stats(Volume(g, 0.1f));
  CHECK(c.min_hu <= c.mean_hu);
  CHECK(c.mean_hu <= c.max_hu);
  CHECK_THROWS_AS(require_finite(Volume(g, std::vector<float>{0, NAN, 0})), DataError);
  CHECK_NOTHROW(require_finite(Volume(g, 1.0f)));
}
