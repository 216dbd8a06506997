#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "vesselforge/distance.hpp"
#include "vesselforge/phantom.hpp"

using namespace vesselforge;

TEST_CASE("edt of all-foreground mask is the volume diagonal sentinel") {
  LabelMask m(Geometry{{3, 3, 3}, {1, 1, 1}, {}}, 1);
  const auto edt = euclidean_distance_transform(m, Foreground::label(1));
  for (double v : edt.values()) CHECK(v == doctest::Approx(std::sqrt(27.0)));
}

TEST_CASE("edt of an isolated voxel is one spacing") {
  LabelMask m(Geometry{{3, 3, 3}, {1, 1, 1}, {}}, 0);
  m.at(1, 1, 1) = 1;
  const auto edt = euclidean_distance_transform(m, Foreground::label(1));
  CHECK(edt.at(1, 1, 1) == 1.0);
  CHECK(edt.at(0, 0, 0) == 0.0);
}

TEST_CASE("edt of a rod with anisotropic spacing sees the lateral background") {
  // 3x3xN grid, rod along z at (1,1); spacing (1,1,2).
  LabelMask m(Geometry{{3, 3, 6}, {1, 1, 2}, {}}, 0);
  for (int z = 0; z < 6; ++z) m.at(1, 1, z) = 1;
  const auto edt = euclidean_distance_transform(m, Foreground::label(1));
  const auto brute = oracle::brute_edt(m, 1);
  for (int z = 0; z < 6; ++z) {
    CHECK(edt.at(1, 1, z) == doctest::Approx(1.0));
    CHECK(std::abs(edt.at(1, 1, z) - brute[m.linear_index(1, 1, z)]) < 1e-12);
  }
}

TEST_CASE("edt rejects an empty foreground") {
  LabelMask m(Geometry{{4, 4, 4}, {1, 1, 1}, {}}, 0);
  CHECK_THROWS_AS(euclidean_distance_transform(m, Foreground::label(1)), DataError);
}

TEST_CASE("edt matches brute force on random small masks") {
  SplitMix64 rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    const Dims d{1 + static_cast<std::int64_t>(rng.next() % 12), 1 + static_cast<std::int64_t>(rng.next() % 12),
                 1 + static_cast<std::int64_t>(rng.next() % 12)};
    const Vec3 s{rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)};
    LabelMask m(Geometry{d, s, {}}, 0);
    const double p = rng.uniform(0.2, 0.95);
    bool any_fg = false, any_bg = false;
    for (auto& v : m.values()) {
      v = rng.uniform() < p ? 1 : 0;
      any_fg |= v == 1;
      any_bg |= v == 0;
    }
    if (!any_fg || !any_bg) continue;
    const auto edt = euclidean_distance_transform(m, Foreground::label(1), 1 + trial % 3);
    const auto brute = oracle::brute_edt(m, 1);
    for (std::size_t i = 0; i < m.size(); ++i) REQUIRE(std::abs(edt[i] - brute[i]) <= 1e-6);
  }
}

TEST_CASE("feature transform reports a nearest site") {
  Geometry g{{7, 5, 4}, {1.0, 0.5, 2.0}, {}};
  std::vector<std::uint8_t> sites(g.dims.count(), 0);
  sites[3] = sites[40] = sites[121] = 1;
  const auto ft = feature_transform(g, sites);
  LabelMask probe(g, 0);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto p = probe.coord(i);
    double best = 1e300;
    for (std::size_t j = 0; j < sites.size(); ++j) {
      if (!sites[j]) continue;
      const auto q = probe.coord(j);
      const double dx = (p.x - q.x) * 1.0, dy = (p.y - q.y) * 0.5, dz = (p.z - q.z) * 2.0;
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    CHECK(ft.squared_mm2[i] == doctest::Approx(best));
    REQUIRE(sites[static_cast<std::size_t>(ft.nearest[i])]);
  }
}
