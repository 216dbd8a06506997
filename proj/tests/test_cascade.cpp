#include <atomic>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "vesselforge/cascade.hpp"
#include "vesselforge/hash.hpp"
#include "vesselforge/metrics.hpp"
#include "vesselforge/phantom.hpp"
#include "vesselforge/vvol.hpp"

using namespace vesselforge;

namespace {

// Constant-per-patch backend: patch id k yields 100*(k+1).
class TileValueBackend final : public SynthBackend {
 public:
  Volume process(const Volume& patch, int, std::uint64_t id) override {
    return Volume(patch.geometry(), 100.0f * static_cast<float>(id + 1));
  }
  std::string describe() const override { return "tile-value"; }
};

class AddBackend final : public SynthBackend {
 public:
  explicit AddBackend(float c) : c_(c) {}
  Volume process(const Volume& patch, int, std::uint64_t) override {
    Volume out = patch;
    for (float& v : out.values()) v += c_;
    return out;
  }
  std::string describe() const override { return "add"; }

 private:
  float c_;
};

class ConstBackend final : public SynthBackend {
 public:
  explicit ConstBackend(float c) : c_(c) {}
  Volume process(const Volume& patch, int, std::uint64_t) override { return Volume(patch.geometry(), c_); }
  std::string describe() const override { return "const"; }

 private:
  float c_;
};

class FailingBackend final : public SynthBackend {
 public:
  explicit FailingBackend(std::uint64_t bad) : bad_(bad) {}
  Volume process(const Volume& patch, int, std::uint64_t id) override {
    if (id == bad_) throw DataError("synthetic failure");
    return patch;
  }
  std::string describe() const override { return "failing"; }

 private:
  std::uint64_t bad_;
};

class ShapeBackend final : public SynthBackend {
 public:
  Volume process(const Volume& patch, int, std::uint64_t) override {
    Geometry g = patch.geometry();
    g.dims.nx += 1;
    return Volume(g);
  }
  std::string describe() const override { return "shape"; }
};

Volume random_volume(const Geometry& g, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Volume v(g);
  for (auto& x : v.values()) x = static_cast<float>(rng.uniform(-1000.0, 1000.0));
  return v;
}

double weight_1d(std::int64_t i, std::int64_t p, double frac) {
  const double c = (static_cast<double>(p) - 1.0) / 2.0;
  const double s = static_cast<double>(p) * frac;
  return std::exp(-(i - c) * (i - c) / (2 * s * s));
}

}  // namespace

TEST_CASE("gaussian weight map") {
  const Volume w = gaussian_weight_map({4, 1, 1}, 0.25);
  CHECK(w[0] == doctest::Approx(std::exp(-1.125)).epsilon(1e-7));
  CHECK(w[1] == doctest::Approx(std::exp(-0.125)).epsilon(1e-7));
  CHECK(w[2] == w[1]);
  CHECK(w[3] == w[0]);

  const Volume odd = gaussian_weight_map({5, 5, 5}, 0.125);
  CHECK(odd.at(2, 2, 2) == 1.0f);
  const Volume tiny = gaussian_weight_map({96, 96, 96}, 0.01);
  for (float v : tiny.values()) CHECK(v > 0.0f);
  CHECK_THROWS_AS(gaussian_weight_map({4, 4, 4}, 0.0), InvalidArgument);
}

TEST_CASE("tile origins") {
  CHECK(axis_origins(96, 64, 0.5) == std::vector<std::int64_t>{0, 32});
  CHECK(axis_origins(100, 64, 0.5) == std::vector<std::int64_t>{0, 32, 36});
  CHECK(axis_origins(64, 64, 0.5) == std::vector<std::int64_t>{0});
  CHECK(axis_origins(10, 3, 0.0) == std::vector<std::int64_t>{0, 3, 6, 7});
  CHECK(axis_origins(5, 2, 0.9) == std::vector<std::int64_t>{0, 1, 2, 3});
  CHECK_THROWS_AS(axis_origins(10, 11, 0.5), GeometryError);
  CHECK_THROWS_AS(axis_origins(10, 5, 1.0), InvalidArgument);

  const auto t = tile_origins({96, 100, 64}, {64, 64, 64}, 0.5);
  REQUIRE(t.size() == 6);
  CHECK(t[0] == Index3{0, 0, 0});
  CHECK(t[1] == Index3{32, 0, 0});
  CHECK(t[2] == Index3{0, 32, 0});
  CHECK(t[5] == Index3{32, 36, 0});
}

TEST_CASE("coverage over random configurations") {
  SplitMix64 rng(77);
  const double overlaps[] = {0.0, 0.25, 0.5};
  for (int k = 0; k < 25; ++k) {
    Dims d{1 + static_cast<std::int64_t>(rng.next() % 24), 1 + static_cast<std::int64_t>(rng.next() % 24),
           1 + static_cast<std::int64_t>(rng.next() % 24)};
    Dims p{1 + static_cast<std::int64_t>(rng.next() % d.nx), 1 + static_cast<std::int64_t>(rng.next() % d.ny),
           1 + static_cast<std::int64_t>(rng.next() % d.nz)};
    const double ov = overlaps[rng.next() % 3];
    CAPTURE(k);
    const Volume in(Geometry{d, {1, 1, 1}, {}}, 5.0f);
    auto id = builtin_backend("identity");
    const auto origins = tile_origins(d, p, ov);
    const StageBuffers b = accumulate_stage(in, *id, 1, origins, p, 0.125);
    for (double den : b.den.values()) CHECK(den > 0.0);
  }
}

TEST_CASE("central box and routing") {
  const Box b = central_box({0, 0, 0}, {64, 64, 64}, 0.5);
  CHECK(b.lo == Index3{16, 16, 16});
  CHECK(b.size == Dims{32, 32, 32});
  const Box odd = central_box({10, 0, 0}, {5, 5, 5}, 0.5);
  CHECK(odd.size == Dims{3, 3, 3});
  CHECK(odd.lo == Index3{11, 1, 1});

  const Geometry g{{64, 64, 64}, {1, 1, 1}, {}};
  LabelMask csa(g, 0);
  CHECK_FALSE(route_patch(csa, {0, 0, 0}, {64, 64, 64}, 0.5).routed);

  csa.at(32, 32, 32) = static_cast<std::uint8_t>(CsaClass::Small);
  const RoutingDecision r = route_patch(csa, {0, 0, 0}, {64, 64, 64}, 0.5);
  CHECK(r.routed);
  CHECK(r.small_voxels_in_center == 1);

  LabelMask border(g, 0);
  for (std::int64_t i = 0; i < 64; ++i) {
    border.at(i, 2, 3) = 1;
    border.at(60, i, 40) = 1;
    border.at(30, 30, i % 4) = 1;
  }
  CHECK_FALSE(route_patch(border, {0, 0, 0}, {64, 64, 64}, 0.5).routed);
  border.at(40, 40, 40) = static_cast<std::uint8_t>(CsaClass::Large);
  CHECK_FALSE(route_patch(border, {0, 0, 0}, {64, 64, 64}, 0.5).routed);
  CHECK_THROWS_AS(route_patch(border, {1, 0, 0}, {64, 64, 64}, 0.5), GeometryError);
}

TEST_CASE("routing matches a direct scan") {
  SplitMix64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const Geometry g{{12 + static_cast<std::int64_t>(rng.next() % 8), 10, 11}, {1, 1, 1}, {}};
    LabelMask csa(g, 0);
    for (auto& v : csa.values()) v = rng.uniform() < 0.02 ? 1 : static_cast<std::uint8_t>(rng.next() % 2 ? 0 : 3);
    const Dims p{6, 5, 7};
    const auto origins = tile_origins(g.dims, p, 0.5);
    const auto fast = route_patches(csa, origins, p, 0.5);
    for (std::size_t i = 0; i < origins.size(); ++i) {
      const Box b = central_box(origins[i], p, 0.5);
      std::int64_t n = 0;
      for (std::int64_t z = b.lo.z; z < b.lo.z + b.size.nz; ++z)
        for (std::int64_t y = b.lo.y; y < b.lo.y + b.size.ny; ++y)
          for (std::int64_t x = b.lo.x; x < b.lo.x + b.size.nx; ++x) n += csa.at(x, y, z) == 1;
      CHECK(fast[i].small_voxels_in_center == n);
      CHECK(fast[i].routed == (n > 0));
    }
  }
}

TEST_CASE("run_stage with simple backends") {
  const Geometry g{{30, 20, 17}, {0.5, 0.5, 0.5}, {1, 2, 3}};
  const Volume in = random_volume(g, 3);
  SUBCASE("identity") {
    auto id = builtin_backend("identity");
    const Volume out = run_stage(in, *id, 1, {12, 8, 9}, 0.5, 0.125);
    for (std::size_t i = 0; i < in.size(); ++i) CHECK(std::abs(out[i] - in[i]) <= 1e-4f);
    CHECK(out.geometry() == in.geometry());
  }
  SUBCASE("plus 100") {
    AddBackend add(100.0f);
    const Volume out = run_stage(in, add, 1, {12, 8, 9}, 0.25, 0.125);
    for (std::size_t i = 0; i < in.size(); ++i) CHECK(std::abs(out[i] - (in[i] + 100.0f)) <= 1e-4f);
  }
}

TEST_CASE("two-tile weighted average by hand") {
  const Geometry g{{96, 1, 1}, {1, 1, 1}, {}};
  const Volume in(g, 0.0f);
  TileValueBackend tb;
  const Volume out = run_stage(in, tb, 1, {64, 1, 1}, 0.5, 0.125);
  for (std::int64_t x : {0, 31, 32, 47, 50, 63, 64, 95}) {
    CAPTURE(x);
    const bool in1 = x < 64, in2 = x >= 32;
    const double w1 = in1 ? static_cast<float>(weight_1d(x, 64, 0.125)) : 0.0;
    const double w2 = in2 ? static_cast<float>(weight_1d(x - 32, 64, 0.125)) : 0.0;
    const double expect = (w1 * 100.0 + w2 * 200.0) / (w1 + w2);
    CHECK(out.at(x, 0, 0) == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("blend formula") {
  CHECK(blend_over(100.0f, 0.5 * 200.0, 0.5) == 150.0f);
  CHECK(blend_over(100.0f, 0.0, 0.0) == 100.0f);
  CHECK(blend_over(100.0f, 3.0 * 300.0, 3.0) == 300.0f);
  CHECK(blend_over(100.0f, 0.2 * 200.0, 0.2, 0.5) == 150.0f);
  CHECK(blend_over(100.0f, 0.0, 0.0, 0.5) == 100.0f);
}

TEST_CASE("fuse_g2_over_g1") {
  const Geometry g{{9, 9, 9}, {1, 1, 1}, {}};
  const Volume in = random_volume(g, 8);
  const Volume g1 = random_volume(g, 9);
  CascadeConfig cfg;
  cfg.g2_patch = {5, 5, 5};
  ConstBackend c300(300.0f);
  CHECK(fuse_g2_over_g1(g1, in, c300, {}, cfg) == g1);

  const Volume out = fuse_g2_over_g1(g1, in, c300, {{2, 2, 2}}, cfg);
  CHECK(out.at(4, 4, 4) == 300.0f);  // peak weight 1
  CHECK(out.at(0, 0, 0) == g1.at(0, 0, 0));
  CHECK(out.at(8, 4, 4) == g1.at(8, 4, 4));
  const float w = gaussian_weight_map({5, 5, 5}, 0.125).at(0, 2, 2);
  CHECK(out.at(2, 4, 4) == doctest::Approx(w * 300.0 + (1.0 - w) * g1.at(2, 4, 4)).epsilon(1e-6));
}

TEST_CASE("locality of the stage-2 contribution") {
  const Geometry g{{20, 9, 9}, {1, 1, 1}, {}};
  Volume in = random_volume(g, 1);
  const Volume g1 = random_volume(g, 2);
  CascadeConfig cfg;
  cfg.g2_patch = {5, 5, 5};
  auto id = builtin_backend("identity");
  const Volume a = fuse_g2_over_g1(g1, in, *id, {{0, 2, 2}}, cfg);
  for (std::int64_t x = 10; x < 20; ++x) in.at(x, 4, 4) += 500.0f;
  const Volume b = fuse_g2_over_g1(g1, in, *id, {{0, 2, 2}}, cfg);
  CHECK(a == b);
}

TEST_CASE("backend failures carry the patch id") {
  const Geometry g{{16, 8, 8}, {1, 1, 1}, {}};
  const Volume in(g, 1.0f);
  FailingBackend f(1);
  try {
    run_stage(in, f, 1, {8, 8, 8}, 0.5, 0.125, 2);
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.patch_id() == 1);
    CHECK(std::string(e.what()).find("synthetic failure") != std::string::npos);
  }
  ShapeBackend s;
  CHECK_THROWS_AS(run_stage(in, s, 1, {8, 8, 8}, 0.5, 0.125), BackendError);
}

TEST_CASE("builtin backends") {
  const Geometry g{{6, 6, 6}, {0.5, 0.5, 0.5}, {0, 0, 0}};
  LabelMask mask(g, 0);
  mask.at(3, 3, 3) = labels::kArtery;
  mask.at(1, 1, 1) = labels::kVein;
  Volume v(g, -850.0f);
  v.at(3, 3, 3) = 40.0f;
  v.at(1, 1, 1) = 40.0f;

  auto id = builtin_backend("identity");
  const Volume p = extract_patch(v, {1, 1, 1}, {4, 4, 4});
  CHECK(id->process(p, 1, 0) == p);

  auto an = builtin_backend("analytic", analytic_params(mask, 310.0f, 210.0f));
  const Volume q = an->process(p, 1, 0);
  CHECK(q.at(2, 2, 2) == 350.0f);
  CHECK(q.at(0, 0, 0) == 250.0f);
  CHECK(q.at(1, 1, 1) == -850.0f);
  CHECK_THROWS_AS(builtin_backend("analytic"), InvalidArgument);
  CHECK_THROWS_AS(builtin_backend("bogus"), InvalidArgument);
  Volume outside = extract_patch(v, {3, 3, 3}, {3, 3, 3});
  Geometry shifted = outside.geometry();
  shifted.origin.x += 10.0;
  CHECK_THROWS_AS(an->process(Volume(shifted), 1, 7), BackendError);
}

TEST_CASE("cascade identity and analytic oracle on a phantom") {
  PhantomSpec s;
  s.dims = {48, 48, 48};
  s.seed = 12;
  const PhantomCase c = generate_case(s);
  CascadeConfig cfg;
  cfg.g1_patch = {32, 32, 32};
  cfg.g2_patch = {16, 16, 16};

  auto id1 = builtin_backend("identity"), id2 = builtin_backend("identity");
  const CascadeResult r = run_cascade(c.ncct, c.vessel_mask, *id1, *id2, cfg, 2);
  float worst = 0;
  for (std::size_t i = 0; i < r.output.size(); ++i) worst = std::max(worst, std::abs(r.output[i] - c.ncct[i]));
  CHECK(worst <= 1e-4f);
  CHECK(r.routed_count() > 0);
  for (const auto& d : r.routing) {
    if (!d.routed) continue;
    const Box b = central_box(d.patch_origin, r.g2_patch, cfg.central_frac);
    bool any = false;
    for (std::int64_t z = b.lo.z; z < b.lo.z + b.size.nz && !any; ++z)
      for (std::int64_t y = b.lo.y; y < b.lo.y + b.size.ny && !any; ++y)
        for (std::int64_t x = b.lo.x; x < b.lo.x + b.size.nx && !any; ++x)
          any = r.csa_map.at(x, y, z) == static_cast<std::uint8_t>(CsaClass::Small);
    CHECK(any);
  }

  const auto params = analytic_params(c.vessel_mask, 310.0f, 210.0f);
  auto a1 = builtin_backend("analytic", params), a2 = builtin_backend("analytic", params);
  const CascadeResult ra = run_cascade(c.ncct, c.vessel_mask, *a1, *a2, cfg, 1);
  CHECK(mae(ra.output, c.ctpa, &c.vessel_mask, labels::kArtery) <= 5.0);
  CHECK(mae(ra.output, c.ctpa, &c.vessel_mask, labels::kVein) <= 5.0);
  CHECK(mae(c.ncct, c.ctpa, &c.vessel_mask, labels::kArtery) == doctest::Approx(310.0).epsilon(1e-12));
}

TEST_CASE("cascade output is independent of thread count") {
  PhantomSpec s;
  s.dims = {40, 40, 40};
  s.seed = 4;
  const PhantomCase c = generate_case(s);
  CascadeConfig cfg;
  cfg.g1_patch = {24, 24, 24};
  cfg.g2_patch = {16, 16, 16};
  AddBackend b1(3.0f);
  ConstBackend b2(123.0f);
  std::string first;
  for (unsigned t : {1u, 2u, 8u}) {
    const CascadeResult r = run_cascade(c.ncct, c.vessel_mask, b1, b2, cfg, t);
    const std::string h = sha256_hex(encode_vvol(r.output));
    if (first.empty()) first = h;
    CHECK(h == first);
  }
}

TEST_CASE("patch clamping and config JSON") {
  const Geometry g{{20, 12, 30}, {1, 1, 1}, {}};
  const Volume in = random_volume(g, 2);
  const LabelMask mask(g, 0);
  auto a = builtin_backend("identity"), b = builtin_backend("identity");
  const CascadeResult r = run_cascade(in, mask, *a, *b, CascadeConfig{}, 1);
  CHECK(r.g1_patch == Dims{20, 12, 30});
  CHECK(r.g2_patch == Dims{20, 12, 30});
  CHECK(r.routed_count() == 0);
  CHECK(r.output == r.g1_output);

  CascadeConfig c;
  c.overlap = 0.25;
  c.g2_blend_floor = 0.1;
  const CascadeConfig back = CascadeConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  CHECK(back.overlap == 0.25);
  CHECK(back.g2_blend_floor == 0.1);
  CHECK(back.g1_patch == c.g1_patch);
  CHECK(CascadeConfig::from_json(nlohmann::json::object()).g2_patch == Dims{64, 64, 64});
  CHECK_THROWS_AS(CascadeConfig::from_json(nlohmann::json{{"overlap", 0.5}, {"typo", 1}}), InvalidArgument);
  CHECK_THROWS_AS(CascadeConfig::from_json(nlohmann::json{{"overlap", 1.0}}), InvalidArgument);
  CHECK_THROWS_AS(CascadeConfig::from_json(nlohmann::json{{"g1_patch", {32, 32, 32}}}), InvalidArgument);
  CHECK_THROWS_AS(CascadeConfig::from_json(nlohmann::json{{"g2_patch", {16, 16}}}), InvalidArgument);
}
