#include "vesselforge/cascade.hpp"

#include <algorithm>
#include <cfloat>
#include <chrono>
#include <cmath>
#include <set>

#include "vesselforge/parallel.hpp"

namespace vesselforge {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Dims dims_from_json(const nlohmann::json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw InvalidArgument(std::string("config: ") + key + " must be a 3-array");
  return {a[0].get<std::int64_t>(), a[1].get<std::int64_t>(), a[2].get<std::int64_t>()};
}

}  // namespace

void CascadeConfig::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (g1_patch[a] < 1 || g2_patch[a] < 1) throw InvalidArgument("config: patch sizes must be >= 1");
    if (g2_patch[a] > g1_patch[a]) throw InvalidArgument("config: g2_patch must not exceed g1_patch");
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) throw InvalidArgument("config: overlap must lie in [0, 1)");
  if (!(gaussian_sigma_frac > 0.0)) throw InvalidArgument("config: gaussian_sigma_frac must be > 0");
  if (!(central_frac > 0.0 && central_frac <= 1.0)) throw InvalidArgument("config: central_frac must lie in (0, 1]");
  if (!(csa_small_mm2 > 0.0)) throw InvalidArgument("config: csa_small_mm2 must be > 0");
  if (!(g2_blend_floor >= 0.0)) throw InvalidArgument("config: g2_blend_floor must be >= 0");
}

nlohmann::ordered_json CascadeConfig::to_json() const {
  nlohmann::ordered_json j;
  j["g1_patch"] = {g1_patch.nx, g1_patch.ny, g1_patch.nz};
  j["g2_patch"] = {g2_patch.nx, g2_patch.ny, g2_patch.nz};
  j["overlap"] = overlap;
  j["gaussian_sigma_frac"] = gaussian_sigma_frac;
  j["central_frac"] = central_frac;
  j["csa_small_mm2"] = csa_small_mm2;
  j["g2_blend_floor"] = g2_blend_floor;
  return j;
}

CascadeConfig CascadeConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys{"g1_patch",     "g2_patch",      "overlap",       "gaussian_sigma_frac",
                                           "central_frac", "csa_small_mm2", "g2_blend_floor"};
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (!kKeys.count(k)) throw InvalidArgument("config: unknown key \"" + k + "\"");
  }
  CascadeConfig c;
  try {
    if (j.contains("g1_patch")) c.g1_patch = dims_from_json(j, "g1_patch");
    if (j.contains("g2_patch")) c.g2_patch = dims_from_json(j, "g2_patch");
    if (j.contains("overlap")) c.overlap = j.at("overlap").get<double>();
    if (j.contains("gaussian_sigma_frac")) c.gaussian_sigma_frac = j.at("gaussian_sigma_frac").get<double>();
    if (j.contains("central_frac")) c.central_frac = j.at("central_frac").get<double>();
    if (j.contains("csa_small_mm2")) c.csa_small_mm2 = j.at("csa_small_mm2").get<double>();
    if (j.contains("g2_blend_floor")) c.g2_blend_floor = j.at("g2_blend_floor").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

Volume gaussian_weight_map(const Dims& size, double sigma_frac) {
  if (!(sigma_frac > 0.0)) throw InvalidArgument("gaussian_weight_map: sigma_frac must be > 0");
  std::array<std::vector<double>, 3> axis_w;
  for (int a = 0; a < 3; ++a) {
    const std::int64_t p = size[a];
    if (p < 1) throw InvalidArgument("gaussian_weight_map: size must be >= 1");
    const double center = static_cast<double>(p - 1) / 2.0;
    const double sigma = static_cast<double>(p) * sigma_frac;
    axis_w[a].resize(static_cast<std::size_t>(p));
    for (std::int64_t i = 0; i < p; ++i) {
      const double d = static_cast<double>(i) - center;
      axis_w[a][static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    }
  }
  Volume w(Geometry{size, {1, 1, 1}, {0, 0, 0}});
  for (std::int64_t z = 0; z < size.nz; ++z)
    for (std::int64_t y = 0; y < size.ny; ++y)
      for (std::int64_t x = 0; x < size.nx; ++x) {
        const double v = axis_w[0][x] * axis_w[1][y] * axis_w[2][z];
        w.at(x, y, z) = std::max(static_cast<float>(v), FLT_MIN);
      }
  return w;
}

std::vector<std::int64_t> axis_origins(std::int64_t extent, std::int64_t patch, double overlap) {
  if (patch < 1) throw InvalidArgument("tile_origins: patch must be >= 1");
  if (patch > extent) {
    throw GeometryError("tile_origins: patch " + std::to_string(patch) + " larger than volume extent " +
                        std::to_string(extent));
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) throw InvalidArgument("tile_origins: overlap must lie in [0, 1)");
  const auto stride =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(static_cast<double>(patch) * (1.0 - overlap))));
  std::vector<std::int64_t> out;
  const std::int64_t last = extent - patch;
  for (std::int64_t o = 0; o <= last; o += stride) out.push_back(o);
  if (out.back() != last) out.push_back(last);
  return out;
}

std::vector<Index3> tile_origins(const Dims& dims, const Dims& patch, double overlap) {
  const auto xs = axis_origins(dims.nx, patch.nx, overlap);
  const auto ys = axis_origins(dims.ny, patch.ny, overlap);
  const auto zs = axis_origins(dims.nz, patch.nz, overlap);
  std::vector<Index3> out;
  out.reserve(xs.size() * ys.size() * zs.size());
  for (auto z : zs)
    for (auto y : ys)
      for (auto x : xs) out.push_back({x, y, z});
  return out;
}

Box central_box(const Index3& origin, const Dims& patch, double central_frac) {
  Box b;
  for (int a = 0; a < 3; ++a) {
    const auto edge = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::ceil(static_cast<double>(patch[a]) * central_frac)), 1, patch[a]);
    b.size[a] = edge;
    b.lo[a] = origin[a] + (patch[a] - edge) / 2;
  }
  return b;
}

RoutingDecision route_patch(const LabelMask& csa_map, const Index3& origin, const Dims& patch, double central_frac) {
  return route_patches(csa_map, {origin}, patch, central_frac).front();
}

std::vector<RoutingDecision> route_patches(const LabelMask& csa_map, const std::vector<Index3>& origins,
                                           const Dims& patch, double central_frac) {
  if (!(central_frac > 0.0 && central_frac <= 1.0)) throw InvalidArgument("route_patch: central_frac must lie in (0, 1]");
  const Dims& d = csa_map.dims();
  for (const auto& o : origins) check_window(d, o, patch);

  // table[(x+1) + (nx+1)*((y+1) + (ny+1)*(z+1))] = Small count over [0,x]x[0,y]x[0,z]
  const std::int64_t tx = d.nx + 1, ty = d.ny + 1, tz = d.nz + 1;
  std::vector<std::int64_t> table(static_cast<std::size_t>(tx * ty * tz), 0);
  auto T = [&](std::int64_t x, std::int64_t y, std::int64_t z) -> std::int64_t& {
    return table[static_cast<std::size_t>(x + tx * (y + ty * z))];
  };
  constexpr auto kSmall = static_cast<std::uint8_t>(CsaClass::Small);
  for (std::int64_t z = 1; z < tz; ++z)
    for (std::int64_t y = 1; y < ty; ++y)
      for (std::int64_t x = 1; x < tx; ++x) {
        const std::int64_t v = csa_map.at(x - 1, y - 1, z - 1) == kSmall ? 1 : 0;
        T(x, y, z) = v + T(x - 1, y, z) + T(x, y - 1, z) + T(x, y, z - 1) - T(x - 1, y - 1, z) - T(x - 1, y, z - 1) -
                     T(x, y - 1, z - 1) + T(x - 1, y - 1, z - 1);
      }

  std::vector<RoutingDecision> out;
  out.reserve(origins.size());
  for (const auto& o : origins) {
    const Box b = central_box(o, patch, central_frac);
    const std::int64_t x0 = b.lo.x, y0 = b.lo.y, z0 = b.lo.z;
    const std::int64_t x1 = x0 + b.size.nx, y1 = y0 + b.size.ny, z1 = z0 + b.size.nz;
    const std::int64_t count = T(x1, y1, z1) - T(x0, y1, z1) - T(x1, y0, z1) - T(x1, y1, z0) + T(x0, y0, z1) +
                               T(x0, y1, z0) + T(x1, y0, z0) - T(x0, y0, z0);
    out.push_back({o, count >= 1, count});
  }
  return out;
}

StageBuffers accumulate_stage(const Volume& input, SynthBackend& backend, int stage,
                              const std::vector<Index3>& origins, const Dims& patch, double sigma_frac,
                              unsigned threads) {
  const Volume weight = gaussian_weight_map(patch, sigma_frac);
  StageBuffers buf{Grid<double>(input.geometry(), 0.0), Grid<double>(input.geometry(), 0.0)};
  for (const auto& o : origins) check_window(input.dims(), o, patch);

  const std::size_t batch = std::max<std::size_t>(1, 2 * static_cast<std::size_t>(std::max(1u, threads)));
  std::vector<Volume> outputs(batch);
  for (std::size_t start = 0; start < origins.size(); start += batch) {
    const std::size_t count = std::min(batch, origins.size() - start);
    parallel_for(count, threads, [&](std::size_t k) {
      const std::size_t id = start + k;
      const Volume in = extract_patch(input, origins[id], patch);
      Volume out;
      try {
        out = backend.process(in, stage, id);
      } catch (const BackendError&) {
        throw;
      } catch (const std::exception& e) {
        throw BackendError(id, std::string("stage ") + std::to_string(stage) + ": " + e.what());
      }
      if (out.dims() != in.dims()) throw BackendError(id, "backend returned a patch with different dims");
      for (float v : out.values()) {
        if (!std::isfinite(v)) throw BackendError(id, "backend returned a non-finite value");
      }
      outputs[k] = std::move(out);
    });
    for (std::size_t k = 0; k < count; ++k) {
      paste_accumulate(buf.num, buf.den, outputs[k], weight, origins[start + k]);
    }
  }
  return buf;
}

Volume run_stage(const Volume& input, SynthBackend& backend, int stage, const Dims& patch, double overlap,
                 double sigma_frac, unsigned threads) {
  const auto origins = tile_origins(input.dims(), patch, overlap);
  const StageBuffers buf = accumulate_stage(input, backend, stage, origins, patch, sigma_frac, threads);
  Volume out(input.geometry());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(buf.num[i] / buf.den[i]);
  return out;
}

float blend_over(float g1_value, double num, double den, double blend_floor) {
  if (!(den > 0.0)) return g1_value;
  const double alpha = std::min(1.0, std::max(den, blend_floor));
  return static_cast<float>(alpha * (num / den) + (1.0 - alpha) * static_cast<double>(g1_value));
}

Volume fuse_g2_over_g1(const Volume& g1_out, const Volume& input, SynthBackend& backend2,
                       const std::vector<Index3>& routed_origins, const CascadeConfig& cfg, unsigned threads) {
  require_same_lattice(g1_out.geometry(), input.geometry(), "fuse_g2_over_g1");
  if (routed_origins.empty()) return g1_out;
  const Dims patch = clamp_patch(cfg.g2_patch, input.dims());
  const StageBuffers buf =
      accumulate_stage(input, backend2, 2, routed_origins, patch, cfg.gaussian_sigma_frac, threads);
  Volume out(g1_out.geometry());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = blend_over(g1_out[i], buf.num[i], buf.den[i], cfg.g2_blend_floor);
  return out;
}

std::size_t CascadeResult::routed_count() const {
  return static_cast<std::size_t>(std::count_if(routing.begin(), routing.end(), [](const auto& r) { return r.routed; }));
}

Dims clamp_patch(const Dims& patch, const Dims& dims) {
  return {std::min(patch.nx, dims.nx), std::min(patch.ny, dims.ny), std::min(patch.nz, dims.nz)};
}

CascadeResult run_cascade(const Volume& ncct, const LabelMask& vessel_mask, SynthBackend& b1, SynthBackend& b2,
                          const CascadeConfig& cfg, unsigned threads) {
  cfg.validate();
  require_same_lattice(ncct.geometry(), vessel_mask.geometry(), "run_cascade");
  CascadeResult r;
  r.g1_patch = clamp_patch(cfg.g1_patch, ncct.dims());
  r.g2_patch = clamp_patch(cfg.g2_patch, ncct.dims());

  auto t0 = std::chrono::steady_clock::now();
  r.csa_map = classify_csa_per_label(vessel_mask, CsaThresholds{cfg.csa_small_mm2, 10.0}, threads);
  r.seconds_csa = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  r.g1_output = run_stage(ncct, b1, 1, r.g1_patch, cfg.overlap, cfg.gaussian_sigma_frac, threads);
  r.seconds_g1 = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  r.routing = route_patches(r.csa_map, tile_origins(ncct.dims(), r.g2_patch, cfg.overlap), r.g2_patch, cfg.central_frac);
  std::vector<Index3> routed;
  for (const auto& d : r.routing) {
    if (d.routed) routed.push_back(d.patch_origin);
  }
  CascadeConfig effective = cfg;
  effective.g2_patch = r.g2_patch;
  r.output = fuse_g2_over_g1(r.g1_output, ncct, b2, routed, effective, threads);
  r.seconds_g2 = seconds_since(t0);
  return r;
}

}  // namespace vesselforge
