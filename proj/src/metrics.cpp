#include "vesselforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vesselforge/skeleton.hpp"

namespace vesselforge {

namespace {

void require_region(const Geometry& a, const Geometry& b, const LabelMask* mask, const char* what) {
  require_same_lattice(a, b, what);
  if (mask) require_same_lattice(a, mask->geometry(), what);
}

bool selected(const LabelMask* mask, std::uint8_t label, std::size_t i) { return !mask || (*mask)[i] == label; }

[[noreturn]] void empty_selection(const char* what) {
  throw DataError(std::string(what) + ": region selects no voxels");
}

// Summed-volume table with a one-voxel zero border.
class SummedVolume {
 public:
  SummedVolume(const Dims& d) : tx_(d.nx + 1), ty_(d.ny + 1), table_(static_cast<std::size_t>(tx_ * ty_ * (d.nz + 1)), 0.0) {}

  double& at(std::int64_t x, std::int64_t y, std::int64_t z) { return table_[static_cast<std::size_t>(x + tx_ * (y + ty_ * z))]; }
  double at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return table_[static_cast<std::size_t>(x + tx_ * (y + ty_ * z))];
  }

  // Fills from f(x,y,z) over the voxel grid.
  template <class F>
  void build(const Dims& d, F&& f) {
    for (std::int64_t z = 1; z <= d.nz; ++z)
      for (std::int64_t y = 1; y <= d.ny; ++y)
        for (std::int64_t x = 1; x <= d.nx; ++x) {
          at(x, y, z) = f(x - 1, y - 1, z - 1) + at(x - 1, y, z) + at(x, y - 1, z) + at(x, y, z - 1) -
                        at(x - 1, y - 1, z) - at(x - 1, y, z - 1) - at(x, y - 1, z - 1) + at(x - 1, y - 1, z - 1);
        }
  }

  // Sum over [lo, hi) voxels.
  double box(const Index3& lo, const Index3& hi) const {
    return at(hi.x, hi.y, hi.z) - at(lo.x, hi.y, hi.z) - at(hi.x, lo.y, hi.z) - at(hi.x, hi.y, lo.z) +
           at(lo.x, lo.y, hi.z) + at(lo.x, hi.y, lo.z) + at(hi.x, lo.y, lo.z) - at(lo.x, lo.y, lo.z);
  }

 private:
  std::int64_t tx_, ty_;
  std::vector<double> table_;
};

double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

double mae(const Volume& a, const Volume& b, const LabelMask* mask, std::uint8_t label) {
  require_region(a.geometry(), b.geometry(), mask, "mae");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!selected(mask, label, i)) continue;
    sum += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    ++n;
  }
  if (n == 0) empty_selection("mae");
  return sum / static_cast<double>(n);
}

double psnr(const Volume& a, const Volume& b, const LabelMask* mask, std::uint8_t label, const PsnrOptions& o) {
  require_region(a.geometry(), b.geometry(), mask, "psnr");
  if (!(o.max_value > 0.0)) throw InvalidArgument("psnr: max_value must be > 0");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!selected(mask, label, i)) continue;
    double x = a[i], y = b[i];
    if (o.clip) {
      x = std::clamp(x, o.clip_lo, o.clip_hi);
      y = std::clamp(y, o.clip_lo, o.clip_hi);
    }
    sum += (x - y) * (x - y);
    ++n;
  }
  if (n == 0) empty_selection("psnr");
  const double mse = sum / static_cast<double>(n);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(o.max_value * o.max_value / mse);
}

void SsimParams::validate() const {
  if (window_edge < 3 || window_edge % 2 == 0) throw InvalidArgument("ssim: window_edge must be odd and >= 3");
  if (!(dynamic_range > 0.0)) throw InvalidArgument("ssim: dynamic range L must be > 0");
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw InvalidArgument("ssim: k1 and k2 must be > 0");
}

double ssim(const Volume& a, const Volume& b, const LabelMask* mask, std::uint8_t label, const SsimParams& p) {
  p.validate();
  require_region(a.geometry(), b.geometry(), mask, "ssim");
  const Dims& d = a.dims();
  for (int ax = 0; ax < 3; ++ax) {
    if (d[ax] < p.window_edge) {
      throw DataError("ssim: volume extent " + std::to_string(d[ax]) + " is smaller than the window edge " +
                      std::to_string(p.window_edge));
    }
  }
  // Moments are accumulated about a common shift to limit cancellation.
  double shift = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) shift += static_cast<double>(a[i]) + static_cast<double>(b[i]);
  shift /= static_cast<double>(2 * a.size());

  SummedVolume sx(d), sy(d), sxx(d), syy(d), sxy(d);
  auto xa = [&](std::int64_t x, std::int64_t y, std::int64_t z) { return static_cast<double>(a.at(x, y, z)) - shift; };
  auto xb = [&](std::int64_t x, std::int64_t y, std::int64_t z) { return static_cast<double>(b.at(x, y, z)) - shift; };
  sx.build(d, xa);
  sy.build(d, xb);
  sxx.build(d, [&](auto x, auto y, auto z) { return xa(x, y, z) * xa(x, y, z); });
  syy.build(d, [&](auto x, auto y, auto z) { return xb(x, y, z) * xb(x, y, z); });
  sxy.build(d, [&](auto x, auto y, auto z) { return xa(x, y, z) * xb(x, y, z); });

  const double c1 = p.c1(), c2 = p.c2();
  const std::int64_t h = p.window_edge / 2;
  double total = 0.0;
  std::size_t n = 0;
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (mask && mask->at(x, y, z) != label) continue;
        const Index3 lo{std::max<std::int64_t>(0, x - h), std::max<std::int64_t>(0, y - h), std::max<std::int64_t>(0, z - h)};
        const Index3 hi{std::min(d.nx, x + h + 1), std::min(d.ny, y + h + 1), std::min(d.nz, z + h + 1)};
        const double cnt = static_cast<double>((hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z));
        const double mx = sx.box(lo, hi) / cnt, my = sy.box(lo, hi) / cnt;
        const double vx = std::max(0.0, sxx.box(lo, hi) / cnt - mx * mx);
        const double vy = std::max(0.0, syy.box(lo, hi) / cnt - my * my);
        const double cxy = sxy.box(lo, hi) / cnt - mx * my;
        const double ux = mx + shift, uy = my + shift;
        total += ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
        ++n;
      }
  if (n == 0) empty_selection("ssim");
  return total / static_cast<double>(n);
}

double dice(const LabelMask& p, const LabelMask& g, std::uint8_t label) {
  require_same_lattice(p.geometry(), g.geometry(), "dice");
  std::size_t inter = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool a = p[i] == label, b = g[i] == label;
    inter += a && b;
    na += a;
    nb += b;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

ClStats cl_stats(const LabelMask& p, const LabelMask& g, std::uint8_t label, unsigned threads) {
  require_same_lattice(p.geometry(), g.geometry(), "cl_stats");
  const Skeleton sp = skeletonize(p, Foreground::label(label), threads);
  const Skeleton sg = skeletonize(g, Foreground::label(label), threads);
  std::size_t sp_in_g = 0, sg_in_p = 0;
  for (const auto& v : sp.points) sp_in_g += g.at(v.x, v.y, v.z) == label;
  for (const auto& v : sg.points) sg_in_p += p.at(v.x, v.y, v.z) == label;
  ClStats s;
  s.cl_precision = ratio_or_zero(static_cast<double>(sp_in_g), static_cast<double>(sp.size()));
  s.cl_recall = ratio_or_zero(static_cast<double>(sg_in_p), static_cast<double>(sg.size()));
  s.cl_dice = ratio_or_zero(2.0 * s.cl_precision * s.cl_recall, s.cl_precision + s.cl_recall);
  return s;
}

std::string region_name(Region r) {
  switch (r) {
    case Region::Artery: return "Artery";
    case Region::Vein: return "Vein";
    case Region::Average: return "Average";
  }
  return "Average";
}

Region region_from_name(const std::string& s) {
  if (s == "Artery") return Region::Artery;
  if (s == "Vein") return Region::Vein;
  if (s == "Average") return Region::Average;
  throw InvalidArgument("unknown region \"" + s + "\"");
}

std::vector<SimilarityRecord> similarity_report(const Volume& pred, const Volume& ref, RegionMask artery,
                                                RegionMask vein, const SimilarityParams& params) {
  auto row = [&](Region r, RegionMask m) {
    SimilarityRecord rec;
    rec.region = r;
    rec.mae_hu = mae(pred, ref, &m.mask, m.label);
    rec.psnr_db = psnr(pred, ref, &m.mask, m.label, params.psnr);
    rec.ssim = ssim(pred, ref, &m.mask, m.label, params.ssim);
    return rec;
  };
  const SimilarityRecord a = row(Region::Artery, artery);
  const SimilarityRecord v = row(Region::Vein, vein);
  SimilarityRecord avg;
  avg.region = Region::Average;
  avg.mae_hu = (a.mae_hu + v.mae_hu) / 2.0;
  avg.psnr_db = (a.psnr_db + v.psnr_db) / 2.0;
  avg.ssim = (a.ssim + v.ssim) / 2.0;
  return {a, v, avg};
}

SegRecord segmentation_record(const LabelMask& pred, const LabelMask& gt, std::uint8_t label, Region region,
                              unsigned threads) {
  SegRecord r;
  r.region = region;
  r.dice = dice(pred, gt, label);
  const ClStats cl = cl_stats(pred, gt, label, threads);
  r.cl_dice = cl.cl_dice;
  r.cl_precision = cl.cl_precision;
  r.cl_recall = cl.cl_recall;
  return r;
}

std::vector<SegRecord> segmentation_report(const LabelMask& pred, const LabelMask& gt, unsigned threads) {
  const SegRecord a = segmentation_record(pred, gt, labels::kArtery, Region::Artery, threads);
  const SegRecord v = segmentation_record(pred, gt, labels::kVein, Region::Vein, threads);
  SegRecord avg;
  avg.region = Region::Average;
  avg.dice = (a.dice + v.dice) / 2.0;
  avg.cl_dice = (a.cl_dice + v.cl_dice) / 2.0;
  avg.cl_precision = (a.cl_precision + v.cl_precision) / 2.0;
  avg.cl_recall = (a.cl_recall + v.cl_recall) / 2.0;
  return {a, v, avg};
}

}  // namespace vesselforge
