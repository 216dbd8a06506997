#include "vesselforge/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "vesselforge/backend.hpp"
#include "vesselforge/cascade.hpp"
#include "vesselforge/csa.hpp"
#include "vesselforge/hash.hpp"
#include "vesselforge/metrics.hpp"
#include "vesselforge/parallel.hpp"
#include "vesselforge/phantom.hpp"
#include "vesselforge/quantify.hpp"
#include "vesselforge/report.hpp"
#include "vesselforge/vvol.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace vesselforge {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

class RunManifest {
 public:
  explicit RunManifest(std::string command) : command_(std::move(command)) {}

  void set_config(ojson c) { config_ = std::move(c); }
  void add_input(const fs::path& p) { inputs_.push_back(entry(p)); }
  void add_output(const fs::path& p) { outputs_.push_back(entry(p)); }
  void add_timing(const std::string& stage, double seconds) { timings_[stage] = seconds; }

  void write(const fs::path& path) const {
    ojson doc;
    doc["tool"] = "vesselforge";
    doc["version"] = kToolVersion;
    doc["command"] = command_;
    doc["config"] = config_;
    doc["inputs"] = inputs_;
    doc["outputs"] = outputs_;
    doc["timings_s"] = timings_;
    const std::string text = doc.dump(2) + "\n";
    write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }

 private:
  static ojson entry(const fs::path& p) {
    ojson e;
    e["path"] = p.generic_string();
    e["sha256"] = sha256_file(p);
    return e;
  }

  std::string command_;
  ojson config_ = ojson::object();
  ojson inputs_ = ojson::array();
  ojson outputs_ = ojson::array();
  ojson timings_ = ojson::object();
};

fs::path manifest_beside(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// JSON goes to the requested path and the CSV projection beside it; a .csv
// request swaps the roles.
std::pair<fs::path, fs::path> report_paths(const fs::path& out) {
  if (out.extension() == ".csv") return {fs::path(out).replace_extension(".json"), out};
  return {out, fs::path(out).replace_extension(".csv")};
}

void write_report(const fs::path& out, const ojson& json, const std::string& csv, RunManifest& manifest) {
  const auto [json_path, csv_path] = report_paths(out);
  write_text(json_path, json.dump(2) + "\n");
  write_text(csv_path, csv);
  manifest.add_output(json_path);
  manifest.add_output(csv_path);
  manifest.write(manifest_beside(out));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == 'x') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

template <class T, class Conv>
std::array<T, 3> parse_triple(const std::string& s, const char* what, Conv conv) {
  const auto parts = split_list(s);
  if (parts.size() != 1 && parts.size() != 3) {
    throw InvalidArgument(std::string(what) + ": expected one value or three comma-separated values, got \"" + s + "\"");
  }
  std::array<T, 3> v{};
  for (int a = 0; a < 3; ++a) {
    const std::string& p = parts[parts.size() == 1 ? 0 : a];
    try {
      std::size_t used = 0;
      v[a] = conv(p, &used);
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::logic_error&) {
      throw InvalidArgument(std::string(what) + ": not a number: \"" + p + "\"");
    }
  }
  return v;
}

Dims parse_dims(const std::string& s) {
  const auto v = parse_triple<std::int64_t>(s, "--dims", [](const std::string& p, std::size_t* used) {
    return static_cast<std::int64_t>(std::stoll(p, used));
  });
  return {v[0], v[1], v[2]};
}

Vec3 parse_spacing(const std::string& s) {
  const auto v = parse_triple<double>(s, "--spacing", [](const std::string& p, std::size_t* used) {
    return std::stod(p, used);
  });
  return {v[0], v[1], v[2]};
}

ojson dims_json(const Dims& d) { return ojson::array({d.nx, d.ny, d.nz}); }
ojson vec_json(const Vec3& v) { return ojson::array({v.x, v.y, v.z}); }

ojson tubes_json(const std::vector<Tube>& tubes) {
  ojson arr = ojson::array();
  for (const auto& t : tubes) {
    ojson o;
    o["label"] = t.label;
    o["radius_mm"] = t.radius_mm;
    o["parent"] = t.parent;
    o["generation"] = t.generation;
    ojson axis = ojson::array();
    for (const auto& p : t.axis) axis.push_back(vec_json(p));
    o["axis_mm"] = axis;
    arr.push_back(o);
  }
  ojson doc;
  doc["tubes"] = arr;
  return doc;
}

// ---------------------------------------------------------------- phantom

struct PhantomArgs {
  std::uint64_t seed = 1;
  int cases = 1;
  std::string dims = "64";
  std::string spacing = "0.5";
  double noise = 0.0;
  int tubes = 6;
  double rmin = 1.0;
  double rmax = 3.0;
  std::uint64_t seed_stride = 1;
  std::string out;
};

int cmd_phantom(const PhantomArgs& a, std::ostream& out) {
  PhantomSpec spec;
  spec.seed = a.seed;
  spec.dims = parse_dims(a.dims);
  spec.spacing = parse_spacing(a.spacing);
  spec.noise_sigma_hu = static_cast<float>(a.noise);
  spec.tube_count = a.tubes;
  spec.radius_min_mm = a.rmin;
  spec.radius_max_mm = a.rmax;
  if (a.cases < 1) throw InvalidArgument("--cases must be >= 1");
  spec.validate();

  const auto t0 = Clock::now();
  const auto cohort = generate_cohort(spec, a.cases, a.seed_stride, configured_threads());
  const double t_gen = seconds_since(t0);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  RunManifest manifest("phantom");
  ojson config;
  config["seed"] = a.seed;
  config["cases"] = a.cases;
  config["seed_stride"] = a.seed_stride;
  config["dims"] = dims_json(spec.dims);
  config["spacing_mm"] = vec_json(spec.spacing);
  config["noise_sigma_hu"] = spec.noise_sigma_hu;
  config["tube_count"] = spec.tube_count;
  config["radius_range_mm"] = ojson::array({spec.radius_min_mm, spec.radius_max_mm});
  config["palette_hu"] = {{"parenchyma", spec.parenchyma_hu},
                          {"vessel_ncct", spec.vessel_hu_ncct},
                          {"artery_ctpa", spec.artery_hu_ctpa},
                          {"vein_ctpa", spec.vein_hu_ctpa}};
  manifest.set_config(config);

  const auto t1 = Clock::now();
  ojson cases = ojson::array();
  for (std::size_t k = 0; k < cohort.size(); ++k) {
    char id[32];
    std::snprintf(id, sizeof id, "case_%03zu", k);
    const fs::path sub = dir / id;
    fs::create_directories(sub);
    write_vvol(cohort[k].ncct, sub / "ncct.vvol");
    write_vvol(cohort[k].ctpa, sub / "ctpa.vvol");
    write_vvol(cohort[k].vessel_mask, sub / "vessel_mask.vvol");
    write_text(sub / "tubes.json", tubes_json(cohort[k].tubes).dump(2) + "\n");
    for (const char* f : {"ncct.vvol", "ctpa.vvol", "vessel_mask.vvol", "tubes.json"}) manifest.add_output(sub / f);
    ojson c;
    c["id"] = id;
    c["ncct"] = std::string(id) + "/ncct.vvol";
    c["ctpa"] = std::string(id) + "/ctpa.vvol";
    c["vessel_mask"] = std::string(id) + "/vessel_mask.vvol";
    cases.push_back(c);
  }
  ojson cohort_doc;
  cohort_doc["cases"] = cases;
  write_text(dir / "cohort.json", cohort_doc.dump(2) + "\n");
  manifest.add_output(dir / "cohort.json");
  manifest.add_timing("generate", t_gen);
  manifest.add_timing("write", seconds_since(t1));
  manifest.write(dir / "run_manifest.json");
  out << "wrote " << cohort.size() << " case(s) to " << dir.generic_string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- csa-map

struct CsaMapArgs {
  std::string mask;
  std::optional<int> label;
  std::string out;
};

int cmd_csa_map(const CsaMapArgs& a, std::ostream& out) {
  if (a.label && (*a.label < 1 || *a.label > 255)) throw InvalidArgument("--label must be in [1, 255]");
  const LabelMask mask = read_mask(a.mask);
  const unsigned threads = configured_threads();
  const auto t0 = Clock::now();
  const LabelMask map = a.label ? classify_csa(mask, Foreground::label(static_cast<std::uint8_t>(*a.label)), {}, threads)
                                : classify_csa_per_label(mask, {}, threads);
  const double t = seconds_since(t0);
  write_vvol(map, a.out);

  RunManifest manifest("csa-map");
  ojson config;
  config["label"] = a.label ? ojson(*a.label) : ojson("per-label");
  config["small_mm2"] = CsaThresholds{}.small_mm2;
  config["large_mm2"] = CsaThresholds{}.large_mm2;
  manifest.set_config(config);
  manifest.add_input(a.mask);
  manifest.add_output(a.out);
  manifest.add_timing("csa", t);
  manifest.write(manifest_beside(a.out));

  const StrataVolumes v = stratified_volume(map, map);
  out << "small_mm3=" << format_number(v.small_mm3) << " medium_mm3=" << format_number(v.medium_mm3)
      << " large_mm3=" << format_number(v.large_mm3) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- synthesize

struct SynthArgs {
  std::string ncct;
  std::string vessels;
  std::string g1 = "identity";
  std::string g2 = "identity";
  std::string config;
  std::string out;
  double artery_delta = 310.0;
  double vein_delta = 210.0;
  unsigned instances = 1;
  double timeout_s = 120.0;
};

std::unique_ptr<SynthBackend> make_backend(const std::string& spec, const LabelMask& vessels, const SynthArgs& a) {
  if (spec.rfind("cmd:", 0) == 0) {
    const auto argv = split_command(spec.substr(4));
    if (argv.empty()) throw InvalidArgument("backend \"" + spec + "\": empty command");
    ProcessBackendOptions opt;
    opt.instances = a.instances;
    opt.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(a.timeout_s * 1000.0));
    return process_backend(argv, opt);
  }
  if (spec == "analytic") {
    return builtin_backend("analytic", analytic_params(vessels, static_cast<float>(a.artery_delta),
                                                       static_cast<float>(a.vein_delta)));
  }
  if (spec == "identity") return builtin_backend("identity");
  throw InvalidArgument("backend must be identity, analytic or cmd:\"...\", got \"" + spec + "\"");
}

int cmd_synthesize(const SynthArgs& a, std::ostream& out) {
  if (a.instances < 1) throw InvalidArgument("--instances must be >= 1");
  if (!(a.timeout_s > 0.0)) throw InvalidArgument("--timeout must be > 0");
  CascadeConfig cfg;
  if (!a.config.empty()) {
    const auto bytes = read_file_bytes(a.config);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
      throw DataError("--config: not valid JSON: " + std::string(e.what()));
    }
    cfg = CascadeConfig::from_json(j);
  }
  cfg.validate();

  const Volume ncct = read_volume(a.ncct);
  const LabelMask vessels = read_mask(a.vessels);
  auto b1 = make_backend(a.g1, vessels, a);
  auto b2 = make_backend(a.g2, vessels, a);
  const unsigned threads = configured_threads();

  const auto t0 = Clock::now();
  const CascadeResult r = run_cascade(ncct, vessels, *b1, *b2, cfg, threads);
  const double total = seconds_since(t0);
  write_vvol(r.output, a.out);

  RunManifest manifest("synthesize");
  ojson config;
  config["cascade"] = cfg.to_json();
  config["g1"] = b1->describe();
  config["g2"] = b2->describe();
  if (a.g1 == "analytic" || a.g2 == "analytic") {
    config["analytic_delta_hu"] = {{"artery", a.artery_delta}, {"vein", a.vein_delta}};
  }
  config["effective_g1_patch"] = dims_json(r.g1_patch);
  config["effective_g2_patch"] = dims_json(r.g2_patch);
  config["routed_patches"] = r.routed_count();
  config["g2_tiles"] = r.routing.size();
  manifest.set_config(config);
  manifest.add_input(a.ncct);
  manifest.add_input(a.vessels);
  if (!a.config.empty()) manifest.add_input(a.config);
  manifest.add_output(a.out);
  manifest.add_timing("csa", r.seconds_csa);
  manifest.add_timing("g1", r.seconds_g1);
  manifest.add_timing("g2", r.seconds_g2);
  manifest.add_timing("total", total);
  manifest.write(manifest_beside(a.out));
  out << "routed " << r.routed_count() << "/" << r.routing.size() << " stage-2 windows; wrote "
      << fs::path(a.out).generic_string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- subtract

struct SubtractArgs {
  std::string a, b, out;
};

int cmd_subtract(const SubtractArgs& a, std::ostream& out) {
  const Volume va = read_volume(a.a);
  const Volume vb = read_volume(a.b);
  const auto t0 = Clock::now();
  const Volume d = subtract(va, vb);
  const double t = seconds_since(t0);
  write_vvol(d, a.out);
  RunManifest manifest("subtract");
  manifest.add_input(a.a);
  manifest.add_input(a.b);
  manifest.add_output(a.out);
  manifest.add_timing("subtract", t);
  manifest.write(manifest_beside(a.out));
  const VolumeStats s = compute_stats(d);
  out << "min=" << format_number(s.min_hu) << " max=" << format_number(s.max_hu) << " mean=" << format_number(s.mean_hu)
      << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string pred, ref, artery, vein, out;
  int artery_label = labels::kArtery;
  int vein_label = labels::kVein;
  double psnr_max = 4095.0;
  int ssim_window = 7;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  for (int l : {a.artery_label, a.vein_label}) {
    if (l < 1 || l > 255) throw InvalidArgument("region labels must be in [1, 255]");
  }
  SimilarityParams params;
  params.psnr.max_value = a.psnr_max;
  params.ssim.window_edge = a.ssim_window;
  params.ssim.validate();
  if (!(a.psnr_max > 0.0)) throw InvalidArgument("--psnr-max must be > 0");

  const Volume pred = read_volume(a.pred);
  const Volume ref = read_volume(a.ref);
  const LabelMask artery = read_mask(a.artery);
  const LabelMask vein = a.vein == a.artery ? artery : read_mask(a.vein);
  const auto t0 = Clock::now();
  const auto rows = similarity_report(pred, ref, {artery, static_cast<std::uint8_t>(a.artery_label)},
                                      {vein, static_cast<std::uint8_t>(a.vein_label)}, params);
  const double t = seconds_since(t0);

  RunManifest manifest("eval");
  ojson config;
  config["psnr_max"] = a.psnr_max;
  config["psnr_clip_hu"] = ojson::array({params.psnr.clip_lo, params.psnr.clip_hi});
  config["ssim_window"] = a.ssim_window;
  config["ssim_k"] = ojson::array({params.ssim.k1, params.ssim.k2});
  config["ssim_L"] = params.ssim.dynamic_range;
  config["artery_label"] = a.artery_label;
  config["vein_label"] = a.vein_label;
  manifest.set_config(config);
  for (const auto& p : {a.pred, a.ref, a.artery}) manifest.add_input(p);
  if (a.vein != a.artery) manifest.add_input(a.vein);
  manifest.add_timing("metrics", t);
  write_report(a.out, to_json(rows), to_csv(rows), manifest);
  out << to_csv(rows);
  return kExitOk;
}

// ---------------------------------------------------------------- seg-eval

struct SegEvalArgs {
  std::string pred, gt, out;
  std::optional<int> label;
};

int cmd_seg_eval(const SegEvalArgs& a, std::ostream& out) {
  if (a.label && *a.label != labels::kArtery && *a.label != labels::kVein) {
    throw InvalidArgument("--label must be 1 (artery) or 2 (vein)");
  }
  const LabelMask pred = read_mask(a.pred);
  const LabelMask gt = read_mask(a.gt);
  const unsigned threads = configured_threads();
  const auto t0 = Clock::now();
  std::vector<SegRecord> rows;
  if (a.label) {
    const Region r = *a.label == labels::kArtery ? Region::Artery : Region::Vein;
    rows.push_back(segmentation_record(pred, gt, static_cast<std::uint8_t>(*a.label), r, threads));
  } else {
    rows = segmentation_report(pred, gt, threads);
  }
  const double t = seconds_since(t0);
  RunManifest manifest("seg-eval");
  ojson config;
  config["label"] = a.label ? ojson(*a.label) : ojson("artery+vein");
  manifest.set_config(config);
  manifest.add_input(a.pred);
  manifest.add_input(a.gt);
  manifest.add_timing("metrics", t);
  write_report(a.out, to_json(rows), to_csv(rows), manifest);
  out << to_csv(rows);
  return kExitOk;
}

// ---------------------------------------------------------------- quantify

struct QuantifyArgs {
  std::string manifest, out;
  std::string csa_source = "own";
};

int cmd_quantify(const QuantifyArgs& a, std::ostream& out) {
  const CsaSource source = csa_source_from_name(a.csa_source);
  const auto t0 = Clock::now();
  const QuantifyInputs in = load_quantify_manifest(a.manifest, source, configured_threads());
  const double t_load = seconds_since(t0);
  const auto t1 = Clock::now();
  const AgreementReport rep = consistency_report(in.cases);
  const double t_icc = seconds_since(t1);
  RunManifest manifest("quantify");
  ojson config;
  config["icc_form"] = "ICC(2,1)";
  config["csa_source"] = a.csa_source;
  config["n_cases"] = in.cases.size();
  manifest.set_config(config);
  for (const auto& p : in.inputs) manifest.add_input(p);
  manifest.add_timing("strata", t_load);
  manifest.add_timing("icc", t_icc);
  write_report(a.out, to_json(rep), to_csv(rep), manifest);
  out << to_csv(rep);
  return kExitOk;
}

}  // namespace

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> words;
  std::string cur;
  bool in_word = false;
  for (std::size_t i = 0; i < command.size(); ++i) {
    const char ch = command[i];
    if (ch == '\'') {
      const auto end = command.find('\'', i + 1);
      if (end == std::string::npos) throw InvalidArgument("command has an unterminated single quote");
      cur += command.substr(i + 1, end - i - 1);
      i = end;
      in_word = true;
    } else if (ch == '"') {
      std::size_t j = i + 1;
      for (; j < command.size() && command[j] != '"'; ++j) {
        if (command[j] == '\\' && j + 1 < command.size() &&
            (command[j + 1] == '"' || command[j + 1] == '\\' || command[j + 1] == '$' || command[j + 1] == '`')) {
          ++j;
        }
        cur += command[j];
      }
      if (j >= command.size()) throw InvalidArgument("command has an unterminated double quote");
      i = j;
      in_word = true;
    } else if (ch == '\\') {
      if (i + 1 >= command.size()) throw InvalidArgument("command ends with a dangling backslash");
      cur += command[++i];
      in_word = true;
    } else if (ch == ' ' || ch == '\t' || ch == '\n') {
      if (in_word) words.push_back(cur);
      cur.clear();
      in_word = false;
    } else {
      cur += ch;
      in_word = true;
    }
  }
  if (in_word) words.push_back(cur);
  return words;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Cascaded NCCT to CTPA contrast synthesis and evaluation", "vesselforge");
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  PhantomArgs phantom;
  auto* sp = app.add_subcommand("phantom", "Generate paired NCCT/CTPA phantom cases");
  sp->add_option("--seed", phantom.seed, "Base seed")->capture_default_str();
  sp->add_option("--cases", phantom.cases, "Number of cases")->capture_default_str();
  sp->add_option("--dims", phantom.dims, "N or NX,NY,NZ voxels")->capture_default_str();
  sp->add_option("--spacing", phantom.spacing, "S or SX,SY,SZ in mm")->capture_default_str();
  sp->add_option("--noise", phantom.noise, "Gaussian noise sigma in HU")->capture_default_str();
  sp->add_option("--tubes", phantom.tubes, "Branches per case")->capture_default_str();
  sp->add_option("--rmin", phantom.rmin, "Minimum radius in mm")->capture_default_str();
  sp->add_option("--rmax", phantom.rmax, "Maximum radius in mm")->capture_default_str();
  sp->add_option("--seed-stride", phantom.seed_stride, "Seed step between cases")->capture_default_str();
  sp->add_option("--out", phantom.out, "Output directory")->required();

  CsaMapArgs csa;
  auto* sc = app.add_subcommand("csa-map", "Classify vessel voxels into CSA strata");
  sc->add_option("--mask", csa.mask, "Vessel mask VVOL")->required();
  sc->add_option("--label", csa.label, "Classify one label only (default: each label separately)");
  sc->add_option("--out", csa.out, "Output CSA map VVOL")->required();

  SynthArgs synth;
  auto* ss = app.add_subcommand("synthesize", "Run the two-stage cascade");
  ss->add_option("--ncct", synth.ncct, "NCCT volume VVOL")->required();
  ss->add_option("--vessels", synth.vessels, "Vessel mask VVOL used for routing")->required();
  ss->add_option("--g1", synth.g1, "identity | analytic | cmd:\"...\"")->capture_default_str();
  ss->add_option("--g2", synth.g2, "identity | analytic | cmd:\"...\"")->capture_default_str();
  ss->add_option("--config", synth.config, "Cascade config JSON");
  ss->add_option("--out", synth.out, "Output volume VVOL")->required();
  ss->add_option("--artery-delta", synth.artery_delta, "Analytic artery enhancement in HU")->capture_default_str();
  ss->add_option("--vein-delta", synth.vein_delta, "Analytic vein enhancement in HU")->capture_default_str();
  ss->add_option("--instances", synth.instances, "Child processes per cmd backend")->capture_default_str();
  ss->add_option("--timeout", synth.timeout_s, "Per-patch I/O timeout for cmd backends, seconds")
      ->capture_default_str();

  SubtractArgs sub;
  auto* sb = app.add_subcommand("subtract", "Voxelwise a - b");
  sb->add_option("--a", sub.a, "Minuend VVOL")->required();
  sb->add_option("--b", sub.b, "Subtrahend VVOL")->required();
  sb->add_option("--out", sub.out, "Output VVOL")->required();

  EvalArgs ev;
  auto* se = app.add_subcommand("eval", "Similarity metrics in artery and vein regions");
  se->add_option("--pred", ev.pred, "Synthesized volume")->required();
  se->add_option("--ref", ev.ref, "Reference CTPA volume")->required();
  se->add_option("--artery", ev.artery, "Mask selecting the artery region")->required();
  se->add_option("--vein", ev.vein, "Mask selecting the vein region")->required();
  se->add_option("--artery-label", ev.artery_label, "Artery label in --artery")->capture_default_str();
  se->add_option("--vein-label", ev.vein_label, "Vein label in --vein")->capture_default_str();
  se->add_option("--psnr-max", ev.psnr_max, "PSNR peak value")->capture_default_str();
  se->add_option("--ssim-window", ev.ssim_window, "SSIM window edge (odd)")->capture_default_str();
  se->add_option("--out", ev.out, "Report JSON (CSV written beside it)")->required();

  SegEvalArgs seg;
  auto* sg = app.add_subcommand("seg-eval", "Dice and centerline metrics");
  sg->add_option("--pred", seg.pred, "Predicted mask")->required();
  sg->add_option("--gt", seg.gt, "Ground-truth mask")->required();
  sg->add_option("--label", seg.label, "1 or 2 (default: artery, vein and average rows)");
  sg->add_option("--out", seg.out, "Report JSON (CSV written beside it)")->required();

  QuantifyArgs qa;
  auto* sq = app.add_subcommand("quantify", "Stratified vessel-volume ICC");
  sq->add_option("--manifest", qa.manifest, "Quantify manifest JSON")->required();
  sq->add_option("--csa-source", qa.csa_source, "own | reference")->capture_default_str();
  sq->add_option("--out", qa.out, "Report JSON (CSV written beside it)")->required();

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("vesselforge");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sp->parsed()) return cmd_phantom(phantom, out);
    if (sc->parsed()) return cmd_csa_map(csa, out);
    if (ss->parsed()) return cmd_synthesize(synth, out);
    if (sb->parsed()) return cmd_subtract(sub, out);
    if (se->parsed()) return cmd_eval(ev, out);
    if (sg->parsed()) return cmd_seg_eval(seg, out);
    if (sq->parsed()) return cmd_quantify(qa, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace vesselforge
