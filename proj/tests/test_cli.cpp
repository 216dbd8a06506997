#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "vesselforge/cli.hpp"
#include "vesselforge/hash.hpp"
#include "vesselforge/parallel.hpp"
#include "vesselforge/volume.hpp"
#include "vesselforge/vvol.hpp"

using namespace vesselforge;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  return {code, o.str(), e.str()};
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::vector<std::string> phantom_args(const std::string& out) {
  return {"phantom", "--seed", "11", "--cases", "2", "--dims", "40", "--out", out};
}

}  // namespace

TEST_CASE("split_command") {
  CHECK(split_command("python3 gen.py --x 1") == std::vector<std::string>{"python3", "gen.py", "--x", "1"});
  CHECK(split_command(R"(a "b c" 'd e' f\ g)") == std::vector<std::string>{"a", "b c", "d e", "f g"});
  CHECK(split_command(R"("it's" 'say "hi"')") == std::vector<std::string>{"it's", "say \"hi\""});
  CHECK(split_command("  ").empty());
  CHECK(split_command(R"(x "")") == std::vector<std::string>{"x", ""});
  CHECK_THROWS_AS(split_command("a 'b"), InvalidArgument);
}

TEST_CASE("exit codes") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
  const Run v = cli({"--version"});
  CHECK(v.code == kExitOk);
  CHECK(v.out.find(kToolVersion) != std::string::npos);
  CHECK(cli({"subtract", "--a", "x.vvol"}).code == kExitUsage);
  CHECK(cli({"subtract", "--a", "/nonexistent/a.vvol", "--b", "/nonexistent/b.vvol", "--out", "/tmp/x.vvol"}).code ==
        kExitData);
  TempDir d("vf_cli_exit");
  CHECK(cli({"phantom", "--dims", "4,4", "--out", d / "p"}).code == kExitUsage);
  CHECK(cli({"phantom", "--cases", "0", "--out", d / "p"}).code == kExitUsage);
}

TEST_CASE("phantom output is deterministic") {
  TempDir d("vf_cli_phantom");
  REQUIRE(cli(phantom_args(d / "r1")).code == kExitOk);
  REQUIRE(cli(phantom_args(d / "r2")).code == kExitOk);
  for (const char* f : {"case_000/ncct.vvol", "case_000/ctpa.vvol", "case_001/vessel_mask.vvol",
                        "case_001/tubes.json", "cohort.json"}) {
    CAPTURE(f);
    CHECK(sha256_file(d.path / "r1" / f) == sha256_file(d.path / "r2" / f));
  }
  CHECK(sha256_file(d.path / "r1/case_000/ncct.vvol") != sha256_file(d.path / "r1/case_001/ncct.vvol"));
  const auto m = read_json(d.path / "r1/run_manifest.json");
  CHECK(m["tool"] == "vesselforge");
  CHECK(m["version"] == kToolVersion);
  CHECK(m["command"] == "phantom");
  CHECK(m["config"]["seed"] == 11);
  CHECK(m["outputs"].size() == 9);
  CHECK(m["outputs"][0]["sha256"] == sha256_file(d.path / "r1" / m["outputs"][0]["path"].get<std::string>()));
  const auto cohort = read_json(d.path / "r1/cohort.json");
  CHECK(cohort["cases"].size() == 2);
  CHECK(cohort["cases"][1]["ncct"] == "case_001/ncct.vvol");
}

TEST_CASE("synthesize, subtract and evaluate a phantom") {
  TempDir d("vf_cli_pipeline");
  REQUIRE(cli(phantom_args(d / "p")).code == kExitOk);
  const std::string c = d / "p/case_000/";

  REQUIRE(cli({"synthesize", "--ncct", c + "ncct.vvol", "--vessels", c + "vessel_mask.vvol", "--g1", "identity",
               "--g2", "identity", "--out", d / "id.vvol"})
              .code == kExitOk);
  const Volume ncct = read_volume(c + "ncct.vvol");
  const Volume id = read_volume(d / "id.vvol");
  REQUIRE(id.geometry() == ncct.geometry());
  double worst = 0.0;
  for (std::size_t i = 0; i < id.size(); ++i) worst = std::max(worst, static_cast<double>(std::abs(id[i] - ncct[i])));
  CHECK(worst <= 1e-4);
  const auto sm = read_json(d.path / "id.vvol.manifest.json");
  CHECK(sm["command"] == "synthesize");
  CHECK(sm["inputs"].size() == 2);
  CHECK(sm["timings_s"].contains("total"));

  REQUIRE(cli({"synthesize", "--ncct", c + "ncct.vvol", "--vessels", c + "vessel_mask.vvol", "--g1", "analytic",
               "--g2", "analytic", "--out", d / "an.vvol"})
              .code == kExitOk);
  REQUIRE(cli({"subtract", "--a", d / "an.vvol", "--b", c + "ncct.vvol", "--out", d / "diff.vvol"}).code == kExitOk);
  const Volume diff = read_volume(d / "diff.vvol");
  const LabelMask mask = read_mask(c + "vessel_mask.vvol");
  for (std::size_t i = 0; i < diff.size(); ++i)
    if (mask[i] == 0) REQUIRE(std::abs(diff[i]) <= 1e-3f);

  const Run ev = cli({"eval", "--pred", d / "an.vvol", "--ref", c + "ctpa.vvol", "--artery", c + "vessel_mask.vvol",
                      "--vein", c + "vessel_mask.vvol", "--out", d / "eval.json"});
  REQUIRE(ev.code == kExitOk);
  const auto ej = read_json(d.path / "eval.json");
  REQUIRE(ej["records"].size() == 3);
  CHECK(ej["records"][0]["region"] == "Artery");
  CHECK(ej["records"][2]["region"] == "Average");
  CHECK(ej["records"][0]["mae_hu"].get<double>() <= 5.0);
  CHECK(fs::exists(d.path / "eval.csv"));
  CHECK(ev.out.rfind("region,mae_hu,psnr_db,ssim\n", 0) == 0);

  const Run sg = cli({"seg-eval", "--pred", c + "vessel_mask.vvol", "--gt", c + "vessel_mask.vvol", "--out",
                      d / "seg.csv"});
  REQUIRE(sg.code == kExitOk);
  const auto sj = read_json(d.path / "seg.json");
  REQUIRE(sj["records"].size() == 3);
  for (const auto& r : sj["records"]) CHECK(r["dice"] == 1.0);
  CHECK(cli({"seg-eval", "--pred", c + "vessel_mask.vvol", "--gt", c + "vessel_mask.vvol", "--label", "3", "--out",
             d / "seg3.json"})
            .code == kExitUsage);

  const Run cm = cli({"csa-map", "--mask", c + "vessel_mask.vvol", "--out", d / "csa.vvol"});
  REQUIRE(cm.code == kExitOk);
  const LabelMask csa = read_mask(d / "csa.vvol");
  for (std::size_t i = 0; i < csa.size(); ++i) REQUIRE((csa[i] != 0) == (mask[i] != 0));
}

TEST_CASE("quantify from a manifest") {
  TempDir d("vf_cli_quantify");
  REQUIRE(cli({"phantom", "--seed", "3", "--cases", "3", "--dims", "36", "--out", d / "p"}).code == kExitOk);
  nlohmann::json cases = nlohmann::json::array();
  for (int k = 0; k < 3; ++k) {
    const std::string m = "p/case_00" + std::to_string(k) + "/vessel_mask.vvol";
    cases.push_back({{"id", "case" + std::to_string(k)}, {"vessel_mask", m}, {"masks", {{"ncct", m}, {"dcctpa", m}}}});
  }
  std::ofstream(d / "q.json") << nlohmann::json{{"cases", cases}}.dump();
  const Run q = cli({"quantify", "--manifest", d / "q.json", "--out", d / "icc.json"});
  REQUIRE(q.code == kExitOk);
  const auto j = read_json(d.path / "icc.json");
  REQUIRE(j["strata"].size() == 3);
  CHECK(j["strata"][0]["stratum"] == "<5");
  CHECK(j["strata"][0]["n_subjects"] == 3);
  CHECK(cli({"quantify", "--manifest", d / "q.json", "--csa-source", "both", "--out", d / "x.json"}).code ==
        kExitUsage);
}

TEST_CASE("thread count from the environment") {
  const char* old = std::getenv("VESSELFORGE_THREADS");
  const std::string saved = old ? old : "";
  setenv("VESSELFORGE_THREADS", "3", 1);
  CHECK(configured_threads() == 3);
  setenv("VESSELFORGE_THREADS", "0", 1);
  CHECK(configured_threads() >= 1);
  if (old)
    setenv("VESSELFORGE_THREADS", saved.c_str(), 1);
  else
    unsetenv("VESSELFORGE_THREADS");
}
