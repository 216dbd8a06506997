#include <cmath>
#include <limits>

#include "doctest.h"
#include "vesselforge/report.hpp"

using namespace vesselforge;

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(156.28) == "156.28");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(std::isinf(parse_number("inf")));
  CHECK(parse_number("1e-3") == 0.001);
  CHECK_THROWS_AS(parse_number("12abc"), DataError);
  CHECK_THROWS_AS(parse_number(""), DataError);
  const double x = 1.0 / 3.0;
  CHECK(parse_number(format_number(x)) == x);
}

TEST_CASE("similarity schema accepts reported averages") {
  const std::string csv = "region,mae_hu,psnr_db,ssim\nAverage,156.28,20.71,0.98\n";
  const auto rows = similarity_from_csv(csv);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].region == Region::Average);
  CHECK(rows[0].mae_hu == 156.28);
  CHECK(rows[0].psnr_db == 20.71);
  CHECK(rows[0].ssim == 0.98);
  CHECK(to_csv(rows) == csv);
  const auto back = similarity_from_json(nlohmann::json::parse(to_json(rows).dump()));
  CHECK(back[0].mae_hu == 156.28);
}

TEST_CASE("infinite PSNR round-trips as a literal") {
  std::vector<SimilarityRecord> rows{{Region::Artery, 0.0, std::numeric_limits<double>::infinity(), 1.0}};
  const std::string csv = to_csv(rows);
  CHECK(csv == "region,mae_hu,psnr_db,ssim\nArtery,0,inf,1\n");
  CHECK(std::isinf(similarity_from_csv(csv)[0].psnr_db));
  const auto j = to_json(rows);
  CHECK(j["records"][0]["psnr_db"] == "inf");
  CHECK(std::isinf(similarity_from_json(nlohmann::json::parse(j.dump()))[0].psnr_db));
}

TEST_CASE("segmentation schema") {
  std::vector<SegRecord> rows{{Region::Artery, 0.9, 0.8, 0.85, 0.75}, {Region::Vein, 0.5, 0.4, 0.3, 0.6},
                              {Region::Average, 0.7, 0.6, 0.575, 0.675}};
  const std::string csv = to_csv(rows);
  CHECK(csv.rfind("region,dice,cl_dice,cl_precision,cl_recall\n", 0) == 0);
  const auto back = segmentation_from_csv(csv);
  REQUIRE(back.size() == 3);
  CHECK(back[1].cl_precision == 0.3);
  const auto bj = segmentation_from_json(nlohmann::json::parse(to_json(rows).dump()));
  CHECK(bj[2].cl_recall == 0.675);
  CHECK_THROWS_AS(segmentation_from_csv("region,dice\nArtery,1\n"), DataError);
  CHECK_THROWS_AS(segmentation_from_csv("region,dice,cl_dice,cl_precision,cl_recall\nArtery,1,1\n"), DataError);
}

TEST_CASE("agreement schema accepts a reported table") {
  const std::string csv =
      "stratum,icc_ncct_vs_ref,icc_dcctpa_vs_ref,n_subjects\n<5,0.53,0.76,161\n5-10,0.84,0.83,161\n>10,0.72,0.85,161\n";
  const AgreementReport rep = agreement_from_csv(csv);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].stratum == CsaClass::Small);
  CHECK(rep.rows[0].icc_ncct_vs_ref.value == 0.53);
  CHECK(rep.rows[0].icc_dcctpa_vs_ref.value == 0.76);
  CHECK(rep.rows[1].icc_ncct_vs_ref.value == 0.84);
  CHECK(rep.rows[2].icc_dcctpa_vs_ref.value == 0.85);
  CHECK(to_csv(rep) == csv);
  const AgreementReport j = agreement_from_json(nlohmann::json::parse(to_json(rep).dump()));
  CHECK(j.rows[2].icc_ncct_vs_ref.value == 0.72);
  CHECK(j.rows[1].n_subjects == 161);
  CHECK_THROWS_AS(stratum_from_name("<4"), DataError);
}

TEST_CASE("agreement flags survive JSON") {
  AgreementReport rep;
  StratumAgreement r;
  r.icc_ncct_vs_ref.value = 1.0;
  r.icc_ncct_vs_ref.degenerate = true;
  r.icc_dcctpa_vs_ref.value = -1.0;
  r.icc_dcctpa_vs_ref.clamped = true;
  r.n_subjects = 2;
  rep.rows.push_back(r);
  const auto back = agreement_from_json(nlohmann::json::parse(to_json(rep).dump()));
  CHECK(back.rows[0].icc_ncct_vs_ref.degenerate);
  CHECK(back.rows[0].icc_dcctpa_vs_ref.clamped);
}
