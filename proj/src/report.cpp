#include "vesselforge/report.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace vesselforge {

namespace {

using ojson = nlohmann::ordered_json;

ojson number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

double number_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("report: missing field \"") + key + "\"");
  const auto& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_number(v.get<std::string>());
  throw DataError(std::string("report: field \"") + key + "\" is not a number");
}

const nlohmann::json& rows_of(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array()) {
    throw DataError(std::string("report: expected an object with a \"") + key + "\" array");
  }
  return j.at(key);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

// Rows after a header that must match exactly.
std::vector<std::vector<std::string>> csv_rows(const std::string& csv, const std::string& header) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || split(line, ',') != split(header, ',')) {
    throw DataError("report: CSV header must be \"" + header + "\"");
  }
  const std::size_t cols = split(header, ',').size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto f = split(line, ',');
    if (f.size() != cols) throw DataError("report: CSV row has " + std::to_string(f.size()) + " fields: " + line);
    rows.push_back(std::move(f));
  }
  return rows;
}

const char* kSimilarityHeader = "region,mae_hu,psnr_db,ssim";
const char* kSegHeader = "region,dice,cl_dice,cl_precision,cl_recall";
const char* kAgreementHeader = "stratum,icc_ncct_vs_ref,icc_dcctpa_vs_ref,n_subjects";

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_number(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end || s.empty()) throw DataError("report: not a number: \"" + s + "\"");
  return v;
}

std::string stratum_name(CsaClass c) {
  switch (c) {
    case CsaClass::Small: return "<5";
    case CsaClass::Medium: return "5-10";
    case CsaClass::Large: return ">10";
    case CsaClass::None: break;
  }
  throw InvalidArgument("stratum_name: class None has no stratum");
}

CsaClass stratum_from_name(const std::string& s) {
  if (s == "<5") return CsaClass::Small;
  if (s == "5-10") return CsaClass::Medium;
  if (s == ">10") return CsaClass::Large;
  throw DataError("report: unknown stratum \"" + s + "\"");
}

ojson to_json(const std::vector<SimilarityRecord>& rows) {
  ojson arr = ojson::array();
  for (const auto& r : rows) {
    ojson o;
    o["region"] = region_name(r.region);
    o["mae_hu"] = number_json(r.mae_hu);
    o["psnr_db"] = number_json(r.psnr_db);
    o["ssim"] = number_json(r.ssim);
    arr.push_back(o);
  }
  ojson doc;
  doc["records"] = arr;
  return doc;
}

ojson to_json(const std::vector<SegRecord>& rows) {
  ojson arr = ojson::array();
  for (const auto& r : rows) {
    ojson o;
    o["region"] = region_name(r.region);
    o["dice"] = number_json(r.dice);
    o["cl_dice"] = number_json(r.cl_dice);
    o["cl_precision"] = number_json(r.cl_precision);
    o["cl_recall"] = number_json(r.cl_recall);
    arr.push_back(o);
  }
  ojson doc;
  doc["records"] = arr;
  return doc;
}

ojson to_json(const AgreementReport& report) {
  ojson arr = ojson::array();
  for (const auto& r : report.rows) {
    ojson o;
    o["stratum"] = stratum_name(r.stratum);
    o["icc_ncct_vs_ref"] = number_json(r.icc_ncct_vs_ref.value);
    o["icc_dcctpa_vs_ref"] = number_json(r.icc_dcctpa_vs_ref.value);
    o["n_subjects"] = r.n_subjects;
    ojson flags = ojson::array();
    if (r.icc_ncct_vs_ref.degenerate) flags.push_back("ncct_degenerate");
    if (r.icc_ncct_vs_ref.clamped) flags.push_back("ncct_clamped");
    if (r.icc_dcctpa_vs_ref.degenerate) flags.push_back("dcctpa_degenerate");
    if (r.icc_dcctpa_vs_ref.clamped) flags.push_back("dcctpa_clamped");
    if (!flags.empty()) o["flags"] = flags;
    arr.push_back(o);
  }
  ojson doc;
  doc["strata"] = arr;
  return doc;
}

std::string to_csv(const std::vector<SimilarityRecord>& rows) {
  std::string s = std::string(kSimilarityHeader) + "\n";
  for (const auto& r : rows) {
    s += region_name(r.region) + "," + format_number(r.mae_hu) + "," + format_number(r.psnr_db) + "," +
         format_number(r.ssim) + "\n";
  }
  return s;
}

std::string to_csv(const std::vector<SegRecord>& rows) {
  std::string s = std::string(kSegHeader) + "\n";
  for (const auto& r : rows) {
    s += region_name(r.region) + "," + format_number(r.dice) + "," + format_number(r.cl_dice) + "," +
         format_number(r.cl_precision) + "," + format_number(r.cl_recall) + "\n";
  }
  return s;
}

std::string to_csv(const AgreementReport& report) {
  std::string s = std::string(kAgreementHeader) + "\n";
  for (const auto& r : report.rows) {
    s += stratum_name(r.stratum) + "," + format_number(r.icc_ncct_vs_ref.value) + "," +
         format_number(r.icc_dcctpa_vs_ref.value) + "," + std::to_string(r.n_subjects) + "\n";
  }
  return s;
}

std::vector<SimilarityRecord> similarity_from_json(const nlohmann::json& j) {
  std::vector<SimilarityRecord> out;
  for (const auto& o : rows_of(j, "records")) {
    SimilarityRecord r;
    r.region = region_from_name(o.value("region", std::string()));
    r.mae_hu = number_from_json(o, "mae_hu");
    r.psnr_db = number_from_json(o, "psnr_db");
    r.ssim = number_from_json(o, "ssim");
    out.push_back(r);
  }
  return out;
}

std::vector<SegRecord> segmentation_from_json(const nlohmann::json& j) {
  std::vector<SegRecord> out;
  for (const auto& o : rows_of(j, "records")) {
    SegRecord r;
    r.region = region_from_name(o.value("region", std::string()));
    r.dice = number_from_json(o, "dice");
    r.cl_dice = number_from_json(o, "cl_dice");
    r.cl_precision = number_from_json(o, "cl_precision");
    r.cl_recall = number_from_json(o, "cl_recall");
    out.push_back(r);
  }
  return out;
}

AgreementReport agreement_from_json(const nlohmann::json& j) {
  AgreementReport rep;
  for (const auto& o : rows_of(j, "strata")) {
    StratumAgreement r;
    r.stratum = stratum_from_name(o.value("stratum", std::string()));
    r.icc_ncct_vs_ref.value = r.icc_ncct_vs_ref.raw = number_from_json(o, "icc_ncct_vs_ref");
    r.icc_dcctpa_vs_ref.value = r.icc_dcctpa_vs_ref.raw = number_from_json(o, "icc_dcctpa_vs_ref");
    r.n_subjects = static_cast<std::size_t>(number_from_json(o, "n_subjects"));
    if (o.contains("flags")) {
      for (const auto& f : o.at("flags")) {
        const std::string s = f.get<std::string>();
        if (s == "ncct_degenerate") r.icc_ncct_vs_ref.degenerate = true;
        if (s == "ncct_clamped") r.icc_ncct_vs_ref.clamped = true;
        if (s == "dcctpa_degenerate") r.icc_dcctpa_vs_ref.degenerate = true;
        if (s == "dcctpa_clamped") r.icc_dcctpa_vs_ref.clamped = true;
      }
    }
    rep.rows.push_back(r);
  }
  return rep;
}

std::vector<SimilarityRecord> similarity_from_csv(const std::string& csv) {
  std::vector<SimilarityRecord> out;
  for (const auto& f : csv_rows(csv, kSimilarityHeader)) {
    out.push_back({region_from_name(f[0]), parse_number(f[1]), parse_number(f[2]), parse_number(f[3])});
  }
  return out;
}

std::vector<SegRecord> segmentation_from_csv(const std::string& csv) {
  std::vector<SegRecord> out;
  for (const auto& f : csv_rows(csv, kSegHeader)) {
    out.push_back(
        {region_from_name(f[0]), parse_number(f[1]), parse_number(f[2]), parse_number(f[3]), parse_number(f[4])});
  }
  return out;
}

AgreementReport agreement_from_csv(const std::string& csv) {
  AgreementReport rep;
  for (const auto& f : csv_rows(csv, kAgreementHeader)) {
    StratumAgreement r;
    r.stratum = stratum_from_name(f[0]);
    r.icc_ncct_vs_ref.value = r.icc_ncct_vs_ref.raw = parse_number(f[1]);
    r.icc_dcctpa_vs_ref.value = r.icc_dcctpa_vs_ref.raw = parse_number(f[2]);
    r.n_subjects = static_cast<std::size_t>(parse_number(f[3]));
    rep.rows.push_back(r);
  }
  return rep;
}

}  // namespace vesselforge
