#include "vesselforge/quantify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vesselforge/vvol.hpp"

#include "json.hpp"

namespace vesselforge {

void AgreementInput::validate() const {
  if (method_a_mm3.size() != method_b_mm3.size()) throw InvalidArgument("icc: method volume lists differ in length");
  if (!subjects.empty() && subjects.size() != method_a_mm3.size()) {
    throw InvalidArgument("icc: subject list length differs from volume lists");
  }
  if (method_a_mm3.size() < 2) throw DataError("icc: at least 2 subjects required");
  for (std::size_t i = 0; i < method_a_mm3.size(); ++i) {
    const double a = method_a_mm3[i], b = method_b_mm3[i];
    if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0) {
      throw DataError("icc: volumes must be finite and >= 0 (subject " + std::to_string(i) + ")");
    }
  }
}

MeanSquares mean_squares(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("icc: method value lists differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw DataError("icc: at least 2 subjects required");
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) grand += a[i] + b[i];
  grand /= static_cast<double>(2 * n);
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);

  double ss_rows = 0.0, ss_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double row = (a[i] + b[i]) / 2.0;
    ss_rows += 2.0 * (row - grand) * (row - grand);
    const double ea = a[i] - row - ma + grand;
    const double eb = b[i] - row - mb + grand;
    ss_err += ea * ea + eb * eb;
  }
  const double ss_cols = static_cast<double>(n) * ((ma - grand) * (ma - grand) + (mb - grand) * (mb - grand));
  MeanSquares ms;
  ms.rows = ss_rows / static_cast<double>(n - 1);
  ms.columns = ss_cols;  // k - 1 = 1
  ms.error = ss_err / static_cast<double>(n - 1);
  return ms;
}

IccResult icc_2_1(std::span<const double> a, std::span<const double> b) {
  IccResult r;
  r.ms = mean_squares(a, b);
  const bool all_equal = std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; }) &&
                         std::all_of(b.begin(), b.end(), [&](double v) { return v == a[0]; });
  if (all_equal) {
    r.value = r.raw = 1.0;
    r.degenerate = true;
    return r;
  }
  const double n = static_cast<double>(a.size());
  const double k = 2.0;
  const MeanSquares& m = r.ms;
  const double num = m.rows - m.error;
  const double den = m.rows + (k - 1.0) * m.error + (k / n) * (m.columns - m.error);
  if (den > 0.0) {
    r.raw = num / den;
  } else {
    r.raw = num > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  r.value = std::clamp(r.raw, -1.0, 1.0);
  r.clamped = r.value != r.raw;
  return r;
}

IccResult icc_2_1(const AgreementInput& input) {
  input.validate();
  return icc_2_1(input.method_a_mm3, input.method_b_mm3);
}

double stratum_volume(const StrataVolumes& v, CsaClass c) {
  switch (c) {
    case CsaClass::Small: return v.small_mm3;
    case CsaClass::Medium: return v.medium_mm3;
    case CsaClass::Large: return v.large_mm3;
    case CsaClass::None: break;
  }
  throw InvalidArgument("stratum_volume: no volume for class None");
}

AgreementReport consistency_report(const std::vector<CaseStrata>& cases) {
  if (cases.size() < 2) {
    throw DataError("consistency_report: at least 2 cases required, got " + std::to_string(cases.size()));
  }
  AgreementReport rep;
  for (CsaClass c : {CsaClass::Small, CsaClass::Medium, CsaClass::Large}) {
    AgreementInput ncct, dcctpa;
    for (const auto& cs : cases) {
      ncct.subjects.push_back(cs.id);
      ncct.method_a_mm3.push_back(stratum_volume(cs.ncct, c));
      ncct.method_b_mm3.push_back(stratum_volume(cs.reference, c));
      dcctpa.method_a_mm3.push_back(stratum_volume(cs.dcctpa, c));
      dcctpa.method_b_mm3.push_back(stratum_volume(cs.reference, c));
    }
    dcctpa.subjects = ncct.subjects;
    StratumAgreement row;
    row.stratum = c;
    row.icc_ncct_vs_ref = icc_2_1(ncct);
    row.icc_dcctpa_vs_ref = icc_2_1(dcctpa);
    row.n_subjects = cases.size();
    rep.rows.push_back(row);
  }
  return rep;
}

CsaSource csa_source_from_name(const std::string& s) {
  if (s == "own") return CsaSource::Own;
  if (s == "reference") return CsaSource::Reference;
  throw InvalidArgument("unknown CSA source \"" + s + "\" (expected own or reference)");
}

LabelMask extend_csa_map(const LabelMask& csa_map, unsigned threads) {
  std::vector<std::uint8_t> sites(csa_map.size());
  for (std::size_t i = 0; i < csa_map.size(); ++i) sites[i] = csa_map[i] != 0;
  const FeatureTransform ft = feature_transform(csa_map.geometry(), sites, threads);
  LabelMask out(csa_map.geometry(), 0);
  for (std::size_t i = 0; i < csa_map.size(); ++i) {
    if (ft.nearest[i] >= 0) out[i] = csa_map[static_cast<std::size_t>(ft.nearest[i])];
  }
  return out;
}

StrataVolumes method_strata(const LabelMask& method_mask, const LabelMask& reference_mask, CsaSource source,
                            const CsaThresholds& t, unsigned threads) {
  require_same_lattice(method_mask.geometry(), reference_mask.geometry(), "method_strata");
  if (source == CsaSource::Own) {
    return stratified_volume(method_mask, classify_csa_per_label(method_mask, t, threads));
  }
  return stratified_volume(method_mask, extend_csa_map(classify_csa_per_label(reference_mask, t, threads), threads));
}

namespace {

StrataVolumes strata_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw DataError("quantify manifest: " + where + " must be an object");
  auto get = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
      throw DataError("quantify manifest: " + where + "." + key + " must be a number");
    }
    return j.at(key).get<double>();
  };
  return {get("small"), get("medium"), get("large")};
}

std::string string_field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw DataError("quantify manifest: " + where + "." + key + " must be a string");
  }
  return j.at(key).get<std::string>();
}

}  // namespace

QuantifyInputs load_quantify_manifest(const std::filesystem::path& manifest, CsaSource source, unsigned threads) {
  const auto bytes = read_file_bytes(manifest);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw DataError("quantify manifest: not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object() || !doc.contains("cases") || !doc.at("cases").is_array()) {
    throw DataError("quantify manifest: expected an object with a \"cases\" array");
  }
  const auto base = manifest.parent_path();
  QuantifyInputs out;
  out.inputs.push_back(manifest);
  std::size_t k = 0;
  for (const auto& c : doc.at("cases")) {
    const std::string where = "cases[" + std::to_string(k++) + "]";
    if (!c.is_object()) throw DataError("quantify manifest: " + where + " must be an object");
    CaseStrata cs;
    cs.id = string_field(c, "id", where);
    if (c.contains("volumes_mm3")) {
      const auto& v = c.at("volumes_mm3");
      cs.ncct = strata_from_json(v.value("ncct", nlohmann::json()), where + ".volumes_mm3.ncct");
      cs.dcctpa = strata_from_json(v.value("dcctpa", nlohmann::json()), where + ".volumes_mm3.dcctpa");
      cs.reference = strata_from_json(v.value("reference", nlohmann::json()), where + ".volumes_mm3.reference");
    } else if (c.contains("masks")) {
      const auto& m = c.at("masks");
      auto load = [&](const nlohmann::json& obj, const char* key, const std::string& at) {
        const auto p = base / string_field(obj, key, at);
        out.inputs.push_back(p);
        return read_mask(p);
      };
      const LabelMask ncct = load(m, "ncct", where + ".masks");
      const LabelMask dcctpa = load(m, "dcctpa", where + ".masks");
      // A cohort entry's vessel_mask stands in for a missing reference mask.
      const LabelMask ref = m.contains("reference") ? load(m, "reference", where + ".masks")
                                                    : load(c, "vessel_mask", where);
      cs.ncct = method_strata(ncct, ref, source, {}, threads);
      cs.dcctpa = method_strata(dcctpa, ref, source, {}, threads);
      cs.reference = method_strata(ref, ref, CsaSource::Own, {}, threads);
    } else {
      throw DataError("quantify manifest: " + where + " needs \"masks\" or \"volumes_mm3\"");
    }
    out.cases.push_back(std::move(cs));
  }
  return out;
}

}  // namespace vesselforge
