#pragma once

// JSON reports and their CSV projections. Non-finite numbers are written as
// the strings "inf", "-inf" and "nan" in both forms.

#include <string>
#include <vector>

#include "vesselforge/metrics.hpp"
#include "vesselforge/quantify.hpp"

#include "json.hpp"

namespace vesselforge {

// Shortest round-trip decimal form.
std::string format_number(double v);
double parse_number(const std::string& s);

std::string stratum_name(CsaClass c);  // "<5", "5-10", ">10"
CsaClass stratum_from_name(const std::string& s);

nlohmann::ordered_json to_json(const std::vector<SimilarityRecord>& rows);
nlohmann::ordered_json to_json(const std::vector<SegRecord>& rows);
nlohmann::ordered_json to_json(const AgreementReport& report);

std::string to_csv(const std::vector<SimilarityRecord>& rows);
std::string to_csv(const std::vector<SegRecord>& rows);
std::string to_csv(const AgreementReport& report);

std::vector<SimilarityRecord> similarity_from_json(const nlohmann::json& j);
std::vector<SegRecord> segmentation_from_json(const nlohmann::json& j);
AgreementReport agreement_from_json(const nlohmann::json& j);

std::vector<SimilarityRecord> similarity_from_csv(const std::string& csv);
std::vector<SegRecord> segmentation_from_csv(const std::string& csv);
AgreementReport agreement_from_csv(const std::string& csv);

}  // namespace vesselforge
