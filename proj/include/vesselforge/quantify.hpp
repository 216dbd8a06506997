#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vesselforge/csa.hpp"

namespace vesselforge {

struct AgreementInput {
  std::vector<std::string> subjects;
  std::vector<double> method_a_mm3;
  std::vector<double> method_b_mm3;

  void validate() const;
};

// Two-way ANOVA mean squares for n subjects and k = 2 methods.
struct MeanSquares {
  double rows = 0.0;     // subjects
  double columns = 0.0;  // methods
  double error = 0.0;
};

struct IccResult {
  double value = 0.0;   // clamped to [-1, 1]
  double raw = 0.0;     // unclamped formula value (may be -inf when the denominator vanishes)
  bool degenerate = false;  // every value equal; value defined as 1.0
  bool clamped = false;
  MeanSquares ms;
};

MeanSquares mean_squares(std::span<const double> a, std::span<const double> b);

// ICC(2,1): two-way random effects, absolute agreement, single measurement.
IccResult icc_2_1(std::span<const double> a, std::span<const double> b);
IccResult icc_2_1(const AgreementInput& input);

struct CaseStrata {
  std::string id;
  StrataVolumes ncct;
  StrataVolumes dcctpa;
  StrataVolumes reference;
};

struct StratumAgreement {
  CsaClass stratum = CsaClass::Small;
  IccResult icc_ncct_vs_ref;
  IccResult icc_dcctpa_vs_ref;
  std::size_t n_subjects = 0;
};

struct AgreementReport {
  std::vector<StratumAgreement> rows;  // Small, Medium, Large
};

double stratum_volume(const StrataVolumes& v, CsaClass c);

// Throws DataError with fewer than two cases.
AgreementReport consistency_report(const std::vector<CaseStrata>& cases);

// Which mask the CSA map is computed on when stratifying a method's mask.
enum class CsaSource { Own, Reference };
CsaSource csa_source_from_name(const std::string& s);

// Every voxel takes the class of its nearest classified voxel.
LabelMask extend_csa_map(const LabelMask& csa_map, unsigned threads = 1);

StrataVolumes method_strata(const LabelMask& method_mask, const LabelMask& reference_mask, CsaSource source,
                            const CsaThresholds& t = {}, unsigned threads = 1);

// Quantify manifest: {"cases":[{"id", "masks":{"ncct","dcctpa","reference"}}]}
// with VVOL paths relative to the manifest (a cohort entry's "vessel_mask"
// is used when "reference" is absent), or
// {"cases":[{"id", "volumes_mm3":{"ncct":{"small","medium","large"},...}}]}.
struct QuantifyInputs {
  std::vector<CaseStrata> cases;
  std::vector<std::filesystem::path> inputs;  // every file read
};

QuantifyInputs load_quantify_manifest(const std::filesystem::path& manifest, CsaSource source,
                                      unsigned threads = 1);

}  // namespace vesselforge
