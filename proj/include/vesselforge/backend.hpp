#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vesselforge/volume.hpp"

namespace vesselforge {

// A patch generator: maps an input patch to an output patch of identical
// geometry. Implementations must be safe to call from several threads and
// must give the same output for the same patch regardless of call order.
class SynthBackend {
 public:
  virtual ~SynthBackend() = default;
  virtual Volume process(const Volume& patch, int stage, std::uint64_t patch_id) = 0;
  virtual std::string describe() const = 0;
};

// Raised when a backend fails on a patch; carries the patch id.
class BackendError : public Error {
 public:
  BackendError(std::uint64_t patch_id, const std::string& what)
      : Error("patch " + std::to_string(patch_id) + ": " + what), patch_id_(patch_id) {}
  std::uint64_t patch_id() const { return patch_id_; }

 private:
  std::uint64_t patch_id_;
};

struct BuiltinParams {
  // "analytic" only: the vessel mask on the full-volume lattice and the HU
  // delta added on voxels of each label.
  std::optional<LabelMask> mask;
  std::array<float, 256> delta_hu{};
};

// kind is "identity" or "analytic". The analytic backend locates each patch
// in the mask from the patch's origin_mm.
std::unique_ptr<SynthBackend> builtin_backend(std::string_view kind, const BuiltinParams& params = {});

// Deltas matching a phantom palette: artery and vein CTPA HU minus NCCT lumen HU.
BuiltinParams analytic_params(LabelMask mask, float artery_delta_hu, float vein_delta_hu);

struct ProcessBackendOptions {
  unsigned instances = 1;
  std::chrono::milliseconds timeout{std::chrono::seconds(120)};
};

// Spawns `instances` children running argv and exchanges one PSP/1 frame
// pair per patch. Spawn failure throws immediately.
std::unique_ptr<SynthBackend> process_backend(const std::vector<std::string>& argv,
                                              const ProcessBackendOptions& options = {});

}  // namespace vesselforge
