#pragma once

// PSP/1 patch-server framing over a byte stream.
//
//   request  = "PSPQ" | u32 LE json length | {"id","stage","dims","spacing_mm"}
//              | px*py*pz f32 LE
//   response = "PSPR" | u32 LE json length | {"id","status"[,"message"]}
//              | (status "ok") payload of the request's length
//
// One request in flight per child; responses come back in order.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vesselforge/volume.hpp"

namespace vesselforge {

class ProtocolError : public DataError {
 public:
  using DataError::DataError;
};

struct PspRequest {
  std::uint64_t id = 0;
  int stage = 1;
  Dims dims;
  Vec3 spacing{1.0, 1.0, 1.0};
  std::vector<float> payload;
};

struct PspResponse {
  std::uint64_t id = 0;
  bool ok = true;
  std::optional<std::string> message;
  std::vector<float> payload;
};

inline constexpr char kPspRequestMagic[] = "PSPQ";
inline constexpr char kPspResponseMagic[] = "PSPR";

std::vector<std::uint8_t> encode_request(const PspRequest& r);
std::vector<std::uint8_t> encode_response(const PspResponse& r);

// Reads up to n bytes into buf; returns 0 at end of stream.
using ReadSome = std::function<std::size_t(std::uint8_t* buf, std::size_t n)>;

// Returns nullopt on a clean end of stream before the first byte of a frame.
std::optional<PspRequest> read_request(const ReadSome& read);
// expected_values is the element count of the matching request.
PspResponse read_response(const ReadSome& read, std::size_t expected_values);

}  // namespace vesselforge
