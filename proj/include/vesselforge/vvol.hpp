#pragma once

// VVOL single-file container.
//
//   bytes 0..7      ASCII "VVOL0001"
//   bytes 8..11     u32 LE header length H
//   bytes 12..12+H  UTF-8 JSON {"dims":[nx,ny,nz],"spacing_mm":[..],
//                   "origin_mm":[..],"dtype":"f32le"|"u8","order":"x-fastest"}
//   rest            payload, nx*ny*nz elements, little-endian, x-fastest
//
// Writers emit the JSON with keys in exactly that order, no whitespace and
// shortest round-trip float formatting, so identical grids give identical bytes.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vesselforge/volume.hpp"

namespace vesselforge {

enum class VvolErrorKind { Io, BadMagic, BadHeader, LengthMismatch, NonFinite, WrongDtype };

class VvolError : public DataError {
 public:
  VvolError(VvolErrorKind kind, const std::string& what) : DataError(what), kind_(kind) {}
  VvolErrorKind kind() const { return kind_; }

 private:
  VvolErrorKind kind_;
};

enum class Dtype { F32le, U8 };

using AnyGrid = std::variant<Volume, LabelMask>;

inline constexpr char kVvolMagic[] = "VVOL0001";

std::string vvol_header_json(const Geometry& g, Dtype dtype);

std::vector<std::uint8_t> encode_vvol(const Volume& v);
std::vector<std::uint8_t> encode_vvol(const LabelMask& m);
AnyGrid decode_vvol(std::span<const std::uint8_t> bytes);

void write_vvol(const Volume& v, const std::filesystem::path& path);
void write_vvol(const LabelMask& m, const std::filesystem::path& path);
AnyGrid read_vvol(const std::filesystem::path& path);

// Convenience readers that also reject the other dtype.
Volume read_volume(const std::filesystem::path& path);
LabelMask read_mask(const std::filesystem::path& path);

// Whole-file helpers shared with the manifest hashing code.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace vesselforge
