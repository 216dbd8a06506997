#pragma once

// Little-endian byte packing shared by the VVOL and PSP/1 codecs.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

namespace vesselforge::detail {

inline void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

inline void put_f32le(std::vector<std::uint8_t>& out, std::span<const float> values) {
  out.reserve(out.size() + values.size() * 4);
  for (float f : values) put_u32le(out, std::bit_cast<std::uint32_t>(f));
}

inline void get_f32le(const std::uint8_t* p, std::span<float> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::bit_cast<float>(get_u32le(p + 4 * i));
}

}  // namespace vesselforge::detail
