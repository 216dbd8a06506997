#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace vesselforge {

// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace vesselforge
