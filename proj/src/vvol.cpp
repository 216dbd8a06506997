#include "vesselforge/vvol.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"

#include "bytes.hpp"

namespace vesselforge {

namespace {

using ordered_json = nlohmann::ordered_json;
constexpr std::size_t kMagicLen = 8;
constexpr std::size_t kPrefixLen = kMagicLen + 4;

const char* dtype_name(Dtype d) { return d == Dtype::F32le ? "f32le" : "u8"; }

std::vector<std::uint8_t> frame(const Geometry& g, Dtype dtype) {
  const std::string header = vvol_header_json(g, dtype);
  std::vector<std::uint8_t> out(kVvolMagic, kVvolMagic + kMagicLen);
  detail::put_u32le(out, static_cast<std::uint32_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  return out;
}

[[noreturn]] void fail(VvolErrorKind kind, const std::string& msg) { throw VvolError(kind, "vvol: " + msg); }

Vec3 parse_vec3(const nlohmann::json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) fail(VvolErrorKind::BadHeader, std::string(key) + " must be a 3-array");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!a[i].is_number()) fail(VvolErrorKind::BadHeader, std::string(key) + " entries must be numbers");
    v[i] = a[i].get<double>();
  }
  return v;
}

struct Header {
  Geometry geometry;
  Dtype dtype;
};

Header parse_header(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(VvolErrorKind::BadHeader, std::string("header is not valid UTF-8 JSON: ") + e.what());
  }
  if (!j.is_object()) fail(VvolErrorKind::BadHeader, "header must be a JSON object");
  static const std::set<std::string> kKeys{"dims", "spacing_mm", "origin_mm", "dtype", "order"};
  std::set<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.insert(k);
  if (keys != kKeys) fail(VvolErrorKind::BadHeader, "header keys must be exactly dims, spacing_mm, origin_mm, dtype, order");

  Header h;
  const auto& dims = j.at("dims");
  if (!dims.is_array() || dims.size() != 3) fail(VvolErrorKind::BadHeader, "dims must be a 3-array");
  for (int i = 0; i < 3; ++i) {
    if (!dims[i].is_number_unsigned() || dims[i].get<std::uint64_t>() < 1 ||
        dims[i].get<std::uint64_t>() > (1u << 24)) {
      fail(VvolErrorKind::BadHeader, "dims entries must be integers in [1, 2^24]");
    }
    h.geometry.dims[i] = dims[i].get<std::int64_t>();
  }
  h.geometry.spacing = parse_vec3(j, "spacing_mm");
  h.geometry.origin = parse_vec3(j, "origin_mm");
  try {
    validate_geometry(h.geometry);
  } catch (const InvalidArgument& e) {
    fail(VvolErrorKind::BadHeader, e.what());
  }
  const auto& dtype = j.at("dtype");
  if (dtype == "f32le") {
    h.dtype = Dtype::F32le;
  } else if (dtype == "u8") {
    h.dtype = Dtype::U8;
  } else {
    fail(VvolErrorKind::BadHeader, "dtype must be \"f32le\" or \"u8\"");
  }
  if (j.at("order") != "x-fastest") fail(VvolErrorKind::BadHeader, "order must be \"x-fastest\"");
  return h;
}

}  // namespace

std::string vvol_header_json(const Geometry& g, Dtype dtype) {
  ordered_json j;
  j["dims"] = {g.dims.nx, g.dims.ny, g.dims.nz};
  j["spacing_mm"] = {g.spacing.x, g.spacing.y, g.spacing.z};
  j["origin_mm"] = {g.origin.x, g.origin.y, g.origin.z};
  j["dtype"] = dtype_name(dtype);
  j["order"] = "x-fastest";
  return j.dump();
}

std::vector<std::uint8_t> encode_vvol(const Volume& v) {
  require_finite(v);
  auto out = frame(v.geometry(), Dtype::F32le);
  detail::put_f32le(out, v.values());
  return out;
}

std::vector<std::uint8_t> encode_vvol(const LabelMask& m) {
  auto out = frame(m.geometry(), Dtype::U8);
  out.insert(out.end(), m.values().begin(), m.values().end());
  return out;
}

AnyGrid decode_vvol(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagicLen || std::memcmp(bytes.data(), kVvolMagic, kMagicLen) != 0) {
    fail(VvolErrorKind::BadMagic, "bad magic (expected \"VVOL0001\")");
  }
  if (bytes.size() < kPrefixLen) fail(VvolErrorKind::LengthMismatch, "file truncated before header length");
  const std::uint32_t header_len = detail::get_u32le(bytes.data() + kMagicLen);
  if (bytes.size() - kPrefixLen < header_len) fail(VvolErrorKind::LengthMismatch, "file truncated inside header");
  const std::string_view text(reinterpret_cast<const char*>(bytes.data() + kPrefixLen), header_len);
  const Header h = parse_header(text);

  const std::size_t count = h.geometry.dims.count();
  const std::size_t elem = h.dtype == Dtype::F32le ? 4 : 1;
  const std::size_t payload = bytes.size() - kPrefixLen - header_len;
  if (payload != count * elem) {
    fail(VvolErrorKind::LengthMismatch, "payload length mismatch: expected " + std::to_string(count * elem) +
                                            " bytes, found " + std::to_string(payload));
  }
  const std::uint8_t* p = bytes.data() + kPrefixLen + header_len;
  if (h.dtype == Dtype::U8) return LabelMask(h.geometry, std::vector<std::uint8_t>(p, p + count));

  std::vector<float> values(count);
  detail::get_f32le(p, values);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(values[i])) {
      fail(VvolErrorKind::NonFinite, "non-finite value at element " + std::to_string(i));
    }
  }
  return Volume(h.geometry, std::move(values));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(VvolErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(VvolErrorKind::Io, "read failed for " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(VvolErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(VvolErrorKind::Io, "write failed for " + path.string());
}

void write_vvol(const Volume& v, const std::filesystem::path& path) { write_file_bytes(path, encode_vvol(v)); }
void write_vvol(const LabelMask& m, const std::filesystem::path& path) { write_file_bytes(path, encode_vvol(m)); }

AnyGrid read_vvol(const std::filesystem::path& path) { return decode_vvol(read_file_bytes(path)); }

Volume read_volume(const std::filesystem::path& path) {
  auto any = read_vvol(path);
  if (auto* v = std::get_if<Volume>(&any)) return std::move(*v);
  fail(VvolErrorKind::WrongDtype, path.string() + " holds a u8 label mask, expected an f32le volume");
}

LabelMask read_mask(const std::filesystem::path& path) {
  auto any = read_vvol(path);
  if (auto* m = std::get_if<LabelMask>(&any)) return std::move(*m);
  fail(VvolErrorKind::WrongDtype, path.string() + " holds an f32le volume, expected a u8 label mask");
}

}  // namespace vesselforge
