#include "vesselforge/psp.hpp"

#include <cstring>
#include <set>

#include "bytes.hpp"
#include "json.hpp"

namespace vesselforge {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::uint8_t> frame(const char* magic, const std::string& header) {
  std::vector<std::uint8_t> out(magic, magic + 4);
  detail::put_u32le(out, static_cast<std::uint32_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  return out;
}

// Reads exactly n bytes; returns how many arrived before end of stream.
std::size_t read_exact(const ReadSome& read, std::uint8_t* buf, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const std::size_t k = read(buf + got, n - got);
    if (k == 0) break;
    got += k;
  }
  return got;
}

void require_bytes(const ReadSome& read, std::uint8_t* buf, std::size_t n, const char* what) {
  const std::size_t got = read_exact(read, buf, n);
  if (got != n) {
    throw ProtocolError(std::string("psp: stream ended inside ") + what + ": expected " + std::to_string(n) +
                        " bytes, got " + std::to_string(got));
  }
}

nlohmann::json read_header(const ReadSome& read, const char* magic, bool allow_eof, bool& eof) {
  std::uint8_t prefix[8];
  const std::size_t got = read_exact(read, prefix, 8);
  eof = false;
  if (got == 0 && allow_eof) {
    eof = true;
    return {};
  }
  if (got < 4 || std::memcmp(prefix, magic, 4) != 0) {
    throw ProtocolError(std::string("psp: bad frame magic (expected \"") + magic + "\")");
  }
  if (got != 8) throw ProtocolError("psp: stream ended inside frame prefix");
  const std::uint32_t len = detail::get_u32le(prefix + 4);
  if (len > (1u << 20)) throw ProtocolError("psp: header length " + std::to_string(len) + " exceeds 1 MiB");
  std::string text(len, '\0');
  require_bytes(read, reinterpret_cast<std::uint8_t*>(text.data()), len, "frame header");
  try {
    auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw ProtocolError("psp: frame header must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("psp: frame header is not valid JSON: ") + e.what());
  }
}

std::uint64_t frame_id(const nlohmann::json& j) {
  const auto& v = j.at("id");
  if (!v.is_number_unsigned()) throw ProtocolError("psp: id must be an unsigned integer");
  return v.get<std::uint64_t>();
}

void check_keys(const nlohmann::json& j, const std::set<std::string>& required, const std::set<std::string>& optional) {
  for (const auto& k : required) {
    if (!j.contains(k)) throw ProtocolError("psp: header missing key \"" + k + "\"");
  }
  for (const auto& [k, _] : j.items()) {
    if (!required.count(k) && !optional.count(k)) throw ProtocolError("psp: unexpected header key \"" + k + "\"");
  }
}

std::vector<float> read_payload(const ReadSome& read, std::size_t values) {
  std::vector<std::uint8_t> raw(values * 4);
  std::size_t got = 0;
  std::string cause;
  try {
    while (got < raw.size()) {
      const std::size_t k = read(raw.data() + got, raw.size() - got);
      if (k == 0) break;
      got += k;
    }
  } catch (const ProtocolError& e) {
    cause = std::string(" (") + e.what() + ")";
  }
  if (got != raw.size()) {
    throw ProtocolError("psp: payload length mismatch: expected " + std::to_string(raw.size()) + " bytes, got " +
                        std::to_string(got) + cause);
  }
  std::vector<float> out(values);
  detail::get_f32le(raw.data(), out);
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_request(const PspRequest& r) {
  if (r.payload.size() != r.dims.count()) throw InvalidArgument("psp: request payload does not match dims");
  ordered_json j;
  j["id"] = r.id;
  j["stage"] = r.stage;
  j["dims"] = {r.dims.nx, r.dims.ny, r.dims.nz};
  j["spacing_mm"] = {r.spacing.x, r.spacing.y, r.spacing.z};
  auto out = frame(kPspRequestMagic, j.dump());
  detail::put_f32le(out, r.payload);
  return out;
}

std::vector<std::uint8_t> encode_response(const PspResponse& r) {
  ordered_json j;
  j["id"] = r.id;
  j["status"] = r.ok ? "ok" : "error";
  if (r.message) j["message"] = *r.message;
  auto out = frame(kPspResponseMagic, j.dump());
  if (r.ok) detail::put_f32le(out, r.payload);
  return out;
}

std::optional<PspRequest> read_request(const ReadSome& read) {
  bool eof = false;
  const auto j = read_header(read, kPspRequestMagic, true, eof);
  if (eof) return std::nullopt;
  check_keys(j, {"id", "stage", "dims", "spacing_mm"}, {});
  PspRequest r;
  try {
    r.id = frame_id(j);
    r.stage = j.at("stage").get<int>();
    const auto& d = j.at("dims");
    const auto& s = j.at("spacing_mm");
    if (d.size() != 3 || s.size() != 3) throw ProtocolError("psp: dims and spacing_mm must be 3-arrays");
    for (int a = 0; a < 3; ++a) {
      r.dims[a] = d.at(a).get<std::int64_t>();
      r.spacing[a] = s.at(a).get<double>();
      if (r.dims[a] < 1 || r.dims[a] > 4096) throw ProtocolError("psp: dims out of range");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("psp: malformed request header: ") + e.what());
  }
  if (r.stage != 1 && r.stage != 2) throw ProtocolError("psp: stage must be 1 or 2");
  r.payload = read_payload(read, r.dims.count());
  return r;
}

PspResponse read_response(const ReadSome& read, std::size_t expected_values) {
  bool eof = false;
  const auto j = read_header(read, kPspResponseMagic, false, eof);
  check_keys(j, {"id", "status"}, {"message"});
  PspResponse r;
  try {
    r.id = frame_id(j);
    const auto status = j.at("status").get<std::string>();
    if (status != "ok" && status != "error") throw ProtocolError("psp: status must be \"ok\" or \"error\"");
    r.ok = status == "ok";
    if (j.contains("message")) r.message = j.at("message").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("psp: malformed response header: ") + e.what());
  }
  if (r.ok) r.payload = read_payload(read, expected_values);
  return r;
}

}  // namespace vesselforge
