#include "szloca/osc.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "szloca/error.hpp"

namespace szloca {
namespace {

constexpr std::string_view kTypeTags = ",ifff";

void put_padded_string(std::vector<std::uint8_t>& out, std::string_view s) {
  out.insert(out.end(), s.begin(), s.end());
  const std::size_t padded = (s.size() / 4 + 1) * 4;
  out.resize(out.size() + (padded - s.size()), 0);
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

bool matches_padded(std::span<const std::uint8_t> b, std::size_t at, std::string_view s,
                    std::size_t padded) {
  if (std::memcmp(b.data() + at, s.data(), s.size()) != 0) return false;
  for (std::size_t i = at + s.size(); i < at + padded; ++i) {
    if (b[i] != 0) return false;
  }
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_osc_track(std::int32_t id, const std::array<float, 3>& position) {
  for (float v : position) {
    if (!std::isfinite(v)) throw Error(ErrorCode::Encode, "cannot encode a non-finite position");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kOscTrackMessageSize);
  put_padded_string(out, kOscTrackAddress);
  put_padded_string(out, kTypeTags);
  put_be32(out, std::bit_cast<std::uint32_t>(id));
  for (float v : position) put_be32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

std::optional<OscTrackMessage> decode_osc_track(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kOscTrackMessageSize) return std::nullopt;
  if (!matches_padded(bytes, 0, kOscTrackAddress, 16)) return std::nullopt;
  if (!matches_padded(bytes, 16, kTypeTags, 8)) return std::nullopt;
  OscTrackMessage msg;
  msg.id = std::bit_cast<std::int32_t>(get_be32(bytes, 24));
  for (std::size_t i = 0; i < 3; ++i) {
    msg.position[i] = std::bit_cast<float>(get_be32(bytes, 28 + 4 * i));
  }
  return msg;
}

}  // namespace szloca
