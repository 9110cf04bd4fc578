#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace szloca {

inline constexpr std::string_view kOscTrackAddress = "/szloca/track";
inline constexpr std::size_t kOscTrackMessageSize = 40;

/// One OSC message: address, ",ifff" type tags, big-endian int32 id and three
/// big-endian float32 coordinates. Throws Error(Encode) on non-finite input.
std::vector<std::uint8_t> encode_osc_track(std::int32_t id, const std::array<float, 3>& position);

struct OscTrackMessage {
  std::int32_t id = 0;
  std::array<float, 3> position{};
};

/// Inverse of encode_osc_track; nullopt for anything that is not exactly that shape.
std::optional<OscTrackMessage> decode_osc_track(std::span<const std::uint8_t> bytes);

}  // namespace szloca
