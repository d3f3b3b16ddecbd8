#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace fogran {

/// Where a task is computed: MEC-L at its RU, MEC-H at its DU, or the cloud.
enum class Tier : std::uint8_t { L = 0, H = 1, C = 2 };

inline constexpr std::array<Tier, 3> kAllTiers = {Tier::L, Tier::H, Tier::C};

constexpr std::string_view to_string(Tier tier) {
  switch (tier) {
    case Tier::L: return "L";
    case Tier::H: return "H";
    case Tier::C: return "C";
  }
  return "?";
}

/// Which tiers a network deployment offers. The cloud is always reachable.
enum class Scheme : std::uint8_t {
  Fog,      // {L, H, C}
  Cloud,    // {C}
  CloudDU,  // {H, C}
  CloudRU,  // {L, C}
};

inline constexpr std::array<Scheme, 4> kAllSchemes = {Scheme::Fog, Scheme::Cloud, Scheme::CloudDU, Scheme::CloudRU};

constexpr bool allows(Scheme scheme, Tier tier) {
  switch (scheme) {
    case Scheme::Fog: return true;
    case Scheme::Cloud: return tier == Tier::C;
    case Scheme::CloudDU: return tier != Tier::L;
    case Scheme::CloudRU: return tier != Tier::H;
  }
  return false;
}

constexpr std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Fog: return "fog";
    case Scheme::Cloud: return "cloud";
    case Scheme::CloudDU: return "cloud-du";
    case Scheme::CloudRU: return "cloud-ru";
  }
  return "?";
}

constexpr std::optional<Scheme> parse_scheme(std::string_view name) {
  for (Scheme s : kAllSchemes) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

}  // namespace fogran
