#pragma once

#include "hrdair/core.hpp"

#include <array>
#include <string>
#include <string_view>

namespace hrdair {

enum class Scheme { kJqapb, kObda, kMdAirComp, kFullPower, kPfa, kIdeal };

inline constexpr std::array<Scheme, 6> kAllSchemes = {Scheme::kJqapb,     Scheme::kObda, Scheme::kMdAirComp,
                                                      Scheme::kFullPower, Scheme::kPfa,  Scheme::kIdeal};

inline std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kJqapb: return "jqapb";
    case Scheme::kObda: return "obda";
    case Scheme::kMdAirComp: return "md_aircomp";
    case Scheme::kFullPower: return "full_power";
    case Scheme::kPfa: return "pfa";
    case Scheme::kIdeal: return "ideal";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view name) {
  for (Scheme s : kAllSchemes)
    if (scheme_name(s) == name) return s;
  throw ParameterError("unknown scheme '" + std::string(name) + "'");
}

/// Schemes whose transceiver comes from the joint optimizer.
inline bool uses_jqapb_design(Scheme s) { return s == Scheme::kJqapb || s == Scheme::kPfa; }

}  // namespace hrdair
