#pragma once

#include <string>
#include <vector>

#include "vgroove/etchsim.hpp"
#include "vgroove/platform.hpp"

namespace vgroove {

inline constexpr const char* kGeneratorTag = "vgroove 0.1.0";

// Cross-section of the selected snapshots. With no `times`, up to twelve
// evenly spaced snapshots including the last.
std::string render_profile_svg(const EtchProfile& profile, const std::vector<double>& times = {});

// Side view along the fiber axis: fiber, groove-end mirror, reflected beam
// and detector plane.
std::string render_trace_svg(const PlatformConfig& platform, const SeatingResult& seating,
                             const ReflectedRay& reflected);

}  // namespace vgroove
