#pragma once

#include <filesystem>
#include <string>

#include "vgroove/geometry.hpp"
#include "vgroove/io.hpp"
#include "vgroove/kinetics.hpp"
#include "vgroove/optics.hpp"

namespace vgroove {

// The assembled excitation platform: fiber in its groove, groove-end mirror,
// detector above the chip.
struct PlatformConfig {
  FiberSpec fiber;
  GrooveDesign groove = design_groove(FiberSpec{});
  MirrorSpec mirror = aluminum_mirror();
  double fiber_to_mirror_um = 50.0;
  double detector_height_um = 1000.0;
  double detector_aperture_um = 500.0;  // radius
  double capture_factor = 1.0;
  EtchRateModel kinetics = default_koh_model();
  std::string kinetics_source = "built-in";
};

// Resolves relative file references against the config's directory. The
// groove is either explicit (`mask_opening_um` + `depth_um`) or designed for
// the fiber from `margin_um`.
PlatformConfig platform_from_json(const Json& j, const std::filesystem::path& base_dir);
PlatformConfig load_platform(const std::filesystem::path& path);
Json to_json(const PlatformConfig& cfg);

// Slant extent of the groove-end facet around the seated fiber's axis.
FacetExtent mirror_extent(const GrooveDesign& groove, const SeatingResult& seating);

}  // namespace vgroove
