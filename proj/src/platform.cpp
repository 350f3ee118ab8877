#include "vgroove/platform.hpp"

#include <cmath>
#include <fstream>

#include "vgroove/error.hpp"

namespace vgroove {

namespace {

double num(const Json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j.at(key).is_number()) {
    throw ConfigError(where + ": field '" + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

EtchRateModel load_kinetics(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("kinetics_model: referenced file " + path.string() + " does not exist");
  }
  if (path.extension() == ".csv") {
    std::ifstream in(path);
    auto model = fit_arrhenius(read_rate_csv(in));
    model.assumptions.push_back("fitted from " + path.filename().string());
    return model;
  }
  return rate_model_from_json(read_json_file(path));
}

}  // namespace

PlatformConfig platform_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) {
    throw ConfigError("platform config: expected a JSON object");
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "fiber" && key != "groove" && key != "mirror" && key != "fiber_to_mirror_um" &&
        key != "detector" && key != "capture_factor" && key != "kinetics_model") {
      throw ConfigError("platform config: unknown field '" + key + "'");
    }
  }

  PlatformConfig cfg;
  if (j.contains("fiber")) {
    cfg.fiber = fiber_from_json(j.at("fiber"));
  }
  const Json groove = j.value("groove", Json::object());
  if (!groove.is_object()) {
    throw ConfigError("platform config: groove must be an object");
  }
  if (groove.contains("mask_opening_um") || groove.contains("depth_um")) {
    cfg.groove = groove_from_profile(num(groove, "mask_opening_um", 0.0, "groove"),
                                     num(groove, "depth_um", 0.0, "groove"));
    cfg.groove.clearance_um = seat_clearance(cfg.fiber);
  } else {
    cfg.groove = design_groove(cfg.fiber, num(groove, "margin_um", 0.0, "groove"));
  }
  if (j.contains("mirror")) {
    cfg.mirror = mirror_from_json(j.at("mirror"));
  }
  cfg.fiber_to_mirror_um = num(j, "fiber_to_mirror_um", cfg.fiber_to_mirror_um, "platform config");
  if (j.contains("detector")) {
    const auto& d = j.at("detector");
    cfg.detector_height_um = num(d, "height_um", cfg.detector_height_um, "detector");
    cfg.detector_aperture_um = num(d, "aperture_radius_um", cfg.detector_aperture_um, "detector");
  }
  cfg.capture_factor = num(j, "capture_factor", cfg.capture_factor, "platform config");
  if (j.contains("kinetics_model")) {
    if (!j.at("kinetics_model").is_string()) {
      throw ConfigError("platform config: kinetics_model must be a file path");
    }
    const std::filesystem::path ref = j.at("kinetics_model").get<std::string>();
    cfg.kinetics = load_kinetics(ref.is_absolute() ? ref : base_dir / ref);
    cfg.kinetics_source = ref.string();
  }

  if (!(cfg.fiber_to_mirror_um >= 0.0) || !(cfg.detector_height_um >= 0.0) ||
      !(cfg.detector_aperture_um > 0.0)) {
    throw ConfigError("platform config: distances must be non-negative and the aperture positive");
  }
  if (!(cfg.capture_factor >= 0.0 && cfg.capture_factor <= 1.0)) {
    throw ConfigError("platform config: capture_factor must be in [0, 1]");
  }
  return cfg;
}

PlatformConfig load_platform(const std::filesystem::path& path) {
  return platform_from_json(read_json_file(path), path.parent_path());
}

Json to_json(const PlatformConfig& cfg) {
  return Json{{"fiber", to_json(cfg.fiber)},
              {"groove", to_json(cfg.groove)},
              {"mirror", to_json(cfg.mirror)},
              {"fiber_to_mirror_um", cfg.fiber_to_mirror_um},
              {"detector", {{"height_um", cfg.detector_height_um},
                            {"aperture_radius_um", cfg.detector_aperture_um}}},
              {"capture_factor", cfg.capture_factor},
              {"kinetics_model", cfg.kinetics_source}};
}

FacetExtent mirror_extent(const GrooveDesign& groove, const SeatingResult& seating) {
  const double s = std::sin(groove.wall_angle.radians());
  return {(groove.depth_um - seating.center.depth_um) / s, seating.center.depth_um / s};
}

}  // namespace vgroove
