#include "vgroove/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "vgroove/error.hpp"
#include "vgroove/text.hpp"

namespace vgroove {

namespace {

double round2(double v) {
  const double r = std::round(v * 100.0) / 100.0;
  return r == 0.0 ? 0.0 : r;  // drop negative zero
}

void expect_object(const Json& j, const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError(where + ": expected a JSON object");
  }
}

void expect_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                 const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (auto a : allowed) {
      known = known || key == a;
    }
    if (!known) {
      throw ConfigError(where + ": unknown field '" + key + "'");
    }
  }
}

double number(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) {
    throw ConfigError(where + ": missing field '" + key + "'");
  }
  const auto& v = j.at(key);
  if (!v.is_number()) {
    throw ConfigError(where + ": field '" + key + "' must be a number");
  }
  return v.get<double>();
}

double number_or(const Json& j, const std::string& key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

std::string text_or(const Json& j, const std::string& key, const std::string& fallback,
                    const std::string& where) {
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j.at(key).is_string()) {
    throw ConfigError(where + ": field '" + key + "' must be a string");
  }
  return j.at(key).get<std::string>();
}

Json point_json(const Point2& p) { return Json{{"x_um", round2(p.x_um)}, {"depth_um", round2(p.depth_um)}}; }

Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

ProcessStep step_from_json(const Json& j, const std::string& where) {
  expect_keys(j, {"kind", "label", "parameters"}, where);
  ProcessStep s;
  const auto kind_name = text_or(j, "kind", "", where);
  const auto kind = step_kind_from_string(kind_name);
  if (!kind) {
    throw ConfigError(where + ": unknown step kind '" + kind_name + "'");
  }
  s.kind = *kind;
  s.label = text_or(j, "label", "", where);
  s.source = where.substr(where.find('#'));
  if (j.contains("parameters")) {
    const auto& p = j.at("parameters");
    expect_object(p, where + "/parameters");
    for (const auto& [key, value] : p.items()) {
      if (value.is_number()) {
        s.parameters[key] = value.get<double>();
      } else if (value.is_string()) {
        s.parameters[key] = value.get<std::string>();
      } else {
        throw ConfigError(where + "/parameters: '" + key + "' must be a number or string");
      }
    }
  }
  return s;
}

Json step_to_json(const ProcessStep& s) {
  Json params = Json::object();
  for (const auto& [key, value] : s.parameters) {
    if (const auto* d = std::get_if<double>(&value)) {
      params[key] = *d;
    } else {
      params[key] = std::get<std::string>(value);
    }
  }
  Json j{{"kind", std::string(to_string(s.kind))}};
  if (!s.label.empty()) {
    j["label"] = s.label;
  }
  j["parameters"] = params;
  return j;
}

std::string_view roughness_name(RoughnessModel m) {
  switch (m) {
    case RoughnessModel::rms_equals_ra:
      return "rms_equals_ra";
    case RoughnessModel::sinusoidal:
      return "sinusoidal";
    case RoughnessModel::gaussian:
      return "gaussian";
  }
  return "rms_equals_ra";
}

}  // namespace

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(origin + ": malformed JSON (" + e.what() + ")");
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path.string());
}

Json to_json(const FiberSpec& fiber) {
  return Json{{"radius_um", round2(fiber.radius_um)},
              {"core_radius_um", round2(fiber.core_radius_um)},
              {"numerical_aperture", fiber.numerical_aperture},
              {"wavelength_nm", round2(fiber.wavelength_nm)}};
}

Json to_json(const GrooveDesign& g) {
  return Json{{"mask_opening_um", round2(g.mask_opening_um)},
              {"min_opening_um", round2(opening_width(g.depth_um, g.wall_angle))},
              {"depth_um", round2(g.depth_um)},
              {"self_limit_depth_um", round2(g.vertex_depth_um())},
              {"wall_angle_deg", round2(g.wall_angle.degrees())},
              {"clearance_um", round2(g.clearance_um)},
              {"margin_um", round2(g.margin_um)}};
}

Json to_json(const SeatingResult& s) {
  Json contacts = Json::array();
  for (const auto& c : s.contacts) {
    contacts.push_back(point_json(c));
  }
  return Json{{"state", std::string(to_string(s.state))},
              {"center_depth_um", round2(s.center.depth_um)},
              {"contact_height_um", round2(s.contact_height_um)},
              {"protrusion_um", round2(s.protrusion_um)},
              {"contacts", contacts}};
}

Json to_json(const EtchRateModel& m) {
  Json points = Json::array();
  for (const auto& p : m.source_points) {
    points.push_back({{"temp_c", p.temperature.as_celsius()}, {"rate_um_min", p.rate_um_min}});
  }
  return Json{{"prefactor_um_min", m.prefactor_um_min},
              {"activation_K", m.activation_k},
              {"activation_eV", m.activation_ev()},
              {"residual", m.fit_residual},
              {"assumptions", m.assumptions},
              {"window_c", Json::array({m.window.min_c, m.window.max_c})},
              {"source_points", points}};
}

EtchRateModel rate_model_from_json(const Json& j) {
  const std::string where = "rate model";
  expect_keys(j,
              {"prefactor_um_min", "activation_K", "activation_eV", "residual", "assumptions",
               "window_c", "source_points"},
              where);
  EtchRateModel m;
  m.prefactor_um_min = number(j, "prefactor_um_min", where);
  m.activation_k = number(j, "activation_K", where);
  m.fit_residual = number_or(j, "residual", 0.0, where);
  if (!(m.prefactor_um_min > 0.0) || !(m.activation_k > 0.0)) {
    throw ConfigError(where + ": prefactor_um_min and activation_K must be positive");
  }
  if (j.contains("assumptions")) {
    for (const auto& a : j.at("assumptions")) {
      if (!a.is_string()) {
        throw ConfigError(where + ": assumptions must be strings");
      }
      m.assumptions.push_back(a.get<std::string>());
    }
  }
  if (j.contains("window_c")) {
    const auto& w = j.at("window_c");
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
      throw ConfigError(where + ": window_c must be [min, max]");
    }
    m.window = {w[0].get<double>(), w[1].get<double>()};
  }
  if (j.contains("source_points")) {
    for (const auto& p : j.at("source_points")) {
      m.source_points.push_back({Temperature::celsius(number(p, "temp_c", where)),
                                 number(p, "rate_um_min", where)});
    }
  }
  return m;
}

Json to_json(const EtchPlan& plan) {
  Json j{{"duration_min", plan.duration_min},
         {"rate_um_min", plan.rate_um_min},
         {"self_limit_um", plan.self_limit_um}};
  if (plan.warning) {
    j["warning"] = *plan.warning;
  }
  return j;
}

EtchConfig etch_config_from_json(const Json& j) {
  const std::string where = "etch config";
  expect_keys(j,
              {"mask_opening_um", "rate_100_um_min", "anisotropy_ratio", "cell_size_um",
               "time_step_min", "total_time_min", "field_margin_um"},
              where);
  EtchConfig c;
  c.mask_opening_um = number_or(j, "mask_opening_um", c.mask_opening_um, where);
  c.rate_100_um_min = number_or(j, "rate_100_um_min", c.rate_100_um_min, where);
  c.anisotropy_ratio = number_or(j, "anisotropy_ratio", c.anisotropy_ratio, where);
  c.cell_size_um = number_or(j, "cell_size_um", c.cell_size_um, where);
  c.time_step_min = number_or(j, "time_step_min", c.time_step_min, where);
  c.total_time_min = number_or(j, "total_time_min", c.total_time_min, where);
  c.field_margin_um = number_or(j, "field_margin_um", c.field_margin_um, where);
  return c;
}

Json to_json(const EtchConfig& c) {
  return Json{{"mask_opening_um", c.mask_opening_um},
              {"rate_100_um_min", c.rate_100_um_min},
              {"anisotropy_ratio", c.anisotropy_ratio},
              {"cell_size_um", c.cell_size_um},
              {"time_step_min", c.time_step_min},
              {"total_time_min", c.total_time_min},
              {"field_margin_um", c.field_margin_um}};
}

Json to_json(const ProfileMetrics& m) {
  return Json{{"depth_um", m.depth_um}, {"top_width_um", m.top_width_um}, {"undercut_um", m.undercut_um}};
}

void write_profile_csv(const EtchProfile& profile, std::ostream& out) {
  out << "timestamp_min,x_um,depth_um\n";
  char buf[96];
  for (const auto& s : profile.snapshots) {
    for (const auto& p : s.surface) {
      std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f\n", s.time_min, p.x_um,
                    p.depth_um == 0.0 ? 0.0 : p.depth_um);
      out << buf;
    }
  }
}

FiberSpec fiber_from_json(const Json& j) {
  const std::string where = "fiber";
  expect_keys(j, {"radius_um", "core_radius_um", "numerical_aperture", "wavelength_nm"}, where);
  FiberSpec f;
  f.radius_um = number_or(j, "radius_um", f.radius_um, where);
  f.core_radius_um = number_or(j, "core_radius_um", f.core_radius_um, where);
  f.numerical_aperture = number_or(j, "numerical_aperture", f.numerical_aperture, where);
  f.wavelength_nm = number_or(j, "wavelength_nm", f.wavelength_nm, where);
  f.validate();
  return f;
}

OpticalMaterial material_from_json(const Json& j) {
  const std::string where = "material";
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "Si") {
      return silicon_633nm();
    }
    if (name == "Al") {
      return aluminum_633nm();
    }
    throw ConfigError(where + ": unknown built-in material '" + name + "' (use Si, Al or an object)");
  }
  expect_keys(j, {"name", "n", "k", "at_wavelength_nm"}, where);
  OpticalMaterial m;
  m.name = text_or(j, "name", "custom", where);
  m.n = number(j, "n", where);
  m.k = number_or(j, "k", 0.0, where);
  m.at_wavelength_nm = number_or(j, "at_wavelength_nm", 633.0, where);
  m.validate();
  return m;
}

Json to_json(const OpticalMaterial& m) {
  return Json{{"name", m.name}, {"n", m.n}, {"k", m.k}, {"at_wavelength_nm", m.at_wavelength_nm}};
}

MirrorSpec mirror_from_json(const Json& j) {
  const std::string where = "mirror";
  expect_keys(j, {"material", "roughness_ra_nm", "roughness_model", "coating_thickness_nm"}, where);
  MirrorSpec m;
  if (j.contains("material")) {
    m.material = material_from_json(j.at("material"));
  }
  m.roughness_ra_nm = number_or(j, "roughness_ra_nm", m.roughness_ra_nm, where);
  const auto model = text_or(j, "roughness_model", "rms_equals_ra", where);
  if (model == "rms_equals_ra") {
    m.roughness_model = RoughnessModel::rms_equals_ra;
  } else if (model == "sinusoidal") {
    m.roughness_model = RoughnessModel::sinusoidal;
  } else if (model == "gaussian") {
    m.roughness_model = RoughnessModel::gaussian;
  } else {
    throw ConfigError(where + ": unknown roughness_model '" + model + "'");
  }
  m.coating_thickness_nm = number_or(j, "coating_thickness_nm", m.coating_thickness_nm, where);
  m.validate();
  return m;
}

Json to_json(const MirrorSpec& m) {
  return Json{{"material", to_json(m.material)},
              {"tilt_deg", round2(m.tilt.degrees())},
              {"roughness_ra_nm", m.roughness_ra_nm},
              {"roughness_model", std::string(roughness_name(m.roughness_model))},
              {"roughness_rms_nm", m.roughness_rms_nm()},
              {"coating_thickness_nm", m.coating_thickness_nm}};
}

Json to_json(const PowerBudget& b) {
  return Json{{"input_power_uw", b.input_power_uw},
              {"incidence_deg", b.incidence_rad * 180.0 / std::numbers::pi},
              {"fresnel_factor", b.fresnel_factor},
              {"scatter_factor", b.scatter_factor},
              {"capture_factor", b.capture_factor},
              {"predicted_output_uw", b.predicted_output_uw},
              {"predicted_reflectivity", b.predicted_reflectivity},
              {"absorbed_uw", b.absorbed_uw},
              {"scattered_uw", b.scattered_uw},
              {"uncaptured_uw", b.uncaptured_uw}};
}

Json to_json(const BeamFootprint& f) {
  return Json{{"major_axis_um", f.major_axis_um},
              {"minor_axis_um", f.minor_axis_um},
              {"area_um2", f.area_um2()},
              {"centroid_direction", vec_json(f.centroid_direction)}};
}

Json to_json(const FootprintReport& r) {
  Json j{{"fiber_face", to_json(r.fiber_face)},
         {"on_mirror", to_json(r.on_mirror)},
         {"at_detector", to_json(r.at_detector)},
         {"clipped_fraction", r.clipped_fraction}};
  if (r.warning) {
    j["warning"] = *r.warning;
  }
  return j;
}

Json to_json(const CaptureFit& fit) {
  return Json{{"capture_factor", fit.capture_factor},
              {"physical_factor", fit.physical_factor},
              {"predicted_reflectivity", fit.capture_factor * fit.physical_factor},
              {"residuals_uw", fit.residuals_uw},
              {"rms_residual_uw", fit.rms_residual_uw}};
}

RecipeDocument recipe_from_json(const Json& j) {
  expect_keys(j, {"title", "steps", "bond", "bond_table", "safe_window_fraction"}, "recipe");
  RecipeDocument doc;
  doc.title = text_or(j, "title", doc.title, "recipe");
  if (!j.contains("steps") || !j.at("steps").is_array()) {
    throw ConfigError("recipe: 'steps' must be an array");
  }
  const auto& steps = j.at("steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    doc.steps.push_back(step_from_json(steps[i], "recipe#/steps/" + std::to_string(i)));
  }
  if (!j.contains("bond")) {
    throw ConfigError("recipe: missing 'bond'");
  }
  const auto& b = j.at("bond");
  const std::string where = "recipe#/bond";
  expect_keys(b, {"voltage_v", "stage_temp_c", "counterpoise_g", "bond_time_min", "clean_sequence",
                  "uv_glue_fixation"},
              where);
  doc.bond.voltage_v = number(b, "voltage_v", where);
  doc.bond.stage_temp_c = number(b, "stage_temp_c", where);
  doc.bond.counterpoise_g = number(b, "counterpoise_g", where);
  doc.bond.bond_time_min = number(b, "bond_time_min", where);
  doc.bond.source = "#/bond";
  if (b.contains("uv_glue_fixation")) {
    if (!b.at("uv_glue_fixation").is_boolean()) {
      throw ConfigError(where + ": uv_glue_fixation must be true or false");
    }
    doc.bond.uv_glue_fixation = b.at("uv_glue_fixation").get<bool>();
  }
  if (b.contains("clean_sequence")) {
    const auto& seq = b.at("clean_sequence");
    if (!seq.is_array()) {
      throw ConfigError(where + ": clean_sequence must be an array");
    }
    for (std::size_t i = 0; i < seq.size(); ++i) {
      doc.bond.clean_sequence.push_back(
          step_from_json(seq[i], where + "/clean_sequence/" + std::to_string(i)));
    }
  }
  if (j.contains("bond_table")) {
    doc.bond_rules.table.clear();
    for (const auto& row : j.at("bond_table")) {
      doc.bond_rules.table.push_back(
          {number(row, "counterpoise_g", "recipe#/bond_table"), number(row, "bond_time_min", "recipe#/bond_table")});
    }
  }
  doc.bond_rules.window_fraction =
      number_or(j, "safe_window_fraction", doc.bond_rules.window_fraction, "recipe");
  return doc;
}

Json to_json(const RecipeDocument& doc) {
  Json steps = Json::array();
  for (const auto& s : doc.steps) {
    steps.push_back(step_to_json(s));
  }
  Json clean = Json::array();
  for (const auto& s : doc.bond.clean_sequence) {
    clean.push_back(step_to_json(s));
  }
  Json table = Json::array();
  for (const auto& r : doc.bond_rules.table) {
    table.push_back({{"counterpoise_g", r.counterpoise_g}, {"bond_time_min", r.bond_time_min}});
  }
  return Json{{"title", doc.title},
              {"steps", steps},
              {"bond",
               {{"voltage_v", doc.bond.voltage_v},
                {"stage_temp_c", doc.bond.stage_temp_c},
                {"counterpoise_g", doc.bond.counterpoise_g},
                {"bond_time_min", doc.bond.bond_time_min},
                {"uv_glue_fixation", doc.bond.uv_glue_fixation},
                {"clean_sequence", clean}}},
              {"bond_table", table},
              {"safe_window_fraction", doc.bond_rules.window_fraction}};
}

Json to_json(const ValidationReport& report) {
  Json v = Json::array();
  for (const auto& x : report.violations) {
    Json e{{"code", x.code}, {"message", x.message}};
    if (x.step_index) {
      e["step_index"] = *x.step_index;
    }
    v.push_back(e);
  }
  return Json{{"ok", report.ok()}, {"violations", v}};
}

}  // namespace vgroove
