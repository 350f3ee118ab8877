#include "vgroove/reproduce.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "vgroove/error.hpp"
#include "vgroove/geometry.hpp"
#include "vgroove/text.hpp"

namespace vgroove {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string show(double v) {
  char buf[48];
  const double a = std::abs(v);
  if (v == 0.0) {
    return "0";
  }
  if (a < 1e-3 || a >= 1e6) {
    std::snprintf(buf, sizeof buf, "%.3e", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.6g", v);
  }
  return buf;
}

Tolerance tolerance_from_json(const Json& row, const std::string& where) {
  int found = 0;
  Tolerance tol;
  auto take = [&](const char* key, Tolerance::Kind kind) {
    if (row.contains(key)) {
      if (!row.at(key).is_number()) {
        throw ConfigError(where + ": '" + key + "' must be a number");
      }
      tol = {kind, row.at(key).get<double>()};
      ++found;
    }
  };
  take("abs_tol", Tolerance::Kind::absolute);
  take("rel_tol", Tolerance::Kind::relative);
  take("max", Tolerance::Kind::at_most);
  take("min", Tolerance::Kind::at_least);
  if (row.contains("exact")) {
    tol = {Tolerance::Kind::exact, 0.0};
    ++found;
  }
  if (found != 1) {
    throw ConfigError(where + ": exactly one of abs_tol, rel_tol, max, min, exact is required");
  }
  return tol;
}

std::vector<PowerMeasurement> samples_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) {
    throw ConfigError(where + ": expected an array of {p1_uw, p2_uw}");
  }
  std::vector<PowerMeasurement> out;
  for (const auto& s : j) {
    if (!s.is_object() || !s.contains("p1_uw") || !s.contains("p2_uw") ||
        !s.at("p1_uw").is_number() || !s.at("p2_uw").is_number()) {
      throw ConfigError(where + ": each sample needs numeric p1_uw and p2_uw");
    }
    out.push_back({s.at("p1_uw").get<double>(), s.at("p2_uw").get<double>()});
  }
  return out;
}

double input_number(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j.at(key).is_number()) {
    throw ConfigError(std::string("expectations inputs: '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

// Collects rows for one criterion and times it.
class Recorder {
 public:
  Recorder(const Expectations& ex, ReproReport& report) : ex_(ex), report_(report) {}

  void record(const std::string& id, double computed) {
    const auto& e = ex_.row(id);
    report_.rows.push_back({e, computed, e.tolerance.accepts(computed, e.target)});
  }

  template <typename F>
  void criterion(int number, F&& body) {
    const auto start = Clock::now();
    body();
    report_.runtime_s[number] = seconds_since(start);
  }

 private:
  const Expectations& ex_;
  ReproReport& report_;
};

double hand_normal_reflectance(double n, double k) {
  // |(n - 1 + ik) / (n + 1 + ik)|^2 written out in real arithmetic.
  return ((n - 1.0) * (n - 1.0) + k * k) / ((n + 1.0) * (n + 1.0) + k * k);
}

Vec3 mirror_reflect(Vec3 d, Vec3 n) { return d - (2.0 * d.dot(n)) * n; }

}  // namespace

bool Tolerance::accepts(double computed, double target) const {
  if (!std::isfinite(computed)) {
    return false;
  }
  switch (kind) {
    case Kind::absolute:
      return std::abs(computed - target) <= value;
    case Kind::relative:
      return std::abs(computed - target) <= value * std::abs(target);
    case Kind::at_most:
      return computed <= value;
    case Kind::at_least:
      return computed >= value;
    case Kind::exact:
      return computed == target;
  }
  return false;
}

std::string Tolerance::describe(const std::string& unit) const {
  const std::string suffix = unit.empty() ? "" : " " + unit;
  switch (kind) {
    case Kind::absolute:
      return "+/- " + show(value) + suffix;
    case Kind::relative:
      return "+/- " + show(100.0 * value) + "%";
    case Kind::at_most:
      return "<= " + show(value) + suffix;
    case Kind::at_least:
      return ">= " + show(value) + suffix;
    case Kind::exact:
      return "exact";
  }
  return "";
}

const Expectation& Expectations::row(const std::string& id) const {
  for (const auto& r : rows) {
    if (r.id == id) {
      return r;
    }
  }
  throw ConfigError("expectations: no row with id '" + id + "'");
}

Expectations expectations_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.at("rows").is_array()) {
    throw ConfigError("expectations: expected an object with a 'rows' array");
  }
  Expectations ex;
  if (j.contains("inputs")) {
    const auto& in = j.at("inputs");
    ex.inputs.fiber_radius_um = input_number(in, "fiber_radius_um", ex.inputs.fiber_radius_um);
    ex.inputs.margin_um = input_number(in, "margin_um", ex.inputs.margin_um);
    ex.inputs.mask_opening_um = input_number(in, "mask_opening_um", ex.inputs.mask_opening_um);
    ex.inputs.measured_si_reflectivity =
        input_number(in, "measured_si_reflectivity", ex.inputs.measured_si_reflectivity);
    ex.inputs.measured_al_reflectivity =
        input_number(in, "measured_al_reflectivity", ex.inputs.measured_al_reflectivity);
    if (in.contains("al_samples")) {
      ex.inputs.al_samples = samples_from_json(in.at("al_samples"), "inputs.al_samples");
    }
    if (in.contains("si_samples")) {
      ex.inputs.si_samples = samples_from_json(in.at("si_samples"), "inputs.si_samples");
    }
  }
  for (std::size_t i = 0; i < j.at("rows").size(); ++i) {
    const auto& r = j.at("rows")[i];
    const std::string where = "expectations.rows[" + std::to_string(i) + "]";
    if (!r.is_object() || !r.contains("id") || !r.contains("label") || !r.contains("criterion")) {
      throw ConfigError(where + ": id, label and criterion are required");
    }
    Expectation e;
    e.id = r.at("id").get<std::string>();
    e.label = r.at("label").get<std::string>();
    e.criterion = r.at("criterion").get<int>();
    e.target = r.value("target", 0.0);
    e.tolerance = tolerance_from_json(r, where);
    e.unit = r.value("unit", "");
    e.note = r.value("note", "");
    ex.rows.push_back(std::move(e));
  }
  return ex;
}

Expectations load_expectations(const std::filesystem::path& path) {
  return expectations_from_json(read_json_file(path));
}

bool ReproReport::all_passed() const {
  for (const auto& r : rows) {
    if (!r.passed) {
      return false;
    }
  }
  return !rows.empty();
}

bool ReproReport::criterion_passed(int criterion) const {
  bool any = false;
  for (const auto& r : rows) {
    if (r.expectation.criterion == criterion) {
      any = true;
      if (!r.passed) {
        return false;
      }
    }
  }
  return any;
}

std::string ReproReport::to_table() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-3s %-38s %14s %14s %16s  %s\n", "#", "check", "computed",
                "target", "tolerance", "result");
  out << line;
  out << std::string(96, '-') << "\n";
  for (const auto& r : rows) {
    const auto& e = r.expectation;
    const bool bounded =
        e.tolerance.kind == Tolerance::Kind::at_most || e.tolerance.kind == Tolerance::Kind::at_least;
    std::snprintf(line, sizeof line, "%-3d %-38s %14s %14s %16s  %s\n", e.criterion,
                  e.label.c_str(), show(r.computed).c_str(), bounded ? "-" : show(e.target).c_str(),
                  e.tolerance.describe(e.unit).c_str(), r.passed ? "PASS" : "FAIL");
    out << line;
  }
  out << std::string(96, '-') << "\n";
  for (const auto& [criterion, secs] : runtime_s) {
    std::snprintf(line, sizeof line, "criterion %d: %s in %.3f s\n", criterion,
                  criterion_passed(criterion) ? "PASS" : "FAIL", secs);
    out << line;
  }
  std::snprintf(line, sizeof line, "overall: %s (%zu rows, %.3f s)\n",
                all_passed() ? "PASS" : "FAIL", rows.size(), total_runtime_s);
  out << line;
  return out.str();
}

Json ReproReport::to_json() const {
  Json out_rows = Json::array();
  for (const auto& r : rows) {
    out_rows.push_back({{"criterion", r.expectation.criterion},
                        {"id", r.expectation.id},
                        {"label", r.expectation.label},
                        {"computed", r.computed},
                        {"target", r.expectation.target},
                        {"tolerance", r.expectation.tolerance.describe(r.expectation.unit)},
                        {"passed", r.passed}});
  }
  Json criteria = Json::array();
  for (const auto& [criterion, secs] : runtime_s) {
    // Timings stay out of the JSON so repeated runs are byte-identical.
    (void)secs;
    criteria.push_back({{"criterion", criterion}, {"passed", criterion_passed(criterion)}});
  }
  return {{"passed", all_passed()}, {"rows", out_rows}, {"criteria", criteria}};
}

double inscribed_circle_depth(double radius_um) {
  // Wall inclination from the plane normals: cos t = n100 . n111 / |n111|.
  const double cos_t = 1.0 / std::sqrt(3.0);
  // With the vertex at the origin and the axis pointing up, a center at
  // height y sits y cos t from either wall.
  auto wall_distance = [&](double y) { return y * cos_t; };
  double lo = 0.0;
  double hi = 1.0;
  while (wall_distance(hi) < radius_um) {
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (wall_distance(mid) < radius_um ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) + radius_um;  // vertex to the top of the circle
}

RecipeDocument reference_document(const BondRow& row) {
  RecipeDocument doc;
  doc.steps = reference_flow();
  doc.bond = reference_bond(row);
  return doc;
}

ValidationReport validate_document(const RecipeDocument& doc) {
  ValidationReport report = validate_flow(doc.steps);
  const auto bond = validate_bond(doc.bond, doc.bond_rules);
  report.violations.insert(report.violations.end(), bond.violations.begin(),
                           bond.violations.end());
  return report;
}

std::vector<RecipeMutation> recipe_mutations() {
  auto set = [](std::size_t step, std::string key, ParamValue value) {
    return [=](RecipeDocument& d) { d.steps.at(step).parameters[key] = value; };
  };
  auto erase = [](std::size_t step, std::string key) {
    return [=](RecipeDocument& d) { d.steps.at(step).parameters.erase(key); };
  };
  return {
      {"koh bath too cold (40 C)", set(5, "temp_c", 40.0)},
      {"koh time too short (60 min)", set(5, "time_min", 60.0)},
      {"koh target beyond self-limit (200 um)", set(5, "target_depth_um", 200.0)},
      {"mask window too narrow (200 um)", set(1, "mask_opening_um", 200.0)},
      {"negative oxide thickness", set(0, "thickness_um", -1.0)},
      {"koh temperature missing", erase(5, "temp_c")},
      {"metallization material missing", erase(7, "material")},
      {"oxide etchant missing", erase(3, "etchant")},
      {"koh concentration as text", set(5, "koh_wt_pct", std::string("forty"))},
      {"resist strip before develop", [](RecipeDocument& d) { d.steps.at(4).kind = StepKind::develop; }},
      {"bond voltage 1000 V", [](RecipeDocument& d) { d.bond.voltage_v = 1000.0; }},
      {"bond voltage zero", [](RecipeDocument& d) { d.bond.voltage_v = 0.0; }},
      {"stage temperature 300 C", [](RecipeDocument& d) { d.bond.stage_temp_c = 300.0; }},
      {"counterpoise 60 g", [](RecipeDocument& d) { d.bond.counterpoise_g = 60.0; }},
      {"bond time 20 min at 48 g", [](RecipeDocument& d) { d.bond.bond_time_min = 20.0; }},
      {"rinse replaced by clean",
       [](RecipeDocument& d) { d.bond.clean_sequence.at(3).parameters["action"] = std::string("clean"); }},
  };
}

std::vector<MutationOutcome> run_mutation_suite(const RecipeDocument& base) {
  std::vector<MutationOutcome> out;
  for (const auto& m : recipe_mutations()) {
    RecipeDocument doc = base;
    m.apply(doc);
    out.push_back({m.name, validate_document(doc).violations.size()});
  }
  return out;
}

ReproReport run_reproduction(const Expectations& ex) {
  ReproReport report;
  Recorder rec(ex, report);
  const auto start = Clock::now();
  const auto& in = ex.inputs;

  rec.criterion(1, [&] {
    FiberSpec fiber;
    fiber.radius_um = in.fiber_radius_um;
    const auto g = design_groove(fiber);
    rec.record("design.depth", g.depth_um);
    const double oracle = inscribed_circle_depth(fiber.radius_um);
    rec.record("design.depth_oracle", std::abs(g.depth_um - oracle) / oracle);
    rec.record("design.opening_with_margin", design_groove(fiber, in.margin_um).mask_opening_um);
  });

  rec.criterion(2, [&] {
    const auto model = default_koh_model();
    rec.record("kinetics.rate_90c", rate_at(model, Temperature::celsius(90.0)).rate_um_min);
    rec.record("kinetics.rate_40c", rate_at(model, Temperature::celsius(40.0)).rate_um_min);
    bool increasing = true;
    double prev = rate_at(model, Temperature::celsius(30.0)).rate_um_min;
    for (int c = 31; c <= 100; ++c) {
      const double r = rate_at(model, Temperature::celsius(c)).rate_um_min;
      increasing = increasing && r > prev;
      prev = r;
    }
    rec.record("kinetics.monotonic", increasing ? 1.0 : 0.0);
  });

  rec.criterion(3, [&] {
    EtchConfig cfg;
    cfg.mask_opening_um = in.mask_opening_um;
    cfg.total_time_min = 400.0;
    const auto profile = simulate_profile(cfg);
    const double t_end = profile.final().time_min;
    rec.record("etch.depth", profile_metrics(profile, t_end).depth_um);
    rec.record("etch.wall_angle", wall_angle(profile, t_end).mean_deg());

    const double limit = self_limit_depth(cfg.mask_opening_um);
    double worst = 0.0;
    for (const auto& s : profile.snapshots) {
      const double linear = cfg.rate_100_um_min * s.time_min;
      if (linear < limit) {
        worst = std::max(worst, std::abs(s.max_depth() - linear) / cfg.cell_size_um);
      }
    }
    rec.record("etch.prelimit_cells", worst);

    EtchConfig fine = cfg;
    fine.cell_size_um *= 0.5;
    fine.time_step_min *= 0.5;
    const auto refined = simulate_profile(fine);
    const double coarse_depth = profile.final().max_depth();
    rec.record("etch.refinement",
               std::abs(refined.final().max_depth() - coarse_depth) / coarse_depth);
  });

  rec.criterion(4, [&] {
    for (const auto& [id, mat] : {std::pair{"optics.fresnel_si", silicon_633nm()},
                                  std::pair{"optics.fresnel_al", aluminum_633nm()}}) {
      const double hand = hand_normal_reflectance(mat.n, mat.k);
      rec.record(id, std::abs(fresnel_reflectance(mat, 0.0) - hand) / hand);
    }
    double sp = 0.0;
    for (const auto& mat : {silicon_633nm(), aluminum_633nm()}) {
      sp = std::max(sp, std::abs(fresnel_reflectance(mat, 0.0, Polarization::s) -
                                 fresnel_reflectance(mat, 0.0, Polarization::p)));
    }
    rec.record("optics.sp_normal", sp);
  });

  rec.criterion(5, [&] {
    FiberSpec fiber;
    const auto al = aluminum_mirror();
    const auto si = bare_silicon_mirror();
    const auto fit = fit_capture_factor(in.al_samples, al, fiber);
    const char* ids[] = {"optics.al_p2_sample4", "optics.al_p2_sample5", "optics.al_p2_sample6"};
    for (std::size_t i = 0; i < in.al_samples.size() && i < 3; ++i) {
      rec.record(ids[i], in.al_samples[i].p2_uw - fit.residuals_uw[i]);
    }
    const auto al_budget = power_budget(fiber, al, fit.capture_factor, 1.0);
    const auto si_budget = power_budget(fiber, si, fit.capture_factor, 1.0);
    rec.record("optics.al_reflectivity", al_budget.predicted_reflectivity);
    rec.record("optics.si_al_ratio",
               si_budget.predicted_reflectivity / al_budget.predicted_reflectivity);
  });

  rec.criterion(6, [&] {
    const auto mirror = aluminum_mirror();
    Ray ray;
    ray.origin = {-50.0, 0.0, 0.0};
    const auto once = reflect_ray(ray, mirror);
    const auto& d = once.ray.direction;
    const double elevation = std::atan2(d.z, std::abs(d.x)) * 180.0 / std::numbers::pi;
    rec.record("optics.elevation", elevation);
    const Vec3 oracle = mirror_reflect(ray.direction, mirror.normal());
    rec.record("optics.elevation_oracle",
               std::abs(elevation - std::atan2(oracle.z, std::abs(oracle.x)) * 180.0 / std::numbers::pi));
    // Reflecting the outgoing direction again off the same plane.
    const Vec3 back = mirror_reflect(d, mirror.normal());
    rec.record("optics.double_reflection", (back - ray.direction).norm());
  });

  rec.criterion(7, [&] {
    const double incidence = CrystalAngle{}.from_normal();
    rec.record("optics.tis_loss", 100.0 * tis_scatter_loss(4.1, incidence, 632.0));
    rec.record("optics.tis_smooth", tis_scatter_loss(0.0, incidence, 632.0));
  });

  rec.criterion(8, [&] {
    rec.record("recipe.reference_48g",
               static_cast<double>(validate_document(reference_document({48.0, 40.0})).violations.size()));
    rec.record("recipe.reference_80g",
               static_cast<double>(validate_document(reference_document({80.0, 20.0})).violations.size()));
    const auto outcomes = run_mutation_suite(reference_document());
    std::size_t undetected = 0;
    for (const auto& o : outcomes) {
      undetected += o.violations == 0 ? 1 : 0;
    }
    rec.record("recipe.mutation_count", static_cast<double>(outcomes.size()));
    rec.record("recipe.mutations_undetected", static_cast<double>(undetected));
  });

  report.total_runtime_s = seconds_since(start);
  return report;
}

}  // namespace vgroove
