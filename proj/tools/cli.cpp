#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include "vgroove/error.hpp"
#include "vgroove/etchsim.hpp"
#include "vgroove/geometry.hpp"
#include "vgroove/io.hpp"
#include "vgroove/kinetics.hpp"
#include "vgroove/optics.hpp"
#include "vgroove/platform.hpp"
#include "vgroove/recipe.hpp"
#include "vgroove/reproduce.hpp"
#include "vgroove/svg.hpp"

#ifndef VGROOVE_DATA_DIR
#define VGROOVE_DATA_DIR "configs"
#endif

namespace vgroove::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config;
  std::string out_dir;
  std::string format = "json";
};

// Raised after the artifacts are written when the command itself found a
// problem (violations, failed rows).
struct SoftFailure {};

void write_error(std::ostream& err, const std::string& code, const std::string& message, int exit) {
  err << Json{{"error", code}, {"message", message}, {"exit", exit}}.dump() << "\n";
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open input file " + path);
  }
  return in;
}

void flatten(const Json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      flatten(value, prefix.empty() ? key : prefix + "." + key, out);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      flatten(j[i], prefix + "." + std::to_string(i), out);
    }
  } else {
    std::string value = j.is_string() ? j.get<std::string>() : j.dump();
    if (value.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : value) {
        quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      }
      value = quoted + "\"";
    }
    out << prefix << "," << value << "\n";
  }
}

class Output {
 public:
  Output(const GlobalOptions& g, std::ostream& out) : g_(g), out_(out) {}

  bool has_dir() const { return !g_.out_dir.empty(); }

  // Writes a named artifact into the output directory.
  void file(const std::string& name, const std::string& content) const {
    fs::create_directories(g_.out_dir);
    const fs::path path = fs::path(g_.out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) {
      throw ConfigError("cannot write " + path.string());
    }
  }

  // Prints the command's main record in the selected format.
  void record(const Json& j) const {
    if (g_.format == "csv") {
      out_ << "field,value\n";
      flatten(j, "", out_);
    } else {
      out_ << j.dump(2) << "\n";
    }
  }

  std::ostream& stream() const { return out_; }
  const GlobalOptions& globals() const { return g_; }

 private:
  const GlobalOptions& g_;
  std::ostream& out_;
};

EtchRateModel load_model(const std::string& model_path, const std::string& csv_path) {
  if (!model_path.empty() && !csv_path.empty()) {
    throw ConfigError("--model and --csv are mutually exclusive");
  }
  if (!model_path.empty()) {
    return rate_model_from_json(read_json_file(model_path));
  }
  if (!csv_path.empty()) {
    auto in = open_input(csv_path);
    return fit_arrhenius(read_rate_csv(in));
  }
  return default_koh_model();
}

// design -------------------------------------------------------------------

struct DesignArgs {
  std::optional<double> radius, core, na, wavelength, margin, depth, opening;
};

void cmd_design(const DesignArgs& a, const Output& out) {
  PlatformConfig base;
  if (!out.globals().config.empty()) {
    base = load_platform(out.globals().config);
  }
  FiberSpec fiber = base.fiber;
  if (a.radius) fiber.radius_um = *a.radius;
  if (a.core) fiber.core_radius_um = *a.core;
  if (a.na) fiber.numerical_aperture = *a.na;
  if (a.wavelength) fiber.wavelength_nm = *a.wavelength;
  fiber.validate();

  GrooveDesign groove;
  const double margin = a.margin.value_or(base.groove.margin_um);
  if (a.depth || a.opening) {
    const double depth = a.depth ? *a.depth : self_limit_depth(*a.opening);
    const double opening = a.opening ? *a.opening : opening_width(depth) + margin;
    groove = groove_from_profile(opening, depth);
    groove.clearance_um = seat_clearance(fiber);
    groove.margin_um = opening - opening_width(std::min(depth, self_limit_depth(opening)));
  } else if (a.radius || a.margin || out.globals().config.empty()) {
    groove = design_groove(fiber, margin);
  } else {
    groove = base.groove;
  }
  const auto seating = fiber_seating(groove, fiber);
  const Json j{{"fiber", to_json(fiber)},
               {"groove", to_json(groove)},
               {"seating", to_json(seating)}};
  if (out.has_dir()) {
    out.file("design.json", j.dump(2) + "\n");
  }
  out.record(j);
}

// fit-rates / plan-etch --------------------------------------------------------

struct FitArgs {
  std::string csv;
  std::optional<double> window_min, window_max;
};

void cmd_fit_rates(const FitArgs& a, const Output& out) {
  auto in = open_input(a.csv);
  auto model = fit_arrhenius(read_rate_csv(in));
  model.assumptions.push_back("fitted from " + fs::path(a.csv).filename().string());
  if (a.window_min) model.window.min_c = *a.window_min;
  if (a.window_max) model.window.max_c = *a.window_max;
  if (!(model.window.min_c < model.window.max_c)) {
    throw ConfigError("validity window must satisfy min < max");
  }
  const Json j = to_json(model);
  if (out.has_dir()) {
    out.file("rate_model.json", j.dump(2) + "\n");
  }
  out.record(j);
}

struct PlanArgs {
  std::string model, csv;
  double target_um = 0.0;
  double temp_c = 70.0;
  double mask_um = 250.0;
  std::optional<double> duration_min;
};

void cmd_plan_etch(const PlanArgs& a, const Output& out) {
  const auto model = load_model(a.model, a.csv);
  const auto bath = Temperature::celsius(a.temp_c);
  const auto plan = plan_etch(model, a.target_um, bath, a.mask_um);
  Json j{{"target_depth_um", a.target_um},
         {"temp_c", a.temp_c},
         {"mask_opening_um", a.mask_um},
         {"plan", to_json(plan)}};
  if (a.duration_min) {
    j["duration_min"] = *a.duration_min;
    j["depth_after_um"] = depth_after(model, bath, *a.duration_min, a.mask_um);
  }
  if (out.has_dir()) {
    out.file("plan.json", j.dump(2) + "\n");
  }
  out.record(j);
}

// simulate-etch ------------------------------------------------------------------

struct SimArgs {
  std::optional<double> mask, rate, ratio, cell, dt, time, temp_c;
  std::string model;
};

void cmd_simulate(const SimArgs& a, const Output& out) {
  EtchConfig cfg;
  if (!out.globals().config.empty()) {
    cfg = etch_config_from_json(read_json_file(out.globals().config));
  }
  if (a.mask) cfg.mask_opening_um = *a.mask;
  if (a.temp_c) {
    if (a.rate) {
      throw ConfigError("--temp-c and --rate-um-min are mutually exclusive");
    }
    const auto model = load_model(a.model, "");
    cfg.rate_100_um_min = rate_at(model, Temperature::celsius(*a.temp_c)).rate_um_min;
  }
  if (a.rate) cfg.rate_100_um_min = *a.rate;
  if (a.ratio) cfg.anisotropy_ratio = *a.ratio;
  if (a.cell) cfg.cell_size_um = *a.cell;
  if (a.dt) cfg.time_step_min = *a.dt;
  if (a.time) cfg.total_time_min = *a.time;

  const auto profile = simulate_profile(cfg);
  const double t_end = profile.final().time_min;
  Json angle = nullptr;
  try {
    angle = wall_angle(profile, t_end).mean_deg();
  } catch (const DomainError&) {
    // Too little sidewall to fit; reported as null.
  }
  const Json metrics{{"config", to_json(cfg)},
                     {"converged", profile.converged},
                     {"stop_time_min", profile.stop_time_min},
                     {"self_limit_depth_um", self_limit_depth(cfg.mask_opening_um)},
                     {"final", to_json(profile_metrics(profile, t_end))},
                     {"wall_angle_deg", angle},
                     {"snapshot_count", profile.snapshots.size()}};
  if (out.has_dir()) {
    std::ostringstream csv;
    write_profile_csv(profile, csv);
    out.file("profile.csv", csv.str());
    out.file("profile.svg", render_profile_svg(profile, {}));
    out.file("metrics.json", metrics.dump(2) + "\n");
  }
  if (out.globals().format == "csv") {
    write_profile_csv(profile, out.stream());
  } else {
    out.record(metrics);
  }
}

// trace / budget ---------------------------------------------------------------

constexpr double kDeg = 180.0 / std::numbers::pi;

void cmd_trace(double power_uw, const Output& out) {
  PlatformConfig p;
  if (!out.globals().config.empty()) {
    p = load_platform(out.globals().config);
  }
  const auto seating = fiber_seating(p.groove, p.fiber);
  MirrorSpec mirror = p.mirror;
  mirror.anchor = {0.0, 0.0, 0.0};
  mirror.extent = mirror_extent(p.groove, seating);

  Ray ray;
  ray.origin = {-p.fiber_to_mirror_um, 0.0, 0.0};
  ray.power_uw = power_uw;
  ray.wavelength_nm = p.fiber.wavelength_nm;
  const auto reflected = reflect_ray(ray, mirror);
  const auto footprint = beam_footprint(p.fiber, p.fiber_to_mirror_um, mirror, p.detector_height_um);
  const auto budget = power_budget(p.fiber, mirror, p.capture_factor, power_uw);

  const auto& d = reflected.ray.direction;
  const double reach = p.detector_height_um / d.z;
  const double offset = std::abs(reach * d.x);
  const Json j{
      {"platform", to_json(p)},
      {"seating", to_json(seating)},
      {"ray",
       {{"incidence_deg", reflected.incidence_rad * kDeg},
        {"elevation_deg", std::atan2(d.z, std::abs(d.x)) * kDeg},
        {"direction", {d.x, d.y, d.z}},
        {"fresnel_factor", reflected.fresnel},
        {"scatter_loss", reflected.scatter_loss},
        {"reflected_power_uw", reflected.ray.power_uw},
        {"detector_offset_um", offset},
        {"within_aperture", offset <= p.detector_aperture_um}}},
      {"footprint", to_json(footprint)},
      {"budget", to_json(budget)}};
  if (out.has_dir()) {
    out.file("trace.svg", render_trace_svg(p, seating, reflected));
    out.file("budget.json", j.dump(2) + "\n");
  }
  out.record(j);
}

struct BudgetArgs {
  std::string csv;
  std::string mirror;
  double power_uw = 1.0;
};

void cmd_budget(const BudgetArgs& a, const Output& out) {
  PlatformConfig p;
  if (!out.globals().config.empty()) {
    p = load_platform(out.globals().config);
  }
  MirrorSpec mirror = p.mirror;
  if (a.mirror == "si") {
    mirror = bare_silicon_mirror();
  } else if (a.mirror == "al") {
    mirror = aluminum_mirror();
  }

  double capture = p.capture_factor;
  Json fit_json = nullptr;
  Json samples = Json::array();
  if (!a.csv.empty()) {
    auto in = open_input(a.csv);
    const auto measurements = read_power_csv(in);
    const auto fit = fit_capture_factor(measurements, mirror, p.fiber);
    capture = fit.capture_factor;
    fit_json = to_json(fit);
    for (std::size_t i = 0; i < measurements.size(); ++i) {
      const double predicted = measurements[i].p2_uw - fit.residuals_uw[i];
      samples.push_back({{"p1_uw", measurements[i].p1_uw},
                         {"p2_uw", measurements[i].p2_uw},
                         {"predicted_p2_uw", predicted},
                         {"relative_error", (predicted - measurements[i].p2_uw) / measurements[i].p2_uw}});
    }
  }
  const auto budget = power_budget(p.fiber, mirror, capture, a.power_uw);
  const Json j{{"mirror", to_json(mirror)},
               {"fit", fit_json},
               {"samples", samples},
               {"budget", to_json(budget)}};
  if (out.has_dir()) {
    out.file("budget.json", j.dump(2) + "\n");
  }
  out.record(j);
}

// recipe -------------------------------------------------------------------------

void cmd_recipe_validate(const std::string& file, const Output& out) {
  const auto doc = recipe_from_json(read_json_file(file));
  const auto report = validate_document(doc);
  const Json j = to_json(report);
  if (out.has_dir()) {
    out.file("validation.json", j.dump(2) + "\n");
  }
  out.record(j);
  if (!report.ok()) {
    throw SoftFailure{};
  }
}

void cmd_recipe_traveler(const std::string& file, bool force, const Output& out) {
  const auto doc = recipe_from_json(read_json_file(file));
  TravelerOptions options;
  options.title = doc.title;
  options.source_name = fs::path(file).filename().string();
  options.force = force;
  options.bond_rules = doc.bond_rules;
  const auto md = render_traveler(doc.steps, doc.bond, options);
  if (out.has_dir()) {
    out.file("traveler.md", md);
  }
  out.stream() << md;
}

// reproduce ----------------------------------------------------------------------

void cmd_reproduce(const std::string& expectations_path, const Output& out) {
  const auto ex = load_expectations(expectations_path);
  const auto report = run_reproduction(ex);
  const Json j = report.to_json();
  if (out.has_dir()) {
    out.file("reproduce.json", j.dump(2) + "\n");
    out.file("reproduce.txt", report.to_table());
  }
  if (out.globals().format == "json") {
    out.stream() << j.dump(2) << "\n";
  } else if (out.globals().format == "csv") {
    out.record(j);
  } else {
    out.stream() << report.to_table();
  }
  if (!report.all_passed()) {
    throw SoftFailure{};
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"V-groove fiber platform design, etch, optics and recipe tool", "vgroove"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  bool table = false;
  app.add_option("--config", g.config, "Input JSON configuration");
  app.add_option("--out", g.out_dir, "Directory for written artifacts");
  app.add_option("--format", g.format, "Record format")->check(CLI::IsMember({"json", "csv"}));

  DesignArgs design;
  auto* c_design = app.add_subcommand("design", "Groove depth, opening and fiber seating");
  c_design->add_option("--fiber-radius-um", design.radius, "Fiber cladding radius");
  c_design->add_option("--core-radius-um", design.core, "Fiber core radius");
  c_design->add_option("--na", design.na, "Numerical aperture");
  c_design->add_option("--wavelength-nm", design.wavelength, "Source wavelength");
  c_design->add_option("--margin-um", design.margin, "Mask margin added to the opening");
  c_design->add_option("--depth-um", design.depth, "Etched depth of an existing groove");
  c_design->add_option("--opening-um", design.opening, "Mask opening of an existing groove");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit-rates", "Fit an Arrhenius model to temp_c,rate_um_min CSV");
  c_fit->add_option("--csv", fit.csv, "Rate table")->required();
  c_fit->add_option("--window-min-c", fit.window_min, "Lower validity bound");
  c_fit->add_option("--window-max-c", fit.window_max, "Upper validity bound");

  PlanArgs plan;
  auto* c_plan = app.add_subcommand("plan-etch", "KOH time to reach a target depth");
  c_plan->add_option("--model", plan.model, "Rate model JSON (from fit-rates)");
  c_plan->add_option("--csv", plan.csv, "Rate table to fit instead of a model");
  c_plan->add_option("--target-um", plan.target_um, "Target depth")->required();
  c_plan->add_option("--temp-c", plan.temp_c, "Bath temperature")->capture_default_str();
  c_plan->add_option("--mask-um", plan.mask_um, "Mask opening")->capture_default_str();
  c_plan->add_option("--duration-min", plan.duration_min, "Also report depth after this time");

  SimArgs sim;
  auto* c_sim = app.add_subcommand("simulate-etch", "2-D etch-front simulation of the groove cross-section");
  c_sim->add_option("--mask-um", sim.mask, "Mask opening");
  c_sim->add_option("--rate-um-min", sim.rate, "(100) etch rate");
  c_sim->add_option("--temp-c", sim.temp_c, "Derive the rate from the kinetics model");
  c_sim->add_option("--model", sim.model, "Rate model JSON for --temp-c");
  c_sim->add_option("--ratio", sim.ratio, "(111)/(100) rate ratio");
  c_sim->add_option("--cell-um", sim.cell, "Grid cell size");
  c_sim->add_option("--dt-min", sim.dt, "Time step");
  c_sim->add_option("--time-min", sim.time, "Total etch time");

  double trace_power = 1.0;
  auto* c_trace = app.add_subcommand("trace", "Ray trace fiber -> mirror -> detector");
  c_trace->add_option("--power-uw", trace_power, "Launched power")->capture_default_str();

  BudgetArgs budget;
  auto* c_budget = app.add_subcommand("budget", "Power budget and capture-factor fit");
  c_budget->add_option("--csv", budget.csv, "p1_uw,p2_uw measurements");
  c_budget->add_option("--mirror", budget.mirror, "Mirror preset")->check(CLI::IsMember({"al", "si"}));
  c_budget->add_option("--power-uw", budget.power_uw, "Launched power for the budget")->capture_default_str();

  auto* c_recipe = app.add_subcommand("recipe", "Validate a process recipe or render its traveler");
  c_recipe->require_subcommand(1);
  std::string recipe_file;
  bool force = false;
  auto* c_validate = c_recipe->add_subcommand("validate", "Check flow and bonding rules");
  c_validate->add_option("file", recipe_file, "Recipe JSON")->required();
  auto* c_traveler = c_recipe->add_subcommand("traveler", "Markdown run sheet");
  c_traveler->add_option("file", recipe_file, "Recipe JSON")->required();
  c_traveler->add_flag("--force", force, "Render even when validation fails");

  std::string expectations = std::string(VGROOVE_DATA_DIR) + "/expectations.jsonc";
  auto* c_repro = app.add_subcommand("reproduce", "Run every reproduction check");
  c_repro->add_option("--expectations", expectations, "Expectations file")->capture_default_str();
  c_repro->add_flag("--table", table, "Print the table even with --format json");

  std::vector<const char*> argv{"vgroove"};
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    // A missing subcommand with no arguments at all is a request for help.
    if (args.empty()) {
      out << app.help();
      return kUsage;
    }
    write_error(err, "usage", e.what(), kUsage);
    return kUsage;
  }

  // --format json is the default; reproduce prints its table unless JSON was
  // explicitly requested.
  const bool format_given = app.count("--format") > 0;
  Output output(g, out);
  try {
    if (c_design->parsed()) {
      cmd_design(design, output);
    } else if (c_fit->parsed()) {
      cmd_fit_rates(fit, output);
    } else if (c_plan->parsed()) {
      cmd_plan_etch(plan, output);
    } else if (c_sim->parsed()) {
      cmd_simulate(sim, output);
    } else if (c_trace->parsed()) {
      cmd_trace(trace_power, output);
    } else if (c_budget->parsed()) {
      cmd_budget(budget, output);
    } else if (c_validate->parsed()) {
      cmd_recipe_validate(recipe_file, output);
    } else if (c_traveler->parsed()) {
      cmd_recipe_traveler(recipe_file, force, output);
    } else if (c_repro->parsed()) {
      GlobalOptions repro = g;
      repro.format = (format_given && !table) ? g.format : "table";
      cmd_reproduce(expectations, Output(repro, out));
    }
  } catch (const SoftFailure&) {
    return kFailure;
  } catch (const RecipeRejected& e) {
    write_error(err, e.code(), e.what(), kFailure);
    return kFailure;
  } catch (const ConfigError& e) {
    write_error(err, e.code(), e.what(), kUsage);
    return kUsage;
  } catch (const Error& e) {
    write_error(err, e.code(), e.what(), kFailure);
    return kFailure;
  } catch (const fs::filesystem_error& e) {
    write_error(err, "io", e.what(), kUsage);
    return kUsage;
  }
  return kOk;
}

}  // namespace vgroove::cli
