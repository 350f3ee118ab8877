#include "vgroove/recipe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "vgroove/geometry.hpp"
#include "vgroove/text.hpp"

namespace vgroove {

namespace {

struct KindInfo {
  StepKind kind;
  std::string_view name;
  std::string_view title;
  std::vector<std::string> numbers;
  std::vector<std::string> texts;
};

const std::vector<KindInfo>& kind_table() {
  static const std::vector<KindInfo> table = {
      {StepKind::oxidation, "oxidation", "Thermal oxidation", {"thickness_um", "temp_c"}, {"method"}},
      {StepKind::lithography, "lithography", "Lithography (etch window)", {"mask_opening_um"}, {}},
      {StepKind::develop, "develop", "Develop / pattern transfer", {}, {}},
      {StepKind::oxide_etch, "oxide_etch", "Oxide window etch", {}, {"etchant"}},
      {StepKind::resist_strip, "resist_strip", "Resist strip", {}, {"solvent"}},
      {StepKind::koh_etch,
       "koh_etch",
       "Anisotropic KOH etch",
       {"koh_wt_pct", "temp_c", "time_min", "target_depth_um"},
       {}},
      {StepKind::oxide_strip, "oxide_strip", "Oxide mask strip", {}, {"etchant"}},
      {StepKind::metallization, "metallization", "Mirror metallization", {"thickness_nm"}, {"material", "method"}},
      {StepKind::clean, "clean", "Clean", {}, {"action", "agent"}},
      {StepKind::bond, "bond", "Anodic bond", {"voltage_v", "temp_c", "counterpoise_g", "time_min"}, {}},
  };
  return table;
}

const KindInfo& info(StepKind kind) {
  for (const auto& k : kind_table()) {
    if (k.kind == kind) {
      return k;
    }
  }
  throw ConfigError("unknown step kind");
}

// Each later kind requires an earlier one somewhere before it.
constexpr std::array<std::pair<StepKind, StepKind>, 8> kOrderRules = {{
    {StepKind::oxidation, StepKind::lithography},
    {StepKind::lithography, StepKind::develop},
    {StepKind::develop, StepKind::oxide_etch},
    {StepKind::oxide_etch, StepKind::resist_strip},
    {StepKind::oxide_etch, StepKind::koh_etch},
    {StepKind::resist_strip, StepKind::koh_etch},
    {StepKind::koh_etch, StepKind::oxide_strip},
    {StepKind::oxide_strip, StepKind::metallization},
}};

std::string format_value(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", *d);
    return buf;
  }
  return std::get<std::string>(v);
}

void check_parameters(const ProcessStep& step, std::optional<std::size_t> index,
                      const std::string& where, ValidationReport& report) {
  const auto& ki = info(step.kind);
  auto add = [&](std::string code, std::string msg) {
    report.violations.push_back({index, std::move(code), where + ": " + msg});
  };
  for (const auto& key : ki.numbers) {
    const auto it = step.parameters.find(key);
    if (it == step.parameters.end()) {
      add("missing_parameter", std::string(ki.name) + " requires '" + key + "'");
    } else if (!std::holds_alternative<double>(it->second)) {
      add("parameter_type", "'" + key + "' must be numeric");
    }
  }
  for (const auto& key : ki.texts) {
    const auto it = step.parameters.find(key);
    if (it == step.parameters.end()) {
      add("missing_parameter", std::string(ki.name) + " requires '" + key + "'");
    } else if (!std::holds_alternative<std::string>(it->second) ||
               std::get<std::string>(it->second).empty()) {
      add("parameter_type", "'" + key + "' must be a non-empty string");
    }
  }
  for (const auto& [key, value] : step.parameters) {
    if (const auto* d = std::get_if<double>(&value); d && !(*d > 0.0 && std::isfinite(*d))) {
      add("non_positive", "'" + key + "' = " + format_value(value) + " must be positive");
    }
  }
  if (step.kind == StepKind::clean) {
    const auto action = step.text("action");
    if (action && *action != "clean" && *action != "rinse" && *action != "dry") {
      add("bad_action", "clean action '" + *action + "' is not one of clean|rinse|dry");
    }
    if (action == "rinse" && !step.number("time_min")) {
      add("missing_parameter", "rinse requires 'time_min'");
    }
  }
}

std::string step_where(std::size_t i) { return "step " + std::to_string(i + 1); }

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

std::string_view to_string(StepKind kind) { return info(kind).name; }

std::optional<StepKind> step_kind_from_string(std::string_view name) {
  for (const auto& k : kind_table()) {
    if (k.name == name) {
      return k.kind;
    }
  }
  return std::nullopt;
}

std::optional<double> ProcessStep::number(const std::string& key) const {
  const auto it = parameters.find(key);
  if (it == parameters.end()) {
    return std::nullopt;
  }
  if (const auto* d = std::get_if<double>(&it->second)) {
    return *d;
  }
  return std::nullopt;
}

std::optional<std::string> ProcessStep::text(const std::string& key) const {
  const auto it = parameters.find(key);
  if (it == parameters.end()) {
    return std::nullopt;
  }
  if (const auto* s = std::get_if<std::string>(&it->second)) {
    return *s;
  }
  return std::nullopt;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const auto& v : violations) {
    out << "- [" << v.code << "] " << v.message << "\n";
  }
  return out.str();
}

ValidationReport validate_flow(const std::vector<ProcessStep>& steps, const FlowRules& rules) {
  ValidationReport report;
  if (steps.empty()) {
    report.violations.push_back({std::nullopt, "empty_flow", "process flow has no steps"});
    return report;
  }

  for (std::size_t i = 0; i < steps.size(); ++i) {
    check_parameters(steps[i], i, step_where(i), report);
  }

  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (const auto& [before, after] : kOrderRules) {
      if (steps[i].kind != after) {
        continue;
      }
      const bool found = std::any_of(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(i),
                                     [&](const ProcessStep& s) { return s.kind == before; });
      if (!found) {
        report.violations.push_back(
            {i, "ordering",
             step_where(i) + ": " + std::string(to_string(after)) + " must follow " +
                 std::string(to_string(before))});
      }
    }
  }

  // KOH steps are checked against the self-limit of the window they etch
  // through and against the kinetics model for the planned time.
  std::optional<double> window;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    if (s.kind == StepKind::lithography) {
      if (auto w = s.number("mask_opening_um"); w && *w > 0.0) {
        window = *w;
      }
      continue;
    }
    if (s.kind != StepKind::koh_etch) {
      continue;
    }
    auto opening = s.number("mask_opening_um");
    if (!opening) {
      opening = window;
    }
    const auto target = s.number("target_depth_um");
    const auto temp = s.number("temp_c");
    const auto time = s.number("time_min");
    if (!opening || !(*opening > 0.0)) {
      report.violations.push_back({i, "no_mask_window",
                                   step_where(i) + ": no mask opening defined for the KOH etch"});
      continue;
    }
    if (!target || !(*target > 0.0)) {
      continue;  // reported by the parameter check
    }
    const double limit = self_limit_depth(*opening);
    if (*target > limit * (1.0 + 1e-9)) {
      report.violations.push_back(
          {i, "unreachable_depth",
           step_where(i) + ": target depth " + format_fixed(*target, 1) +
               " um exceeds the self-limit " + format_fixed(limit, 1) + " um of a " +
               format_fixed(*opening, 1) + " um opening"});
      continue;
    }
    if (temp && time && *time > 0.0 && *temp > -kCelsiusOffset) {
      const double reached = depth_after(rules.kinetics, Temperature::celsius(*temp), *time, *opening);
      if (reached < *target * (1.0 - rules.depth_shortfall_tolerance)) {
        report.violations.push_back(
            {i, "insufficient_time",
             step_where(i) + ": " + format_fixed(*time, 1) + " min at " + format_fixed(*temp, 1) +
                 " C reaches " + format_fixed(reached, 1) + " um, short of the " +
                 format_fixed(*target, 1) + " um target"});
      }
    }
  }
  return report;
}

ValidationReport validate_bond(const BondRecipe& recipe, const BondRules& rules) {
  ValidationReport report;
  auto add = [&](std::string code, std::string msg) {
    report.violations.push_back({std::nullopt, std::move(code), "bond: " + std::move(msg)});
  };

  if (!(recipe.voltage_v > 0.0)) {
    add("non_positive", "voltage must be positive");
  } else {
    const double lo = rules.nominal_voltage_v * (1.0 - rules.window_fraction);
    const double hi = rules.nominal_voltage_v * (1.0 + rules.window_fraction);
    if (recipe.voltage_v < lo || recipe.voltage_v > hi) {
      add("out_of_window", "voltage " + format_fixed(recipe.voltage_v, 1) + " V outside " +
                               format_fixed(lo, 1) + "-" + format_fixed(hi, 1) + " V");
    }
  }
  {
    const double lo = rules.nominal_stage_temp_c * (1.0 - rules.window_fraction);
    const double hi = rules.nominal_stage_temp_c * (1.0 + rules.window_fraction);
    if (recipe.stage_temp_c < lo || recipe.stage_temp_c > hi) {
      add("out_of_window", "stage temperature " + format_fixed(recipe.stage_temp_c, 1) +
                               " C outside " + format_fixed(lo, 1) + "-" + format_fixed(hi, 1) +
                               " C");
    }
  }
  if (!(recipe.bond_time_min > 0.0)) {
    add("non_positive", "bond time must be positive");
  }
  if (!(recipe.counterpoise_g > 0.0)) {
    add("non_positive", "counterpoise mass must be positive");
  }
  if (recipe.bond_time_min > 0.0 && recipe.counterpoise_g > 0.0) {
    const bool listed = std::any_of(rules.table.begin(), rules.table.end(), [&](const BondRow& r) {
      return close(r.counterpoise_g, recipe.counterpoise_g) &&
             close(r.bond_time_min, recipe.bond_time_min);
    });
    if (!listed) {
      add("unlisted_condition", "(" + format_fixed(recipe.counterpoise_g, 1) + " g, " +
                                    format_fixed(recipe.bond_time_min, 1) +
                                    " min) is not a qualified counterpoise/time pair; "
                                    "extrapolation is refused");
    }
  }

  if (recipe.clean_sequence.empty()) {
    add("missing_clean", "clean sequence is empty");
    return report;
  }
  for (std::size_t i = 0; i < recipe.clean_sequence.size(); ++i) {
    const auto& s = recipe.clean_sequence[i];
    const std::string where = "bond: clean " + std::to_string(i + 1);
    if (s.kind != StepKind::clean) {
      report.violations.push_back({i, "wrong_kind", where + ": expected a clean step, got " +
                                                        std::string(to_string(s.kind))});
      continue;
    }
    check_parameters(s, i, where, report);
  }

  // clean -> rinse -> dry must appear in that order.
  const std::array<std::string_view, 3> stages = {"clean", "rinse", "dry"};
  std::size_t stage = 0;
  for (const auto& s : recipe.clean_sequence) {
    if (stage < stages.size() && s.kind == StepKind::clean && s.text("action") == stages[stage]) {
      ++stage;
    }
  }
  if (stage < stages.size()) {
    add("clean_sequence", "clean sequence lacks a '" + std::string(stages[stage]) +
                              "' stage in the clean -> rinse -> dry order");
  }
  return report;
}

std::string render_traveler(const std::vector<ProcessStep>& steps, const BondRecipe& bond,
                            const TravelerOptions& options) {
  if (steps.empty()) {
    throw ConfigError("cannot render a traveler for an empty process flow");
  }
  auto flow = validate_flow(steps, options.flow_rules);
  const auto bond_report = validate_bond(bond, options.bond_rules);
  flow.violations.insert(flow.violations.end(), bond_report.violations.begin(),
                         bond_report.violations.end());
  if (!flow.ok() && !options.force) {
    throw RecipeRejected(std::move(flow));
  }

  auto params = [](const ProcessStep& s) {
    std::string out;
    for (const auto& [key, value] : s.parameters) {
      out += (out.empty() ? "" : ", ") + key + " = " + format_value(value);
    }
    return out.empty() ? std::string("(no parameters)") : out;
  };
  auto cite = [&](const ProcessStep& s, const std::string& fallback) {
    return options.source_name + (s.source.empty() ? fallback : s.source);
  };

  std::ostringstream out;
  out << "# Process traveler: " << options.title << "\n\n";
  out << "Source: " << options.source_name << "\n";
  if (!flow.ok()) {
    out << "\n**FORCED: validation reported " << flow.violations.size() << " violation(s)**\n\n"
        << flow.to_text();
  }
  out << "\n## Fabrication\n\n";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    const auto& ki = info(s.kind);
    out << i + 1 << ". " << ki.title;
    if (!s.label.empty()) {
      out << ": " << s.label;
    }
    out << "\n   - " << params(s) << "\n";
    out << "   - source: " << cite(s, "#/steps/" + std::to_string(i)) << "\n";
    out << "   - sign-off: ________\n";
  }

  out << "\n## Anodic bonding\n\n";
  out << "- voltage_v = " << format_value(bond.voltage_v) << "\n";
  out << "- stage_temp_c = " << format_value(bond.stage_temp_c) << "\n";
  out << "- counterpoise_g = " << format_value(bond.counterpoise_g) << "\n";
  out << "- bond_time_min = " << format_value(bond.bond_time_min) << "\n";
  out << "- fiber fixation: " << (bond.uv_glue_fixation ? "UV-curable glue before bonding" : "none")
      << "\n";
  out << "- source: " << options.source_name << (bond.source.empty() ? "#/bond" : bond.source) << "\n";
  out << "\n### Pre-bond clean\n\n";
  for (std::size_t i = 0; i < bond.clean_sequence.size(); ++i) {
    const auto& s = bond.clean_sequence[i];
    out << i + 1 << ". " << (s.label.empty() ? std::string(info(s.kind).title) : s.label) << "\n";
    out << "   - " << params(s) << "\n";
    out << "   - source: " << cite(s, "#/bond/clean_sequence/" + std::to_string(i)) << "\n";
  }
  return out.str();
}

std::vector<ProcessStep> reference_flow() {
  return {
      {StepKind::oxidation, "wet oxide on one-side polished <100> wafer",
       {{"thickness_um", 1.0}, {"temp_c", 1100.0}, {"method", std::string("wet")}}, ""},
      {StepKind::lithography, "pattern bulk-etch window", {{"mask_opening_um", 250.0}}, ""},
      {StepKind::develop, "develop resist", {}, ""},
      {StepKind::oxide_etch, "open oxide window", {{"etchant", std::string("BOE")}}, ""},
      {StepKind::resist_strip, "remove resist", {{"solvent", std::string("acetone")}}, ""},
      {StepKind::koh_etch, "V-groove and mirror facet, magnetic stirring",
       {{"koh_wt_pct", 40.0}, {"temp_c", 70.0}, {"time_min", 183.0}, {"target_depth_um", 170.75}},
       ""},
      {StepKind::oxide_strip, "remove oxide etch mask", {{"etchant", std::string("BOE")}}, ""},
      {StepKind::metallization, "mirror coating",
       {{"thickness_nm", 100.0}, {"material", std::string("Al")},
        {"method", std::string("thermal_evaporation")}},
       ""},
  };
}

std::vector<ProcessStep> reference_clean_sequence() {
  return {
      {StepKind::clean, "DI water clean",
       {{"action", std::string("clean")}, {"agent", std::string("DI_water")}}, ""},
      {StepKind::clean, "nitrogen blow dry",
       {{"action", std::string("dry")}, {"agent", std::string("N2")}}, ""},
      {StepKind::clean, "sulfuric/peroxide dip",
       {{"action", std::string("clean")},
        {"agent", std::string("H2SO4:H2O2")},
        {"h2so4_ml", 300.0},
        {"h2o2_ml", 100.0},
        {"temp_c", 80.0},
        {"time_min", 20.0}},
       ""},
      {StepKind::clean, "DI water rinse",
       {{"action", std::string("rinse")}, {"agent", std::string("DI_water")}, {"time_min", 1.0}}, ""},
      {StepKind::clean, "nitrogen blow dry",
       {{"action", std::string("dry")}, {"agent", std::string("N2")}}, ""},
  };
}

BondRecipe reference_bond(const BondRow& row) {
  BondRecipe b;
  b.voltage_v = 700.0;
  b.stage_temp_c = 500.0;
  b.counterpoise_g = row.counterpoise_g;
  b.bond_time_min = row.bond_time_min;
  b.clean_sequence = reference_clean_sequence();
  return b;
}

}  // namespace vgroove
