#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vgroove/error.hpp"
#include "vgroove/kinetics.hpp"

namespace vgroove {

enum class StepKind {
  oxidation,
  lithography,
  develop,
  oxide_etch,
  resist_strip,
  koh_etch,
  oxide_strip,
  metallization,
  clean,
  bond,
};

std::string_view to_string(StepKind kind);
std::optional<StepKind> step_kind_from_string(std::string_view name);

using ParamValue = std::variant<double, std::string>;

// One fabrication step. Numeric parameter keys carry their unit as a suffix
// (`temp_c`, `time_min`, `thickness_um`, ...).
struct ProcessStep {
  StepKind kind = StepKind::oxidation;
  std::string label;
  std::map<std::string, ParamValue> parameters;
  std::string source;  // locator in the originating document, e.g. "#/steps/2"

  std::optional<double> number(const std::string& key) const;
  std::optional<std::string> text(const std::string& key) const;
  std::optional<double> duration_min() const { return number("time_min"); }
  std::optional<double> temperature_c() const { return number("temp_c"); }
};

struct BondRow {
  double counterpoise_g = 0.0;
  double bond_time_min = 0.0;
};

struct BondRecipe {
  double voltage_v = 0.0;
  double stage_temp_c = 0.0;
  double counterpoise_g = 0.0;
  double bond_time_min = 0.0;
  std::vector<ProcessStep> clean_sequence;
  bool uv_glue_fixation = true;  // optional pre-bond fiber fixation
  std::string source;
};

struct Violation {
  std::optional<std::size_t> step_index;
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_text() const;
};

class RecipeRejected : public Error {
 public:
  explicit RecipeRejected(ValidationReport report)
      : Error("validation", "recipe failed validation:\n" + report.to_text()),
        report_(std::move(report)) {}

  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

struct FlowRules {
  EtchRateModel kinetics = default_koh_model();
  // Planned KOH time may fall short of the target depth by this fraction.
  double depth_shortfall_tolerance = 0.01;
};

struct BondRules {
  double nominal_voltage_v = 700.0;
  double nominal_stage_temp_c = 500.0;
  double window_fraction = 0.15;
  std::vector<BondRow> table = {{48.0, 40.0}, {80.0, 20.0}};
};

ValidationReport validate_flow(const std::vector<ProcessStep>& steps, const FlowRules& rules = {});
ValidationReport validate_bond(const BondRecipe& recipe, const BondRules& rules = {});

struct TravelerOptions {
  std::string title = "V-groove fiber platform";
  std::string source_name = "recipe.json";
  bool force = false;
  FlowRules flow_rules;
  BondRules bond_rules;
};

// Markdown run sheet. Throws RecipeRejected (carrying the report) when
// validation fails and `force` is not set.
std::string render_traveler(const std::vector<ProcessStep>& steps, const BondRecipe& bond,
                            const TravelerOptions& options = {});

// Fabrication flow and bonding schedule as run for the fiber platform.
std::vector<ProcessStep> reference_flow();
BondRecipe reference_bond(const BondRow& row = {48.0, 40.0});
std::vector<ProcessStep> reference_clean_sequence();

}  // namespace vgroove
