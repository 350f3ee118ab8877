#pragma once

// JSON/CSV surfaces for the command-line tool. Every numeric JSON field is
// named with its unit suffix.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vgroove/etchsim.hpp"
#include "vgroove/geometry.hpp"
#include "vgroove/kinetics.hpp"
#include "vgroove/optics.hpp"
#include "vgroove/recipe.hpp"

namespace vgroove {

using Json = nlohmann::ordered_json;

// Reads a JSON document (comments allowed). Throws ConfigError.
Json read_json_file(const std::filesystem::path& path);
Json parse_json(const std::string& text, const std::string& origin);

// Geometry values are reported to two decimals.
Json to_json(const FiberSpec& fiber);
Json to_json(const GrooveDesign& groove);
Json to_json(const SeatingResult& seating);

Json to_json(const EtchRateModel& model);
EtchRateModel rate_model_from_json(const Json& j);
Json to_json(const EtchPlan& plan);

EtchConfig etch_config_from_json(const Json& j);
Json to_json(const EtchConfig& cfg);
Json to_json(const ProfileMetrics& m);
// timestamp_min,x_um,depth_um rows for every snapshot.
void write_profile_csv(const EtchProfile& profile, std::ostream& out);

FiberSpec fiber_from_json(const Json& j);
OpticalMaterial material_from_json(const Json& j);
Json to_json(const OpticalMaterial& m);
MirrorSpec mirror_from_json(const Json& j);
Json to_json(const MirrorSpec& m);
Json to_json(const PowerBudget& b);
Json to_json(const BeamFootprint& f);
Json to_json(const FootprintReport& r);
Json to_json(const CaptureFit& fit);

struct RecipeDocument {
  std::string title = "V-groove fiber platform";
  std::vector<ProcessStep> steps;
  BondRecipe bond;
  BondRules bond_rules;
};

RecipeDocument recipe_from_json(const Json& j);
Json to_json(const RecipeDocument& doc);
Json to_json(const ValidationReport& report);

}  // namespace vgroove
