#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vgroove/io.hpp"

namespace vgroove {

// How a computed value is judged against its expectation row.
struct Tolerance {
  enum class Kind { absolute, relative, at_most, at_least, exact };
  Kind kind = Kind::absolute;
  double value = 0.0;
  bool accepts(double computed, double target) const;
  std::string describe(const std::string& unit) const;
};

struct Expectation {
  std::string id;
  std::string label;
  int criterion = 0;
  double target = 0.0;
  Tolerance tolerance;
  std::string unit;
  std::string note;  // where the reported number comes from
};

// Inputs the harness needs beyond the built-in models: measured powers and
// the reported reflectivities.
struct ReproInputs {
  double fiber_radius_um = 62.5;
  double margin_um = 8.5;
  double mask_opening_um = 250.0;
  std::vector<PowerMeasurement> al_samples;
  std::vector<PowerMeasurement> si_samples;
  double measured_si_reflectivity = 0.31;
  double measured_al_reflectivity = 0.70;
};

struct Expectations {
  ReproInputs inputs;
  std::vector<Expectation> rows;
  const Expectation& row(const std::string& id) const;
};

Expectations expectations_from_json(const Json& j);
Expectations load_expectations(const std::filesystem::path& path);

struct ReproRow {
  Expectation expectation;
  double computed = 0.0;
  bool passed = false;
};

struct ReproReport {
  std::vector<ReproRow> rows;
  std::map<int, double> runtime_s;  // wall time per criterion
  double total_runtime_s = 0.0;
  bool all_passed() const;
  bool criterion_passed(int criterion) const;
  std::string to_table() const;
  Json to_json() const;
};

// Runs every check and measures each criterion's wall time.
ReproReport run_reproduction(const Expectations& expectations);

// Single-field corruptions of a recipe document; each must be caught by
// validation.
struct RecipeMutation {
  std::string name;
  std::function<void(RecipeDocument&)> apply;
};

std::vector<RecipeMutation> recipe_mutations();

struct MutationOutcome {
  std::string name;
  std::size_t violations = 0;
};

// Validation of the document's flow plus its bond recipe.
ValidationReport validate_document(const RecipeDocument& doc);
std::vector<MutationOutcome> run_mutation_suite(const RecipeDocument& base);

// Reference document: the standard flow with the bond row given.
RecipeDocument reference_document(const BondRow& row = {48.0, 40.0});

// Minimum flush-seating depth found by bisecting for the circle tangent to
// both walls of a V, with the wall direction taken from the (100)/(111)
// normals. Independent of the closed-form geometry.
double inscribed_circle_depth(double radius_um);

}  // namespace vgroove
