#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef VGROOVE_DATA_DIR
#define VGROOVE_DATA_DIR "configs"
#endif

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = vgroove::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(VGROOVE_DATA_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("vgroove_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

json error_record(const Result& r) {
  REQUIRE(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  return json::parse(r.err);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("design for the standard fiber") {
  const auto r = run({"design", "--fiber-radius-um", "62.5"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["groove"]["depth_um"].get<double>() == doctest::Approx(170.75));
  CHECK(j["groove"]["min_opening_um"].get<double>() == doctest::Approx(241.48));
  CHECK(j["seating"]["state"] == "seated");
  CHECK(r.err.empty());
}

TEST_CASE("design with margin and csv format") {
  const auto r = run({"design", "--margin-um", "8.5", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("field,value\n", 0) == 0);
  CHECK(r.out.find("groove.mask_opening_um,249.98") != std::string::npos);
}

TEST_CASE("design of an over-etched groove") {
  const auto r = run({"design", "--depth-um", "190"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["seating"]["protrusion_um"].get<double>() < 0.0);
}

TEST_CASE("unknown flag is a usage error with no artifacts") {
  const auto dir = scratch("unknown");
  const auto r = run({"simulate-etch", "--out", dir.string(), "--bogus"});
  CHECK(r.code == 2);
  CHECK(error_record(r)["exit"] == 2);
  CHECK(error_record(r)["error"] == "usage");
  CHECK_FALSE(fs::exists(dir));
  CHECK(r.out.empty());
}

TEST_CASE("missing subcommand and help") {
  CHECK(run({"--format", "json"}).code == 2);
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("simulate-etch") != std::string::npos);
  CHECK(run({"design", "--format", "xml"}).code == 2);
}

TEST_CASE("fit-rates and plan-etch") {
  const auto dir = scratch("fit");
  const auto fit = run({"fit-rates", "--csv", data("koh_rates.csv"), "--out", dir.string()});
  REQUIRE(fit.code == 0);
  const auto model = json::parse(fit.out);
  CHECK(model["activation_K"].get<double>() == doctest::Approx(4729.4994).epsilon(1e-7));
  CHECK(model["residual"].get<double>() < 1e-12);
  REQUIRE(fs::exists(dir / "rate_model.json"));

  const auto plan = run({"plan-etch", "--model", (dir / "rate_model.json").string(), "--target-um",
                         "170.753", "--temp-c", "70"});
  REQUIRE(plan.code == 0);
  CHECK(json::parse(plan.out)["plan"]["duration_min"].get<double>() == doctest::Approx(182.387).epsilon(1e-5));
  fs::remove_all(dir);
}

TEST_CASE("unreachable plan exits 1 with a machine-readable record") {
  const auto r = run({"plan-etch", "--target-um", "200", "--mask-um", "250"});
  CHECK(r.code == 1);
  const auto e = error_record(r);
  CHECK(e["error"] == "domain");
  CHECK(e["message"].get<std::string>().find("176.78") != std::string::npos);
}

TEST_CASE("missing input file exits 2") {
  const auto r = run({"fit-rates", "--csv", "/nonexistent/rates.csv"});
  CHECK(r.code == 2);
  CHECK(error_record(r)["error"] == "config");
}

TEST_CASE("simulate-etch writes its artifacts deterministically") {
  const auto a = scratch("sim_a");
  const auto b = scratch("sim_b");
  const auto ra = run({"simulate-etch", "--config", data("etch_default.json"), "--out", a.string()});
  const auto rb = run({"simulate-etch", "--config", data("etch_default.json"), "--out", b.string()});
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  CHECK(ra.out == rb.out);
  for (const char* name : {"profile.csv", "profile.svg", "metrics.json"}) {
    REQUIRE(fs::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }
  CHECK(slurp(a / "profile.csv").rfind("timestamp_min,x_um,depth_um\n", 0) == 0);
  CHECK(slurp(a / "profile.svg").find("<!-- generator: vgroove") != std::string::npos);
  const auto m = json::parse(slurp(a / "metrics.json"));
  CHECK(m["final"]["depth_um"].get<double>() == doctest::Approx(176.78).epsilon(0.01));
  CHECK(m["converged"] == true);
  // Nothing else lands in the output directory.
  CHECK(std::distance(fs::directory_iterator(a), fs::directory_iterator{}) == 3);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("simulate-etch overrides and invalid configs") {
  const auto r = run({"simulate-etch", "--mask-um", "120", "--time-min", "300"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["final"]["depth_um"].get<double>() == doctest::Approx(120.0 / std::sqrt(2.0)).epsilon(0.01));
  const auto bad = run({"simulate-etch", "--dt-min", "5"});
  CHECK(bad.code == 2);
  CHECK(error_record(bad)["error"] == "config");
  const auto csv = run({"simulate-etch", "--time-min", "2", "--format", "csv"});
  CHECK(csv.out.rfind("timestamp_min,x_um,depth_um\n", 0) == 0);
  const auto temp = run({"simulate-etch", "--temp-c", "90", "--time-min", "10"});
  REQUIRE(temp.code == 0);
  CHECK(json::parse(temp.out)["config"]["rate_100_um_min"].get<double>() == doctest::Approx(2.0));
}

TEST_CASE("trace writes the ray diagram and budget") {
  const auto dir = scratch("trace");
  const auto r = run({"trace", "--config", data("platform.json"), "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["ray"]["elevation_deg"].get<double>() == doctest::Approx(70.53).epsilon(1e-4));
  CHECK(j["budget"]["predicted_reflectivity"].get<double>() == doctest::Approx(0.70).epsilon(0.05));
  CHECK(fs::exists(dir / "trace.svg"));
  CHECK(json::parse(slurp(dir / "budget.json")) == j);
  fs::remove_all(dir);
}

TEST_CASE("budget fits the capture factor") {
  const auto r = run({"budget", "--csv", data("al_samples.csv"), "--mirror", "al"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["fit"]["capture_factor"].get<double>() == doctest::Approx(0.78162).epsilon(1e-4));
  for (const auto& s : j["samples"]) {
    CHECK(std::abs(s["relative_error"].get<double>()) < 0.05);
  }
  CHECK(run({"budget", "--mirror", "cu"}).code == 2);
}

TEST_CASE("recipe validate exit codes") {
  CHECK(run({"recipe", "validate", data("reference_recipe.json")}).code == 0);
  CHECK(run({"recipe", "validate", data("reference_recipe_80g.json")}).code == 0);

  const auto dir = scratch("recipe");
  fs::create_directories(dir);
  auto doc = json::parse(slurp(data("reference_recipe.json")));
  doc["bond"]["counterpoise_g"] = 60;
  std::ofstream(dir / "bad.json") << doc.dump();
  const auto bad = run({"recipe", "validate", (dir / "bad.json").string()});
  CHECK(bad.code == 1);
  CHECK(json::parse(bad.out)["ok"] == false);

  std::ofstream(dir / "broken.json") << "{\"steps\": [";
  CHECK(run({"recipe", "validate", (dir / "broken.json").string()}).code == 2);

  const auto refused = run({"recipe", "traveler", (dir / "bad.json").string()});
  CHECK(refused.code == 1);
  CHECK(error_record(refused)["error"] == "validation");
  const auto forced = run({"recipe", "traveler", (dir / "bad.json").string(), "--force"});
  CHECK(forced.code == 0);
  CHECK(forced.out.find("FORCED") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("recipe traveler") {
  const auto r = run({"recipe", "traveler", data("reference_recipe.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("# Process traveler") == 0);
  CHECK(r.out.find("reference_recipe.json#/steps/5") != std::string::npos);
}

TEST_CASE("reproduce passes every row") {
  const auto r = run({"reproduce"});
  CHECK(r.code == 0);
  for (const char* row : {"d=172 um", "rate@90C=2.0 um/min", "Al reflectivity ~70%"}) {
    CHECK(r.out.find(row) != std::string::npos);
  }
  CHECK(r.out.find("FAIL") == std::string::npos);
  const auto j = run({"reproduce", "--format", "json"});
  CHECK(json::parse(j.out)["passed"] == true);
  CHECK(j.out == run({"reproduce", "--format", "json"}).out);
}

TEST_CASE("reproduce reports failing rows") {
  const auto dir = scratch("repro");
  fs::create_directories(dir);
  auto ex = json::parse(slurp(data("expectations.jsonc")), nullptr, true, true);
  for (auto& row : ex["rows"]) {
    if (row["id"] == "design.depth") {
      row["target"] = 150;
    }
  }
  std::ofstream(dir / "ex.json") << ex.dump();
  const auto r = run({"reproduce", "--expectations", (dir / "ex.json").string()});
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL") != std::string::npos);
  fs::remove_all(dir);
}

}  // TEST_SUITE
