// One line per acceptance criterion; exit status is non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "oracles.hpp"
#include "vgroove/etchsim.hpp"
#include "vgroove/geometry.hpp"
#include "vgroove/kinetics.hpp"
#include "vgroove/optics.hpp"
#include "vgroove/recipe.hpp"
#include "vgroove/reproduce.hpp"

#ifndef VGROOVE_DATA_DIR
#define VGROOVE_DATA_DIR "configs"
#endif

using namespace vgroove;

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      failures.push_back(what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const double kIncidence = M_PI / 2.0 - oracle::wall_angle();

void geometry(Check& c) {
  const auto start = Clock::now();
  std::ostringstream out, err;
  const int code = cli::run({"design", "--fiber-radius-um", "62.5"}, out, err);
  c.expect(code == 0, "design exited " + std::to_string(code));
  const auto j = nlohmann::json::parse(out.str());
  const double reported = j["groove"]["depth_um"].get<double>();
  c.expect(std::abs(reported - 172.0) <= 2.0, "depth " + fmt("%.2f", reported) + " not within 172 +/- 2");
  const double exact = seat_depth(FiberSpec{});
  const double o = oracle::flush_depth(62.5);
  c.expect(std::abs(exact - o) / o <= 1e-9, "exact depth differs from inscribed-circle oracle");
  c.expect(std::abs(exact - 170.753) < 5e-4, "exact depth " + fmt("%.6f", exact));
  const double secs = elapsed(start);
  c.expect(secs < 1.0, "runtime " + fmt("%.3f s", secs));
  c.note("d=" + fmt("%.4f", exact) + " um, oracle rel err " + fmt("%.1e", std::abs(exact - o) / o) +
         ", " + fmt("%.3f s", secs));
}

void kinetics(Check& c) {
  const auto m = default_koh_model();
  const double r90 = rate_at(m, Temperature::celsius(90.0)).rate_um_min;
  const double r40 = rate_at(m, Temperature::celsius(40.0)).rate_um_min;
  c.expect(std::abs(r90 - 2.0) / 2.0 <= 1e-12, "rate@90C " + fmt("%.15f", r90));
  c.expect(std::abs(r40 - 0.25) / 0.25 <= 1e-12, "rate@40C " + fmt("%.15f", r40));
  double prev = rate_at(m, Temperature::celsius(30.0)).rate_um_min;
  bool increasing = true;
  for (int t = 31; t <= 100; ++t) {
    const double r = rate_at(m, Temperature::celsius(t)).rate_um_min;
    increasing = increasing && std::isfinite(r) && r > prev;
    prev = r;
  }
  c.expect(increasing, "rate not strictly increasing over 30-100 C");
  c.note("rate@90C=" + fmt("%.12f", r90) + ", rate@40C=" + fmt("%.12f", r40));
}

void etch(Check& c) {
  const auto start = Clock::now();
  EtchConfig cfg;
  cfg.total_time_min = 400.0;
  const auto p = simulate_profile(cfg);
  const double secs = elapsed(start);
  const double t_end = p.final().time_min;
  const double depth = profile_metrics(p, t_end).depth_um;
  const double angle = wall_angle(p, t_end).mean_deg();
  c.expect(std::abs(depth - 176.78) / 176.78 <= 0.01, "final depth " + fmt("%.3f", depth));
  c.expect(std::abs(angle - 54.74) <= 0.5, "wall angle " + fmt("%.3f", angle));
  double worst = 0.0;
  for (const auto& s : p.snapshots) {
    const double linear = cfg.rate_100_um_min * s.time_min;
    if (linear < self_limit_depth(cfg.mask_opening_um)) {
      worst = std::max(worst, std::abs(s.max_depth() - linear));
    }
  }
  c.expect(worst <= cfg.cell_size_um, "pre-limit deviation " + fmt("%.3f um", worst));
  auto fine = cfg;
  fine.cell_size_um *= 0.5;
  fine.time_step_min *= 0.5;
  const double refined = simulate_profile(fine).final().max_depth();
  const double change = std::abs(refined - p.final().max_depth()) / p.final().max_depth();
  c.expect(change < 0.005, "refinement change " + fmt("%.4f", change));
  c.expect(secs < 30.0, "runtime " + fmt("%.3f s", secs));
  c.note("depth " + fmt("%.3f um", depth) + ", angle " + fmt("%.3f deg", angle) + ", refine " +
         fmt("%.1e", change) + ", " + fmt("%.3f s", secs));
}

void fresnel(Check& c) {
  for (const auto& m : {silicon_633nm(), aluminum_633nm()}) {
    const double hand = oracle::normal_reflectance(m.n, m.k);
    const double r = fresnel_reflectance(m, 0.0);
    c.expect(std::abs(r - hand) / hand <= 1e-9, m.name + " normal reflectance off the hand oracle");
    const double sp = std::abs(fresnel_reflectance(m, 0.0, Polarization::s) -
                               fresnel_reflectance(m, 0.0, Polarization::p));
    c.expect(sp <= 1e-12, m.name + " s/p differ by " + fmt("%.1e", sp));
    c.note(m.name + " R0=" + fmt("%.6f", r));
  }
}

void power_table(Check& c) {
  const std::vector<PowerMeasurement> al{{0.9234, 0.6602}, {1.0191, 0.7094}, {0.9531, 0.6871}};
  const FiberSpec fiber;
  const auto fit = fit_capture_factor(al, aluminum_mirror(), fiber);
  // Independent prediction: capture * R_Al(i) * (1 - TIS) * P1.
  const double g_al = 0.5 * (oracle::fresnel_s(aluminum_633nm().index(), kIncidence) +
                             oracle::fresnel_p(aluminum_633nm().index(), kIncidence));
  const double g_si = 0.5 * (oracle::fresnel_s(silicon_633nm().index(), kIncidence) +
                             oracle::fresnel_p(silicon_633nm().index(), kIncidence));
  const double x = 4.0 * M_PI * 4.1 * std::cos(kIncidence) / 632.0;
  const double keep = std::exp(-x * x);
  for (std::size_t i = 0; i < al.size(); ++i) {
    const double predicted = fit.capture_factor * g_al * keep * al[i].p1_uw;
    const double library = al[i].p2_uw - fit.residuals_uw[i];
    c.expect(std::abs(predicted - library) < 1e-12, "library prediction disagrees with oracle");
    const double err = (predicted - al[i].p2_uw) / al[i].p2_uw;
    c.expect(std::abs(err) <= 0.05, "Al sample " + std::to_string(i + 4) + " off by " + fmt("%.3f", err));
  }
  const double ratio = g_si / g_al;
  const double budget_ratio = power_budget(fiber, bare_silicon_mirror(), fit.capture_factor, 1.0).predicted_reflectivity /
                              power_budget(fiber, aluminum_mirror(), fit.capture_factor, 1.0).predicted_reflectivity;
  c.expect(std::abs(budget_ratio - ratio) < 1e-12, "budget ratio disagrees with oracle");
  const double target = 31.0 / 70.0;
  c.expect(std::abs(ratio - target) / target <= 0.15, "Si/Al ratio " + fmt("%.4f", ratio));
  c.note("capture " + fmt("%.5f", fit.capture_factor) + ", Si/Al " + fmt("%.4f", ratio) + " vs " +
         fmt("%.4f", target) + " (" + fmt("%+.1f%%", 100.0 * (ratio - target) / target) + ")");
}

void kinematics(Check& c) {
  const auto mirror = aluminum_mirror();
  Ray ray;
  ray.origin = {-50.0, 0.0, 0.0};
  const auto r = reflect_ray(ray, mirror);
  const auto& d = r.ray.direction;
  const double elevation = std::atan2(d.z, std::abs(d.x)) * 180.0 / M_PI;
  c.expect(std::abs(elevation - 70.53) <= 0.01, "elevation " + fmt("%.4f", elevation));
  const auto n = mirror.normal();
  const auto h = oracle::householder({1.0, 0.0, 0.0}, {n.x, n.y, n.z});
  c.expect(std::hypot(h.x - d.x, h.y - d.y, h.z - d.z) < 1e-14, "reflection disagrees with Householder oracle");
  const auto back = oracle::householder({d.x, d.y, d.z}, {n.x, n.y, n.z});
  const double err = std::hypot(back.x - 1.0, back.y, back.z);
  c.expect(err <= 1e-12, "double reflection error " + fmt("%.1e", err));
  c.note("elevation " + fmt("%.4f deg", elevation) + ", double-reflection err " + fmt("%.1e", err));
}

void scatter(Check& c) {
  const double loss = tis_scatter_loss(4.1, kIncidence, 632.0);
  const double x = 4.0 * M_PI * 4.1 * std::cos(kIncidence) / 632.0;
  const double hand = 1.0 - std::exp(-x * x);
  c.expect(std::abs(loss - hand) < 1e-15, "TIS differs from hand evaluation");
  c.expect(std::abs(100.0 * loss - 0.44) <= 0.02, "TIS " + fmt("%.4f%%", 100.0 * loss));
  c.expect(tis_scatter_loss(0.0, kIncidence, 632.0) == 0.0, "Ra=0 gives non-zero loss");
  c.note("TIS " + fmt("%.4f%%", 100.0 * loss));
}

void recipes(Check& c) {
  for (const BondRow row : {BondRow{48.0, 40.0}, BondRow{80.0, 20.0}}) {
    const auto doc = reference_document(row);
    const auto n = validate_flow(doc.steps).violations.size() + validate_bond(doc.bond).violations.size();
    c.expect(n == 0, fmt("%.0f g row: ", row.counterpoise_g) + std::to_string(n) + " violations");
  }
  const auto outcomes = run_mutation_suite(reference_document());
  c.expect(outcomes.size() >= 10, "only " + std::to_string(outcomes.size()) + " mutations");
  for (const auto& o : outcomes) {
    c.expect(o.violations >= 1, "mutation undetected: " + o.name);
  }
  c.note(std::to_string(outcomes.size()) + " mutations, all detected");
}

void reproduce(Check& c) {
  const auto start = Clock::now();
  std::ostringstream out, err;
  const int code = cli::run({"reproduce", "--expectations", std::string(VGROOVE_DATA_DIR) + "/expectations.jsonc"},
                            out, err);
  const double secs = elapsed(start);
  const std::string table = out.str();
  c.expect(code == 0, "reproduce exited " + std::to_string(code) + " " + err.str());
  c.expect(table.find("FAIL") == std::string::npos, "table has failing rows");
  c.expect(table.find("overall: PASS") != std::string::npos, "no overall pass line");
  for (int k = 1; k <= 8; ++k) {
    c.expect(table.find("criterion " + std::to_string(k) + ": PASS") != std::string::npos,
             "criterion " + std::to_string(k) + " missing from table");
  }
  c.expect(secs < 60.0, "runtime " + fmt("%.3f s", secs));
  c.note(fmt("%.3f s", secs));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"geometry reproduction", geometry},
      {"kinetics endpoints", kinetics},
      {"etch simulation convergence", etch},
      {"Fresnel oracle equivalence", fresnel},
      {"power table reconciliation", power_table},
      {"mirror kinematics", kinematics},
      {"scatter loss", scatter},
      {"recipe validation", recipes},
      {"reproduce end-to-end", reproduce},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool ok = c.failures.empty();
    failed += ok ? 0 : 1;
    std::string detail;
    for (const auto& s : ok ? c.notes : c.failures) {
      detail += (detail.empty() ? "" : "; ") + s;
    }
    std::printf("criterion %zu %-30s %s  %s\n", i + 1, criteria[i].first.c_str(), ok ? "PASS" : "FAIL",
                detail.c_str());
  }
  return failed == 0 ? 0 : 1;
}
