#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "vgroove/error.hpp"
#include "vgroove/kinetics.hpp"

using namespace vgroove;

namespace {

double rate(const EtchRateModel& m, double c) { return rate_at(m, Temperature::celsius(c)).rate_um_min; }

}  // namespace

TEST_SUITE("kinetics") {

TEST_CASE("default model hits both quoted endpoints") {
  const auto m = default_koh_model();
  CHECK(std::abs(rate(m, 90.0) - 2.0) / 2.0 < 1e-12);
  CHECK(std::abs(rate(m, 40.0) - 0.25) / 0.25 < 1e-12);
  CHECK(m.fit_residual < 1e-12);
  CHECK_FALSE(m.assumptions.empty());
}

TEST_CASE("default model matches the two-point oracle") {
  const auto o = oracle::two_point(313.15, 0.25, 363.15, 2.0);
  const auto m = default_koh_model();
  CHECK(m.activation_k == doctest::Approx(o.activation_k).epsilon(1e-12));
  CHECK(m.prefactor_um_min == doctest::Approx(o.prefactor).epsilon(1e-10));
  CHECK(m.activation_ev() == doctest::Approx(o.activation_k * 8.617333262e-5).epsilon(1e-9));
  for (double c = 30.0; c <= 100.0; c += 3.5) {
    CHECK(rate(m, c) == doctest::Approx(o.rate(c + 273.15)).epsilon(1e-11));
  }
  CHECK(rate(m, 70.0) == doctest::Approx(0.9362140940171743).epsilon(1e-12));
}

TEST_CASE("rate is strictly increasing over the window") {
  const auto m = default_koh_model();
  double prev = rate(m, 30.0);
  for (int c = 31; c <= 100; ++c) {
    const double r = rate(m, c);
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("least squares recovers synthetic Arrhenius data") {
  const oracle::Arrhenius truth{6000.0, 4.0e7};
  std::vector<RatePoint> pts;
  for (double c : {35.0, 50.0, 65.0, 80.0, 95.0}) {
    pts.push_back({Temperature::celsius(c), truth.rate(c + 273.15)});
  }
  const auto m = fit_arrhenius(pts);
  CHECK(m.activation_k == doctest::Approx(6000.0).epsilon(1e-10));
  CHECK(m.prefactor_um_min == doctest::Approx(4.0e7).epsilon(1e-9));
  CHECK(m.fit_residual < 1e-12);
  CHECK(m.source_points.size() == 5);
}

TEST_CASE("noisy data leaves a residual") {
  std::vector<RatePoint> pts{{Temperature::celsius(40), 0.25},
                             {Temperature::celsius(60), 0.70},
                             {Temperature::celsius(90), 2.0}};
  const auto m = fit_arrhenius(pts);
  CHECK(m.fit_residual > 0.0);
  CHECK(m.activation_k > 0.0);
}

TEST_CASE("fit rejects degenerate inputs") {
  CHECK_THROWS_AS(fit_arrhenius({{Temperature::celsius(40), 0.25}}), FitError);
  CHECK_THROWS_AS(fit_arrhenius({{Temperature::celsius(40), 0.25}, {Temperature::celsius(90), -1.0}}),
                  FitError);
  CHECK_THROWS_AS(fit_arrhenius({{Temperature::celsius(40), 0.25}, {Temperature::celsius(40), 0.3}}),
                  FitError);
  // Rate falling with temperature implies a negative activation energy.
  CHECK_THROWS_AS(fit_arrhenius({{Temperature::celsius(40), 2.0}, {Temperature::celsius(90), 0.25}}),
                  FitError);
}

TEST_CASE("temperatures below absolute zero are rejected") {
  CHECK_THROWS_AS(Temperature::celsius(-300.0), DomainError);
  CHECK_THROWS_AS(Temperature::kelvin(0.0), DomainError);
  CHECK(Temperature::celsius(25.0).as_kelvin() == doctest::Approx(298.15));
  CHECK(Temperature::celsius(20.0) < Temperature::celsius(21.0));
}

TEST_CASE("extrapolation warns but still answers") {
  const auto m = default_koh_model();
  CHECK_FALSE(rate_at(m, Temperature::celsius(70.0)).warning.has_value());
  const auto hot = rate_at(m, Temperature::celsius(110.0));
  CHECK(hot.warning.has_value());
  CHECK(hot.rate_um_min > 2.0);
  CHECK(rate_at(m, Temperature::celsius(20.0)).warning.has_value());
}

TEST_CASE("planning the groove etch at 70 C") {
  const auto m = default_koh_model();
  const auto plan = plan_etch(m, 170.753, Temperature::celsius(70.0), 250.0);
  CHECK(plan.duration_min == doctest::Approx(170.753 / 0.9362140940171743).epsilon(1e-12));
  CHECK(plan.duration_min == doctest::Approx(182.387).epsilon(1e-5));
  CHECK(plan.self_limit_um == doctest::Approx(250.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK_FALSE(plan.warning.has_value());
}

TEST_CASE("targets beyond the self-limit are unreachable") {
  const auto m = default_koh_model();
  try {
    plan_etch(m, 200.0, Temperature::celsius(70.0), 250.0);
    FAIL("expected UnreachableDepthError");
  } catch (const UnreachableDepthError& e) {
    CHECK(e.limit_um() == doctest::Approx(176.7767).epsilon(1e-6));
  }
  // The limit itself, or its rounded value, is reachable.
  CHECK_NOTHROW(plan_etch(m, 250.0 / std::sqrt(2.0), Temperature::celsius(70.0), 250.0));
  CHECK_THROWS_AS(plan_etch(m, 176.8, Temperature::celsius(70.0), 250.0), UnreachableDepthError);
  CHECK_THROWS_AS(plan_etch(m, -1.0, Temperature::celsius(70.0), 250.0), DomainError);
}

TEST_CASE("depth after a duration is linear then clamps") {
  const auto m = default_koh_model();
  const auto t = Temperature::celsius(70.0);
  const double r = rate(m, 70.0);
  CHECK(depth_after(m, t, 100.0, 250.0) == doctest::Approx(100.0 * r).epsilon(1e-14));
  CHECK(depth_after(m, t, 2.0 * 80.0, 250.0) == doctest::Approx(2.0 * depth_after(m, t, 80.0, 250.0)));
  CHECK(depth_after(m, t, 1000.0, 250.0) == doctest::Approx(176.7767).epsilon(1e-6));
  // Round trip with the planner.
  const auto plan = plan_etch(m, 120.0, t, 250.0);
  CHECK(depth_after(m, t, plan.duration_min, 250.0) == doctest::Approx(120.0).epsilon(1e-12));
}

TEST_CASE("rate CSV parsing") {
  std::istringstream good("temp_c,rate_um_min\n40,0.25\n\n90,2.0\n");
  const auto pts = read_rate_csv(good);
  REQUIRE(pts.size() == 2);
  CHECK(pts[1].temperature.as_celsius() == doctest::Approx(90.0));
  const auto m = fit_arrhenius(pts);
  CHECK(m.activation_k == doctest::Approx(default_koh_model().activation_k).epsilon(1e-12));

  std::istringstream bad_header("temperature,rate\n40,0.25\n");
  CHECK_THROWS_AS(read_rate_csv(bad_header), ConfigError);
  std::istringstream bad_value("temp_c,rate_um_min\n40,abc\n");
  try {
    read_rate_csv(bad_value);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("fit is scale-consistent") {
  std::vector<RatePoint> base{{Temperature::celsius(40), 0.25},
                              {Temperature::celsius(65), 0.81},
                              {Temperature::celsius(90), 2.0}};
  const auto m = fit_arrhenius(base);
  for (double c : {0.01, 3.0, 250.0}) {
    auto scaled = base;
    for (auto& p : scaled) {
      p.rate_um_min *= c;
    }
    const auto ms = fit_arrhenius(scaled);
    CHECK(std::abs(ms.activation_k - m.activation_k) / m.activation_k < 1e-9);
    CHECK(ms.prefactor_um_min == doctest::Approx(c * m.prefactor_um_min).epsilon(1e-9));
  }
}

TEST_CASE("three collinear points fit exactly") {
  const auto o = oracle::two_point(313.15, 0.25, 363.15, 2.0);
  std::vector<RatePoint> pts;
  for (double c : {40.0, 63.0, 90.0}) {
    pts.push_back({Temperature::celsius(c), o.rate(c + 273.15)});
  }
  CHECK(fit_arrhenius(pts).fit_residual < 1e-12);
}

TEST_CASE("zero duration etches nothing") {
  CHECK(depth_after(default_koh_model(), Temperature::celsius(70.0), 0.0, 250.0) == 0.0);
  CHECK_THROWS_AS(depth_after(default_koh_model(), Temperature::celsius(70.0), -1.0, 250.0), DomainError);
}

TEST_CASE("plan and depth_after invert each other below the limit") {
  const auto m = default_koh_model();
  for (double c : {35.0, 55.0, 70.0, 95.0}) {
    for (double d = 5.0; d < 176.0; d += 17.0) {
      const auto t = Temperature::celsius(c);
      const double back = depth_after(m, t, plan_etch(m, d, t, 250.0).duration_min, 250.0);
      CHECK(std::abs(back - d) / d < 1e-3);
    }
  }
}

}  // TEST_SUITE
