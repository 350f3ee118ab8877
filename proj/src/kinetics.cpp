#include "vgroove/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vgroove/error.hpp"
#include "vgroove/geometry.hpp"
#include "vgroove/text.hpp"

namespace vgroove {

namespace {

constexpr double kBoltzmannEv = 8.617333262e-5;  // eV/K
constexpr double kFeasibilityTolerance = 1e-9;

}  // namespace

Temperature Temperature::celsius(double c) { return kelvin(c + kCelsiusOffset); }

Temperature Temperature::kelvin(double k) {
  if (!(k > 0.0)) {
    throw DomainError("temperature must be above absolute zero");
  }
  return Temperature(k);
}

bool ValidityWindow::contains(Temperature t) const {
  const double c = t.as_celsius();
  return c >= min_c && c <= max_c;
}

double EtchRateModel::activation_ev() const { return activation_k * kBoltzmannEv; }

EtchRateModel fit_arrhenius(const std::vector<RatePoint>& points) {
  if (points.size() < 2) {
    throw FitError("Arrhenius fit needs at least two points");
  }
  // Centered sums keep the normal equations well conditioned: 1/T varies by
  // only ~15% over the KOH working range.
  const double n = static_cast<double>(points.size());
  double mean_u = 0.0;
  double mean_y = 0.0;
  for (const auto& p : points) {
    if (!(p.rate_um_min > 0.0)) {
      throw FitError("etch rates must be positive");
    }
    mean_u += 1.0 / p.temperature.as_kelvin();
    mean_y += std::log(p.rate_um_min);
  }
  mean_u /= n;
  mean_y /= n;

  double suu = 0.0;
  double suy = 0.0;
  for (const auto& p : points) {
    const double du = 1.0 / p.temperature.as_kelvin() - mean_u;
    suu += du * du;
    suy += du * (std::log(p.rate_um_min) - mean_y);
  }
  if (!(suu > 0.0) || suu < 1e-30) {
    throw FitError("Arrhenius fit needs at least two distinct temperatures");
  }

  const double slope = suy / suu;  // = -Ta
  EtchRateModel m;
  m.activation_k = -slope;
  m.prefactor_um_min = std::exp(mean_y - slope * mean_u);
  m.source_points = points;

  double ss = 0.0;
  for (const auto& p : points) {
    const double pred = mean_y + slope * (1.0 / p.temperature.as_kelvin() - mean_u);
    const double e = std::log(p.rate_um_min) - pred;
    ss += e * e;
  }
  m.fit_residual = std::sqrt(ss / n);

  if (!(m.activation_k > 0.0)) {
    throw FitError("fitted activation temperature is not positive; rate must increase with temperature");
  }
  return m;
}

EtchRateModel default_koh_model() {
  auto m = fit_arrhenius({
      {Temperature::celsius(40.0), 0.25},
      {Temperature::celsius(90.0), 2.0},
  });
  m.assumptions = {
      "40 wt% KOH on (100) silicon",
      "0.25 um/min assigned to 40 C and 2.0 um/min to 90 C (range endpoints paired min-with-min)",
      "Arrhenius form in absolute temperature",
  };
  return m;
}

RateEstimate rate_at(const EtchRateModel& model, Temperature t) {
  RateEstimate out;
  out.rate_um_min = model.prefactor_um_min * std::exp(-model.activation_k / t.as_kelvin());
  if (!model.window.contains(t)) {
    std::ostringstream msg;
    msg << "extrapolating: " << format_fixed(t.as_celsius(), 1) << " C is outside the "
        << format_fixed(model.window.min_c, 0) << "-" << format_fixed(model.window.max_c, 0)
        << " C validity window";
    out.warning = msg.str();
  }
  return out;
}

EtchPlan plan_etch(const EtchRateModel& model, double target_depth_um, Temperature t,
                   double mask_opening_um) {
  if (!(target_depth_um >= 0.0)) {
    throw DomainError("target depth must be non-negative");
  }
  const double limit = self_limit_depth(mask_opening_um);
  if (target_depth_um > limit * (1.0 + kFeasibilityTolerance)) {
    throw UnreachableDepthError("unreachable depth: target " + format_fixed(target_depth_um, 2) +
                      " um exceeds the self-limit " + format_fixed(limit, 2) +
                      " um of a " + format_fixed(mask_opening_um, 2) + " um opening",
                                limit);
  }
  const auto estimate = rate_at(model, t);
  EtchPlan plan;
  plan.rate_um_min = estimate.rate_um_min;
  plan.duration_min = target_depth_um / estimate.rate_um_min;
  plan.self_limit_um = limit;
  plan.warning = estimate.warning;
  return plan;
}

double depth_after(const EtchRateModel& model, Temperature t, double duration_min,
                   double mask_opening_um) {
  if (!(duration_min >= 0.0)) {
    throw DomainError("etch duration must be non-negative");
  }
  const double limit = self_limit_depth(mask_opening_um);
  return std::min(rate_at(model, t).rate_um_min * duration_min, limit);
}

std::vector<RatePoint> read_rate_csv(std::istream& in) {
  const auto rows = read_csv(in, {"temp_c", "rate_um_min"});
  std::vector<RatePoint> points;
  points.reserve(rows.size());
  for (const auto& row : rows) {
    points.push_back({Temperature::celsius(row[0]), row[1]});
  }
  return points;
}

}  // namespace vgroove
