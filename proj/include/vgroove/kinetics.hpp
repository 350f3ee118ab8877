#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace vgroove {

inline constexpr double kCelsiusOffset = 273.15;

class Temperature {
 public:
  static Temperature celsius(double c);
  static Temperature kelvin(double k);

  double as_celsius() const { return kelvin_ - kCelsiusOffset; }
  double as_kelvin() const { return kelvin_; }

  friend auto operator<=>(const Temperature&, const Temperature&) = default;

 private:
  explicit Temperature(double k) : kelvin_(k) {}
  double kelvin_;
};

struct RatePoint {
  Temperature temperature;
  double rate_um_min;
};

// Temperature range over which a fitted model is trusted without a warning.
struct ValidityWindow {
  double min_c = 30.0;
  double max_c = 100.0;

  bool contains(Temperature t) const;
};

// rate(T) = A exp(-Ta / T), T absolute.
struct EtchRateModel {
  double prefactor_um_min = 0.0;
  double activation_k = 0.0;
  double fit_residual = 0.0;  // RMS of ln-rate residuals
  std::vector<RatePoint> source_points;
  std::vector<std::string> assumptions;
  ValidityWindow window;

  // Activation energy in eV.
  double activation_ev() const;
};

struct RateEstimate {
  double rate_um_min = 0.0;
  std::optional<std::string> warning;  // set when extrapolating
};

// Least-squares line through (1/T, ln rate). Two points fit exactly.
EtchRateModel fit_arrhenius(const std::vector<RatePoint>& points);

// 40 wt% KOH model built from the two quoted endpoints,
// 0.25 um/min at 40 C and 2.0 um/min at 90 C.
EtchRateModel default_koh_model();

RateEstimate rate_at(const EtchRateModel& model, Temperature t);

struct EtchPlan {
  double duration_min = 0.0;
  double rate_um_min = 0.0;
  double self_limit_um = 0.0;
  std::optional<std::string> warning;
};

// Time to reach `target_depth_um`. Throws UnreachableDepthError when the
// target lies below the self-limit of `mask_opening_um`.
EtchPlan plan_etch(const EtchRateModel& model, double target_depth_um,
                   Temperature t, double mask_opening_um);

double depth_after(const EtchRateModel& model, Temperature t, double duration_min,
                   double mask_opening_um);

// Parses `temp_c,rate_um_min` CSV (header required).
std::vector<RatePoint> read_rate_csv(std::istream& in);

}  // namespace vgroove
