#pragma once

#include <vector>

#include "vgroove/geometry.hpp"
#include "vgroove/kinetics.hpp"

namespace vgroove {

struct EtchConfig {
  double mask_opening_um = 250.0;
  double rate_100_um_min = 0.93;
  double anisotropy_ratio = 0.0025;  // rate_111 / rate_100
  double cell_size_um = 1.0;
  double time_step_min = 0.1;
  double total_time_min = 200.0;
  // Masked surface rendered on each side of the opening.
  double field_margin_um = 25.0;

  // Throws ConfigError on a violated invariant (including the per-step
  // advance exceeding one cell).
  void validate() const;
};

// Default cross-section run for a given opening, etching at the kinetics
// model's rate for `bath`.
EtchConfig etch_config_for(const EtchRateModel& model, Temperature bath,
                           double mask_opening_um);

struct ProfileSnapshot {
  double time_min = 0.0;
  // Exposed surface, x strictly increasing, mask plane at depth 0. Holds the
  // uniform cell grid plus every facet corner.
  std::vector<Point2> surface;
  double removed_area_um2 = 0.0;
  // Edges of the etched opening at the mask plane.
  double opening_left_um = 0.0;
  double opening_right_um = 0.0;
  // Cumulative normal advance of the (111) sidewalls.
  double wall_advance_um = 0.0;

  double depth_at(double x_um) const;
  double max_depth() const;
};

struct EtchProfile {
  EtchConfig config;
  std::vector<ProfileSnapshot> snapshots;
  bool converged = false;  // stopped on the motion threshold
  double stop_time_min = 0.0;

  std::vector<double> timestamps() const;
  // Throws LookupError when no snapshot carries `time_min`.
  const ProfileSnapshot& at(double time_min) const;
  const ProfileSnapshot& final() const { return snapshots.back(); }
};

// Advances the exposed front by per-orientation rates: (100) floor at
// rate_100, (111) facets at rate_100 * anisotropy_ratio along their normals,
// masked surface fixed. Deterministic for a given config.
EtchProfile simulate_profile(const EtchConfig& config);

struct SidewallAngles {
  double left_rad = 0.0;
  double right_rad = 0.0;

  double mean_rad() const { return 0.5 * (left_rad + right_rad); }
  double mean_deg() const;
};

// Least-squares line through the points of each sidewall.
SidewallAngles wall_angle(const EtchProfile& profile, double time_min);

struct ProfileMetrics {
  double depth_um = 0.0;
  double top_width_um = 0.0;
  double undercut_um = 0.0;  // lateral etch beyond each mask edge
};

ProfileMetrics profile_metrics(const EtchProfile& profile, double time_min);

}  // namespace vgroove
