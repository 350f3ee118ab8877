#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace vgroove {

// Angle between the (100) surface and the (111) sidewall planes of silicon.
// Kept exact as arctan(sqrt 2); only reports round it.
class CrystalAngle {
 public:
  CrystalAngle() = default;

  static CrystalAngle silicon_111() { return CrystalAngle{}; }

  double radians() const { return theta_; }
  double degrees() const;

  // Complement measured from the wafer normal (35.26 deg for silicon).
  double from_normal() const;

 private:
  double theta_ = std::atan(std::sqrt(2.0));
};

struct FiberSpec {
  double radius_um = 62.5;         // bare-fiber (cladding) radius
  double core_radius_um = 31.25;   // 62.5/125 multimode core
  double numerical_aperture = 0.275;
  double wavelength_nm = 632.0;

  // Throws DomainError when a field is out of range.
  void validate() const;
};

// Cross-section point; depth is positive below the wafer surface.
struct Point2 {
  double x_um = 0.0;
  double depth_um = 0.0;
};

struct GrooveDesign {
  double mask_opening_um = 0.0;
  double depth_um = 0.0;
  CrystalAngle wall_angle;
  double clearance_um = 0.0;  // gap term x of the seating relation
  double margin_um = 0.0;

  // Depth at which the two (111) walls meet under this opening.
  double vertex_depth_um() const;

  // True when a flat (100) floor remains (etch stopped before the walls met).
  bool truncated() const;

  void validate() const;
};

enum class SeatingState {
  seated,        // cradled by both sidewalls
  on_floor,      // rests on the (100) floor of a truncated groove
  rides_on_rim,  // tangency with the walls would lie above the mask plane
};

std::string_view to_string(SeatingState state);

struct SeatingResult {
  SeatingState state = SeatingState::seated;
  Point2 center;
  double contact_height_um = 0.0;  // fiber center above the groove bottom
  double protrusion_um = 0.0;      // fiber top above the wafer surface; < 0 recessed
  std::vector<Point2> contacts;

  // |distance(center, wall) - r| for the left and right walls.
  double left_wall_residual_um = 0.0;
  double right_wall_residual_um = 0.0;
};

// Minimum depth that leaves the top of the fiber flush with the surface,
// d = 2r + r(1 - cos t) sec t.
double seat_depth(const FiberSpec& fiber, CrystalAngle angle = {});

// x = r(1 - cos t) sec t.
double seat_clearance(const FiberSpec& fiber, CrystalAngle angle = {});

// Mask opening of a V whose walls meet at `depth_um`: w = 2d cot t.
double opening_width(double depth_um, CrystalAngle angle = {});

// Depth at which etching self-terminates under an opening: (w/2) tan t.
double self_limit_depth(double mask_opening_um, CrystalAngle angle = {});

GrooveDesign design_groove(const FiberSpec& fiber, double margin_um = 0.0);

// Circle/wall contact solve for a fiber dropped into the groove
// cross-section. Over-etched (deeper) Vs and truncated trapezoids are both
// supported.
SeatingResult fiber_seating(const GrooveDesign& groove, const FiberSpec& fiber);

// Groove cut at an arbitrary depth under a given opening, as produced by an
// etch simulation or a measured profile.
GrooveDesign groove_from_profile(double mask_opening_um, double depth_um);

}  // namespace vgroove
