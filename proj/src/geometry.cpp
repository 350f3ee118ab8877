#include "vgroove/geometry.hpp"

#include <algorithm>
#include <numbers>

#include "vgroove/error.hpp"

namespace vgroove {

namespace {

constexpr double kDepthTolerance = 1e-9;

struct WallLine {
  // Passes through the mask edge (edge_x, 0) and the virtual vertex (0, vertex).
  double edge_x;
  double vertex_depth;

  double distance(const Point2& p) const {
    // Line: depth = vertex_depth * (1 - x / edge_x)
    //   => vertex_depth * x + edge_x * depth - edge_x * vertex_depth = 0
    const double a = vertex_depth;
    const double b = edge_x;
    const double c = -edge_x * vertex_depth;
    return std::abs(a * p.x_um + b * p.depth_um + c) / std::hypot(a, b);
  }

  Point2 foot(const Point2& p) const {
    const double a = vertex_depth;
    const double b = edge_x;
    const double c = -edge_x * vertex_depth;
    const double s = (a * p.x_um + b * p.depth_um + c) / (a * a + b * b);
    return {p.x_um - a * s, p.depth_um - b * s};
  }
};

}  // namespace

double CrystalAngle::degrees() const {
  return theta_ * 180.0 / std::numbers::pi;
}

double CrystalAngle::from_normal() const {
  return std::numbers::pi / 2.0 - theta_;
}

void FiberSpec::validate() const {
  if (!(radius_um > 0.0)) {
    throw DomainError("fiber radius must be positive");
  }
  if (!(core_radius_um > 0.0) || core_radius_um > radius_um) {
    throw DomainError("fiber core radius must be in (0, radius]");
  }
  if (!(numerical_aperture > 0.0 && numerical_aperture < 1.0)) {
    throw DomainError("numerical aperture must be in (0, 1)");
  }
  if (!(wavelength_nm > 0.0)) {
    throw DomainError("wavelength must be positive");
  }
}

double GrooveDesign::vertex_depth_um() const {
  return self_limit_depth(mask_opening_um, wall_angle);
}

bool GrooveDesign::truncated() const {
  return depth_um < vertex_depth_um() * (1.0 - kDepthTolerance);
}

void GrooveDesign::validate() const {
  if (!(depth_um > 0.0)) {
    throw DomainError("groove depth must be positive");
  }
  if (!(mask_opening_um > 0.0)) {
    throw DomainError("mask opening must be positive");
  }
  if (depth_um > vertex_depth_um() * (1.0 + kDepthTolerance)) {
    throw DomainError("groove depth exceeds the self-limit of its mask opening");
  }
}

std::string_view to_string(SeatingState state) {
  switch (state) {
    case SeatingState::seated:
      return "seated";
    case SeatingState::on_floor:
      return "on_floor";
    case SeatingState::rides_on_rim:
      return "rides_on_rim";
  }
  return "unknown";
}

double seat_clearance(const FiberSpec& fiber, CrystalAngle angle) {
  if (!(fiber.radius_um > 0.0)) {
    throw DomainError("fiber radius must be positive");
  }
  const double cos_t = std::cos(angle.radians());
  return fiber.radius_um * (1.0 - cos_t) / cos_t;
}

double seat_depth(const FiberSpec& fiber, CrystalAngle angle) {
  return 2.0 * fiber.radius_um + seat_clearance(fiber, angle);
}

double opening_width(double depth_um, CrystalAngle angle) {
  if (!(depth_um > 0.0)) {
    throw DomainError("depth must be positive");
  }
  return 2.0 * depth_um / std::tan(angle.radians());
}

double self_limit_depth(double mask_opening_um, CrystalAngle angle) {
  if (!(mask_opening_um > 0.0)) {
    throw DomainError("mask opening must be positive");
  }
  return 0.5 * mask_opening_um * std::tan(angle.radians());
}

GrooveDesign design_groove(const FiberSpec& fiber, double margin_um) {
  if (!(margin_um >= 0.0)) {
    throw DomainError("mask margin must be non-negative");
  }
  GrooveDesign g;
  g.depth_um = seat_depth(fiber, g.wall_angle);
  g.mask_opening_um = opening_width(g.depth_um, g.wall_angle) + margin_um;
  g.clearance_um = seat_clearance(fiber, g.wall_angle);
  g.margin_um = margin_um;
  return g;
}

GrooveDesign groove_from_profile(double mask_opening_um, double depth_um) {
  GrooveDesign g;
  g.mask_opening_um = mask_opening_um;
  g.depth_um = depth_um;
  g.validate();
  return g;
}

SeatingResult fiber_seating(const GrooveDesign& groove, const FiberSpec& fiber) {
  if (!(fiber.radius_um > 0.0)) {
    throw DomainError("fiber radius must be positive");
  }
  groove.validate();

  const double r = fiber.radius_um;
  const double half = 0.5 * groove.mask_opening_um;
  const double vertex = groove.vertex_depth_um();
  const double cos_t = std::cos(groove.wall_angle.radians());
  const WallLine left{-half, vertex};
  const WallLine right{half, vertex};

  SeatingResult out;

  // Tangent to both walls: center sits r / sin(90 - t) above the vertex.
  Point2 center{0.0, vertex - r / cos_t};
  Point2 contact_l = left.foot(center);
  Point2 contact_r = right.foot(center);

  if (contact_r.depth_um < 0.0) {
    // Wall tangency would be above the mask plane; the fiber perches on the
    // two mask edges instead.
    out.state = SeatingState::rides_on_rim;
    center.depth_um = -std::sqrt(std::max(0.0, r * r - half * half));
    contact_l = {-half, 0.0};
    contact_r = {half, 0.0};
  }

  if (center.depth_um + r > groove.depth_um) {
    out.state = SeatingState::on_floor;
    center.depth_um = groove.depth_um - r;
    out.contacts = {Point2{0.0, groove.depth_um}};
  } else {
    out.contacts = {contact_l, contact_r};
  }

  out.center = center;
  out.contact_height_um = groove.depth_um - center.depth_um;
  out.protrusion_um = r - center.depth_um;
  out.left_wall_residual_um = std::abs(left.distance(center) - r);
  out.right_wall_residual_um = std::abs(right.distance(center) - r);
  return out;
}

}  // namespace vgroove
