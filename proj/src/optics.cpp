#include "vgroove/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vgroove/error.hpp"
#include "vgroove/text.hpp"

namespace vgroove {

namespace {

constexpr double kCaptureSlack = 1e-12;

// Fraction of a uniformly filled unit disk lying beyond the chord u = c.
double segment_fraction(double c) {
  if (c >= 1.0) {
    return 0.0;
  }
  if (c <= -1.0) {
    return 1.0;
  }
  return (std::acos(c) - c * std::sqrt(1.0 - c * c)) / std::numbers::pi;
}

Vec3 unit(Vec3 v) { return (1.0 / v.norm()) * v; }

}  // namespace

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

void OpticalMaterial::validate() const {
  if (!(n > 0.0)) {
    throw DomainError("refractive index real part must be positive (" + name + ")");
  }
  if (!(k >= 0.0)) {
    throw DomainError("extinction coefficient must be non-negative (" + name + ")");
  }
  if (!(at_wavelength_nm > 0.0)) {
    throw DomainError("material wavelength must be positive (" + name + ")");
  }
}

OpticalMaterial silicon_633nm() { return {"Si", 3.882, 0.019, 633.0}; }

OpticalMaterial aluminum_633nm() { return {"Al", 1.374, 7.62, 633.0}; }

double rms_from_ra(double ra_nm, RoughnessModel model) {
  switch (model) {
    case RoughnessModel::rms_equals_ra:
      return ra_nm;
    case RoughnessModel::sinusoidal:
      return ra_nm * std::numbers::pi / (2.0 * std::numbers::sqrt2);
    case RoughnessModel::gaussian:
      return ra_nm * std::sqrt(std::numbers::pi / 2.0);
  }
  return ra_nm;
}

Vec3 MirrorSpec::normal() const {
  const double t = tilt.radians();
  return {-std::sin(t), 0.0, std::cos(t)};
}

void MirrorSpec::validate() const {
  material.validate();
  if (!(roughness_ra_nm >= 0.0)) {
    throw DomainError("mirror roughness must be non-negative");
  }
  if (!(coating_thickness_nm >= 0.0)) {
    throw DomainError("coating thickness must be non-negative");
  }
}

MirrorSpec bare_silicon_mirror() {
  MirrorSpec m;
  m.material = silicon_633nm();
  return m;
}

MirrorSpec aluminum_mirror() {
  MirrorSpec m;
  m.material = aluminum_633nm();
  m.coating_thickness_nm = 100.0;
  return m;
}

double fresnel_reflectance(const OpticalMaterial& material, double incidence_rad,
                           Polarization polarization) {
  material.validate();
  if (!(incidence_rad >= 0.0 && incidence_rad < std::numbers::pi / 2.0)) {
    throw DomainError("incidence angle must be in [0, 90) degrees");
  }
  using C = std::complex<double>;
  const C n2 = material.index();
  const double cos_i = std::cos(incidence_rad);
  const double sin_i = std::sin(incidence_rad);
  // Snell with a complex index; principal root keeps Im >= 0 (decaying wave).
  const C sin_t = sin_i / n2;
  const C cos_t = std::sqrt(C(1.0) - sin_t * sin_t);

  const C rs = (cos_i - n2 * cos_t) / (cos_i + n2 * cos_t);
  const C rp = (n2 * cos_i - cos_t) / (n2 * cos_i + cos_t);
  const double r_s = std::norm(rs);
  const double r_p = std::norm(rp);
  switch (polarization) {
    case Polarization::s:
      return r_s;
    case Polarization::p:
      return r_p;
    case Polarization::unpolarized:
      break;
  }
  return 0.5 * (r_s + r_p);
}

double tis_scatter_loss(double roughness_rms_nm, double incidence_rad, double wavelength_nm) {
  if (!(wavelength_nm > 0.0)) {
    throw DomainError("wavelength must be positive");
  }
  if (!(roughness_rms_nm >= 0.0)) {
    throw DomainError("roughness must be non-negative");
  }
  const double g = 4.0 * std::numbers::pi * roughness_rms_nm * std::cos(incidence_rad) / wavelength_nm;
  return -std::expm1(-g * g);
}

ReflectedRay reflect_ray(const Ray& ray, const MirrorSpec& mirror, Polarization polarization) {
  const double len = ray.direction.norm();
  if (!(std::abs(len - 1.0) <= 1e-12)) {
    throw DomainError("ray direction must be a unit vector");
  }
  const Vec3 n = mirror.normal();
  const double dn = ray.direction.dot(n);
  if (dn >= -1e-15) {
    throw DomainError("no intersection: ray is parallel to or receding from the mirror");
  }
  const double t = (mirror.anchor - ray.origin).dot(n) / dn;
  if (t < 0.0) {
    throw DomainError("no intersection: mirror lies behind the ray origin");
  }

  ReflectedRay out;
  out.hit = ray.origin + t * ray.direction;
  out.incidence_rad = std::acos(std::min(1.0, -dn));
  out.fresnel = fresnel_reflectance(mirror.material, out.incidence_rad, polarization);
  out.scatter_loss = tis_scatter_loss(mirror.roughness_rms_nm(), out.incidence_rad, ray.wavelength_nm);
  out.ray.origin = out.hit;
  out.ray.direction = ray.direction - (2.0 * dn) * n;
  out.ray.power_uw = ray.power_uw * out.fresnel * (1.0 - out.scatter_loss);
  out.ray.wavelength_nm = ray.wavelength_nm;
  return out;
}

double BeamFootprint::area_um2() const {
  return std::numbers::pi * 0.25 * major_axis_um * minor_axis_um;
}

FootprintReport beam_footprint(const FiberSpec& fiber, double path_length_um,
                               const MirrorSpec& mirror, double detector_height_um) {
  fiber.validate();
  if (!(path_length_um >= 0.0)) {
    throw DomainError("path length must be non-negative");
  }
  if (!(detector_height_um >= 0.0)) {
    throw DomainError("detector height must be non-negative");
  }
  const double spread = std::tan(std::asin(fiber.numerical_aperture));
  const double core = 2.0 * fiber.core_radius_um;

  FootprintReport out;
  out.fiber_face = {core, core, {1.0, 0.0, 0.0}};

  Ray axis;
  axis.origin = mirror.anchor - Vec3{path_length_um, 0.0, 0.0};
  const auto hit = reflect_ray(axis, mirror);
  const Vec3 up = unit(hit.ray.direction);

  const double at_mirror = core + 2.0 * path_length_um * spread;
  out.on_mirror = {at_mirror / std::cos(hit.incidence_rad), at_mirror, up};

  const double leg = detector_height_um / up.z;
  const double at_detector = core + 2.0 * (path_length_um + leg) * spread;
  out.at_detector = {at_detector / up.z, at_detector, up};

  if (mirror.extent) {
    const double semi = 0.5 * out.on_mirror.major_axis_um;
    out.clipped_fraction = std::min(
        1.0, segment_fraction(mirror.extent->below_um / semi) +
                 segment_fraction(mirror.extent->above_um / semi));
    if (out.clipped_fraction > 0.0) {
      out.warning = "clipped footprint: " + format_fixed(100.0 * out.clipped_fraction, 2) +
                    "% of the beam misses the mirror facet";
    }
  }
  return out;
}

PowerBudget power_budget(const FiberSpec& fiber, const MirrorSpec& mirror, double capture_factor,
                         double input_power_uw, Polarization polarization) {
  if (!(capture_factor >= 0.0 && capture_factor <= 1.0)) {
    throw DomainError("capture factor must be in [0, 1]");
  }
  if (!(input_power_uw >= 0.0)) {
    throw DomainError("input power must be non-negative");
  }
  mirror.validate();

  PowerBudget b;
  b.input_power_uw = input_power_uw;
  b.incidence_rad = mirror.tilt.from_normal();
  b.fresnel_factor = fresnel_reflectance(mirror.material, b.incidence_rad, polarization);
  b.scatter_factor =
      1.0 - tis_scatter_loss(mirror.roughness_rms_nm(), b.incidence_rad, fiber.wavelength_nm);
  b.capture_factor = capture_factor;

  const double reflected = input_power_uw * b.fresnel_factor;
  const double specular = reflected * b.scatter_factor;
  b.predicted_output_uw = specular * capture_factor;
  b.predicted_reflectivity = b.fresnel_factor * b.scatter_factor * capture_factor;
  b.absorbed_uw = input_power_uw - reflected;
  b.scattered_uw = reflected - specular;
  b.uncaptured_uw = specular - b.predicted_output_uw;
  return b;
}

CaptureFit fit_capture_factor(const std::vector<PowerMeasurement>& measurements,
                              const MirrorSpec& mirror, const FiberSpec& fiber,
                              Polarization polarization) {
  if (measurements.empty()) {
    throw FitError("capture-factor fit needs at least one measurement");
  }
  const auto ideal = power_budget(fiber, mirror, 1.0, 1.0, polarization);
  const double g = ideal.fresnel_factor * ideal.scatter_factor;

  double num = 0.0;
  double den = 0.0;
  for (const auto& m : measurements) {
    if (!(m.p1_uw > 0.0) || !(m.p2_uw >= 0.0)) {
      throw FitError("measurements need P1 > 0 and P2 >= 0");
    }
    num += m.p1_uw * g * m.p2_uw;
    den += (m.p1_uw * g) * (m.p1_uw * g);
  }
  const double c = num / den;
  if (c > 1.0 + kCaptureSlack) {
    throw ModelDeficitError("model deficit: measured output needs capture factor " +
                                format_fixed(c, 4) + " > 1 for " + mirror.material.name,
                            c);
  }

  CaptureFit fit;
  fit.capture_factor = std::min(c, 1.0);
  fit.physical_factor = g;
  double ss = 0.0;
  for (const auto& m : measurements) {
    const double r = m.p2_uw - m.p1_uw * g * fit.capture_factor;
    fit.residuals_uw.push_back(r);
    ss += r * r;
  }
  fit.rms_residual_uw = std::sqrt(ss / static_cast<double>(measurements.size()));
  return fit;
}

std::vector<PowerMeasurement> read_power_csv(std::istream& in) {
  const auto rows = read_csv(in, {"p1_uw", "p2_uw"});
  std::vector<PowerMeasurement> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    out.push_back({r[0], r[1]});
  }
  return out;
}

}  // namespace vgroove
