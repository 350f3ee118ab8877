#pragma once

#include <complex>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "vgroove/geometry.hpp"

namespace vgroove {

struct OpticalMaterial {
  std::string name;
  double n = 1.0;  // real part of the complex index
  double k = 0.0;  // extinction coefficient
  double at_wavelength_nm = 633.0;

  std::complex<double> index() const { return {n, k}; }
  void validate() const;
};

// Tabulated room-temperature constants at 633 nm (Palik / Rakic). Editable
// through the platform config.
OpticalMaterial silicon_633nm();
OpticalMaterial aluminum_633nm();

enum class Polarization { s, p, unpolarized };

// How RMS height is derived from the measured arithmetic roughness.
enum class RoughnessModel {
  rms_equals_ra,  // sigma = Ra
  sinusoidal,     // sigma = pi / (2 sqrt 2) Ra ~ 1.11 Ra
  gaussian,       // sigma = sqrt(pi / 2) Ra ~ 1.25 Ra
};

double rms_from_ra(double ra_nm, RoughnessModel model);

// Extent of the mirror facet along its slant, measured from where the beam
// axis strikes it.
struct FacetExtent {
  double below_um = 0.0;
  double above_um = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  double dot(Vec3 b) const { return x * b.x + y * b.y + z * b.z; }
  double norm() const;
};

// Groove-end micro-mirror: a (111) facet rising from the groove bottom
// toward the surface. x runs along the fiber axis, z toward the wafer normal.
struct MirrorSpec {
  OpticalMaterial material = silicon_633nm();
  CrystalAngle tilt;
  double roughness_ra_nm = 4.1;
  RoughnessModel roughness_model = RoughnessModel::rms_equals_ra;
  double coating_thickness_nm = 0.0;  // 0 for bare silicon
  Vec3 anchor{};                      // any point on the facet plane
  std::optional<FacetExtent> extent;

  // Unit normal on the reflecting face (toward the incoming fiber beam).
  Vec3 normal() const;
  double roughness_rms_nm() const { return rms_from_ra(roughness_ra_nm, roughness_model); }
  void validate() const;
};

MirrorSpec bare_silicon_mirror();
MirrorSpec aluminum_mirror();

struct Ray {
  Vec3 origin;
  Vec3 direction{1.0, 0.0, 0.0};
  double power_uw = 1.0;
  double wavelength_nm = 632.0;
};

double fresnel_reflectance(const OpticalMaterial& material, double incidence_rad,
                           Polarization polarization = Polarization::unpolarized);

// Fraction of specular power lost to roughness scatter,
// 1 - exp(-(4 pi sigma cos i / lambda)^2).
double tis_scatter_loss(double roughness_rms_nm, double incidence_rad, double wavelength_nm);

struct ReflectedRay {
  Ray ray;
  Vec3 hit;
  double incidence_rad = 0.0;
  double fresnel = 0.0;
  double scatter_loss = 0.0;
};

// Mirror reflection d' = d - 2 (d.n) n with Fresnel and scatter attenuation.
// Throws DomainError when the ray is parallel to or receding from the facet.
ReflectedRay reflect_ray(const Ray& ray, const MirrorSpec& mirror,
                         Polarization polarization = Polarization::unpolarized);

struct BeamFootprint {
  double major_axis_um = 0.0;
  double minor_axis_um = 0.0;
  Vec3 centroid_direction{1.0, 0.0, 0.0};

  double area_um2() const;
};

struct FootprintReport {
  BeamFootprint fiber_face;
  BeamFootprint on_mirror;
  BeamFootprint at_detector;
  double clipped_fraction = 0.0;
  std::optional<std::string> warning;
};

// Emission cone of half-angle asin(NA) from the core disk, projected onto
// the tilted facet after `path_length_um` and onto a horizontal detector
// `detector_height_um` above the hit point.
FootprintReport beam_footprint(const FiberSpec& fiber, double path_length_um,
                               const MirrorSpec& mirror, double detector_height_um = 0.0);

struct PowerBudget {
  double input_power_uw = 0.0;
  double fresnel_factor = 0.0;
  double scatter_factor = 0.0;
  double capture_factor = 0.0;
  double predicted_output_uw = 0.0;
  double predicted_reflectivity = 0.0;

  // Where the rest of the input went.
  double absorbed_uw = 0.0;
  double scattered_uw = 0.0;
  double uncaptured_uw = 0.0;

  double incidence_rad = 0.0;
};

PowerBudget power_budget(const FiberSpec& fiber, const MirrorSpec& mirror, double capture_factor,
                         double input_power_uw,
                         Polarization polarization = Polarization::unpolarized);

struct PowerMeasurement {
  double p1_uw = 0.0;
  double p2_uw = 0.0;
};

struct CaptureFit {
  double capture_factor = 0.0;
  double physical_factor = 0.0;  // fresnel * scatter
  std::vector<double> residuals_uw;  // measured P2 - predicted P2
  double rms_residual_uw = 0.0;
};

// Scalar least squares for the detector/coupling factor. Throws
// ModelDeficitError when the measurements need a factor above 1.
CaptureFit fit_capture_factor(const std::vector<PowerMeasurement>& measurements,
                              const MirrorSpec& mirror, const FiberSpec& fiber = {},
                              Polarization polarization = Polarization::unpolarized);

std::vector<PowerMeasurement> read_power_csv(std::istream& in);

}  // namespace vgroove
