#include "vgroove/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "vgroove/text.hpp"

namespace vgroove {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kPad = 40.0;
constexpr std::size_t kMaxCurves = 12;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", std::abs(v) < 5e-4 ? 0.0 : v);
  return buf;
}

// Maps a world box onto the drawing area with a common scale on both axes.
struct Viewport {
  double x0, x1, y0, y1;  // world bounds, y increasing upward
  double scale = 1.0;

  void fit() {
    scale = std::min((kWidth - 2 * kPad) / (x1 - x0), (kHeight - 2 * kPad) / (y1 - y0));
  }
  double sx(double x) const { return kPad + (x - x0) * scale; }
  double sy(double y) const { return kHeight - kPad - (y - y0) * scale; }
};

void header(std::ostringstream& out, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<!-- generator: " << kGeneratorTag << " -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(kWidth)
      << "\" height=\"" << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << " "
      << num(kHeight) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kPad) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
      << title << "</text>\n";
}

void line(std::ostringstream& out, const Viewport& v, double xa, double ya, double xb, double yb,
          const char* stroke, double width = 1.5, const char* dash = nullptr) {
  out << "<path d=\"M " << num(v.sx(xa)) << " " << num(v.sy(ya)) << " L " << num(v.sx(xb)) << " "
      << num(v.sy(yb)) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width)
      << "\" fill=\"none\"";
  if (dash) {
    out << " stroke-dasharray=\"" << dash << "\"";
  }
  out << "/>\n";
}

void label(std::ostringstream& out, double x, double y, const std::string& text,
           const char* fill = "black") {
  out << "<text x=\"" << num(x) << "\" y=\"" << num(y)
      << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << fill << "\">" << text
      << "</text>\n";
}

}  // namespace

std::string render_profile_svg(const EtchProfile& profile, const std::vector<double>& times) {
  std::vector<const ProfileSnapshot*> chosen;
  if (times.empty()) {
    const std::size_t n = profile.snapshots.size();
    const std::size_t stride = (n + kMaxCurves - 2) / (kMaxCurves - 1);
    for (std::size_t i = 0; i < n; i += std::max<std::size_t>(1, stride)) {
      chosen.push_back(&profile.snapshots[i]);
    }
    if (chosen.back() != &profile.snapshots.back()) {
      chosen.push_back(&profile.snapshots.back());
    }
  } else {
    for (double t : times) {
      chosen.push_back(&profile.at(t));
    }
  }

  Viewport v{0.0, 0.0, 0.0, 0.0};
  double deepest = 1.0;
  for (const auto* s : chosen) {
    v.x0 = std::min(v.x0, s->surface.front().x_um);
    v.x1 = std::max(v.x1, s->surface.back().x_um);
    deepest = std::max(deepest, s->max_depth());
  }
  v.y0 = -1.1 * deepest;
  v.y1 = 0.1 * deepest;
  v.fit();

  std::ostringstream out;
  header(out, "KOH etch cross-section, mask opening " +
                  format_fixed(profile.config.mask_opening_um, 1) + " um");

  const double half = 0.5 * profile.config.mask_opening_um;
  line(out, v, v.x0, 0.0, -half, 0.0, "#444444", 4.0);
  line(out, v, half, 0.0, v.x1, 0.0, "#444444", 4.0);

  for (std::size_t i = 0; i < chosen.size(); ++i) {
    const auto* s = chosen[i];
    const char* color = kPalette[i % std::size(kPalette)];
    out << "<path d=\"";
    for (std::size_t k = 0; k < s->surface.size(); ++k) {
      out << (k == 0 ? "M " : " L ") << num(v.sx(s->surface[k].x_um)) << " "
          << num(v.sy(-s->surface[k].depth_um));
    }
    out << "\" stroke=\"" << color << "\" stroke-width=\"1.2\" fill=\"none\"/>\n";
    if (chosen.size() <= kMaxCurves) {
      label(out, kWidth - kPad - 120.0, 44.0 + 14.0 * static_cast<double>(i),
            "t = " + format_fixed(s->time_min, 1) + " min", color);
    }
  }
  label(out, kPad, kHeight - 12.0,
        "depth scale: " + format_fixed(deepest, 1) + " um max; x and depth share one scale");
  out << "</svg>\n";
  return out.str();
}

std::string render_trace_svg(const PlatformConfig& platform, const SeatingResult& seating,
                             const ReflectedRay& reflected) {
  const double depth = platform.groove.depth_um;
  const double r = platform.fiber.radius_um;
  const double z_axis = -seating.center.depth_um;
  const double tan_t = std::tan(platform.mirror.tilt.radians());
  const double lead = platform.fiber_to_mirror_um;
  const double fiber_len = std::max(150.0, 2.0 * r);

  // World frame: hit point at x = 0, wafer surface at z = 0.
  const double facet_x_bottom = (-depth - z_axis) / tan_t;
  const double facet_x_top = (0.0 - z_axis) / tan_t;
  const double z_detector = z_axis + platform.detector_height_um;
  const auto& d = reflected.ray.direction;
  const double x_detector = d.z > 0.0 ? (z_detector - z_axis) * d.x / d.z : 0.0;

  const double aperture = platform.detector_aperture_um;
  Viewport v{std::min(-lead - fiber_len, x_detector - aperture),
             std::max(facet_x_top + 0.5 * depth, x_detector + aperture), -depth - r,
             z_detector + 0.1 * platform.detector_height_um + 10.0};
  v.fit();

  std::ostringstream out;
  header(out, "Excitation path: fiber, " + platform.mirror.material.name + " micro-mirror, detector");

  line(out, v, facet_x_top, 0.0, v.x1, 0.0, "#444444", 2.0);        // wafer surface
  line(out, v, v.x0, -depth, facet_x_bottom, -depth, "#888888", 1.0, "4 3");  // groove bottom
  line(out, v, facet_x_bottom, -depth, facet_x_top, 0.0, "#555555", 3.0);     // mirror facet

  // Fiber body ending at the cleaved face.
  out << "<rect x=\"" << num(v.sx(-lead - fiber_len)) << "\" y=\"" << num(v.sy(z_axis + r))
      << "\" width=\"" << num(fiber_len * v.scale) << "\" height=\"" << num(2.0 * r * v.scale)
      << "\" fill=\"#cce5ff\" stroke=\"#1f77b4\"/>\n";

  line(out, v, -lead, z_axis, 0.0, z_axis, "#d62728", 1.5);
  line(out, v, 0.0, z_axis, x_detector, z_detector, "#d62728", 1.5);
  line(out, v, x_detector - aperture, z_detector, x_detector + aperture, z_detector, "#2ca02c", 4.0);

  label(out, v.sx(x_detector) + 8.0, v.sy(z_detector) - 8.0, "detector");
  label(out, v.sx(facet_x_top) + 6.0, v.sy(0.0) + 14.0,
        "facet " + format_fixed(platform.mirror.tilt.degrees(), 2) + " deg");
  label(out, kPad, kHeight - 12.0,
        "incidence " + format_fixed(reflected.incidence_rad * 180.0 / 3.141592653589793, 2) +
            " deg, Fresnel " + format_fixed(reflected.fresnel, 4) + ", scatter loss " +
            format_fixed(100.0 * reflected.scatter_loss, 3) + "%");
  out << "</svg>\n";
  return out.str();
}

}  // namespace vgroove
