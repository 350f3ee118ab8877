#include "vgroove/etchsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vgroove/error.hpp"
#include "vgroove/text.hpp"

namespace vgroove {

namespace {

constexpr double kMotionThreshold = 1e-3;  // fraction of a cell per step
constexpr double kMinCellsAcrossMask = 50.0;
constexpr double kTimeEps = 1e-9;
constexpr double kLengthEps = 1e-9;  // um

enum class Orientation { mask, floor_100, wall_111 };

// Straight front segment: points p with normal . p == offset. The normal is a
// unit vector pointing into the silicon, i.e. the direction of advance.
struct Facet {
  Orientation orientation;
  double nx;
  double nd;
  double offset;

  // Left-to-right tangent; every facet here is a graph over x.
  double tx() const { return nd; }
  double td() const { return -nx; }
};

Point2 intersect(const Facet& a, const Facet& b) {
  const double det = a.nx * b.nd - a.nd * b.nx;
  return {(a.offset * b.nd - a.nd * b.offset) / det,
          (a.nx * b.offset - a.offset * b.nx) / det};
}

class Front {
 public:
  Front(double mask_opening_um, CrystalAngle angle) {
    const double s = std::sin(angle.radians());
    const double c = std::cos(angle.radians());
    const double half = 0.5 * mask_opening_um;
    facets_ = {
        {Orientation::mask, 0.0, 1.0, 0.0},
        {Orientation::wall_111, -s, c, half * s},
        {Orientation::floor_100, 0.0, 1.0, 0.0},
        {Orientation::wall_111, s, c, half * s},
        {Orientation::mask, 0.0, 1.0, 0.0},
    };
    rebuild();
  }

  // Returns the largest normal displacement of any facet still present.
  double advance(double rate_100, double rate_111, double dt) {
    double moved = 0.0;
    for (auto& f : facets_) {
      double rate = 0.0;
      if (f.orientation == Orientation::floor_100) {
        rate = rate_100;
      } else if (f.orientation == Orientation::wall_111) {
        rate = rate_111;
      }
      f.offset += rate * dt;
      moved = std::max(moved, rate * dt);
    }
    rebuild();
    return moved;
  }

  const std::vector<Point2>& nodes() const { return nodes_; }

  double depth_at(double x) const {
    if (x <= nodes_.front().x_um || x >= nodes_.back().x_um) {
      return 0.0;
    }
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x,
                                     [](double v, const Point2& p) { return v < p.x_um; });
    const Point2& b = *it;
    const Point2& a = *(it - 1);
    if (b.x_um - a.x_um <= 0.0) {
      return std::max(a.depth_um, b.depth_um);
    }
    const double u = (x - a.x_um) / (b.x_um - a.x_um);
    return a.depth_um + u * (b.depth_um - a.depth_um);
  }

  double area() const {
    double sum = 0.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      sum += 0.5 * (nodes_[i].x_um - nodes_[i - 1].x_um) *
             (nodes_[i].depth_um + nodes_[i - 1].depth_um);
    }
    return sum;
  }

 private:
  // Recomputes corner nodes, dropping exposed facets that have been overrun
  // by their neighbours (e.g. the (100) floor once the walls meet).
  void rebuild() {
    for (;;) {
      nodes_.clear();
      for (std::size_t i = 1; i < facets_.size(); ++i) {
        nodes_.push_back(intersect(facets_[i - 1], facets_[i]));
      }
      std::size_t worst = 0;
      double worst_len = -kLengthEps;
      for (std::size_t i = 1; i + 1 < facets_.size(); ++i) {
        const Facet& f = facets_[i];
        const Point2& a = nodes_[i - 1];
        const Point2& b = nodes_[i];
        const double len = (b.x_um - a.x_um) * f.tx() + (b.depth_um - a.depth_um) * f.td();
        if (len < worst_len) {
          worst_len = len;
          worst = i;
        }
      }
      if (worst == 0) {
        return;
      }
      facets_.erase(facets_.begin() + static_cast<std::ptrdiff_t>(worst));
    }
  }

  std::vector<Facet> facets_;
  std::vector<Point2> nodes_;
};

ProfileSnapshot snapshot(const Front& front, const EtchConfig& cfg, double t,
                         double wall_advance) {
  ProfileSnapshot snap;
  snap.time_min = t;
  snap.removed_area_um2 = front.area();
  snap.wall_advance_um = wall_advance;
  const auto& nodes = front.nodes();
  snap.opening_left_um = nodes.front().x_um;
  snap.opening_right_um = nodes.back().x_um;

  // Symmetric grid through x = 0 so both halves sample the same offsets.
  const double reach = 0.5 * cfg.mask_opening_um + cfg.field_margin_um + wall_advance * 2.0;
  const auto n = static_cast<long>(std::ceil(reach / cfg.cell_size_um));
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(2 * n + 1) + nodes.size());
  for (long i = -n; i <= n; ++i) {
    const double x = static_cast<double>(i) * cfg.cell_size_um;
    pts.push_back({x, front.depth_at(x)});
  }
  for (const auto& p : nodes) {
    pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x_um < b.x_um || (a.x_um == b.x_um && a.depth_um < b.depth_um);
  });
  // Drop near-coincident abscissae, keeping corner nodes over grid samples
  // (they are exact).
  const double merge = 1e-9 * cfg.cell_size_um;
  for (const auto& p : pts) {
    if (!snap.surface.empty() && p.x_um - snap.surface.back().x_um < merge) {
      if (p.depth_um > snap.surface.back().depth_um) {
        snap.surface.back() = p;
      }
      continue;
    }
    snap.surface.push_back(p);
  }
  return snap;
}

}  // namespace

void EtchConfig::validate() const {
  if (!(mask_opening_um > 0.0)) {
    throw ConfigError("mask_opening_um must be positive");
  }
  if (!(rate_100_um_min > 0.0)) {
    throw ConfigError("rate_100_um_min must be positive");
  }
  if (!(anisotropy_ratio > 0.0 && anisotropy_ratio < 1.0)) {
    throw ConfigError("anisotropy_ratio must be in (0, 1)");
  }
  if (!(cell_size_um > 0.0)) {
    throw ConfigError("cell_size_um must be positive");
  }
  if (!(time_step_min > 0.0)) {
    throw ConfigError("time_step_min must be positive");
  }
  if (!(total_time_min >= 0.0)) {
    throw ConfigError("total_time_min must be non-negative");
  }
  if (!(field_margin_um >= 0.0)) {
    throw ConfigError("field_margin_um must be non-negative");
  }
  if (mask_opening_um / cell_size_um < kMinCellsAcrossMask) {
    throw ConfigError("resolution too coarse: mask_opening_um / cell_size_um must be >= 50");
  }
  const double per_step = rate_100_um_min * time_step_min;
  if (per_step > cell_size_um) {
    throw ConfigError("time step too large: front advances " + format_fixed(per_step, 4) +
                      " um per step, more than one cell (" + format_fixed(cell_size_um, 4) +
                      " um); reduce time_step_min below " +
                      format_fixed(cell_size_um / rate_100_um_min, 4));
  }
}

EtchConfig etch_config_for(const EtchRateModel& model, Temperature bath,
                           double mask_opening_um) {
  EtchConfig cfg;
  cfg.mask_opening_um = mask_opening_um;
  cfg.rate_100_um_min = rate_at(model, bath).rate_um_min;
  return cfg;
}

double ProfileSnapshot::depth_at(double x_um) const {
  if (surface.empty() || x_um <= surface.front().x_um || x_um >= surface.back().x_um) {
    return 0.0;
  }
  const auto it = std::upper_bound(surface.begin(), surface.end(), x_um,
                                   [](double v, const Point2& p) { return v < p.x_um; });
  const Point2& b = *it;
  const Point2& a = *(it - 1);
  const double u = (x_um - a.x_um) / (b.x_um - a.x_um);
  return a.depth_um + u * (b.depth_um - a.depth_um);
}

double ProfileSnapshot::max_depth() const {
  double d = 0.0;
  for (const auto& p : surface) {
    d = std::max(d, p.depth_um);
  }
  return d;
}

double SidewallAngles::mean_deg() const { return mean_rad() * 180.0 / std::numbers::pi; }

std::vector<double> EtchProfile::timestamps() const {
  std::vector<double> ts;
  ts.reserve(snapshots.size());
  for (const auto& s : snapshots) {
    ts.push_back(s.time_min);
  }
  return ts;
}

const ProfileSnapshot& EtchProfile::at(double time_min) const {
  for (const auto& s : snapshots) {
    if (std::abs(s.time_min - time_min) <= kTimeEps * std::max(1.0, time_min)) {
      return s;
    }
  }
  throw LookupError("no profile snapshot at t = " + format_fixed(time_min, 6) + " min");
}

EtchProfile simulate_profile(const EtchConfig& config) {
  config.validate();

  EtchProfile profile;
  profile.config = config;

  const CrystalAngle angle;
  const double rate_111 = config.rate_100_um_min * config.anisotropy_ratio;
  const double cadence = std::max(1.0, config.total_time_min / 100.0);
  const double threshold = kMotionThreshold * config.cell_size_um;

  Front front(config.mask_opening_um, angle);
  double t = 0.0;
  profile.snapshots.push_back(snapshot(front, config, t, 0.0));

  const auto snapshot_count = static_cast<long>(std::ceil(config.total_time_min / cadence - kTimeEps));
  for (long k = 1; k <= snapshot_count && !profile.converged; ++k) {
    const double t_next = std::min(config.total_time_min, static_cast<double>(k) * cadence);
    while (t < t_next - kTimeEps) {
      const double h = std::min(config.time_step_min, t_next - t);
      const double moved = front.advance(config.rate_100_um_min, rate_111, h);
      t += h;
      // Partial steps that land on a snapshot time do not count as stalled.
      if (h >= config.time_step_min * (1.0 - kTimeEps) && moved < threshold) {
        profile.converged = true;
        break;
      }
    }
    if (!profile.converged) {
      t = t_next;
    }
    profile.snapshots.push_back(snapshot(front, config, t, rate_111 * t));
  }
  profile.stop_time_min = t;
  return profile;
}

SidewallAngles wall_angle(const EtchProfile& profile, double time_min) {
  const auto& snap = profile.at(time_min);
  const double cell = profile.config.cell_size_um;
  const double bottom = snap.max_depth();
  const double eps = 1e-9 * std::max(1.0, bottom);

  auto fit_side = [&](bool left) {
    double n = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    double x_min = 0.0;
    double x_max = 0.0;
    for (const auto& p : snap.surface) {
      if ((left && p.x_um >= 0.0) || (!left && p.x_um <= 0.0)) {
        continue;
      }
      if (p.depth_um <= eps || p.depth_um >= bottom - eps) {
        continue;
      }
      if (n == 0.0) {
        x_min = x_max = p.x_um;
      }
      x_min = std::min(x_min, p.x_um);
      x_max = std::max(x_max, p.x_um);
      n += 1.0;
      sx += p.x_um;
      sy += p.depth_um;
      sxx += p.x_um * p.x_um;
      sxy += p.x_um * p.depth_um;
    }
    if (x_max - x_min <= 10.0 * cell) {
      throw DomainError(std::string("insufficient facet: ") + (left ? "left" : "right") +
                        " sidewall spans fewer than 10 cells at t = " +
                        format_fixed(time_min, 3) + " min");
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return std::atan(std::abs(slope));
  };

  return {fit_side(true), fit_side(false)};
}

ProfileMetrics profile_metrics(const EtchProfile& profile, double time_min) {
  const auto& snap = profile.at(time_min);
  ProfileMetrics m;
  m.depth_um = snap.max_depth();
  m.top_width_um = snap.opening_right_um - snap.opening_left_um;
  m.undercut_um = 0.5 * (m.top_width_um - profile.config.mask_opening_um);
  return m;
}

}  // namespace vgroove
