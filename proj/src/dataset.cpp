#include "aeroseg/dataset.hpp"

#include "aeroseg/error.hpp"
#include "aeroseg/mesh_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

namespace aeroseg {

namespace {

constexpr double kPi = std::numbers::pi;

// A closed part shell: S(t, phi), t in [0, 1], phi periodic in [0, 2 pi).
// S(0, .) and S(1, .) are single points (the poles).
using ShellFn = std::function<Vec3(double, double)>;

struct Panel {
  double t0, t1, phi0, phi1;
};

struct Part {
  PartLabel label;
  ShellFn shell;
  std::vector<double> rings;  // interior t values, increasing, in (0, 1)
  std::size_t segments;       // points per ring
  bool mirrored;              // mirrored through y = 0
  std::vector<Panel> panels;
};

Vec3 mirror_y(Vec3 p) {
  p.y() = -p.y();
  return p;
}

Vec3 evaluate(const Part& part, double t, double phi) {
  const Vec3 p = part.shell(t, phi);
  return part.mirrored ? mirror_y(p) : p;
}

void tessellate(const Part& part, LabeledMesh& mesh, std::vector<PartLabel>& labels) {
  const auto n = part.segments;
  const auto m = part.rings.size();
  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  auto ring_vertex = [&](std::size_t i, std::size_t k) {
    return static_cast<std::uint32_t>(base + 1 + i * n + k % n);
  };
  mesh.vertices.push_back(evaluate(part, 0.0, 0.0));
  for (double t : part.rings)
    for (std::size_t k = 0; k < n; ++k)
      mesh.vertices.push_back(evaluate(part, t, 2.0 * kPi * static_cast<double>(k) / n));
  mesh.vertices.push_back(evaluate(part, 1.0, 0.0));
  const auto south = base;
  const auto north = static_cast<std::uint32_t>(base + 1 + m * n);

  std::vector<Face> faces;
  for (std::size_t k = 0; k < n; ++k) faces.push_back({south, ring_vertex(0, k + 1), ring_vertex(0, k)});
  for (std::size_t i = 0; i + 1 < m; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const auto a = ring_vertex(i, k), b = ring_vertex(i, k + 1);
      const auto c = ring_vertex(i + 1, k + 1), d = ring_vertex(i + 1, k);
      faces.push_back({a, b, c});
      faces.push_back({a, c, d});
    }
  for (std::size_t k = 0; k < n; ++k)
    faces.push_back({north, ring_vertex(m - 1, k), ring_vertex(m - 1, k + 1)});
  for (auto f : faces) {
    if (part.mirrored) std::swap(f[1], f[2]);
    mesh.faces.push_back(f);
    labels.push_back(part.label);
  }
}

double path_length(const std::function<Vec3(double)>& f) {
  constexpr int kSteps = 48;
  double len = 0.0;
  Vec3 prev = f(0.0);
  for (int i = 1; i <= kSteps; ++i) {
    const Vec3 cur = f(static_cast<double>(i) / kSteps);
    len += (cur - prev).norm();
    prev = cur;
  }
  return len;
}

SurfaceGrid sample_panel(const Part& part, const Panel& panel, int id, double spacing) {
  auto t_at = [&](double u) { return panel.t0 + u * (panel.t1 - panel.t0); };
  auto phi_at = [&](double v) { return panel.phi0 + v * (panel.phi1 - panel.phi0); };
  const double len_t = path_length([&](double u) { return evaluate(part, t_at(u), phi_at(0.5)); });
  const double len_phi = path_length([&](double v) { return evaluate(part, t_at(0.5), phi_at(v)); });
  auto count = [&](double len) {
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(len / spacing)) + 1, 6, 160);
  };
  SurfaceGrid g;
  g.surface_id = id;
  g.rows = count(len_t);
  g.cols = count(len_phi);
  g.true_label = part.label;
  g.points.reserve(g.rows * g.cols);
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c)
      g.points.push_back(evaluate(part, t_at(static_cast<double>(r) / (g.rows - 1)),
                                  phi_at(static_cast<double>(c) / (g.cols - 1))));
  return g;
}

// Closed-trailing-edge four-digit symmetric section: half thickness over chord.
double section_half_thickness(double xc, double thickness) {
  xc = std::clamp(xc, 0.0, 1.0);
  return 5.0 * thickness *
         (0.2969 * std::sqrt(xc) - 0.1260 * xc - 0.3516 * xc * xc + 0.2843 * xc * xc * xc -
          0.1036 * xc * xc * xc * xc);
}

struct Fuselage {
  double length, radius;
  double nose_end() const { return 0.18 * length; }
  double tail_start() const { return 0.68 * length; }

  double r(double x) const {
    if (x <= 0.0 || x >= length) return 0.0;
    if (x < nose_end()) {
      const double s = 1.0 - x / nose_end();
      return radius * std::sqrt(1.0 - s * s);
    }
    if (x <= tail_start()) return radius;
    const double s = (x - tail_start()) / (length - tail_start());
    return radius * std::pow(1.0 - std::pow(s, 1.6), 0.8);
  }
  double zc(double x) const {
    if (x <= tail_start()) return 0.0;
    const double s = std::min(1.0, (x - tail_start()) / (length - tail_start()));
    return 0.35 * radius * s * s;
  }
  // Highest point and widest half-width of the cross sections over [x0, x1].
  double max_top(double x0, double x1) const {
    double best = 0.0;
    for (int i = 0; i <= 32; ++i) {
      const double x = x0 + (x1 - x0) * i / 32.0;
      best = std::max(best, zc(x) + r(x));
    }
    return best;
  }
  double max_halfwidth(double x0, double x1) const {
    double best = 0.0;
    for (int i = 0; i <= 32; ++i) best = std::max(best, r(x0 + (x1 - x0) * i / 32.0));
    return best;
  }
};

// A tapered, swept extrusion of a symmetric section along `span_axis`, closed by
// flat caps. t in [0, cap] shrinks the root section onto its centre, t in
// [1 - cap, 1] does the same at the tip.
struct Lifting {
  Vec3 root_le;
  Vec3 span_axis;
  Vec3 thickness_axis;
  double semi_span, root_chord, tip_chord, sweep_rad, thickness, dihedral_rad = 0.0;
  double cap = 0.05;

  Vec3 point(double t, double phi) const {
    double eta, scale;
    if (t < cap) {
      eta = 0.0;
      scale = t / cap;
    } else if (t > 1.0 - cap) {
      eta = 1.0;
      scale = (1.0 - t) / cap;
    } else {
      eta = (t - cap) / (1.0 - 2.0 * cap);
      scale = 1.0;
    }
    const double s = eta * semi_span;
    const double chord = root_chord + (tip_chord - root_chord) * eta;
    const Vec3 le = root_le + Vec3::UnitX() * (std::tan(sweep_rad) * s) + span_axis * s +
                    thickness_axis * (std::tan(dihedral_rad) * s);
    const Vec3 centre = le + Vec3::UnitX() * (0.4 * chord);
    const double xc = 0.5 * (1.0 + std::cos(phi));
    const double side = std::sin(phi) >= 0.0 ? 1.0 : -1.0;
    const Vec3 surface = le + Vec3::UnitX() * (xc * chord) +
                         thickness_axis * (side * section_half_thickness(xc, thickness) * chord);
    return centre + scale * (surface - centre);
  }
};

struct Nacelle {
  Vec3 front;
  double length, radius;
  double cap = 0.12;

  Vec3 point(double t, double phi) const {
    double eta, scale;
    if (t < cap) {
      eta = 0.0;
      scale = t / cap;
    } else if (t > 1.0 - cap) {
      eta = 1.0;
      scale = (1.0 - t) / cap;
    } else {
      eta = (t - cap) / (1.0 - 2.0 * cap);
      scale = 1.0;
    }
    const double r = radius * (1.0 - 0.15 * eta) * scale;
    return front + Vec3(eta * length, r * std::cos(phi), r * std::sin(phi));
  }
};

std::vector<double> uniform_rings(std::size_t count, double t0, double t1) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = count == 1 ? 0.5 * (t0 + t1) : t0 + (t1 - t0) * static_cast<double>(i) / (count - 1);
  return out;
}

// Quantities shared by validation and generation.
struct Layout {
  Fuselage fuselage;
  double wing_z, wing_root_y, wing_semi, wing_le_x;
  double htail_x, htail_root_y, htail_z, htail_semi;
  double vtail_x, vtail_root_z;
  std::vector<double> engine_eta;

  double wing_chord(double eta, const AircraftParams& p) const {
    return p.wing_root_chord + (p.wing_tip_chord - p.wing_root_chord) * eta;
  }
};

constexpr double kHtailSweep = 30.0 * kPi / 180.0;
constexpr double kVtailSweep = 38.0 * kPi / 180.0;
constexpr double kDihedral = 5.0 * kPi / 180.0;

Layout layout(const AircraftParams& p) {
  Layout l;
  l.fuselage = {p.fuselage_length, p.fuselage_radius};
  const double R = p.fuselage_radius, L = p.fuselage_length;
  l.wing_z = -0.35 * R;
  l.wing_root_y = std::sqrt(R * R - l.wing_z * l.wing_z) + 0.08 * R;
  l.wing_semi = 0.5 * p.wing_span - l.wing_root_y;
  l.wing_le_x = p.wing_position * L;

  l.htail_x = 0.97 * L - p.htail_chord;
  l.htail_z = l.fuselage.zc(l.htail_x + 0.5 * p.htail_chord);
  l.htail_root_y = l.fuselage.max_halfwidth(l.htail_x, l.htail_x + p.htail_chord) + 0.08 * R;
  l.htail_semi = 0.5 * p.htail_span - l.htail_root_y;

  l.vtail_x = 0.95 * L - p.vtail_chord;
  l.vtail_root_z = l.fuselage.max_top(l.vtail_x, l.vtail_x + p.vtail_chord) + 0.08 * R;

  if (p.engine_count >= 2) l.engine_eta.push_back(p.engine_station);
  if (p.engine_count >= 4) l.engine_eta.push_back(p.engine_station + 0.3);
  return l;
}

void check(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("aircraft params: " + what);
}

}  // namespace

void AircraftParams::validate() const {
  for (double v : {fuselage_length, fuselage_radius, wing_span, wing_root_chord, wing_tip_chord,
                   wing_thickness, wing_position, htail_span, htail_chord, vtail_span, vtail_chord,
                   engine_radius, engine_length, engine_station})
    check(std::isfinite(v) && v > 0.0, "lengths and fractions must be positive");
  check(density >= 0 && density <= 4, "density must lie in 0..4");
  check(engine_count == 0 || engine_count == 2 || engine_count == 4,
        "engine count must be 0, 2 or 4");
  check(std::isfinite(wing_sweep_deg) && wing_sweep_deg >= 0.0 && wing_sweep_deg < 60.0,
        "wing sweep must lie in [0, 60) degrees");
  check(wing_thickness <= 0.3, "wing thickness above 30% of chord");
  check(fuselage_radius < 0.15 * fuselage_length, "fuselage too stout");
  check(wing_tip_chord <= wing_root_chord, "wing tip chord exceeds root chord");

  const Layout l = layout(*this);
  const double L = fuselage_length;
  check(l.wing_semi > 2.0 * wing_root_chord * 0.25 && l.wing_semi > fuselage_radius,
        "wing span too short for the fuselage");
  check(l.wing_le_x > l.fuselage.nose_end() &&
            l.wing_le_x + wing_root_chord < l.fuselage.tail_start(),
        "wing root must sit on the constant fuselage section");
  check(htail_chord < 0.3 * L && vtail_chord < 0.3 * L, "tail chords too long");
  check(l.htail_semi > 0.5 * fuselage_radius, "horizontal tail span too short");
  check(htail_span < wing_span, "horizontal tail wider than the wing");
  check(l.htail_x > l.wing_le_x + wing_root_chord + 0.05 * L,
        "horizontal tail overlaps the wing root");
  check(l.vtail_x > l.wing_le_x + wing_root_chord + 0.05 * L,
        "vertical tail overlaps the wing root");
  check(l.vtail_x > l.fuselage.tail_start() - 0.1 * L, "vertical tail too far forward");

  for (double eta : l.engine_eta) {
    check(eta > 0.0 && eta < 0.9, "engine station must lie inside the wing");
    const double y = l.wing_root_y + eta * l.wing_semi;
    check(y - engine_radius > 1.25 * fuselage_radius, "engine intersects the fuselage");
    check(engine_length < 2.0 * l.wing_chord(eta, *this), "engine longer than twice the local chord");
  }
  if (l.engine_eta.size() == 2) {
    const double gap = (l.engine_eta[1] - l.engine_eta[0]) * l.wing_semi;
    check(gap > 2.5 * engine_radius, "engines of one wing overlap");
  }
}

void to_json(nlohmann::json& j, const AircraftParams& p) {
  j = nlohmann::json{{"fuselage_length", p.fuselage_length},
                     {"fuselage_radius", p.fuselage_radius},
                     {"wing_span", p.wing_span},
                     {"wing_root_chord", p.wing_root_chord},
                     {"wing_tip_chord", p.wing_tip_chord},
                     {"wing_sweep_deg", p.wing_sweep_deg},
                     {"wing_thickness", p.wing_thickness},
                     {"wing_position", p.wing_position},
                     {"htail_span", p.htail_span},
                     {"htail_chord", p.htail_chord},
                     {"vtail_span", p.vtail_span},
                     {"vtail_chord", p.vtail_chord},
                     {"engine_count", p.engine_count},
                     {"engine_radius", p.engine_radius},
                     {"engine_length", p.engine_length},
                     {"engine_station", p.engine_station},
                     {"density", p.density}};
}

void from_json(const nlohmann::json& j, AircraftParams& p) {
  AircraftParams d;
  p.fuselage_length = j.value("fuselage_length", d.fuselage_length);
  p.fuselage_radius = j.value("fuselage_radius", d.fuselage_radius);
  p.wing_span = j.value("wing_span", d.wing_span);
  p.wing_root_chord = j.value("wing_root_chord", d.wing_root_chord);
  p.wing_tip_chord = j.value("wing_tip_chord", d.wing_tip_chord);
  p.wing_sweep_deg = j.value("wing_sweep_deg", d.wing_sweep_deg);
  p.wing_thickness = j.value("wing_thickness", d.wing_thickness);
  p.wing_position = j.value("wing_position", d.wing_position);
  p.htail_span = j.value("htail_span", d.htail_span);
  p.htail_chord = j.value("htail_chord", d.htail_chord);
  p.vtail_span = j.value("vtail_span", d.vtail_span);
  p.vtail_chord = j.value("vtail_chord", d.vtail_chord);
  p.engine_count = j.value("engine_count", d.engine_count);
  p.engine_radius = j.value("engine_radius", d.engine_radius);
  p.engine_length = j.value("engine_length", d.engine_length);
  p.engine_station = j.value("engine_station", d.engine_station);
  p.density = j.value("density", d.density);
}

GeneratedAircraft generate_aircraft(const AircraftParams& p) {
  p.validate();
  const Layout l = layout(p);
  const auto d = static_cast<std::size_t>(p.density);
  const double L = p.fuselage_length;

  std::vector<Part> parts;
  const Panel upper{0.0, 1.0, 0.0, kPi}, lower{0.0, 1.0, kPi, 2.0 * kPi};

  {
    const Fuselage f = l.fuselage;
    Part part{PartLabel::fuselage,
              [f](double t, double phi) {
                const double x = t * f.length;
                const double r = f.r(x);
                return Vec3(x, r * std::cos(phi), f.zc(x) + r * std::sin(phi));
              },
              {},
              8 + 2 * d,
              false,
              {{0.0, f.nose_end() / L, 0.0, 2.0 * kPi},
               {f.nose_end() / L, f.tail_start() / L, 0.0, 2.0 * kPi},
               {f.tail_start() / L, 1.0, 0.0, 2.0 * kPi}}};
    const std::size_t rings = 9 + 3 * d;
    for (std::size_t i = 1; i <= rings; ++i)
      part.rings.push_back(static_cast<double>(i) / static_cast<double>(rings + 1));
    parts.push_back(std::move(part));
  }

  auto add_lifting = [&](PartLabel label, const Lifting& s, std::size_t segments,
                         std::size_t stations, bool both_sides, const Panel& a, const Panel& b) {
    for (int side = 0; side < (both_sides ? 2 : 1); ++side)
      parts.push_back({label, [s](double t, double phi) { return s.point(t, phi); },
                       uniform_rings(stations, s.cap, 1.0 - s.cap), segments, side == 1,
                       {a, b}});
  };

  Lifting wing{Vec3(l.wing_le_x, l.wing_root_y, l.wing_z), Vec3::UnitY(), Vec3::UnitZ(),
               l.wing_semi, p.wing_root_chord, p.wing_tip_chord,
               p.wing_sweep_deg * kPi / 180.0, p.wing_thickness, kDihedral};
  wing.cap = std::clamp(0.25 * p.wing_root_chord / l.wing_semi, 0.02, 0.15);
  add_lifting(PartLabel::wing, wing, 8 + 2 * d, 6 + 2 * d, true, upper, lower);

  Lifting htail{Vec3(l.htail_x, l.htail_root_y, l.htail_z), Vec3::UnitY(), Vec3::UnitZ(),
                l.htail_semi, p.htail_chord, 0.5 * p.htail_chord, kHtailSweep, 0.10};
  htail.cap = std::clamp(0.25 * p.htail_chord / l.htail_semi, 0.02, 0.15);
  add_lifting(PartLabel::stabilizer, htail, 6 + 2 * d, 4 + d, true, upper, lower);

  Lifting vtail{Vec3(l.vtail_x, 0.0, l.vtail_root_z), Vec3::UnitZ(), Vec3::UnitY(),
                p.vtail_span, p.vtail_chord, 0.6 * p.vtail_chord, kVtailSweep, 0.10};
  vtail.cap = std::clamp(0.25 * p.vtail_chord / p.vtail_span, 0.02, 0.15);
  add_lifting(PartLabel::stabilizer, vtail, 6 + 2 * d, 4 + d, false, upper, lower);

  for (double eta : l.engine_eta) {
    const double y = l.wing_root_y + eta * l.wing_semi;
    const double chord = l.wing_chord(eta, p);
    const double wing_z = l.wing_z + std::tan(kDihedral) * eta * l.wing_semi;
    const double le_x = l.wing_le_x + std::tan(p.wing_sweep_deg * kPi / 180.0) * eta * l.wing_semi;
    const Nacelle n{Vec3(le_x - 0.45 * p.engine_length, y,
                         wing_z - 0.5 * p.wing_thickness * chord - 1.5 * p.engine_radius),
                    p.engine_length, p.engine_radius};
    for (int side = 0; side < 2; ++side)
      parts.push_back({PartLabel::engine, [n](double t, double phi) { return n.point(t, phi); },
                       uniform_rings(3 + d, n.cap, 1.0 - n.cap), 8 + 2 * d, side == 1,
                       {{0.0, 1.0, 0.0, 2.0 * kPi}}});
  }

  GeneratedAircraft out;
  std::vector<PartLabel> labels;
  const double spacing = L / 120.0;
  int next_id = 1;
  for (const auto& part : parts) {
    tessellate(part, out.mesh, labels);
    for (const auto& panel : part.panels)
      out.surfaces.push_back(sample_panel(part, panel, next_id++, spacing));
  }
  out.mesh.face_labels = std::move(labels);
  out.mesh.validate();
  return out;
}

std::vector<AircraftParams> base_archetypes() {
  std::vector<AircraftParams> out;
  auto add = [&](auto&& tweak) {
    AircraftParams p;
    tweak(p);
    out.push_back(p);
  };
  add([](AircraftParams&) {});  // twin-engine airliner
  add([](AircraftParams& p) {  // long-haul four-engine
    p.fuselage_length = 40.0, p.fuselage_radius = 2.4, p.wing_span = 40.0;
    p.wing_root_chord = 7.5, p.wing_tip_chord = 2.0, p.wing_sweep_deg = 35.0;
    p.htail_span = 14.0, p.htail_chord = 3.6, p.vtail_span = 7.0, p.vtail_chord = 5.0;
    p.engine_count = 4, p.engine_radius = 1.0, p.engine_length = 4.2, p.engine_station = 0.3;
  });
  add([](AircraftParams& p) {  // regional jet
    p.fuselage_length = 24.0, p.fuselage_radius = 1.4, p.wing_span = 20.0;
    p.wing_root_chord = 3.8, p.wing_tip_chord = 1.3, p.wing_sweep_deg = 22.0;
    p.htail_span = 7.0, p.htail_chord = 2.0, p.vtail_span = 3.8, p.vtail_chord = 2.8;
    p.engine_radius = 0.65, p.engine_length = 2.8, p.engine_station = 0.3;
  });
  add([](AircraftParams& p) {  // glider
    p.fuselage_length = 9.0, p.fuselage_radius = 0.45, p.wing_span = 20.0;
    p.wing_root_chord = 1.1, p.wing_tip_chord = 0.45, p.wing_sweep_deg = 2.0;
    p.wing_thickness = 0.14, p.wing_position = 0.3;
    p.htail_span = 2.6, p.htail_chord = 0.7, p.vtail_span = 1.4, p.vtail_chord = 1.0;
    p.engine_count = 0;
  });
  add([](AircraftParams& p) {  // straight-wing turboprop
    p.fuselage_length = 22.0, p.fuselage_radius = 1.3, p.wing_span = 26.0;
    p.wing_root_chord = 3.0, p.wing_tip_chord = 1.6, p.wing_sweep_deg = 4.0;
    p.wing_thickness = 0.16, p.wing_position = 0.38;
    p.htail_span = 8.0, p.htail_chord = 2.0, p.vtail_span = 4.2, p.vtail_chord = 3.0;
    p.engine_radius = 0.6, p.engine_length = 3.4, p.engine_station = 0.3;
  });
  add([](AircraftParams& p) {  // high-sweep fighter-like, no pods
    p.fuselage_length = 18.0, p.fuselage_radius = 1.1, p.wing_span = 11.0;
    p.wing_root_chord = 5.0, p.wing_tip_chord = 1.2, p.wing_sweep_deg = 45.0;
    p.wing_thickness = 0.06, p.wing_position = 0.4;
    p.htail_span = 7.0, p.htail_chord = 2.2, p.vtail_span = 3.2, p.vtail_chord = 3.0;
    p.engine_count = 0;
  });
  add([](AircraftParams& p) {  // cargo four-turboprop
    p.fuselage_length = 30.0, p.fuselage_radius = 2.2, p.wing_span = 40.0;
    p.wing_root_chord = 4.8, p.wing_tip_chord = 2.4, p.wing_sweep_deg = 5.0;
    p.wing_thickness = 0.15, p.wing_position = 0.36;
    p.htail_span = 13.0, p.htail_chord = 3.4, p.vtail_span = 6.8, p.vtail_chord = 5.0;
    p.engine_count = 4, p.engine_radius = 0.75, p.engine_length = 4.0, p.engine_station = 0.22;
  });
  add([](AircraftParams& p) {  // business jet with pods under the wing
    p.fuselage_length = 17.0, p.fuselage_radius = 1.0, p.wing_span = 16.0;
    p.wing_root_chord = 3.0, p.wing_tip_chord = 1.0, p.wing_sweep_deg = 28.0;
    p.wing_thickness = 0.1, p.wing_position = 0.4;
    p.htail_span = 6.0, p.htail_chord = 1.6, p.vtail_span = 3.0, p.vtail_chord = 2.6;
    p.engine_radius = 0.45, p.engine_length = 2.2, p.engine_station = 0.3;
  });
  add([](AircraftParams& p) {  // wide-body twin
    p.fuselage_length = 45.0, p.fuselage_radius = 3.0, p.wing_span = 44.0;
    p.wing_root_chord = 8.5, p.wing_tip_chord = 2.4, p.wing_sweep_deg = 32.0;
    p.htail_span = 16.0, p.htail_chord = 4.4, p.vtail_span = 8.5, p.vtail_chord = 6.2;
    p.engine_radius = 1.5, p.engine_length = 5.5, p.engine_station = 0.3;
  });
  add([](AircraftParams& p) {  // light trainer, no pods
    p.fuselage_length = 8.0, p.fuselage_radius = 0.6, p.wing_span = 10.5;
    p.wing_root_chord = 1.6, p.wing_tip_chord = 1.2, p.wing_sweep_deg = 0.0;
    p.wing_thickness = 0.15, p.wing_position = 0.3;
    p.htail_span = 3.4, p.htail_chord = 0.9, p.vtail_span = 1.5, p.vtail_chord = 1.2;
    p.engine_count = 0;
  });
  return out;
}

std::vector<AircraftParams> sample_variations(const AircraftParams& base, std::size_t k, Rng& rng,
                                              double spread) {
  if (!(spread >= 0.0 && spread < 1.0)) throw ValidationError("variation spread must lie in [0, 1)");
  base.validate();
  std::uniform_real_distribution<double> factor(1.0 - spread, 1.0 + spread);
  std::vector<AircraftParams> out;
  out.reserve(k);
  constexpr int kAttempts = 1000;
  while (out.size() < k) {
    int attempt = 0;
    for (; attempt < kAttempts; ++attempt) {
      AircraftParams p = base;
      for (double* v : {&p.fuselage_length, &p.fuselage_radius, &p.wing_span, &p.wing_root_chord,
                        &p.wing_tip_chord, &p.wing_sweep_deg, &p.wing_thickness, &p.wing_position,
                        &p.htail_span, &p.htail_chord, &p.vtail_span, &p.vtail_chord,
                        &p.engine_radius, &p.engine_length, &p.engine_station})
        *v *= factor(rng);
      try {
        p.validate();
        out.push_back(p);
        break;
      } catch (const ValidationError&) {
      }
    }
    if (attempt == kAttempts)
      throw ValidationError("could not draw a valid variation of the base shape");
  }
  return out;
}

std::vector<DatasetSample> plan_dataset(std::size_t bases, std::size_t variations,
                                        std::size_t densities, std::uint64_t seed,
                                        std::size_t first_base) {
  if (densities > 5) throw ValidationError("at most 5 densities");
  const auto archetypes = base_archetypes();
  std::vector<DatasetSample> out;
  for (std::size_t b = 0; b < bases; ++b) {
    const std::size_t base = (first_base + b) % archetypes.size();
    // One stream per base so a sample's shape does not depend on the other bases.
    Rng rng(seed ^ (0x9e3779b97f4a7c15ull * (base + 1)));
    const auto draws = sample_variations(archetypes[base], variations, rng);
    for (std::size_t v = 0; v < draws.size(); ++v)
      for (std::size_t d = 0; d < densities; ++d) {
        DatasetSample s;
        s.base = base;
        s.variation = v;
        s.density = static_cast<int>(d);
        s.params = draws[v];
        s.params.density = s.density;
        char name[64];
        std::snprintf(name, sizeof name, "b%02zu_v%02zu_d%d", base, v, s.density);
        s.name = name;
        out.push_back(s);
      }
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const std::vector<DatasetSample>& plan,
                   const nlohmann::json& manifest_extra) {
  std::filesystem::create_directories(dir);
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : plan) {
    const auto aircraft = generate_aircraft(s.params);
    save_mesh(aircraft.mesh, dir / (s.name + ".mesh"));
    save_labels(*aircraft.mesh.face_labels, dir / (s.name + ".labels.csv"));
    save_surfaces(aircraft.surfaces, dir / (s.name + ".surfaces"));
    samples.push_back({{"name", s.name},
                       {"base", s.base},
                       {"variation", s.variation},
                       {"density", s.density},
                       {"faces", aircraft.mesh.face_count()},
                       {"vertices", aircraft.mesh.vertex_count()},
                       {"surfaces", aircraft.surfaces.size()},
                       {"params", s.params}});
  }
  nlohmann::json manifest = manifest_extra;
  manifest["samples"] = samples;
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace aeroseg
