#include "rising/phantom/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rising/random.hpp"

namespace rising::phantom {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

template <typename T>
void check_interval(const Interval<T>& r, const char* name) {
  if (!(r.lo <= r.hi)) throw Error(std::string("PhantomSpec: empty range ") + name);
}

}  // namespace

void ShapeElement::validate() const {
  if (!std::isfinite(intensity) || intensity < -1.0 || intensity > 1.0)
    throw Error("ShapeElement: intensity must lie in [-1, 1]");
  if (const auto* e = std::get_if<Ellipse>(&shape)) {
    if (!e->center.allFinite() || !std::isfinite(e->rotation_deg)) throw Error("Ellipse: non-finite parameters");
    if (!(e->semi_a > 0.0) || !(e->semi_b > 0.0)) throw Error("Ellipse: semi-axes must be positive");
  } else {
    const auto& l = std::get<LineSegment>(shape);
    if (!l.p0.allFinite() || !l.p1.allFinite()) throw Error("LineSegment: non-finite endpoints");
    if (l.p0 == l.p1) throw Error("LineSegment: endpoints must be distinct");
    if (!(l.thickness > 0.0)) throw Error("LineSegment: thickness must be positive");
  }
}

bool ShapeElement::contains(const Point2& p) const {
  if (const auto* e = std::get_if<Ellipse>(&shape)) {
    const double c = std::cos(e->rotation_deg * kDeg);
    const double s = std::sin(e->rotation_deg * kDeg);
    const Point2 d = p - e->center;
    const double u = c * d.x() + s * d.y();
    const double v = -s * d.x() + c * d.y();
    return (u * u) / (e->semi_a * e->semi_a) + (v * v) / (e->semi_b * e->semi_b) <= 1.0;
  }
  const auto& l = std::get<LineSegment>(shape);
  return segment_distance(p, l.p0, l.p1) <= 0.5 * l.thickness;
}

void PhantomSpec::validate() const {
  grid.validate();
  check_interval(num_ellipses, "num_ellipses");
  check_interval(num_lines, "num_lines");
  check_interval(intensity, "intensity");
  check_interval(size, "size");
  check_interval(line_thickness, "line_thickness");
  if (num_ellipses.lo < 0 || num_lines.lo < 0) throw Error("PhantomSpec: element counts must be >= 0");
  if (intensity.lo < -1.0 || intensity.hi > 1.0) throw Error("PhantomSpec: intensity range must lie in [-1, 1]");
  if (!(size.lo > 0.0)) throw Error("PhantomSpec: sizes must be positive");
  if (!(line_thickness.lo > 0.0)) throw Error("PhantomSpec: line thickness must be positive");
  if (background < 0.0 || background > 1.0) throw Error("PhantomSpec: background must lie in [0, 1]");
}

nlohmann::json to_json(const PhantomSpec& s) {
  return {{"n", s.grid.n},
          {"pixel_size", s.grid.pixel_size},
          {"num_ellipses", {s.num_ellipses.lo, s.num_ellipses.hi}},
          {"num_lines", {s.num_lines.lo, s.num_lines.hi}},
          {"intensity", {s.intensity.lo, s.intensity.hi}},
          {"size", {s.size.lo, s.size.hi}},
          {"line_thickness", {s.line_thickness.lo, s.line_thickness.hi}},
          {"background", s.background},
          {"seed", s.seed}};
}

PhantomSpec phantom_spec_from_json(const nlohmann::json& doc) {
  PhantomSpec s;
  auto pair = [&](const char* key, auto& iv) {
    if (doc.contains(key)) {
      const auto& a = doc.at(key);
      iv.lo = a.at(0).get<decltype(iv.lo)>();
      iv.hi = a.at(1).get<decltype(iv.hi)>();
    }
  };
  try {
    s.grid.n = doc.value("n", s.grid.n);
    s.grid.pixel_size = doc.value("pixel_size", s.grid.pixel_size);
    pair("num_ellipses", s.num_ellipses);
    pair("num_lines", s.num_lines);
    pair("intensity", s.intensity);
    pair("size", s.size);
    pair("line_thickness", s.line_thickness);
    s.background = doc.value("background", s.background);
    s.seed = doc.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("PhantomSpec JSON: ") + e.what());
  }
  s.validate();
  return s;
}

Image rasterize_element(const ShapeElement& element, const GridSpec& grid) {
  element.validate();
  Image out(grid);
  for (int r = 0; r < grid.n; ++r)
    for (int c = 0; c < grid.n; ++c)
      if (element.contains(grid.pixel_center(r, c))) out.values(r, c) = element.intensity;
  return out;
}

std::vector<ShapeElement> draw_elements(const PhantomSpec& spec, std::uint64_t index) {
  spec.validate();
  RandomStream rng{spec.seed, index};
  const double extent = spec.grid.extent();
  const auto n_ell = rng.uniform_int(spec.num_ellipses.lo, spec.num_ellipses.hi);
  const auto n_lin = rng.uniform_int(spec.num_lines.lo, spec.num_lines.hi);

  auto point_in_disk = [&](double radius) {
    const double r = radius * std::sqrt(rng.uniform());
    const double t = 2.0 * std::numbers::pi * rng.uniform();
    return Point2(r * std::cos(t), r * std::sin(t));
  };

  std::vector<ShapeElement> elements;
  for (std::int64_t i = 0; i < n_ell; ++i) {
    Ellipse e;
    e.center = point_in_disk(0.28 * extent);
    e.semi_a = rng.uniform(spec.size.lo, spec.size.hi) * extent;
    e.semi_b = rng.uniform(spec.size.lo, spec.size.hi) * extent;
    e.rotation_deg = rng.uniform(0.0, 180.0);
    const double intensity = rng.uniform(spec.intensity.lo, spec.intensity.hi);
    elements.push_back({e, intensity});
  }
  for (std::int64_t i = 0; i < n_lin; ++i) {
    LineSegment l;
    const Point2 mid = point_in_disk(0.25 * extent);
    const double half = rng.uniform(spec.size.lo, spec.size.hi) * extent;
    const double t = rng.uniform(0.0, std::numbers::pi);
    const Point2 dir(std::cos(t), std::sin(t));
    l.p0 = mid - half * dir;
    l.p1 = mid + half * dir;
    l.thickness = rng.uniform(spec.line_thickness.lo, spec.line_thickness.hi) * spec.grid.pixel_size;
    const double intensity = rng.uniform(spec.intensity.lo, spec.intensity.hi);
    elements.push_back({l, intensity});
  }
  return elements;
}

Image compose(const GridSpec& grid, double background, const std::vector<ShapeElement>& elements) {
  Image out(grid);
  out.values.setConstant(background);
  for (const auto& e : elements) out.values += rasterize_element(e, grid).values;
  out.values = out.values.cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

Image generate_phantom(const PhantomSpec& spec, std::uint64_t index) {
  return compose(spec.grid, spec.background, draw_elements(spec, index));
}

double nonzero_gradient_fraction(const Image& image) {
  const auto& v = image.values;
  const int n = image.grid.n;
  Eigen::Index count = 0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double dx = c + 1 < n ? v(r, c + 1) - v(r, c) : 0.0;
      const double dy = r + 1 < n ? v(r + 1, c) - v(r, c) : 0.0;
      if (dx != 0.0 || dy != 0.0) ++count;
    }
  }
  return static_cast<double>(count) / static_cast<double>(v.size());
}

}  // namespace rising::phantom
