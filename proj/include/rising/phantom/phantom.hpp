#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rising/tomo/geometry.hpp"

namespace rising::phantom {

using tomo::GridSpec;
using tomo::Image;
using tomo::Point2;

struct Ellipse {
  Point2 center = Point2::Zero();
  double semi_a = 1.0;  // along the rotated x axis
  double semi_b = 1.0;
  double rotation_deg = 0.0;
};

struct LineSegment {
  Point2 p0 = Point2::Zero();
  Point2 p1 = Point2::UnitX();
  double thickness = 1.0;
};

/// One uniform object. Its intensity is added to whatever lies underneath.
struct ShapeElement {
  std::variant<Ellipse, LineSegment> shape;
  double intensity = 1.0;

  void validate() const;
  bool contains(const Point2& p) const;
};

template <typename T>
struct Interval {
  T lo;
  T hi;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Distribution of overlapping ellipses and lines. Sizes are fractions of the
/// grid side length; ellipse sizes are semi-axes, line sizes are half-lengths.
struct PhantomSpec {
  GridSpec grid{64, 1.0};
  Interval<int> num_ellipses{3, 7};
  Interval<int> num_lines{1, 3};
  Interval<double> intensity{0.1, 0.6};
  Interval<double> size{0.04, 0.22};
  Interval<double> line_thickness{1.0, 2.0};  // in pixels
  double background = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const PhantomSpec&, const PhantomSpec&) = default;
};

nlohmann::json to_json(const PhantomSpec& spec);
PhantomSpec phantom_spec_from_json(const nlohmann::json& doc);

/// Indicator increment of one element: pixel centres inside the shape receive
/// the element intensity, every other pixel 0. No anti-aliasing.
Image rasterize_element(const ShapeElement& element, const GridSpec& grid);

/// The element list for image `index`, drawn from RandomStream{spec.seed, index}.
std::vector<ShapeElement> draw_elements(const PhantomSpec& spec, std::uint64_t index);

/// background + Σ increments, clamped to [0, 1].
Image compose(const GridSpec& grid, double background, const std::vector<ShapeElement>& elements);

Image generate_phantom(const PhantomSpec& spec, std::uint64_t index);

/// Fraction of pixels whose forward-difference gradient (replicate boundary) is nonzero.
double nonzero_gradient_fraction(const Image& image);

}  // namespace rising::phantom
