#include "rising/tomo/siddon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rising::tomo {
namespace {

struct AxisCrossings {
  double first = 0.0;  // alpha of the first plane crossing inside the window
  double step = 0.0;   // alpha increment between consecutive planes
  int count = 0;
};

// Range of parametric values for which the coordinate s0 + a*ds lies in [lo, hi].
bool slab(double s0, double ds, double lo, double hi, double& amin, double& amax) {
  if (ds == 0.0) {
    if (s0 <= lo || s0 >= hi) return false;
    amin = -std::numeric_limits<double>::infinity();
    amax = std::numeric_limits<double>::infinity();
    return true;
  }
  const double a0 = (lo - s0) / ds;
  const double a1 = (hi - s0) / ds;
  amin = std::min(a0, a1);
  amax = std::max(a0, a1);
  return true;
}

// Plane crossings strictly inside (amin, amax) for planes lo + i*ps, i = 0..n.
AxisCrossings crossings(double s0, double ds, double lo, double ps, int n, double amin, double amax) {
  AxisCrossings c;
  if (ds == 0.0) return c;
  const double u_in = (s0 + amin * ds - lo) / ps;
  const double u_out = (s0 + amax * ds - lo) / ps;
  int i_first, i_last;
  if (ds > 0) {
    i_first = static_cast<int>(std::floor(u_in)) + 1;
    i_last = static_cast<int>(std::ceil(u_out)) - 1;
  } else {
    i_first = static_cast<int>(std::ceil(u_in)) - 1;
    i_last = static_cast<int>(std::floor(u_out)) + 1;
  }
  i_first = std::clamp(i_first, 0, n);
  i_last = std::clamp(i_last, 0, n);
  c.count = ds > 0 ? i_last - i_first + 1 : i_first - i_last + 1;
  if (c.count <= 0) {
    c.count = 0;
    return c;
  }
  c.first = (lo + i_first * ps - s0) / ds;
  c.step = ps / std::abs(ds);
  return c;
}

}  // namespace

void trace_segments(const GridSpec& grid, const Point2& src, const Point2& dst,
                    std::vector<RaySegment>& out) {
  const Point2 delta = dst - src;
  const double ray_length = delta.norm();
  if (!(ray_length > 0.0)) throw Error("trace_ray: degenerate ray (source equals destination)");

  const double lo = -grid.half_extent();
  const double hi = grid.half_extent();
  const double ps = grid.pixel_size;

  double ax0, ax1, ay0, ay1;
  if (!slab(src.x(), delta.x(), lo, hi, ax0, ax1)) return;
  if (!slab(src.y(), delta.y(), lo, hi, ay0, ay1)) return;
  const double amin = std::max({0.0, ax0, ay0});
  const double amax = std::min({1.0, ax1, ay1});
  if (!(amax > amin)) return;

  const AxisCrossings cx = crossings(src.x(), delta.x(), lo, ps, grid.n, amin, amax);
  const AxisCrossings cy = crossings(src.y(), delta.y(), lo, ps, grid.n, amin, amax);

  // Merge the two monotone crossing sequences; each interval between consecutive
  // alphas lies in a single pixel, identified from its midpoint.
  const double tiny = 1e-13 * std::max(1.0, grid.extent() / ray_length);
  int ix = 0, iy = 0;
  double a_prev = amin;
  auto emit = [&](double a_next) {
    if (a_next - a_prev > tiny) {
      const double mid = 0.5 * (a_prev + a_next);
      const double mx = src.x() + mid * delta.x();
      const double my = src.y() + mid * delta.y();
      const int col = std::clamp(static_cast<int>(std::floor((mx - lo) / ps)), 0, grid.n - 1);
      const int row_up = std::clamp(static_cast<int>(std::floor((my - lo) / ps)), 0, grid.n - 1);
      const int row = grid.n - 1 - row_up;
      out.push_back({static_cast<Eigen::Index>(row) * grid.n + col, (a_next - a_prev) * ray_length});
    }
    a_prev = std::max(a_prev, a_next);
  };
  while (ix < cx.count || iy < cy.count) {
    const double ax = ix < cx.count ? cx.first + ix * cx.step : std::numeric_limits<double>::infinity();
    const double ay = iy < cy.count ? cy.first + iy * cy.step : std::numeric_limits<double>::infinity();
    if (ax <= ay) {
      ++ix;
      if (ax > amin && ax < amax) emit(ax);
    } else {
      ++iy;
      if (ay > amin && ay < amax) emit(ay);
    }
  }
  emit(amax);
}

double trace_ray(const GridSpec& grid, const Point2& src, const Point2& dst, const Image& image) {
  if (image.grid != grid) throw Error("trace_ray: image is not on the given grid");
  std::vector<RaySegment> segments;
  trace_segments(grid, src, dst, segments);
  const auto flat = image.flat();
  double sum = 0.0;
  for (const auto& s : segments) sum += s.length * flat[s.pixel];
  return sum;
}

}  // namespace rising::tomo
