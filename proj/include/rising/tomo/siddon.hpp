#pragma once

#include <vector>

#include "rising/tomo/geometry.hpp"

namespace rising::tomo {

struct RaySegment {
  Eigen::Index pixel;  // row-major pixel index
  double length;       // intersection length of the ray segment with that pixel
};

/// Appends the exact pixel intersection lengths of the segment src→dst with the
/// grid (Siddon's parametric plane-crossing method). Appends nothing on a miss.
/// Throws on a degenerate ray (src == dst).
void trace_segments(const GridSpec& grid, const Point2& src, const Point2& dst,
                    std::vector<RaySegment>& out);

/// Line integral Σ ℓ_j x_j of `image` along src→dst.
double trace_ray(const GridSpec& grid, const Point2& src, const Point2& dst, const Image& image);

}  // namespace rising::tomo
