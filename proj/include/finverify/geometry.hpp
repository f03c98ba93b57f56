#pragma once

// exact integer-nm rectilinear geometry: scanline booleans, canonical
// normalization, distance / width measurement. All coordinates are nm on a
// 1 nm grid; results are exact (Euclidean distances floored to int nm).

#include <compare>
#include <vector>

#include "finverify/util.hpp"

namespace fv {

struct Point {
  i64 x = 0, y = 0;
  auto operator<=>(const Point&) const = default;
};

struct Rect {
  i64 x1 = 0, y1 = 0, x2 = 0, y2 = 0;  // x1<x2, y1<y2
  i64 w() const { return x2 - x1; }
  i64 h() const { return y2 - y1; }
  i64 area() const { return w() * h(); }
  auto operator<=>(const Rect&) const = default;
};

// simple rectilinear polygon, CCW, canonical start vertex (lexicographic min)
struct Polygon {
  std::vector<Point> v;

  Rect bbox() const;
  i64 area() const;                 // exact, positive for CCW
  bool is_rect() const { return v.size() == 4; }
  auto operator<=>(const Polygon&) const = default;
};

using ShapeList = std::vector<Polygon>;

Polygon rect_poly(const Rect& r);

// validation for loaded polygons: >=4 vertices, axis-parallel edges, simple,
// positive area. Throws fv::error with `what` naming the offending shape.
// Accepts either winding and collinear runs; returns the canonical CCW form.
Polygon validate_polygon(const std::vector<Point>& pts, const std::string& what);

// canonical merge: union of the input, overlapping/abutting shapes merged,
// output pairwise disjoint and a pure function of the covered point set.
// Shapes touching at a single corner stay separate. A connected component
// that encloses a hole is emitted as its canonical rectangle decomposition
// (keeps every output polygon simple).
ShapeList normalize(const ShapeList& in);

ShapeList geo_union(const ShapeList& a, const ShapeList& b);
ShapeList geo_intersect(const ShapeList& a, const ShapeList& b);
ShapeList geo_subtract(const ShapeList& a, const ShapeList& b);

// canonical decomposition into disjoint rectangles (maximal x-runs)
std::vector<Rect> decompose(const ShapeList& in);

i64 area(const ShapeList& in);  // union area (overlaps counted once)

// Minkowski dilation by a square of half-width v (v >= 0)
ShapeList dilate(const ShapeList& in, i64 v);

bool contains(const Polygon& p, Point pt);  // closed containment

// true when shapes share boundary of positive length or overlap with
// positive area; single-point (corner) contact does not count
bool touches(const Polygon& a, const Polygon& b);

// min Euclidean separation floored to int nm; 0 when touching/overlapping
i64 min_separation(const Polygon& a, const Polygon& b);
i64 min_separation(const ShapeList& a, const ShapeList& b);

// minimum distance between opposing interior-facing parallel edges whose
// projections overlap; equals min(w,h) for a rectangle
i64 interior_min_width(const Polygon& p);

}  // namespace fv
