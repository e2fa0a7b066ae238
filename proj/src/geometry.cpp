#include "fieldcal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "fieldcal/error.hpp"

namespace fieldcal {

namespace {

// Twice the signed area (positive for counterclockwise winding).
double signed_area2(const Polygon2D& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    s += p.x() * q.y() - q.x() * p.y();
  }
  return s;
}

// Cross product (a - o) x (b - o); positive when b is left of ray o->a.
double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

double point_segment_distance(const Vec2& x, const Segment2D& seg) {
  // Canonicalize endpoint order so reversed segments give bit-identical
  // results (floating-point sums are order-sensitive otherwise).
  Vec2 a = seg.a;
  Vec2 b = seg.b;
  if (b.x() < a.x() || (b.x() == a.x() && b.y() < a.y())) std::swap(a, b);

  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (x - a).norm();

  const double z = (x - a).dot(d) / len2;
  if (z <= 0.0) return (x - a).norm();
  if (z >= 1.0) return (x - b).norm();
  return (x - (a + z * d)).norm();
}

std::optional<double> point_polyline_distance(const Vec2& x,
                                              const std::vector<Polyline2D>& pieces) {
  std::optional<double> best;
  const auto consider = [&best](double d) {
    if (!best || d < *best) best = d;
  };
  for (const Polyline2D& piece : pieces) {
    if (piece.empty()) continue;
    if (piece.size() == 1) {
      consider((x - piece.front()).norm());
      continue;
    }
    for (std::size_t i = 0; i + 1 < piece.size(); ++i) {
      consider(point_segment_distance(x, {piece[i], piece[i + 1]}));
    }
  }
  return best;
}

double polygon_area(const Polygon2D& poly) {
  if (poly.size() < 3) return 0.0;
  return 0.5 * std::abs(signed_area2(poly));
}

bool polygon_is_convex(const Polygon2D& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return true;
  int sign = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = cross(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]);
    if (c == 0.0) continue;  // collinear corner
    const int s = c > 0.0 ? 1 : -1;
    if (sign == 0) {
      sign = s;
    } else if (s != sign) {
      return false;
    }
  }
  return true;
}

Polygon2D clip_polygon(const Polygon2D& subject, const Polygon2D& clip) {
  if (clip.size() < 3) throw GeometryError("clip polygon needs at least 3 vertices");
  if (!polygon_is_convex(clip)) throw GeometryError("clip polygon must be convex");

  Polygon2D clip_ccw = clip;
  if (signed_area2(clip_ccw) < 0.0) std::reverse(clip_ccw.begin(), clip_ccw.end());

  Polygon2D out = subject;
  const std::size_t n = clip_ccw.size();
  for (std::size_t i = 0; i < n && !out.empty(); ++i) {
    const Vec2& ca = clip_ccw[i];
    const Vec2& cb = clip_ccw[(i + 1) % n];

    const Polygon2D in = std::move(out);
    out = {};
    const std::size_t m = in.size();
    for (std::size_t j = 0; j < m; ++j) {
      const Vec2& p = in[j];
      const Vec2& q = in[(j + 1) % m];
      const double side_p = cross(ca, cb, p);
      const double side_q = cross(ca, cb, q);
      const bool keep_p = side_p >= 0.0;
      const bool keep_q = side_q >= 0.0;
      if (keep_p) out.push_back(p);
      if (keep_p != keep_q) {
        const double t = side_p / (side_p - side_q);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return out;
}

double polygon_iou(const Polygon2D& p, const Polygon2D& q) {
  if (!polygon_is_convex(p) || !polygon_is_convex(q)) {
    throw GeometryError("iou operands must be convex polygons");
  }
  const double area_p = polygon_area(p);
  const double area_q = polygon_area(q);
  const bool empty_p = area_p == 0.0;
  const bool empty_q = area_q == 0.0;
  if (empty_p && empty_q) return 1.0;
  if (empty_p || empty_q) return 0.0;

  const double inter = polygon_area(clip_polygon(p, q));
  const double uni = area_p + area_q - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace fieldcal
