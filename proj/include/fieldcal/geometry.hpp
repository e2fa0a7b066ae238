#pragma once

#include <optional>
#include <vector>

#include "fieldcal/types.hpp"

namespace fieldcal {

/// A 2D line segment in pixels. Degenerate segments (a == b) are allowed and
/// behave as a single point.
struct Segment2D {
  Vec2 a;
  Vec2 b;
};

/// Euclidean distance from x to the segment.
///
/// Uses the projection parameter z = ((x - a) . (b - a)) / |b - a|^2 and
/// clamps to the endpoints for z <= 0 / z >= 1. The result is bit-exact under
/// segment reversal: d(x, ab) == d(x, ba).
double point_segment_distance(const Vec2& x, const Segment2D& seg);

/// Shortest distance from x to any segment of any piece. A single-vertex
/// piece contributes its point-to-point distance; empty pieces are skipped.
/// Returns nothing when no piece has a vertex (callers treat that as
/// "no geometry to measure against").
std::optional<double> point_polyline_distance(const Vec2& x,
                                              const std::vector<Polyline2D>& pieces);

/// Absolute shoelace area. Fewer than 3 vertices -> 0.
double polygon_area(const Polygon2D& poly);

/// True if the polygon is convex (collinear runs allowed). Orientation may be
/// either way; fewer than 3 vertices count as convex.
bool polygon_is_convex(const Polygon2D& poly);

/// Sutherland-Hodgman clip of subject against a convex clip polygon.
/// Throws GeometryError if the clip polygon is not convex. The clip
/// orientation is normalized internally, so either winding is accepted.
Polygon2D clip_polygon(const Polygon2D& subject, const Polygon2D& clip);

/// Intersection-over-union of two convex polygons, in [0, 1].
///
/// Degenerate operands (< 3 vertices or zero area) are treated as empty:
/// both empty -> 1.0, exactly one empty -> 0.0. Non-convex operands raise
/// GeometryError, since a self-intersecting quadrilateral means the geometry
/// upstream was invalid.
double polygon_iou(const Polygon2D& p, const Polygon2D& q);

}  // namespace fieldcal
