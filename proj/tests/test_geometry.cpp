#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fieldcal/error.hpp"
#include "fieldcal/geometry.hpp"

using namespace fieldcal;

namespace {

// Independent oracle: minimum distance to a dense sampling of the segment.
// The squared distance is an exact quadratic in the parameter, so refining the
// best bracket with that parabola's vertex recovers the true minimum.
double brute_segment_distance(const Vec2& x, const Vec2& a, const Vec2& b, int samples) {
  double best = std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    const double d = (x - (a + t * (b - a))).norm();
    if (d < best) {
      best = d;
      best_i = i;
    }
  }
  if (best_i == 0 || best_i == samples) return best;
  // Quadratic refinement on squared distance over the neighboring bracket.
  auto d2 = [&](double t) { return (x - (a + t * (b - a))).squaredNorm(); };
  const double h = 1.0 / samples;
  const double t0 = (best_i - 1) * h, t1 = best_i * h, t2 = (best_i + 1) * h;
  const double f0 = d2(t0), f1 = d2(t1), f2 = d2(t2);
  const double denom = f0 - 2.0 * f1 + f2;
  if (denom <= 0.0) return best;
  double t = t1 + 0.5 * h * (f0 - f2) / denom;
  t = std::clamp(t, 0.0, 1.0);
  return std::sqrt(d2(t));
}

Polygon2D unit_square(double dx = 0.0, double dy = 0.0) {
  return {Vec2(dx, dy), Vec2(dx + 1, dy), Vec2(dx + 1, dy + 1), Vec2(dx, dy + 1)};
}

// Random convex polygon: convex hull of random points.
Polygon2D random_convex(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Vec2> pts;
  for (int i = 0; i < 12; ++i) pts.emplace_back(u(rng), u(rng));
  // Gift-wrap hull.
  auto lowest = std::min_element(pts.begin(), pts.end(), [](const Vec2& p, const Vec2& q) {
    return p.y() < q.y() || (p.y() == q.y() && p.x() < q.x());
  });
  std::swap(*pts.begin(), *lowest);
  const Vec2 pivot = pts[0];
  std::sort(pts.begin() + 1, pts.end(), [&](const Vec2& p, const Vec2& q) {
    const double cr = (p - pivot).x() * (q - pivot).y() - (p - pivot).y() * (q - pivot).x();
    if (cr != 0.0) return cr > 0.0;
    return (p - pivot).squaredNorm() < (q - pivot).squaredNorm();
  });
  Polygon2D hull;
  for (const Vec2& p : pts) {
    while (hull.size() >= 2) {
      const Vec2 u2 = hull[hull.size() - 1] - hull[hull.size() - 2];
      const Vec2 v = p - hull[hull.size() - 1];
      if (u2.x() * v.y() - u2.y() * v.x() <= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }
  return hull;
}

}  // namespace

TEST_CASE("point-to-segment distance: interior foot, clamped ends, degenerate segment") {
  const Segment2D seg{Vec2(0, 0), Vec2(2, 0)};
  CHECK(point_segment_distance(Vec2(1, 1), seg) == 1.0);
  CHECK(point_segment_distance(Vec2(3, 0), seg) == 1.0);
  CHECK(point_segment_distance(Vec2(-3, 4), seg) == 5.0);  // 3-4-5 triangle
  CHECK(point_segment_distance(Vec2(0.5, 0), seg) == 0.0);

  const Segment2D dot{Vec2(2, 3), Vec2(2, 3)};
  CHECK(point_segment_distance(Vec2(5, 7), dot) == 5.0);
}

TEST_CASE("point-to-segment distance is bit-exact under segment reversal") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 20000; ++i) {
    const Vec2 x(u(rng), u(rng)), a(u(rng), u(rng)), b(u(rng), u(rng));
    const double fwd = point_segment_distance(x, {a, b});
    const double rev = point_segment_distance(x, {b, a});
    CHECK(fwd == rev);
  }
}

TEST_CASE("point-to-segment distance matches a dense-sampling oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const Vec2 x(u(rng), u(rng)), a(u(rng), u(rng)), b(u(rng), u(rng));
    const double fast = point_segment_distance(x, {a, b});
    const double brute = brute_segment_distance(x, a, b, 10000);
    worst = std::max(worst, std::abs(fast - brute));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("distance is zero exactly when the point lies on the segment") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::uniform_real_distribution<double> t01(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec2 a(u(rng), u(rng)), b(u(rng), u(rng));
    const Vec2 on = a + t01(rng) * (b - a);
    CHECK(point_segment_distance(on, {a, b}) < 1e-12);
  }
}

TEST_CASE("point-to-polyline distance: vertices, collinear pieces, empty input") {
  const std::vector<Polyline2D> poly{{Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)}};
  CHECK(point_polyline_distance(Vec2(1, 0), poly) == 0.0);
  CHECK(point_polyline_distance(Vec2(1.5, 2), poly) == 2.0);

  const std::vector<Polyline2D> with_single{{Vec2(10, 10)}};
  CHECK(point_polyline_distance(Vec2(10, 14), with_single) == 4.0);

  CHECK(!point_polyline_distance(Vec2(0, 0), {}).has_value());
  CHECK(!point_polyline_distance(Vec2(0, 0), {Polyline2D{}}).has_value());
}

TEST_CASE("point-to-polyline distance equals an independent minimum over all segments") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::uniform_int_distribution<int> n_pieces(1, 3), n_verts(2, 6);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Polyline2D> pieces;
    for (int p = 0; p < n_pieces(rng); ++p) {
      Polyline2D piece;
      for (int v = 0, count = n_verts(rng); v < count; ++v) piece.emplace_back(u(rng), u(rng));
      pieces.push_back(std::move(piece));
    }
    const Vec2 x(u(rng), u(rng));
    double expected = std::numeric_limits<double>::infinity();
    for (const auto& piece : pieces) {
      for (size_t i = 1; i < piece.size(); ++i) {
        expected = std::min(expected, brute_segment_distance(x, piece[i - 1], piece[i], 4000));
      }
    }
    auto got = point_polyline_distance(x, pieces);
    REQUIRE(got.has_value());
    CHECK(std::abs(*got - expected) < 1e-6);
  }
}

TEST_CASE("polygon area: shoelace basics") {
  CHECK(polygon_area(unit_square()) == 1.0);
  CHECK(polygon_area({Vec2(0, 0), Vec2(2, 0), Vec2(0, 2)}) == 2.0);
  CHECK(polygon_area({Vec2(0, 0), Vec2(1, 1)}) == 0.0);
  CHECK(polygon_area({}) == 0.0);
  // Orientation does not matter.
  Polygon2D cw = unit_square();
  std::reverse(cw.begin(), cw.end());
  CHECK(polygon_area(cw) == 1.0);
}

TEST_CASE("convexity test accepts collinear runs and rejects a chevron") {
  CHECK(polygon_is_convex(unit_square()));
  CHECK(polygon_is_convex({Vec2(0, 0), Vec2(1, 0), Vec2(2, 0), Vec2(2, 1), Vec2(0, 1)}));
  CHECK(!polygon_is_convex({Vec2(0, 0), Vec2(2, 0), Vec2(1, 0.3), Vec2(1, 2)}));
  CHECK(polygon_is_convex({Vec2(0, 0), Vec2(1, 0)}));  // degenerate counts as convex
}

TEST_CASE("clipping a square by itself and by a shifted copy") {
  const Polygon2D self = clip_polygon(unit_square(), unit_square());
  CHECK(polygon_area(self) == doctest::Approx(1.0).epsilon(1e-12));

  const Polygon2D quarter = clip_polygon(unit_square(), unit_square(0.5, 0.5));
  CHECK(polygon_area(quarter) == doctest::Approx(0.25).epsilon(1e-12));

  const Polygon2D empty = clip_polygon(unit_square(), unit_square(5.0, 5.0));
  CHECK(polygon_area(empty) == 0.0);
}

TEST_CASE("clipping against a non-convex clip polygon throws") {
  const Polygon2D chevron{Vec2(0, 0), Vec2(2, 0), Vec2(1, 0.3), Vec2(1, 2)};
  CHECK_THROWS_AS(clip_polygon(unit_square(), chevron), GeometryError);
}

TEST_CASE("clip area matches a Monte-Carlo estimate on random convex pairs") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 5; ++trial) {
    const Polygon2D p = random_convex(rng, 10.0);
    const Polygon2D q = random_convex(rng, 10.0);
    REQUIRE(p.size() >= 3);
    REQUIRE(q.size() >= 3);
    const double area = polygon_area(clip_polygon(p, q));

    // Point-in-convex-polygon by sign of cross products.
    auto inside = [](const Polygon2D& poly, const Vec2& pt) {
      int sign = 0;
      for (size_t i = 0; i < poly.size(); ++i) {
        const Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
        const double cr = (b - a).x() * (pt - a).y() - (b - a).y() * (pt - a).x();
        if (cr == 0.0) continue;
        const int s = cr > 0.0 ? 1 : -1;
        if (sign == 0) sign = s;
        if (s != sign) return false;
      }
      return true;
    };

    const int n = 1000000;
    std::uniform_real_distribution<double> box(-10.0, 10.0);
    int hits = 0;
    for (int i = 0; i < n; ++i) {
      const Vec2 pt(box(rng), box(rng));
      if (inside(p, pt) && inside(q, pt)) ++hits;
    }
    const double box_area = 400.0;
    const double estimate = box_area * hits / n;
    const double p_hat = static_cast<double>(hits) / n;
    const double sigma = box_area * std::sqrt(std::max(p_hat * (1.0 - p_hat), 1e-12) / n);
    CHECK(std::abs(estimate - area) < 3.0 * sigma + 1e-9);
  }
}

TEST_CASE("iou basics: identical, disjoint, half-overlapping, empty operands") {
  CHECK(polygon_iou(unit_square(), unit_square()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(polygon_iou(unit_square(), unit_square(3, 3)) == 0.0);
  // Unit squares overlapping half: 0.5 / (1 + 1 - 0.5) = 1/3.
  CHECK(polygon_iou(unit_square(), unit_square(0.5, 0.0)) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  CHECK(polygon_iou({}, {}) == 1.0);
  CHECK(polygon_iou(unit_square(), {}) == 0.0);
  CHECK(polygon_iou({}, unit_square()) == 0.0);

  const Polygon2D chevron{Vec2(0, 0), Vec2(2, 0), Vec2(1, 0.3), Vec2(1, 2)};
  CHECK_THROWS_AS(polygon_iou(chevron, unit_square()), GeometryError);
}

TEST_CASE("iou is symmetric and bounded on random convex pairs") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    const Polygon2D p = random_convex(rng, 5.0);
    const Polygon2D q = random_convex(rng, 5.0);
    const double pq = polygon_iou(p, q);
    const double qp = polygon_iou(q, p);
    CHECK(pq >= 0.0);
    CHECK(pq <= 1.0);
    CHECK(pq == doctest::Approx(qp).epsilon(1e-9));
  }
}
