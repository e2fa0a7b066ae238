#pragma once

#include <Eigen/Core>

#include <vector>

namespace fieldcal {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Image dimensions in pixels.
struct ImageSize {
  int width = 0;
  int height = 0;

  bool operator==(const ImageSize&) const = default;
};

/// A 2D polyline as an ordered vertex list (pixels).
using Polyline2D = std::vector<Vec2>;

/// A 2D polygon as an ordered vertex list (no implicit closing vertex).
using Polygon2D = std::vector<Vec2>;

/// True if p lies inside the closed pixel box [0,w] x [0,h].
inline bool in_image(const Vec2& p, ImageSize size) {
  return p.x() >= 0.0 && p.x() <= static_cast<double>(size.width) &&
         p.y() >= 0.0 && p.y() <= static_cast<double>(size.height);
}

}  // namespace fieldcal
