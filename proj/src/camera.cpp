#include "fieldcal/camera.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <string>

#include "fieldcal/error.hpp"

namespace fieldcal {

namespace {

constexpr double kDepthEps = 1e-9;      // minimum camera-frame depth, meters
constexpr double kPlaneTol = 1e-9;      // |Z| tolerance for homography inputs, meters
constexpr double kHomogEps = 1e-12;     // homogeneous-scale guard
constexpr double kUndistortTol = 1e-12; // fixed-point convergence, normalized units
constexpr int kUndistortIters = 20;

std::string format_residual(double r) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", r);
  return buf;
}

// Undistorts a normalized image point by fixed-point iteration on
// x <- x_d / (1 + k1 r(x)^2 + k2 r(x)^4). Throws on divergence.
Vec2 undistort(const Vec2& distorted, double k1, double k2) {
  Vec2 x = distorted;
  for (int i = 0; i < kUndistortIters; ++i) {
    const double r2 = x.squaredNorm();
    const double scale = 1.0 + r2 * (k1 + k2 * r2);
    if (!std::isfinite(scale) || std::abs(scale) < kHomogEps) break;
    const Vec2 next = distorted / scale;
    if (!next.allFinite()) break;
    if ((next - x).norm() <= kUndistortTol) return next;
    x = next;
  }
  const double residual = (distort(x, k1, k2) - distorted).norm();
  throw GeometryError("undistortion did not converge (residual " + format_residual(residual) +
                      " in normalized units)");
}

Projection2D project_pinhole(const SimplifiedPinhole& cam, const Vec3& world, double k1,
                             double k2) {
  const Vec3 p = cam.rotation * world + cam.translation;
  if (p.z() <= kDepthEps) return Projection2D::fail(ProjectionFailure::behind_camera);
  Vec2 n(p.x() / p.z(), p.y() / p.z());
  if (k1 != 0.0 || k2 != 0.0) {
    // Only the monotonic branch of the distortion polynomial is meaningful:
    // once d/dr [r (1 + k1 r^2 + k2 r^4)] <= 0 (or the factor goes
    // non-positive) the model folds far-off-axis points back into the frame.
    const double r2 = n.squaredNorm();
    const double factor = 1.0 + r2 * (k1 + r2 * k2);
    const double slope = 1.0 + r2 * (3.0 * k1 + r2 * 5.0 * k2);
    if (factor <= 0.0 || slope <= 0.0) {
      return Projection2D::fail(ProjectionFailure::beyond_distortion_range);
    }
    n = distort(n, k1, k2);
  }
  return Projection2D::at(cam.focal * n + cam.principal_point);
}

Vec3 ray_to_ground_pinhole(const SimplifiedPinhole& cam, const Vec2& normalized) {
  const Vec3 dir_world = cam.rotation.transpose() * Vec3(normalized.x(), normalized.y(), 1.0);
  if (std::abs(dir_world.z()) < kHomogEps) {
    throw GeometryError("viewing ray does not intersect the ground plane");
  }
  const Vec3 center = cam.center();
  const double s = -center.z() / dir_world.z();
  Vec3 ground = center + s * dir_world;
  ground.z() = 0.0;  // kill floating-point residue; the point is on the plane by construction
  return ground;
}

}  // namespace

Homography::Homography(const Mat3& m) {
  if (!m.allFinite()) throw ValidationError("homography entries must be finite");
  const double norm = m.norm();
  if (norm == 0.0) throw ValidationError("homography must be nonzero");
  // Skip the rescale when the matrix is already unit-norm so that
  // normalization is idempotent (read/write round trips stay bit-identical).
  h = std::abs(norm - 1.0) <= 1e-12 ? m : Mat3(m / norm);
  if (h(2, 2) < 0.0) h = -h;
  if (std::abs(h.determinant()) <= 1e-12) throw ValidationError("homography is singular");
}

void SimplifiedPinhole::validate() const {
  if (!std::isfinite(focal) || focal <= 0.0) {
    throw ValidationError("camera focal length must be finite and positive");
  }
  if (!principal_point.allFinite() || !rotation.allFinite() || !translation.allFinite()) {
    throw ValidationError("camera parameters must be finite");
  }
  const Mat3 gram = rotation.transpose() * rotation;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ValidationError("camera rotation is not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw ValidationError("camera rotation must have determinant +1");
  }
}

Mat3 SimplifiedPinhole::intrinsics() const {
  Mat3 k = Mat3::Zero();
  k(0, 0) = focal;
  k(1, 1) = focal;
  k(0, 2) = principal_point.x();
  k(1, 2) = principal_point.y();
  k(2, 2) = 1.0;
  return k;
}

Vec3 SimplifiedPinhole::center() const { return -(rotation.transpose() * translation); }

void PinholeRadial::validate() const {
  base.validate();
  if (!std::isfinite(k1) || !std::isfinite(k2)) {
    throw ValidationError("distortion coefficients must be finite");
  }
}

void validate_camera(const CameraModel& camera) {
  if (const auto* p = std::get_if<SimplifiedPinhole>(&camera)) {
    p->validate();
  } else if (const auto* r = std::get_if<PinholeRadial>(&camera)) {
    r->validate();
  }
  // Homography enforces its invariants on construction.
}

Vec2 distort(const Vec2& normalized, double k1, double k2) {
  const double r2 = normalized.squaredNorm();
  return normalized * (1.0 + r2 * (k1 + k2 * r2));
}

Projection2D project(const CameraModel& camera, const Vec3& world_point) {
  if (const auto* h = std::get_if<Homography>(&camera)) {
    if (std::abs(world_point.z()) > kPlaneTol) {
      return Projection2D::fail(ProjectionFailure::off_plane);
    }
    const Vec3 v = h->h * Vec3(world_point.x(), world_point.y(), 1.0);
    if (std::abs(v.z()) < kHomogEps) {
      return Projection2D::fail(ProjectionFailure::behind_camera);
    }
    return Projection2D::at(Vec2(v.x() / v.z(), v.y() / v.z()));
  }
  if (const auto* p = std::get_if<SimplifiedPinhole>(&camera)) {
    return project_pinhole(*p, world_point, 0.0, 0.0);
  }
  const auto& r = std::get<PinholeRadial>(camera);
  return project_pinhole(r.base, world_point, r.k1, r.k2);
}

std::vector<Polyline2D> project_polyline(const CameraModel& camera,
                                         const std::vector<Vec3>& points) {
  std::vector<Polyline2D> pieces;
  Polyline2D current;
  const auto flush = [&] {
    if (current.size() >= 2) pieces.push_back(std::move(current));
    current.clear();
  };
  for (const Vec3& world : points) {
    const Projection2D proj = project(camera, world);
    if (proj.ok()) {
      current.push_back(*proj.point);
    } else {
      flush();
    }
  }
  flush();
  return pieces;
}

Vec3 ray_to_ground(const CameraModel& camera, const Vec2& image_point) {
  if (const auto* h = std::get_if<Homography>(&camera)) {
    const Vec3 g = h->h.inverse() * Vec3(image_point.x(), image_point.y(), 1.0);
    if (std::abs(g.z()) < kHomogEps) {
      throw GeometryError("viewing ray does not intersect the ground plane");
    }
    return {g.x() / g.z(), g.y() / g.z(), 0.0};
  }
  if (const auto* p = std::get_if<SimplifiedPinhole>(&camera)) {
    const Vec2 n = (image_point - p->principal_point) / p->focal;
    return ray_to_ground_pinhole(*p, n);
  }
  const auto& r = std::get<PinholeRadial>(camera);
  const Vec2 n_dist = (image_point - r.base.principal_point) / r.base.focal;
  return ray_to_ground_pinhole(r.base, undistort(n_dist, r.k1, r.k2));
}

Homography ground_homography_of(const SimplifiedPinhole& camera) {
  Mat3 m;
  m.col(0) = camera.rotation.col(0);
  m.col(1) = camera.rotation.col(1);
  m.col(2) = camera.translation;
  return Homography(camera.intrinsics() * m);
}

Homography ground_homography_of(const PinholeRadial& camera, bool ignore_distortion) {
  if (!ignore_distortion && (camera.k1 != 0.0 || camera.k2 != 0.0)) {
    throw ValidationError(
        "camera has radial distortion, which a homography cannot represent; "
        "pass ignore_distortion to drop it explicitly");
  }
  return ground_homography_of(camera.base);
}

Homography ground_homography_of(const CameraModel& camera, bool ignore_distortion) {
  if (const auto* h = std::get_if<Homography>(&camera)) return *h;
  if (const auto* p = std::get_if<SimplifiedPinhole>(&camera)) return ground_homography_of(*p);
  return ground_homography_of(std::get<PinholeRadial>(camera), ignore_distortion);
}

}  // namespace fieldcal
