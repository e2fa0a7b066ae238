#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "fieldcal/types.hpp"

namespace fieldcal {

/// Plane-to-image homography mapping world ground coordinates (X, Y, 1) to
/// homogeneous pixel coordinates. Stored normalized: Frobenius norm 1 and
/// h(2,2) > 0 when that entry is nonzero. Construction throws ValidationError
/// for non-finite, zero, or singular (|det| <= 1e-12 after normalization)
/// matrices.
struct Homography {
  Mat3 h;

  Homography() : Homography(Mat3::Identity()) {}
  explicit Homography(const Mat3& m);
};

/// Pinhole camera with a single focal length, zero skew, and square pixels.
/// rotation/translation are world-to-camera: p_cam = R * p_world + t.
struct SimplifiedPinhole {
  double focal = 1.0;
  Vec2 principal_point{0.0, 0.0};
  Mat3 rotation = Mat3::Identity();
  Vec3 translation{0.0, 0.0, 0.0};

  /// Throws ValidationError unless focal > 0, everything is finite, and
  /// rotation is orthonormal with det +1 (both within 1e-9).
  void validate() const;

  /// The 3x3 intrinsic matrix K = [[f, 0, px], [0, f, py], [0, 0, 1]].
  Mat3 intrinsics() const;

  /// Camera center in world coordinates, -R^T t.
  Vec3 center() const;
};

/// Pinhole camera with even-order radial distortion applied in normalized
/// image coordinates: x_d = x * (1 + k1 r^2 + k2 r^4).
struct PinholeRadial {
  SimplifiedPinhole base;
  double k1 = 0.0;
  double k2 = 0.0;

  void validate() const;
};

using CameraModel = std::variant<Homography, SimplifiedPinhole, PinholeRadial>;

/// Validates whichever model the variant holds (Homography is validated on
/// construction, so it always passes).
void validate_camera(const CameraModel& camera);

/// Why a world point could not be projected.
enum class ProjectionFailure {
  none,
  behind_camera,  // camera-frame depth <= 1e-9 m, or homography maps to infinity
  off_plane,      // |Z| > 1e-9 m under a homography, which only covers Z = 0
  // Normalized radius falls outside the range where r * (1 + k1 r^2 + k2 r^4)
  // is increasing (or the factor itself is <= 0). Beyond that radius a
  // barrel-distortion polynomial folds the periphery back toward the image
  // center, producing mirror-image ghosts of geometry that is far outside the
  // field of view, so such points are treated as unprojectable.
  beyond_distortion_range,
};

/// Result of projecting one world point: either a finite pixel position or a
/// failure reason.
struct Projection2D {
  std::optional<Vec2> point;
  ProjectionFailure failure = ProjectionFailure::none;

  bool ok() const { return point.has_value(); }

  static Projection2D at(const Vec2& p) { return {p, ProjectionFailure::none}; }
  static Projection2D fail(ProjectionFailure why) { return {std::nullopt, why}; }
};

/// Radial distortion in normalized coordinates: x * (1 + k1 r^2 + k2 r^4).
Vec2 distort(const Vec2& normalized, double k1, double k2);

/// Projects one world point (meters) to pixels.
Projection2D project(const CameraModel& camera, const Vec3& world_point);

/// Projects a 3D polyline vertex-by-vertex and splits it wherever a vertex is
/// unprojectable. Pieces keep their vertices even when outside image bounds;
/// only runs of >= 2 projectable vertices survive. Returns an empty list when
/// nothing is projectable.
std::vector<Polyline2D> project_polyline(const CameraModel& camera,
                                         const std::vector<Vec3>& points);

/// Back-projects a pixel to the ground plane Z = 0 (meters). For radial
/// cameras the pixel is first undistorted by fixed-point iteration (20
/// iterations max, convergence 1e-12). Throws GeometryError when the viewing
/// ray is parallel to the ground (|direction_z| < 1e-12) or the undistortion
/// iteration fails to converge.
Vec3 ray_to_ground(const CameraModel& camera, const Vec2& image_point);

/// The ground-plane homography K [r1 r2 t] induced by a pinhole camera.
Homography ground_homography_of(const SimplifiedPinhole& camera);

/// Same, for a radial camera. Distortion cannot be represented by a
/// homography, so it is dropped; unless ignore_distortion is set, a nonzero
/// k1 or k2 raises ValidationError instead of silently degrading the model.
Homography ground_homography_of(const PinholeRadial& camera, bool ignore_distortion = false);

/// Variant dispatch: homographies pass through unchanged.
Homography ground_homography_of(const CameraModel& camera, bool ignore_distortion = false);

}  // namespace fieldcal
