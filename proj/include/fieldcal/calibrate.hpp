#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "fieldcal/camera.hpp"
#include "fieldcal/lm.hpp"
#include "fieldcal/metrics.hpp"
#include "fieldcal/pitch.hpp"
#include "fieldcal/types.hpp"

namespace fieldcal {

/// One world<->image point pair for direct estimation.
struct Correspondence {
  Vec3 world;  // meters; Z must be ~0 when used for homography estimation
  Vec2 image;  // pixels
  double weight = 1.0;
};

/// Normalized direct linear transform. Both point sets are translated to
/// centroid zero and scaled to RMS distance sqrt(2) before solving the
/// stacked 2n x 9 system by smallest singular vector. Throws FitError for
/// fewer than 4 correspondences or a degenerate (collinear) configuration,
/// ValidationError for non-finite input, negative weights, or off-plane
/// world points.
Homography dlt_homography(const std::vector<Correspondence>& correspondences);

/// Closed-form pinhole seed from a ground homography, assuming square pixels,
/// zero skew, and the principal point at the image center. The focal length
/// comes from the two orthonormality constraints on the first two columns of
/// K^-1 H (solved jointly in least squares); the rotation is the nearest
/// orthonormal matrix to the scaled columns, and the sign is chosen so the
/// pitch center sits in front of the camera. Throws FitError when the view is
/// degenerate for this construction (for example fronto-parallel overhead,
/// where the focal length is unobservable).
SimplifiedPinhole init_pinhole_from_homography(const Homography& h, ImageSize image_size);

/// Fixed-focal variant: decomposes K^-1 H into rotation and translation for a
/// caller-supplied focal length (used for multi-start seeding when the
/// closed-form focal estimate fails or misleads under distortion).
SimplifiedPinhole pinhole_from_homography(const Homography& h, ImageSize image_size,
                                          double focal);

struct FitOptions {
  int max_iterations = 200;
  double max_spacing = kDefaultMetricSpacing;  // template sampling for residuals
  bool unlock_k2 = false;  // also optimize k2 (otherwise frozen at its seed value)
  // Fixed-parameter mask. Fixed blocks keep their seed values.
  bool fix_focal = false;
  bool fix_rotation = false;
  bool fix_translation = false;
  bool fix_k1 = false;
};

/// The nonlinear least-squares surface behind refine_camera: one residual per
/// annotated point, equal to its distance to the projection of that class's
/// sampled template element (infinite when the class does not project at
/// all). Parameters are packed as (focal, rotation delta as axis-angle,
/// translation, k1[, k2]) minus whatever the options fix. Exposed so tests
/// can probe residuals and Jacobians directly.
class CameraResidualProblem {
 public:
  CameraResidualProblem(const PinholeRadial& seed, const std::vector<FieldElement>& elements,
                        const ImageAnnotation& annotation, const FitOptions& options = {});

  int parameter_count() const { return static_cast<int>(initial_params_.size()); }
  int residual_count() const { return residual_count_; }
  const Eigen::VectorXd& initial_params() const { return initial_params_; }

  /// The camera encoded by a parameter vector (fixed blocks come from the seed).
  PinholeRadial camera_at(const Eigen::VectorXd& params) const;

  /// Distances of all annotated points to their class projections under the
  /// camera encoded by `params`.
  Eigen::VectorXd residuals(const Eigen::VectorXd& params) const;

 private:
  PinholeRadial seed_;
  FitOptions options_;
  std::vector<std::pair<std::vector<Vec3>, std::vector<Vec2>>> classes_;  // world samples, points
  Eigen::VectorXd initial_params_;
  int residual_count_ = 0;
};

struct RefineResult {
  PinholeRadial camera;
  FitReport report;
};

/// Levenberg-Marquardt refinement of a radial pinhole camera against point
/// annotations. Throws FitError when under-determined or when the seed's
/// cost is not finite (some annotated class does not project under the seed).
RefineResult refine_camera(const PinholeRadial& initial,
                           const std::vector<FieldElement>& elements,
                           const ImageAnnotation& annotation, const FitOptions& options = {});

struct HomographyRefineResult {
  Homography homography;
  FitReport report;
};

/// Same idea for a plain homography: optimizes the nine matrix entries
/// against annotated points of ground classes only (a homography cannot
/// explain goal geometry). The overall-scale gauge freedom is left to the
/// damping to handle; the result is re-normalized on construction.
HomographyRefineResult refine_homography(const Homography& initial,
                                         const std::vector<FieldElement>& elements,
                                         const ImageAnnotation& annotation,
                                         const FitOptions& options = {});

/// End-to-end fit of a radial pinhole camera to one annotated image. First a
/// centered one-parameter distortion estimate straightens the annotation
/// (grid search plus golden-section polish on the total-least-squares line
/// residual of the rectilinear ground classes), then line-intersection
/// correspondences and DLT produce a ground homography, which seeds pinhole
/// decompositions over the closed-form focal plus a deterministic focal grid.
/// Each seed runs a two-stage LM (distortion frozen, then released); the
/// lowest-cost result wins, stopping early once the fit is clearly tight. A
/// caller-supplied `seed` skips the seeding stages entirely. Throws FitError
/// when no seed leads to a usable fit.
RefineResult fit_camera(const std::vector<FieldElement>& elements,
                        const ImageAnnotation& annotation, const FitOptions& options = {},
                        const std::optional<PinholeRadial>& seed = std::nullopt);

/// Builds world<->image correspondences for dlt_homography from annotations
/// alone: fits a total-least-squares image line to every rectilinear ground
/// class with >= 2 points, and intersects pairs of those lines whose world
/// segments (extended slightly past their endpoints) actually cross. The
/// world-side intersection comes from the template, so the result is exact on
/// noise-free data.
std::vector<Correspondence> line_intersection_correspondences(
    const std::vector<FieldElement>& elements, const ImageAnnotation& annotation);

}  // namespace fieldcal
