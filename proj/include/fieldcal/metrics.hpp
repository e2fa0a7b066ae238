#pragma once

#include <map>
#include <optional>
#include <vector>

#include "fieldcal/camera.hpp"
#include "fieldcal/pitch.hpp"
#include "fieldcal/types.hpp"

namespace fieldcal {

/// Sampling step used when turning template elements into polylines for
/// metric evaluation. At broadcast zoom a 0.2 m chord keeps the sagitta error
/// well under a pixel, far below any useful tolerance.
inline constexpr double kDefaultMetricSpacing = 0.2;

/// Ground-truth point annotations for one image: per semantic class, an
/// ordered list of pixel positions.
struct ImageAnnotation {
  ImageSize image_size;
  std::map<SemanticClass, std::vector<Vec2>> elements;

  /// Throws ValidationError unless the image size is positive, every
  /// annotated class has at least one finite point, and all points lie
  /// within 5% of each image dimension outside the frame (annotation tools
  /// allow slight overshoot).
  void validate() const;
};

/// Template elements pre-sampled at a fixed spacing, so a dataset run does
/// not redo the world-space sampling for every image.
struct SampledTemplate {
  std::vector<FieldElement> elements;
  double max_spacing = kDefaultMetricSpacing;
  std::vector<std::vector<Vec3>> points;  // parallel to elements

  static SampledTemplate build(const std::vector<FieldElement>& elements, double max_spacing);
};

/// Tolerance-independent evaluation state for one template element: whether
/// it was annotated, whether the camera predicts it inside the frame, and the
/// per-annotated-point distances to its projection. Everything any tolerance
/// needs is here, which is what makes evaluations at several tolerances
/// mutually consistent.
struct ClassOutcome {
  SemanticClass cls = SemanticClass::SideLineTop;
  bool annotated = false;
  bool predicted = false;
  int annotated_points = 0;
  std::vector<double> distances;  // one per annotated point, when annotated && predicted
};

enum class ClassVerdict {
  true_positive,
  fp_inaccurate,    // annotated and predicted, but some point at distance >= tau
  fp_hallucinated,  // predicted but not annotated
  false_negative,   // annotated but not predicted
};

struct ConfusionCounts {
  int tp = 0;
  int fp_hallucinated = 0;
  int fp_inaccurate = 0;
  int fn = 0;

  int fp() const { return fp_hallucinated + fp_inaccurate; }
};

struct ClassEval {
  SemanticClass cls = SemanticClass::SideLineTop;
  ClassVerdict verdict = ClassVerdict::false_negative;
  std::vector<double> point_distances;     // per annotated point (empty when hallucinated)
  std::optional<double> worst_distance;    // max of point_distances, when any
};

struct ImageEval {
  double tau = 0.0;
  ConfusionCounts counts;
  std::vector<ClassEval> classes;  // only classes that were annotated or predicted
  double jaccard = 1.0;
  bool vacuous = false;  // nothing annotated, nothing predicted: 1.0 by convention
  std::optional<double> reprojection_px;    // unset when no annotated class is predicted
  std::optional<double> reprojection_norm;  // reprojection_px / image height
  int excluded_points = 0;  // annotated points whose class the camera does not predict
};

/// True if any vertex of any piece lies inside the closed image box.
bool any_vertex_in_image(const std::vector<Polyline2D>& pieces, ImageSize size);

/// Projects every template element with the camera and measures the annotated
/// points of each class against its projection. The result is independent of
/// the tolerance tau; feed it to eval_at_tau.
std::vector<ClassOutcome> class_outcomes(const CameraModel& camera,
                                         const SampledTemplate& sampled,
                                         const ImageAnnotation& annotation);

/// Scores precomputed outcomes at one tolerance. An annotated-and-predicted
/// class is a true positive iff every annotated point is strictly closer than
/// tau to the projected element; otherwise it is a single false positive.
/// Predicted-but-unannotated classes are hallucinated false positives,
/// annotated-but-unpredicted classes are false negatives.
ImageEval eval_at_tau(const std::vector<ClassOutcome>& outcomes, ImageSize image_size,
                      double tau);

/// One-shot evaluation of a single image at one tolerance.
ImageEval evaluate_image(const CameraModel& camera, const std::vector<FieldElement>& elements,
                         const ImageAnnotation& annotation, double tau,
                         double max_spacing = kDefaultMetricSpacing);

struct DatasetSummary {
  int images = 0;
  ConfusionCounts counts;       // summed over images
  double micro_jaccard = 1.0;   // from summed counts (1.0 when all counts are zero)
  double mean_jaccard = 0.0;    // mean of per-image jaccard
  std::optional<double> mean_reprojection_px;
  std::optional<double> median_reprojection_px;
  std::optional<double> mean_reprojection_norm;
  int images_without_reprojection = 0;
};

/// Micro-aggregates counts over images (sum, then the Jaccard ratio) and
/// reports mean/median reprojection over the images where it was defined.
/// Throws ValidationError on an empty list.
DatasetSummary aggregate(const std::vector<ImageEval>& evals);

struct ReprojectionError {
  std::optional<double> pixels;      // mean over usable annotated points
  std::optional<double> normalized;  // pixels / image height
  int excluded_points = 0;           // points of annotated classes the camera does not predict
};

/// Mean image-space distance between annotated points and the projection of
/// their class, over classes both annotated and predicted.
ReprojectionError reprojection_error(const CameraModel& camera,
                                     const std::vector<FieldElement>& elements,
                                     const ImageAnnotation& annotation,
                                     double max_spacing = kDefaultMetricSpacing);

/// Mean ground-plane distance in meters between the two cameras'
/// back-projections, over a pixel grid of roughly n_samples points covering
/// the part of the image that looks at the pitch (per the ground-truth
/// camera). Unset when no sampled pixel lands on the pitch.
std::optional<double> projection_error(const CameraModel& estimated,
                                       const CameraModel& ground_truth, const PitchSpec& pitch,
                                       ImageSize image_size, int n_samples = 2500);

/// Intersection-over-union between the pitch rectangle and its image under
/// estimated-then-inverse-ground-truth, in world coordinates. The estimated
/// model is reduced to its ground homography (distortion dropped — this
/// metric predates distortion-aware models, which is exactly its weakness).
double iou_whole(const CameraModel& estimated, const Homography& ground_truth,
                 const PitchSpec& pitch);

/// Same, but both polygons are first clipped to the visible region (the image
/// frame back-projected through the ground truth).
double iou_part(const CameraModel& estimated, const Homography& ground_truth,
                const PitchSpec& pitch, ImageSize image_size);

}  // namespace fieldcal
