#include "fieldcal/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fieldcal/error.hpp"
#include "fieldcal/geometry.hpp"

namespace fieldcal {

namespace {

// Pools all per-point distances of annotated-and-predicted classes.
ReprojectionError pool_reprojection(const std::vector<ClassOutcome>& outcomes,
                                    ImageSize image_size) {
  ReprojectionError out;
  double sum = 0.0;
  int used = 0;
  for (const ClassOutcome& oc : outcomes) {
    if (!oc.annotated) continue;
    if (!oc.predicted) {
      out.excluded_points += oc.annotated_points;
      continue;
    }
    for (double d : oc.distances) {
      sum += d;
      ++used;
    }
  }
  if (used > 0) {
    out.pixels = sum / used;
    out.normalized = *out.pixels / static_cast<double>(image_size.height);
  }
  return out;
}

Vec2 apply_homography(const Mat3& m, const Vec2& p) {
  const Vec3 v = m * Vec3(p.x(), p.y(), 1.0);
  if (std::abs(v.z()) < 1e-12) {
    throw GeometryError("quadrilateral corner maps to the plane at infinity");
  }
  return {v.x() / v.z(), v.y() / v.z()};
}

Polygon2D pitch_rectangle(const PitchSpec& pitch) {
  const double hl = pitch.length / 2.0;
  const double hw = pitch.width / 2.0;
  return {{-hl, -hw}, {hl, -hw}, {hl, hw}, {-hl, hw}};
}

// The pitch rectangle as seen by `estimated`, pulled back to world
// coordinates through the ground truth.
Polygon2D backprojected_rectangle(const CameraModel& estimated, const Homography& ground_truth,
                                  const PitchSpec& pitch) {
  // The legacy IoU metrics are defined on homographies, so distortion is
  // dropped here by design.
  const Mat3 est_h = ground_homography_of(estimated, /*ignore_distortion=*/true).h;
  const Mat3 gt_inv = ground_truth.h.inverse();
  Polygon2D quad;
  for (const Vec2& corner : pitch_rectangle(pitch)) {
    quad.push_back(apply_homography(gt_inv, apply_homography(est_h, corner)));
  }
  if (!polygon_is_convex(quad)) {
    throw GeometryError("back-projected pitch rectangle is self-intersecting");
  }
  return quad;
}

}  // namespace

void ImageAnnotation::validate() const {
  if (image_size.width <= 0 || image_size.height <= 0) {
    throw ValidationError("annotation image size must be positive");
  }
  const double w = image_size.width;
  const double h = image_size.height;
  for (const auto& [cls, points] : elements) {
    if (points.empty()) {
      throw ValidationError(std::string("annotated class '") + std::string(class_label(cls)) +
                            "' has no points");
    }
    for (const Vec2& p : points) {
      if (!p.allFinite()) {
        throw ValidationError(std::string("annotated class '") + std::string(class_label(cls)) +
                              "' has a non-finite point");
      }
      if (p.x() < -0.05 * w || p.x() > 1.05 * w || p.y() < -0.05 * h || p.y() > 1.05 * h) {
        throw ValidationError(std::string("annotated class '") + std::string(class_label(cls)) +
                              "' has a point too far outside the image");
      }
    }
  }
}

SampledTemplate SampledTemplate::build(const std::vector<FieldElement>& elements,
                                       double max_spacing) {
  SampledTemplate out;
  out.elements = elements;
  out.max_spacing = max_spacing;
  out.points.reserve(elements.size());
  for (const FieldElement& element : elements) {
    out.points.push_back(sample_element(element, max_spacing));
  }
  return out;
}

bool any_vertex_in_image(const std::vector<Polyline2D>& pieces, ImageSize size) {
  for (const Polyline2D& piece : pieces) {
    for (const Vec2& p : piece) {
      if (in_image(p, size)) return true;
    }
  }
  return false;
}

std::vector<ClassOutcome> class_outcomes(const CameraModel& camera,
                                         const SampledTemplate& sampled,
                                         const ImageAnnotation& annotation) {
  std::vector<ClassOutcome> outcomes;
  outcomes.reserve(sampled.elements.size());
  for (std::size_t i = 0; i < sampled.elements.size(); ++i) {
    ClassOutcome oc;
    oc.cls = sampled.elements[i].cls;
    const std::vector<Polyline2D> pieces = project_polyline(camera, sampled.points[i]);
    oc.predicted = any_vertex_in_image(pieces, annotation.image_size);
    const auto it = annotation.elements.find(oc.cls);
    if (it != annotation.elements.end() && !it->second.empty()) {
      oc.annotated = true;
      oc.annotated_points = static_cast<int>(it->second.size());
      if (oc.predicted) {
        oc.distances.reserve(it->second.size());
        for (const Vec2& p : it->second) {
          oc.distances.push_back(point_polyline_distance(p, pieces)
                                     .value_or(std::numeric_limits<double>::infinity()));
        }
      }
    }
    outcomes.push_back(std::move(oc));
  }
  // Annotated classes the template does not cover can never be predicted.
  for (const auto& [cls, points] : annotation.elements) {
    const bool covered = std::any_of(sampled.elements.begin(), sampled.elements.end(),
                                     [&](const FieldElement& e) { return e.cls == cls; });
    if (!covered && !points.empty()) {
      ClassOutcome oc;
      oc.cls = cls;
      oc.annotated = true;
      oc.annotated_points = static_cast<int>(points.size());
      outcomes.push_back(std::move(oc));
    }
  }
  return outcomes;
}

ImageEval eval_at_tau(const std::vector<ClassOutcome>& outcomes, ImageSize image_size,
                      double tau) {
  if (!(tau > 0.0)) throw ValidationError("tolerance tau must be positive");

  ImageEval eval;
  eval.tau = tau;
  for (const ClassOutcome& oc : outcomes) {
    if (!oc.annotated && !oc.predicted) continue;

    ClassEval ce;
    ce.cls = oc.cls;
    if (oc.annotated && oc.predicted) {
      ce.point_distances = oc.distances;
      if (!ce.point_distances.empty()) {
        ce.worst_distance = *std::max_element(ce.point_distances.begin(),
                                              ce.point_distances.end());
      }
      const bool all_close = std::all_of(oc.distances.begin(), oc.distances.end(),
                                         [tau](double d) { return d < tau; });
      if (all_close) {
        ce.verdict = ClassVerdict::true_positive;
        ++eval.counts.tp;
      } else {
        ce.verdict = ClassVerdict::fp_inaccurate;
        ++eval.counts.fp_inaccurate;
      }
    } else if (oc.predicted) {
      ce.verdict = ClassVerdict::fp_hallucinated;
      ++eval.counts.fp_hallucinated;
    } else {
      ce.verdict = ClassVerdict::false_negative;
      ++eval.counts.fn;
    }
    eval.classes.push_back(std::move(ce));
  }

  const int denom = eval.counts.tp + eval.counts.fp() + eval.counts.fn;
  if (denom > 0) {
    eval.jaccard = static_cast<double>(eval.counts.tp) / denom;
  } else {
    eval.jaccard = 1.0;
    eval.vacuous = true;
  }

  const ReprojectionError reproj = pool_reprojection(outcomes, image_size);
  eval.reprojection_px = reproj.pixels;
  eval.reprojection_norm = reproj.normalized;
  eval.excluded_points = reproj.excluded_points;
  return eval;
}

ImageEval evaluate_image(const CameraModel& camera, const std::vector<FieldElement>& elements,
                         const ImageAnnotation& annotation, double tau, double max_spacing) {
  annotation.validate();
  const SampledTemplate sampled = SampledTemplate::build(elements, max_spacing);
  return eval_at_tau(class_outcomes(camera, sampled, annotation), annotation.image_size, tau);
}

DatasetSummary aggregate(const std::vector<ImageEval>& evals) {
  if (evals.empty()) throw ValidationError("aggregate needs at least one evaluation");

  DatasetSummary summary;
  summary.images = static_cast<int>(evals.size());
  double jaccard_sum = 0.0;
  double px_sum = 0.0;
  double norm_sum = 0.0;
  std::vector<double> px_values;
  for (const ImageEval& eval : evals) {
    summary.counts.tp += eval.counts.tp;
    summary.counts.fp_hallucinated += eval.counts.fp_hallucinated;
    summary.counts.fp_inaccurate += eval.counts.fp_inaccurate;
    summary.counts.fn += eval.counts.fn;
    jaccard_sum += eval.jaccard;
    if (eval.reprojection_px) {
      px_sum += *eval.reprojection_px;
      norm_sum += *eval.reprojection_norm;
      px_values.push_back(*eval.reprojection_px);
    } else {
      ++summary.images_without_reprojection;
    }
  }
  const int denom = summary.counts.tp + summary.counts.fp() + summary.counts.fn;
  summary.micro_jaccard = denom > 0 ? static_cast<double>(summary.counts.tp) / denom : 1.0;
  summary.mean_jaccard = jaccard_sum / summary.images;
  if (!px_values.empty()) {
    summary.mean_reprojection_px = px_sum / px_values.size();
    summary.mean_reprojection_norm = norm_sum / px_values.size();
    std::sort(px_values.begin(), px_values.end());
    const std::size_t n = px_values.size();
    summary.median_reprojection_px =
        n % 2 == 1 ? px_values[n / 2] : 0.5 * (px_values[n / 2 - 1] + px_values[n / 2]);
  }
  return summary;
}

ReprojectionError reprojection_error(const CameraModel& camera,
                                     const std::vector<FieldElement>& elements,
                                     const ImageAnnotation& annotation, double max_spacing) {
  annotation.validate();
  const SampledTemplate sampled = SampledTemplate::build(elements, max_spacing);
  return pool_reprojection(class_outcomes(camera, sampled, annotation), annotation.image_size);
}

std::optional<double> projection_error(const CameraModel& estimated,
                                       const CameraModel& ground_truth, const PitchSpec& pitch,
                                       ImageSize image_size, int n_samples) {
  if (n_samples <= 0) throw ValidationError("projection error needs a positive sample count");
  const double w = image_size.width;
  const double h = image_size.height;
  const double half_length = pitch.length / 2.0;
  const double half_width = pitch.width / 2.0;

  const int cols = std::max(1, static_cast<int>(std::lround(std::sqrt(n_samples * w / h))));
  const int rows = std::max(1, static_cast<int>(std::lround(static_cast<double>(n_samples) / cols)));

  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const Vec2 pixel((j + 0.5) * w / cols, (i + 0.5) * h / rows);
      Vec3 on_truth;
      try {
        on_truth = ray_to_ground(ground_truth, pixel);
      } catch (const GeometryError&) {
        continue;  // pixel does not see the ground
      }
      if (std::abs(on_truth.x()) > half_length || std::abs(on_truth.y()) > half_width) {
        continue;  // off the pitch
      }
      Vec3 on_estimate;
      try {
        on_estimate = ray_to_ground(estimated, pixel);
      } catch (const GeometryError&) {
        continue;  // unmeasurable under the estimate; skipped rather than guessed
      }
      sum += (on_estimate - on_truth).norm();
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

double iou_whole(const CameraModel& estimated, const Homography& ground_truth,
                 const PitchSpec& pitch) {
  const Polygon2D quad = backprojected_rectangle(estimated, ground_truth, pitch);
  return polygon_iou(quad, pitch_rectangle(pitch));
}

double iou_part(const CameraModel& estimated, const Homography& ground_truth,
                const PitchSpec& pitch, ImageSize image_size) {
  const Polygon2D quad = backprojected_rectangle(estimated, ground_truth, pitch);

  const Mat3 gt_inv = ground_truth.h.inverse();
  const double w = image_size.width;
  const double h = image_size.height;
  Polygon2D visible;
  for (const Vec2& corner : {Vec2(0.0, 0.0), Vec2(w, 0.0), Vec2(w, h), Vec2(0.0, h)}) {
    visible.push_back(apply_homography(gt_inv, corner));
  }
  if (!polygon_is_convex(visible)) {
    throw GeometryError("visible region back-projects to a self-intersecting quadrilateral");
  }
  return polygon_iou(clip_polygon(quad, visible), clip_polygon(pitch_rectangle(pitch), visible));
}

}  // namespace fieldcal
