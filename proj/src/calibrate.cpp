#include "fieldcal/calibrate.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "fieldcal/error.hpp"
#include "fieldcal/geometry.hpp"

namespace fieldcal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NormalizedPoints {
  Mat3 transform;            // similarity mapping raw -> normalized
  std::vector<Vec2> points;  // normalized
};

// Translates to centroid zero and scales so the RMS distance from the origin
// is sqrt(2).
NormalizedPoints hartley_normalize(const std::vector<Vec2>& raw, const char* what) {
  Vec2 centroid = Vec2::Zero();
  for (const Vec2& p : raw) centroid += p;
  centroid /= static_cast<double>(raw.size());

  double mean_sq = 0.0;
  for (const Vec2& p : raw) mean_sq += (p - centroid).squaredNorm();
  mean_sq /= static_cast<double>(raw.size());
  const double rms = std::sqrt(mean_sq);
  if (rms < 1e-12) {
    throw FitError(std::string("degenerate configuration: ") + what + " points coincide");
  }
  const double scale = std::sqrt(2.0) / rms;

  NormalizedPoints out;
  out.transform << scale, 0.0, -scale * centroid.x(),
                   0.0, scale, -scale * centroid.y(),
                   0.0, 0.0, 1.0;
  out.points.reserve(raw.size());
  for (const Vec2& p : raw) out.points.push_back(scale * (p - centroid));
  return out;
}

// After normalization the points have unit-ish spread, so a vanishing minor
// eigenvalue of the covariance means they are collinear.
void reject_collinear(const std::vector<Vec2>& normalized, const char* what) {
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const Vec2& p : normalized) cov += p * p.transpose();
  cov /= static_cast<double>(normalized.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eigen(cov);
  if (eigen.eigenvalues()(0) < 1e-10) {
    throw FitError(std::string("degenerate configuration: ") + what + " points are collinear");
  }
}

// World samples and annotated image points for every class that is both in
// the template and annotated.
using AnnotatedGeometry = std::vector<std::pair<std::vector<Vec3>, std::vector<Vec2>>>;

AnnotatedGeometry collect_annotated(const std::vector<FieldElement>& elements,
                                    const ImageAnnotation& annotation, double max_spacing,
                                    bool ground_only) {
  AnnotatedGeometry out;
  for (const FieldElement& element : elements) {
    if (ground_only && !is_ground_element(element)) continue;
    const auto it = annotation.elements.find(element.cls);
    if (it == annotation.elements.end() || it->second.empty()) continue;
    out.emplace_back(sample_element(element, max_spacing), it->second);
  }
  return out;
}

int count_points(const AnnotatedGeometry& classes) {
  int n = 0;
  for (const auto& [world, points] : classes) n += static_cast<int>(points.size());
  return n;
}

void fill_distances(const CameraModel& camera, const AnnotatedGeometry& classes,
                    Eigen::VectorXd& residuals) {
  Eigen::Index k = 0;
  for (const auto& [world, points] : classes) {
    const std::vector<Polyline2D> pieces = project_polyline(camera, world);
    for (const Vec2& p : points) {
      residuals[k++] = pieces.empty()
                           ? kInf
                           : point_polyline_distance(p, pieces).value_or(kInf);
    }
  }
}

// Total-least-squares line through >= 2 points: centroid plus the principal
// direction of the scatter.
struct Line2D {
  Vec2 point;
  Vec2 dir;  // unit
};

std::optional<Line2D> tls_line(const std::vector<Vec2>& points) {
  if (points.size() < 2) return std::nullopt;
  Vec2 centroid = Vec2::Zero();
  for (const Vec2& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (const Vec2& p : points) {
    const Vec2 d = p - centroid;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eigen(scatter);
  if (eigen.eigenvalues()(1) < 1e-12) return std::nullopt;  // points coincide
  return Line2D{centroid, eigen.eigenvectors().col(1)};
}

// Intersection of two parametric lines a + s*da and b + u*db; nothing when
// they are (nearly) parallel.
std::optional<std::pair<double, double>> intersect_lines(const Vec2& a, const Vec2& da,
                                                         const Vec2& b, const Vec2& db) {
  const double det = da.x() * (-db.y()) - (-db.x()) * da.y();
  if (std::abs(det) < 1e-9 * da.norm() * db.norm()) return std::nullopt;
  const Vec2 rhs = b - a;
  const double s = (rhs.x() * (-db.y()) - (-db.x()) * rhs.y()) / det;
  const double u = (da.x() * rhs.y() - rhs.x() * da.y()) / det;
  return std::make_pair(s, u);
}

// Undistorted radius for the centered quadratic model: solves
// r_d = r (1 + kappa r^2) for r by Newton. nullopt when the model folds over
// at this radius (no unique inverse).
std::optional<double> invert_radius(double r_d, double kappa) {
  double r = r_d;
  for (int i = 0; i < 40; ++i) {
    const double g = r * (1.0 + kappa * r * r) - r_d;
    const double dg = 1.0 + 3.0 * kappa * r * r;
    if (!std::isfinite(g) || dg < 1e-12) return std::nullopt;
    const double step = g / dg;
    r -= step;
    if (std::abs(step) < 1e-14 * std::max(1.0, r_d)) break;
  }
  if (!std::isfinite(r) || r < 0.0) return std::nullopt;
  if (std::abs(r * (1.0 + kappa * r * r) - r_d) > 1e-8 * std::max(1.0, r_d)) {
    return std::nullopt;
  }
  return r;
}

// Removes centered quadratic distortion with coefficient c at nominal focal
// f0 (the true camera's k1 relates as c = k1 * (f0 / f)^2).
std::optional<Vec2> undistort_centered(const Vec2& pixel, const Vec2& center, double f0,
                                       double c) {
  const Vec2 d = pixel - center;
  const double r_d = d.norm() / f0;
  if (r_d < 1e-12) return pixel;
  const std::optional<double> r = invert_radius(r_d, c);
  if (!r) return std::nullopt;
  return center + d * (*r / r_d);
}

// Mean squared TLS residual of the undistorted line classes: zero exactly
// when c matches the data's distortion.
std::optional<double> straightness_cost(const std::vector<std::vector<Vec2>>& lines,
                                        const Vec2& center, double f0, double c) {
  double total = 0.0;
  int excess = 0;
  for (const std::vector<Vec2>& points : lines) {
    std::vector<Vec2> undistorted;
    undistorted.reserve(points.size());
    for (const Vec2& p : points) {
      const std::optional<Vec2> q = undistort_centered(p, center, f0, c);
      if (!q) return std::nullopt;
      undistorted.push_back(*q);
    }
    const std::optional<Line2D> line = tls_line(undistorted);
    if (!line) continue;
    const Vec2 normal(-line->dir.y(), line->dir.x());
    for (const Vec2& q : undistorted) {
      const double d = normal.dot(q - line->point);
      total += d * d;
    }
    excess += static_cast<int>(points.size()) - 2;
  }
  if (excess < 1) return std::nullopt;
  return total / excess;
}

// Plumb-line estimate of the centered distortion coefficient: straight world
// lines must be straight once undistorted, so search the 1-D coefficient
// that minimizes the residual line curvature. Needs at least a few points
// beyond the two that define each line; nullopt when that signal is missing.
std::optional<double> estimate_centered_distortion(const std::vector<FieldElement>& elements,
                                                   const ImageAnnotation& annotation,
                                                   double f0) {
  const Vec2 center(annotation.image_size.width / 2.0, annotation.image_size.height / 2.0);
  std::vector<std::vector<Vec2>> lines;
  int excess = 0;
  for (const FieldElement& element : elements) {
    if (!std::holds_alternative<Segment3D>(element.geometry)) continue;
    const auto it = annotation.elements.find(element.cls);
    if (it == annotation.elements.end() || it->second.size() < 3) continue;
    lines.push_back(it->second);
    excess += static_cast<int>(it->second.size()) - 2;
  }
  if (excess < 3) return std::nullopt;

  const auto cost = [&](double c) { return straightness_cost(lines, center, f0, c); };

  double best_c = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 40; ++i) {
    const double c = -0.3 + 0.01 * i;
    const std::optional<double> v = cost(c);
    if (v && *v < best) {
      best = *v;
      best_c = c;
    }
  }
  if (!std::isfinite(best)) return std::nullopt;

  double lo = best_c - 0.01;
  double hi = best_c + 0.01;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  std::optional<double> f1 = cost(x1);
  std::optional<double> f2 = cost(x2);
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 80 && hi - lo > 1e-10; ++i) {
    if (f1.value_or(inf) < f2.value_or(inf)) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = cost(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = cost(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Homography dlt_homography(const std::vector<Correspondence>& correspondences) {
  if (correspondences.size() < 4) {
    throw FitError("homography estimation needs at least 4 correspondences");
  }
  std::vector<Vec2> world;
  std::vector<Vec2> image;
  world.reserve(correspondences.size());
  image.reserve(correspondences.size());
  for (const Correspondence& c : correspondences) {
    if (!c.world.allFinite() || !c.image.allFinite() || !std::isfinite(c.weight)) {
      throw ValidationError("correspondences must be finite");
    }
    if (c.weight < 0.0) throw ValidationError("correspondence weights must be nonnegative");
    if (std::abs(c.world.z()) > 1e-9) {
      throw ValidationError("homography correspondences must lie on the ground plane");
    }
    world.emplace_back(c.world.x(), c.world.y());
    image.push_back(c.image);
  }

  const NormalizedPoints nw = hartley_normalize(world, "world");
  const NormalizedPoints ni = hartley_normalize(image, "image");
  reject_collinear(nw.points, "world");
  reject_collinear(ni.points, "image");

  const std::size_t n = correspondences.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = nw.points[i].x();
    const double y = nw.points[i].y();
    const double u = ni.points[i].x();
    const double v = ni.points[i].y();
    const double w = std::sqrt(correspondences[i].weight);
    a.row(2 * i) << x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u;
    a.row(2 * i + 1) << 0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, -v;
    a.row(2 * i) *= w;
    a.row(2 * i + 1) *= w;
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Mat3 hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return Homography(ni.transform.inverse() * hn * nw.transform);
}

SimplifiedPinhole pinhole_from_homography(const Homography& h, ImageSize image_size,
                                          double focal) {
  if (image_size.width <= 0 || image_size.height <= 0) {
    throw ValidationError("image size must be positive");
  }
  if (!std::isfinite(focal) || focal <= 0.0) {
    throw ValidationError("focal length must be positive and finite");
  }
  const double cx = image_size.width / 2.0;
  const double cy = image_size.height / 2.0;
  const Mat3& m = h.h;

  // Columns of K^-1 H are (u_i / f, v_i / f, w_i) up to a common scale.
  double u[3];
  double v[3];
  double w[3];
  for (int i = 0; i < 3; ++i) {
    u[i] = m(0, i) - cx * m(2, i);
    v[i] = m(1, i) - cy * m(2, i);
    w[i] = m(2, i);
  }

  const Vec3 b1(u[0] / focal, v[0] / focal, w[0]);
  const Vec3 b2(u[1] / focal, v[1] / focal, w[1]);
  const Vec3 b3(u[2] / focal, v[2] / focal, w[2]);
  const double n1 = b1.norm();
  const double n2 = b2.norm();
  if (n1 < 1e-12 || n2 < 1e-12 || w[2] == 0.0) {
    throw FitError(
        "cannot initialize a pinhole camera from this view (degenerate "
        "geometry); provide a seed camera");
  }
  // Sign such that the pitch center ends up in front of the camera
  // (its depth is t_z, and t is b3-scaled).
  const double sign = w[2] > 0.0 ? 1.0 : -1.0;

  Mat3 r0;
  r0.col(0) = sign * b1 / n1;
  r0.col(1) = sign * b2 / n2;
  r0.col(2) = r0.col(0).cross(r0.col(1));

  Eigen::JacobiSVD<Mat3> svd(r0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 rotation = svd.matrixU() * svd.matrixV().transpose();
  if (rotation.determinant() < 0.0) {
    rotation = svd.matrixU() * Vec3(1.0, 1.0, -1.0).asDiagonal() * svd.matrixV().transpose();
  }

  const double lambda = (n1 + n2) / 2.0;

  SimplifiedPinhole camera;
  camera.focal = focal;
  camera.principal_point = Vec2(cx, cy);
  camera.rotation = rotation;
  camera.translation = sign * b3 / lambda;
  camera.validate();
  return camera;
}

SimplifiedPinhole init_pinhole_from_homography(const Homography& h, ImageSize image_size) {
  if (image_size.width <= 0 || image_size.height <= 0) {
    throw ValidationError("image size must be positive");
  }
  const double cx = image_size.width / 2.0;
  const double cy = image_size.height / 2.0;
  const Mat3& m = h.h;

  double u[3];
  double v[3];
  double w[3];
  for (int i = 0; i < 3; ++i) {
    u[i] = m(0, i) - cx * m(2, i);
    v[i] = m(1, i) - cy * m(2, i);
    w[i] = m(2, i);
  }

  // Orthogonality and equal-norm constraints on the first two columns of
  // K^-1 H, as linear equations p*x + q = 0 in x = 1/f^2.
  const double p1 = u[0] * u[1] + v[0] * v[1];
  const double q1 = w[0] * w[1];
  const double p2 = u[0] * u[0] + v[0] * v[0] - u[1] * u[1] - v[1] * v[1];
  const double q2 = w[0] * w[0] - w[1] * w[1];
  const double denom = p1 * p1 + p2 * p2;
  const double x = denom > 0.0 ? -(p1 * q1 + p2 * q2) / denom : 0.0;
  if (!std::isfinite(x) || x <= 0.0) {
    throw FitError(
        "cannot initialize a pinhole camera from this view (focal length "
        "unobservable, e.g. fronto-parallel); provide a seed camera");
  }
  return pinhole_from_homography(h, image_size, 1.0 / std::sqrt(x));
}

CameraResidualProblem::CameraResidualProblem(const PinholeRadial& seed,
                                             const std::vector<FieldElement>& elements,
                                             const ImageAnnotation& annotation,
                                             const FitOptions& options)
    : seed_(seed), options_(options) {
  classes_ = collect_annotated(elements, annotation, options.max_spacing, /*ground_only=*/false);
  residual_count_ = count_points(classes_);

  std::vector<double> params;
  if (!options_.fix_focal) params.push_back(seed_.base.focal);
  if (!options_.fix_rotation) params.insert(params.end(), {0.0, 0.0, 0.0});
  if (!options_.fix_translation) {
    params.insert(params.end(), {seed_.base.translation.x(), seed_.base.translation.y(),
                                 seed_.base.translation.z()});
  }
  if (!options_.fix_k1) params.push_back(seed_.k1);
  if (options_.unlock_k2) params.push_back(seed_.k2);
  initial_params_ = Eigen::Map<const Eigen::VectorXd>(params.data(), params.size());
}

PinholeRadial CameraResidualProblem::camera_at(const Eigen::VectorXd& params) const {
  PinholeRadial camera = seed_;
  Eigen::Index i = 0;
  if (!options_.fix_focal) camera.base.focal = params[i++];
  if (!options_.fix_rotation) {
    const Vec3 omega(params[i], params[i + 1], params[i + 2]);
    i += 3;
    const double angle = omega.norm();
    if (angle > 0.0) {
      camera.base.rotation =
          Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix() * seed_.base.rotation;
    }
  }
  if (!options_.fix_translation) {
    camera.base.translation = Vec3(params[i], params[i + 1], params[i + 2]);
    i += 3;
  }
  if (!options_.fix_k1) camera.k1 = params[i++];
  if (options_.unlock_k2) camera.k2 = params[i++];
  return camera;
}

Eigen::VectorXd CameraResidualProblem::residuals(const Eigen::VectorXd& params) const {
  Eigen::VectorXd r(residual_count_);
  if (!params.allFinite()) {
    r.setConstant(kInf);
    return r;
  }
  fill_distances(camera_at(params), classes_, r);
  return r;
}

RefineResult refine_camera(const PinholeRadial& initial,
                           const std::vector<FieldElement>& elements,
                           const ImageAnnotation& annotation, const FitOptions& options) {
  initial.validate();
  annotation.validate();
  CameraResidualProblem problem(initial, elements, annotation, options);
  if (problem.residual_count() < problem.parameter_count()) {
    throw FitError("under-determined fit: " + std::to_string(problem.residual_count()) +
                   " residuals for " + std::to_string(problem.parameter_count()) +
                   " parameters");
  }
  LmOptions lm;
  lm.max_iterations = options.max_iterations;
  LmSolution solution = lm_minimize(
      [&problem](const Eigen::VectorXd& p) { return problem.residuals(p); },
      problem.initial_params(), lm);
  return {problem.camera_at(solution.params), std::move(solution.report)};
}

HomographyRefineResult refine_homography(const Homography& initial,
                                         const std::vector<FieldElement>& elements,
                                         const ImageAnnotation& annotation,
                                         const FitOptions& options) {
  annotation.validate();
  const AnnotatedGeometry classes =
      collect_annotated(elements, annotation, options.max_spacing, /*ground_only=*/true);
  const int n_residuals = count_points(classes);

  const auto residual_fn = [&classes, n_residuals](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(n_residuals);
    Mat3 m;
    m << p(0), p(1), p(2), p(3), p(4), p(5), p(6), p(7), p(8);
    try {
      const CameraModel camera = Homography(m);
      fill_distances(camera, classes, r);
    } catch (const ValidationError&) {
      r.setConstant(kInf);  // candidate left the space of valid homographies
    }
    return r;
  };

  Eigen::VectorXd p0(9);
  p0 << initial.h(0, 0), initial.h(0, 1), initial.h(0, 2),
        initial.h(1, 0), initial.h(1, 1), initial.h(1, 2),
        initial.h(2, 0), initial.h(2, 1), initial.h(2, 2);

  LmOptions lm;
  lm.max_iterations = options.max_iterations;
  LmSolution solution = lm_minimize(residual_fn, p0, lm);
  Mat3 m;
  m << solution.params(0), solution.params(1), solution.params(2),
       solution.params(3), solution.params(4), solution.params(5),
       solution.params(6), solution.params(7), solution.params(8);
  return {Homography(m), std::move(solution.report)};
}

std::vector<Correspondence> line_intersection_correspondences(
    const std::vector<FieldElement>& elements, const ImageAnnotation& annotation) {
  struct Candidate {
    Segment3D world;
    Line2D image;
  };
  std::vector<Candidate> lines;
  for (const FieldElement& element : elements) {
    if (!is_ground_element(element)) continue;
    const auto* segment = std::get_if<Segment3D>(&element.geometry);
    if (segment == nullptr) continue;
    const auto it = annotation.elements.find(element.cls);
    if (it == annotation.elements.end()) continue;
    const std::optional<Line2D> fitted = tls_line(it->second);
    if (!fitted) continue;
    lines.push_back({*segment, *fitted});
  }

  // A little slack past the physical endpoints keeps corner intersections
  // (which sit exactly on segment ends) robust.
  constexpr double kLo = -0.05;
  constexpr double kHi = 1.05;

  std::vector<Correspondence> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Vec2 ai(lines[i].world.a.x(), lines[i].world.a.y());
    const Vec2 bi(lines[i].world.b.x(), lines[i].world.b.y());
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const Vec2 aj(lines[j].world.a.x(), lines[j].world.a.y());
      const Vec2 bj(lines[j].world.b.x(), lines[j].world.b.y());

      const auto world_params = intersect_lines(ai, bi - ai, aj, bj - aj);
      if (!world_params) continue;
      const auto [s, t] = *world_params;
      if (s < kLo || s > kHi || t < kLo || t > kHi) continue;  // lines cross off-segment

      const auto image_params = intersect_lines(lines[i].image.point, lines[i].image.dir,
                                                lines[j].image.point, lines[j].image.dir);
      if (!image_params) continue;

      const Vec2 world_xy = ai + s * (bi - ai);
      const Vec2 image_point =
          lines[i].image.point + image_params->first * lines[i].image.dir;
      // Nearly-parallel image lines can shoot their intersection absurdly
      // far out; such points carry no usable constraint and wreck the DLT.
      const Vec2 image_center(annotation.image_size.width / 2.0,
                              annotation.image_size.height / 2.0);
      const double reach = 64.0 * std::max(annotation.image_size.width,
                                           annotation.image_size.height);
      if ((image_point - image_center).norm() > reach) continue;
      out.push_back({Vec3(world_xy.x(), world_xy.y(), 0.0), image_point, 1.0});
    }
  }
  return out;
}

RefineResult fit_camera(const std::vector<FieldElement>& elements,
                        const ImageAnnotation& annotation, const FitOptions& options,
                        const std::optional<PinholeRadial>& seed) {
  std::vector<PinholeRadial> seeds;
  std::string first_error;

  if (seed) {
    seeds.push_back(*seed);
  } else {
    // Distortion bends the projected lines, which poisons every homography-
    // based construction downstream. Estimate it first by plumb line (with
    // the principal point centered, straightening is a 1-D search), undistort
    // the annotation, and seed from the now distortion-free geometry.
    const double f0 = annotation.image_size.width;
    const Vec2 center(annotation.image_size.width / 2.0, annotation.image_size.height / 2.0);
    const std::optional<double> c = estimate_centered_distortion(elements, annotation, f0);

    ImageAnnotation straightened = annotation;
    bool straightened_ok = c.has_value();
    if (straightened_ok && *c != 0.0) {
      for (auto& [cls, points] : straightened.elements) {
        for (Vec2& p : points) {
          const std::optional<Vec2> q = undistort_centered(p, center, f0, *c);
          if (!q) {
            straightened_ok = false;
            break;
          }
          p = *q;
        }
        if (!straightened_ok) break;
      }
    }
    const ImageAnnotation& for_seeding = straightened_ok ? straightened : annotation;

    const std::vector<Correspondence> correspondences =
        line_intersection_correspondences(elements, for_seeding);
    const Homography h0 = dlt_homography(correspondences);

    std::vector<double> focals;
    try {
      focals.push_back(init_pinhole_from_homography(h0, annotation.image_size).focal);
    } catch (const Error& e) {
      first_error = e.what();
    }
    for (double scale : {0.35, 0.55, 0.85, 1.3, 2.0, 3.0}) {
      focals.push_back(scale * annotation.image_size.width);
    }
    for (double focal : focals) {
      PinholeRadial candidate;
      try {
        candidate.base = pinhole_from_homography(h0, annotation.image_size, focal);
      } catch (const Error&) {
        continue;
      }
      // The plumb-line coefficient was measured at the nominal focal; map it
      // to this candidate's focal. Without a plumb-line signal, sweep a few
      // plausible starts instead.
      std::vector<double> k1_starts;
      if (straightened_ok) {
        const double mapped = *c * (focal / f0) * (focal / f0);
        k1_starts = {mapped, 0.0};
      } else {
        k1_starts = options.fix_k1 ? std::vector<double>{0.0}
                                   : std::vector<double>{0.0, -0.05, -0.1};
      }
      for (double k1 : k1_starts) {
        candidate.k1 = k1;
        candidate.k2 = 0.0;
        seeds.push_back(candidate);
      }
    }
    if (seeds.empty()) {
      throw FitError(first_error.empty()
                         ? "could not build a pinhole seed from the fitted homography"
                         : first_error);
    }
  }

  const int residual_count =
      CameraResidualProblem(seeds.front(), elements, annotation, options).residual_count();
  // RMS pixel residual below which further seeds cannot meaningfully improve.
  const double good_enough_rms = 0.05;

  std::optional<RefineResult> best;
  for (const PinholeRadial& start : seeds) {
    try {
      FitOptions stage1 = options;
      stage1.fix_k1 = true;
      stage1.unlock_k2 = false;
      const RefineResult coarse = refine_camera(start, elements, annotation, stage1);
      const bool second_stage_differs = !options.fix_k1 || options.unlock_k2;
      const RefineResult result =
          second_stage_differs ? refine_camera(coarse.camera, elements, annotation, options)
                               : coarse;
      if (!best || result.report.final_cost < best->report.final_cost) best = result;
    } catch (const Error& e) {
      if (first_error.empty()) first_error = e.what();
      continue;
    }
    if (std::sqrt(best->report.final_cost / std::max(residual_count, 1)) < good_enough_rms) {
      break;
    }
  }
  if (!best) {
    throw FitError("camera fitting failed for every seed: " + first_error);
  }
  return *best;
}

}  // namespace fieldcal
