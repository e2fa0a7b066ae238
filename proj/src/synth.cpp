#include "fieldcal/synth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include "fieldcal/error.hpp"

namespace fieldcal {

namespace {

void check_range(const Range& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    throw ValidationError(std::string("scene config: empty or non-finite range for ") + name);
  }
}

double draw(std::mt19937_64& eng, const Range& r) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(eng);
}

Vec3 random_unit_vector(std::mt19937_64& eng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    const Vec3 v(gauss(eng), gauss(eng), gauss(eng));
    const double n = v.norm();
    if (n > 1e-6) return v / n;
  }
}

// World-to-camera rotation for a camera at eye looking at target, world +Z
// up, image y growing downward. Fails for a perfectly vertical view.
std::optional<Mat3> look_at_rotation(const Vec3& eye, const Vec3& target) {
  Vec3 forward = target - eye;
  const double fn = forward.norm();
  if (fn < 1e-9) return std::nullopt;
  forward /= fn;
  Vec3 right = forward.cross(Vec3(0.0, 0.0, 1.0));
  const double rn = right.norm();
  if (rn < 1e-9) return std::nullopt;
  right /= rn;
  const Vec3 down = forward.cross(right);
  Mat3 rotation;
  rotation.row(0) = right;
  rotation.row(1) = down;
  rotation.row(2) = forward;
  return rotation;
}

// k points spread evenly over the vertex list (all of them when k >= size).
std::vector<Vec2> pick_even(const std::vector<Vec2>& vertices, int k) {
  const int n = static_cast<int>(vertices.size());
  if (k >= n) return vertices;
  std::vector<Vec2> out;
  out.reserve(k);
  if (k == 1) {
    out.push_back(vertices[n / 2]);
    return out;
  }
  for (int i = 0; i < k; ++i) {
    const auto idx = static_cast<std::size_t>(
        std::lround(static_cast<double>(i) * (n - 1) / (k - 1)));
    out.push_back(vertices[idx]);
  }
  return out;
}

// A short run of points hugging one image border, strictly inside bounds.
std::vector<Vec2> fabricate_border_points(std::mt19937_64& eng, ImageSize size, int k) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double w = size.width;
  const double h = size.height;
  const int side = std::min(3, static_cast<int>(unit(eng) * 4.0));
  const double start = 0.05 + unit(eng) * 0.7;   // fraction along the border
  const double span = 0.05 + unit(eng) * 0.15;   // fraction of border covered
  const double inset = 0.01 + unit(eng) * 0.03;  // fractional distance from the border

  std::vector<Vec2> points;
  points.reserve(k);
  for (int i = 0; i < k; ++i) {
    const double f = k == 1 ? start : start + span * i / (k - 1);
    switch (side) {
      case 0: points.emplace_back(f * w, inset * h); break;          // top
      case 1: points.emplace_back(f * w, (1.0 - inset) * h); break;  // bottom
      case 2: points.emplace_back(inset * w, f * h); break;          // left
      default: points.emplace_back((1.0 - inset) * w, f * h); break; // right
    }
  }
  return points;
}

}  // namespace

void SceneConfig::validate() const {
  pitch.validate();
  if (image_size.width <= 0 || image_size.height <= 0) {
    throw ValidationError("scene config: image size must be positive");
  }
  check_range(position_x, "position_x");
  check_range(position_y, "position_y");
  check_range(position_z, "position_z");
  check_range(focal, "focal");
  check_range(k1, "k1");
  if (focal.lo <= 0.0) throw ValidationError("scene config: focal range must be positive");
  if (!(look_at_extent > 0.0) || look_at_extent > 1.0) {
    throw ValidationError("scene config: look_at_extent must be in (0, 1]");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ValidationError("scene config: noise_sigma must be nonnegative");
  }
  if (dropout_rate < 0.0 || dropout_rate > 1.0 || hallucination_rate < 0.0 ||
      hallucination_rate > 1.0) {
    throw ValidationError("scene config: rates must be within [0, 1]");
  }
  if (points_per_line < 1 || points_per_curve < 1) {
    throw ValidationError("scene config: point counts must be at least 1");
  }
  if (!(max_spacing > 0.0)) {
    throw ValidationError("scene config: sampling spacing must be positive");
  }
}

SyntheticScene generate_scene(const SceneConfig& config) {
  config.validate();
  const std::vector<FieldElement> elements = build_pitch_template(config.pitch);
  const SampledTemplate sampled = SampledTemplate::build(elements, config.max_spacing);

  std::mt19937_64 eng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double w = config.image_size.width;
  const double h = config.image_size.height;

  for (int attempt = 0; attempt < 100; ++attempt) {
    const Vec3 eye(draw(eng, config.position_x), draw(eng, config.position_y),
                   draw(eng, config.position_z));
    const double extent_l = config.pitch.length / 2.0 * config.look_at_extent;
    const double extent_w = config.pitch.width / 2.0 * config.look_at_extent;
    const Vec3 target(draw(eng, {-extent_l, extent_l}), draw(eng, {-extent_w, extent_w}), 0.0);
    const double focal = draw(eng, config.focal);
    const double k1 = draw(eng, config.k1);

    const std::optional<Mat3> rotation = look_at_rotation(eye, target);
    if (!rotation) continue;

    PinholeRadial camera;
    camera.base.focal = focal;
    camera.base.principal_point = Vec2(w / 2.0, h / 2.0);
    camera.base.rotation = *rotation;
    camera.base.translation = -(*rotation * eye);
    camera.k1 = k1;

    // In-frame vertices of each element's projection, in registry order.
    std::vector<std::vector<Vec2>> in_frame(elements.size());
    bool any_visible = false;
    for (std::size_t i = 0; i < elements.size(); ++i) {
      for (const Polyline2D& piece : project_polyline(camera, sampled.points[i])) {
        for (const Vec2& v : piece) {
          if (in_image(v, config.image_size)) in_frame[i].push_back(v);
        }
      }
      any_visible = any_visible || !in_frame[i].empty();
    }
    if (!any_visible) continue;

    SyntheticScene scene;
    scene.camera = camera;
    scene.annotation.image_size = config.image_size;
    scene.provenance.seed = config.seed;

    for (std::size_t i = 0; i < elements.size(); ++i) {
      const SemanticClass cls = elements[i].cls;
      const bool is_curve = std::holds_alternative<Circle3D>(elements[i].geometry);
      const int want = is_curve ? config.points_per_curve : config.points_per_line;
      const double gate = unit(eng);

      if (!in_frame[i].empty()) {
        if (gate < config.dropout_rate) {
          scene.provenance.dropped.push_back(cls);
          continue;
        }
        std::vector<Vec2> points = pick_even(in_frame[i], want);
        if (config.noise_sigma > 0.0) {
          for (Vec2& p : points) {
            p.x() = std::clamp(p.x() + gauss(eng) * config.noise_sigma, -0.05 * w, 1.05 * w);
            p.y() = std::clamp(p.y() + gauss(eng) * config.noise_sigma, -0.05 * h, 1.05 * h);
          }
        }
        scene.annotation.elements.emplace(cls, std::move(points));
        scene.provenance.annotated.push_back(cls);
      } else if (gate < config.hallucination_rate) {
        scene.annotation.elements.emplace(cls,
                                          fabricate_border_points(eng, config.image_size, want));
        scene.provenance.hallucinated.push_back(cls);
      }
    }
    return scene;
  }
  throw GenerationError("no drawn camera saw any field element after 100 attempts");
}

PinholeRadial perturb_camera(const PinholeRadial& camera, double magnitude, std::uint64_t seed) {
  if (!(magnitude >= 0.0)) {
    throw ValidationError("perturbation magnitude must be nonnegative");
  }
  std::mt19937_64 eng(seed);
  // All draws happen before the early return: the perturbation direction is a
  // function of the seed alone, so sweeping the magnitude with a fixed seed
  // moves the camera along one fixed degradation direction.
  const Vec3 axis = random_unit_vector(eng);
  const Vec3 direction = random_unit_vector(eng);
  const double focal_sign = std::uniform_real_distribution<double>(0.0, 1.0)(eng) < 0.5
                                ? -1.0
                                : 1.0;
  if (magnitude == 0.0) return camera;

  PinholeRadial out = camera;
  const double angle = magnitude * 0.5 * std::numbers::pi / 180.0;
  out.base.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix() * camera.base.rotation;
  out.base.translation += magnitude * 0.1 * direction;
  out.base.focal *= 1.0 + focal_sign * magnitude * 0.005;
  return out;
}

}  // namespace fieldcal
