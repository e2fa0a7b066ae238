#pragma once

#include <cstdint>
#include <vector>

#include "fieldcal/camera.hpp"
#include "fieldcal/metrics.hpp"
#include "fieldcal/pitch.hpp"

namespace fieldcal {

/// Closed interval for a scalar camera parameter draw.
struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Recipe for one synthetic scene. The defaults emulate a main broadcast
/// camera: elevated behind a sideline, medium-to-long lens, mild barrel
/// distortion.
struct SceneConfig {
  std::uint64_t seed = 0;
  ImageSize image_size{1920, 1080};
  PitchSpec pitch;

  Range position_x{-10.0, 10.0};
  Range position_y{-45.0, -35.0};
  Range position_z{8.0, 25.0};
  // The camera aims at a point drawn uniformly from the pitch rectangle,
  // shrunk by this factor about the center (1 = anywhere on the pitch).
  double look_at_extent = 1.0;
  Range focal{1500.0, 6000.0};
  Range k1{-0.12, 0.02};

  double noise_sigma = 0.0;        // isotropic Gaussian, pixels
  double dropout_rate = 0.0;       // chance a visible element loses its annotation
  double hallucination_rate = 0.0; // chance an off-camera element gains a fake one
  int points_per_line = 2;
  int points_per_curve = 3;
  double max_spacing = kDefaultMetricSpacing;  // projection sampling step

  /// Throws ValidationError on empty ranges, rates outside [0, 1], negative
  /// noise, or point counts below 1.
  void validate() const;
};

/// What the generator did to each class, for closing the loop in tests.
struct SceneProvenance {
  std::uint64_t seed = 0;
  std::vector<SemanticClass> annotated;
  std::vector<SemanticClass> dropped;       // visible but omitted
  std::vector<SemanticClass> hallucinated;  // invisible but fabricated
};

struct SyntheticScene {
  PinholeRadial camera;  // ground truth
  ImageAnnotation annotation;
  SceneProvenance provenance;
};

/// Draws a camera from the config ranges and annotates every element it
/// predicts in-frame with points taken from the element's exact projection
/// (so zero-noise scenes are perfect by construction), then applies noise,
/// dropout, and hallucination. Deterministic in the seed. Throws
/// GenerationError when 100 consecutive camera draws see no element.
SyntheticScene generate_scene(const SceneConfig& config);

/// Applies a seeded random perturbation: rotation by magnitude * 0.5 degrees
/// about a random axis, translation by magnitude * 0.1 m in a random
/// direction, and focal scaling by (1 +- magnitude * 0.5%). The directions
/// depend only on the seed, never on the magnitude, so one seed yields a
/// family of increasingly wrong cameras along the same direction; magnitude 0
/// returns the camera unchanged.
PinholeRadial perturb_camera(const PinholeRadial& camera, double magnitude, std::uint64_t seed);

}  // namespace fieldcal
