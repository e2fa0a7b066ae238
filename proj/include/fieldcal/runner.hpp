#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "fieldcal/io.hpp"
#include "fieldcal/metrics.hpp"

namespace fieldcal {

/// Everything a batch command needs. Fields irrelevant to a given command
/// are ignored by it.
struct RunConfig {
  std::filesystem::path annotations_dir;
  std::filesystem::path cameras_dir;
  std::vector<std::filesystem::path> model_dirs;  // compare: >= 2 camera dirs
  std::filesystem::path pitch_path;  // empty -> laws-of-the-game defaults
  std::vector<double> taus{5.0, 2.0};
  double spacing = kDefaultMetricSpacing;
  std::filesystem::path out_dir;
  int jobs = 1;
  std::uint64_t seed = 0;
  LegacyConvention legacy_convention = LegacyConvention::meters_to_pixels_center;

  // synth only
  int count = 10;
  double noise_sigma = 0.0;
  double dropout_rate = 0.0;
  double hallucination_rate = 0.0;

  // fit only
  std::filesystem::path seed_camera_path;  // skip auto-seeding when set
  int max_iterations = 200;
  bool unlock_k2 = false;
  bool fix_focal = false;
  bool fix_rotation = false;
  bool fix_translation = false;
  bool fix_k1 = false;

  /// Throws ValidationError: taus non-empty and positive, jobs >= 1,
  /// spacing > 0, count >= 1.
  void validate() const;
};

/// One unit of dataset work. Annotation `X.json` pairs with camera
/// `X.camera.json` by stem; a `manifest.json` in the camera directory
/// (object mapping stem -> camera filename) overrides the convention and may
/// point at legacy `.txt` homographies.
struct ImagePair {
  std::string id;
  std::filesystem::path annotation;
  std::filesystem::path camera;  // empty when no camera was found
};

/// Annotation files in `dir` (skips *.camera.json, *.provenance.json,
/// *.eval.json and manifest.json), sorted by id.
std::vector<std::filesystem::path> list_annotations(const std::filesystem::path& dir);

std::vector<ImagePair> pair_inputs(const std::filesystem::path& annotations_dir,
                                   const std::filesystem::path& cameras_dir);

/// Reads a camera file, dispatching on extension: `.txt` is parsed as a
/// legacy homography under `convention`, anything else as camera JSON.
CameraModel read_camera_auto(const std::filesystem::path& path, LegacyConvention convention,
                             const PitchSpec& pitch);

/// Runs fn(0), ..., fn(n-1) on min(jobs, n) worker threads. fn must not
/// throw; callers store results indexed by i so nothing depends on
/// scheduling order.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

// Batch commands. Exit code 0: success; 1: fatal (bad config, nothing to do,
// mismatched inputs); 2: completed but some images failed (listed in the log
// and in the summary's failures array). Given identical inputs and seed the
// output files are identical regardless of `jobs`.
int cmd_evaluate(const RunConfig& config, std::ostream& log);
int cmd_compare(const RunConfig& config, std::ostream& log);
int cmd_fit(const RunConfig& config, std::ostream& log);
int cmd_synth(const RunConfig& config, std::ostream& log);
int cmd_render(const RunConfig& config, std::ostream& log);

}  // namespace fieldcal
