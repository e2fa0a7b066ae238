#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fieldcal/camera.hpp"
#include "fieldcal/metrics.hpp"
#include "fieldcal/pitch.hpp"
#include "fieldcal/synth.hpp"

namespace fieldcal {

/// Reads a whole file. Throws IoError on filesystem failure.
std::string read_text_file(const std::filesystem::path& path);

/// Writes a whole file (overwrites). Throws IoError on filesystem failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

// --- Annotations -----------------------------------------------------------
//
// JSON schema:
//   { "image_width": int, "image_height": int,
//     "elements": { "<class label>": [ {"x": px, "y": px}, ... ], ... } }
//
// The writer emits canonical key order (labels in registry order) and fixed
// 6-decimal coordinates, making write -> read -> write byte-stable. Readers
// reject rather than coerce: malformed JSON raises ParseError; unknown keys,
// unknown class labels, or non-finite coordinates raise SchemaError.

ImageAnnotation parse_annotation(const std::string& text);
std::string format_annotation(const ImageAnnotation& annotation);
ImageAnnotation read_annotation(const std::filesystem::path& path);
void write_annotation(const ImageAnnotation& annotation, const std::filesystem::path& path);

// --- Pitch dimensions ---------------------------------------------------------
//
// JSON object whose keys mirror the PitchSpec fields (all optional, meters):
//   length, width, circle_radius, penalty_area_length, penalty_area_width,
//   goal_area_length, goal_area_width, penalty_mark_distance, goal_width,
//   goal_height
// Omitted keys keep their defaults; unknown keys raise SchemaError.

PitchSpec parse_pitch(const std::string& text);
std::string format_pitch(const PitchSpec& pitch);
PitchSpec read_pitch(const std::filesystem::path& path);
void write_pitch(const PitchSpec& pitch, const std::filesystem::path& path);

// --- Cameras ----------------------------------------------------------------
//
// JSON schema (tag selects the model; matrices row-major):
//   { "model": "homography", "h": [9 numbers] }
//   { "model": "pinhole", "focal": f, "principal_point": [2],
//     "rotation": [9], "translation": [3] }
//   { "model": "pinhole_radial", ... as pinhole ..., "k1": v, "k2": v }
//
// Numbers are written with 17 significant digits, so values survive the
// round trip bit-exactly. "k2" may be omitted on read (defaults to 0).

CameraModel parse_camera(const std::string& text);
std::string format_camera(const CameraModel& camera);
CameraModel read_camera(const std::filesystem::path& path);
void write_camera(const CameraModel& camera, const std::filesystem::path& path);

// --- Scene provenance --------------------------------------------------------

std::string format_provenance(const SceneProvenance& provenance);
SceneProvenance parse_provenance(const std::string& text);
SceneProvenance read_provenance(const std::filesystem::path& path);
void write_provenance(const SceneProvenance& provenance, const std::filesystem::path& path);

// --- Legacy homography text files --------------------------------------------
//
// Plain text, nine whitespace-separated numbers, row-major. What the matrix
// means varies by dataset release, so the mapping convention is explicit
// required configuration rather than a guess.

enum class LegacyConvention {
  meters_to_pixels_center,  // file maps our native frame directly to pixels
  pixels_to_yards_corner,   // file maps pixels to a yard grid anchored at the
                            // corner our frame calls (-length/2, -width/2)
  custom,                   // compose caller-supplied pre/post matrices
};

struct LegacyHomographyOptions {
  LegacyConvention convention = LegacyConvention::meters_to_pixels_center;
  PitchSpec pitch;            // needed for the corner-origin shift
  Mat3 pre = Mat3::Identity();   // custom: our world frame -> file world frame
  Mat3 post = Mat3::Identity();  // custom: file image frame -> pixels
};

Homography parse_legacy_homography(const std::string& text,
                                   const LegacyHomographyOptions& options);
Homography read_legacy_homography(const std::filesystem::path& path,
                                  const LegacyHomographyOptions& options);

/// Cheap sanity check for convention mistakes: true when the projected pitch
/// rectangle overlaps the image at all.
bool homography_looks_plausible(const Homography& h, const PitchSpec& pitch,
                                ImageSize image_size);

// --- Evaluation reports -------------------------------------------------------

/// Per-image JSON: counts, per-class verdicts and distances for each
/// tolerance evaluated.
std::string format_image_eval(const std::string& image_id, const std::vector<ImageEval>& evals);

/// Dataset CSV (one tolerance per file). Header:
/// image_id,tp,fp_halluc,fp_inacc,fn,jaccard,reproj_px,reproj_norm
std::string format_dataset_csv(const std::vector<std::pair<std::string, ImageEval>>& rows);

/// Dataset summary JSON across tolerances. `summaries` is parallel to `taus`;
/// `failures` lists images that could not be evaluated.
std::string format_summary(const std::vector<double>& taus,
                           const std::vector<DatasetSummary>& summaries,
                           const std::vector<std::string>& failures = {});

// --- SVG overlays -------------------------------------------------------------

/// SVG 1.1 document: projected elements as polylines colored by verdict
/// (green true positives, orange false positives, red dashed false negatives
/// traced along the annotation), annotated points as circles of radius tau/2,
/// plus a legend.
std::string format_overlay_svg(const CameraModel& camera,
                               const std::vector<FieldElement>& elements,
                               const ImageAnnotation& annotation, const ImageEval& eval);

void render_overlay(const CameraModel& camera, const std::vector<FieldElement>& elements,
                    const ImageAnnotation& annotation, const ImageEval& eval,
                    const std::filesystem::path& path);

}  // namespace fieldcal
