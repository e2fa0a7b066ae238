#include "fieldcal/io.hpp"

#include <json.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fieldcal/error.hpp"
#include "fieldcal/geometry.hpp"

namespace fieldcal {

namespace {

using nlohmann::json;

// Lossless double formatting: 17 significant digits survive text -> double
// -> text bit-exactly. Negative zero is flattened: JSON "-0" comes back as
// the integer 0, which would de-stabilize the round trip.
std::string g17(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Fixed 6-decimal formatting for pixel coordinates. Re-parsing and
// re-formatting a 6-decimal value reproduces the same text, which is what
// keeps annotation files byte-stable across round trips.
std::string f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "\\u%04x", c);
      out += buf;
    } else {
      out += c;
    }
  }
  return out;
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    // Covers syntax errors and numeric overflow (e.g. 1e999) alike; vendor
    // exception types must not leak through this interface.
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

void require_keys(const json& obj, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const char* what) {
  for (const char* key : required) {
    if (!obj.contains(key)) {
      throw SchemaError(std::string(what) + ": missing key \"" + key + "\"");
    }
  }
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool known = false;
    for (const char* k : required) known = known || key == k;
    for (const char* k : optional) known = known || key == k;
    if (!known) {
      throw SchemaError(std::string(what) + ": unknown key \"" + key + "\"");
    }
  }
}

double number_at(const json& v, const char* what) {
  if (!v.is_number()) throw SchemaError(std::string(what) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(std::string(what) + ": non-finite number");
  return d;
}

int int_at(const json& v, const char* what) {
  if (!v.is_number_integer()) throw SchemaError(std::string(what) + ": expected an integer");
  return v.get<int>();
}

Mat3 mat3_at(const json& v, const char* what) {
  if (!v.is_array() || v.size() != 9) {
    throw SchemaError(std::string(what) + ": expected an array of 9 numbers");
  }
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = number_at(v[i], what);
  return m;
}

Vec3 vec3_at(const json& v, const char* what) {
  if (!v.is_array() || v.size() != 3) {
    throw SchemaError(std::string(what) + ": expected an array of 3 numbers");
  }
  return {number_at(v[0], what), number_at(v[1], what), number_at(v[2], what)};
}

Vec2 vec2_at(const json& v, const char* what) {
  if (!v.is_array() || v.size() != 2) {
    throw SchemaError(std::string(what) + ": expected an array of 2 numbers");
  }
  return {number_at(v[0], what), number_at(v[1], what)};
}

SemanticClass class_at(const std::string& label) {
  const std::optional<SemanticClass> cls = class_from_label(label);
  if (!cls) {
    std::string msg = "unknown class label \"" + label + "\"; valid labels are: ";
    const std::vector<std::string> labels = all_class_labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i > 0) msg += ", ";
      msg += "\"" + labels[i] + "\"";
    }
    throw SchemaError(msg);
  }
  return *cls;
}

void append_matrix(std::string& out, const Mat3& m) {
  out += '[';
  for (int i = 0; i < 9; ++i) {
    if (i > 0) out += ", ";
    out += g17(m(i / 3, i % 3));
  }
  out += ']';
}

std::vector<SemanticClass> class_list_at(const json& v, const char* what) {
  if (!v.is_array()) throw SchemaError(std::string(what) + ": expected an array");
  std::vector<SemanticClass> out;
  out.reserve(v.size());
  for (const json& item : v) {
    if (!item.is_string()) throw SchemaError(std::string(what) + ": expected class labels");
    out.push_back(class_at(item.get<std::string>()));
  }
  return out;
}

void append_class_list(std::string& out, const std::vector<SemanticClass>& classes) {
  out += '[';
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (i > 0) out += ", ";
    out += '"';
    out += json_escape(class_label(classes[i]));
    out += '"';
  }
  out += ']';
}

const char* verdict_tag(ClassVerdict v) {
  switch (v) {
    case ClassVerdict::true_positive: return "tp";
    case ClassVerdict::fp_inaccurate: return "fp_inaccurate";
    case ClassVerdict::fp_hallucinated: return "fp_hallucinated";
    case ClassVerdict::false_negative: return "fn";
  }
  return "unknown";
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed while reading " + path.string());
  return std::move(buffer).str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed while writing " + path.string());
}

// --- Annotations -------------------------------------------------------------

ImageAnnotation parse_annotation(const std::string& text) {
  const json j = parse_json(text, "annotation");
  if (!j.is_object()) throw SchemaError("annotation: expected a JSON object");
  require_keys(j, {"image_width", "image_height", "elements"}, {}, "annotation");

  ImageAnnotation annotation;
  annotation.image_size.width = int_at(j["image_width"], "annotation image_width");
  annotation.image_size.height = int_at(j["image_height"], "annotation image_height");
  const json& elements = j["elements"];
  if (!elements.is_object()) throw SchemaError("annotation: \"elements\" must be an object");

  for (const auto& [label, points] : elements.items()) {
    const SemanticClass cls = class_at(label);
    if (!points.is_array() || points.empty()) {
      throw SchemaError("annotation: class \"" + label + "\" needs a non-empty point array");
    }
    std::vector<Vec2> parsed;
    parsed.reserve(points.size());
    for (const json& p : points) {
      if (!p.is_object()) {
        throw SchemaError("annotation: points of \"" + label + "\" must be {\"x\", \"y\"} objects");
      }
      require_keys(p, {"x", "y"}, {}, "annotation point");
      parsed.emplace_back(number_at(p["x"], "annotation point x"),
                          number_at(p["y"], "annotation point y"));
    }
    annotation.elements.emplace(cls, std::move(parsed));
  }
  annotation.validate();
  return annotation;
}

std::string format_annotation(const ImageAnnotation& annotation) {
  std::string out;
  out += "{\n";
  out += "  \"image_width\": " + std::to_string(annotation.image_size.width) + ",\n";
  out += "  \"image_height\": " + std::to_string(annotation.image_size.height) + ",\n";
  out += "  \"elements\": {";
  bool first_class = true;
  for (const auto& [cls, points] : annotation.elements) {
    if (!first_class) out += ",";
    first_class = false;
    out += "\n    \"";
    out += json_escape(class_label(cls));
    out += "\": [";
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i > 0) out += ", ";
      out += "{\"x\": " + f6(points[i].x()) + ", \"y\": " + f6(points[i].y()) + "}";
    }
    out += "]";
  }
  out += annotation.elements.empty() ? "}\n" : "\n  }\n";
  out += "}\n";
  return out;
}

ImageAnnotation read_annotation(const std::filesystem::path& path) {
  return parse_annotation(read_text_file(path));
}

void write_annotation(const ImageAnnotation& annotation, const std::filesystem::path& path) {
  write_text_file(path, format_annotation(annotation));
}

// --- Pitch dimensions -----------------------------------------------------------

namespace {

struct PitchField {
  const char* key;
  double PitchSpec::* member;
};

constexpr PitchField kPitchFields[] = {
    {"length", &PitchSpec::length},
    {"width", &PitchSpec::width},
    {"circle_radius", &PitchSpec::circle_radius},
    {"penalty_area_length", &PitchSpec::penalty_area_length},
    {"penalty_area_width", &PitchSpec::penalty_area_width},
    {"goal_area_length", &PitchSpec::goal_area_length},
    {"goal_area_width", &PitchSpec::goal_area_width},
    {"penalty_mark_distance", &PitchSpec::penalty_mark_distance},
    {"goal_width", &PitchSpec::goal_width},
    {"goal_height", &PitchSpec::goal_height},
};

}  // namespace

PitchSpec parse_pitch(const std::string& text) {
  const json j = parse_json(text, "pitch");
  if (!j.is_object()) throw SchemaError("pitch: expected a JSON object");
  PitchSpec pitch;
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const PitchField& field : kPitchFields) {
      if (key == field.key) {
        pitch.*(field.member) = number_at(value, field.key);
        known = true;
        break;
      }
    }
    if (!known) throw SchemaError("pitch: unknown key \"" + key + "\"");
  }
  pitch.validate();
  return pitch;
}

std::string format_pitch(const PitchSpec& pitch) {
  std::string out = "{\n";
  bool first = true;
  for (const PitchField& field : kPitchFields) {
    if (!first) out += ",\n";
    first = false;
    out += std::string("  \"") + field.key + "\": " + g17(pitch.*(field.member));
  }
  out += "\n}\n";
  return out;
}

PitchSpec read_pitch(const std::filesystem::path& path) {
  return parse_pitch(read_text_file(path));
}

void write_pitch(const PitchSpec& pitch, const std::filesystem::path& path) {
  write_text_file(path, format_pitch(pitch));
}

// --- Cameras ------------------------------------------------------------------

CameraModel parse_camera(const std::string& text) {
  const json j = parse_json(text, "camera");
  if (!j.is_object()) throw SchemaError("camera: expected a JSON object");
  if (!j.contains("model") || !j["model"].is_string()) {
    throw SchemaError("camera: missing \"model\" tag");
  }
  const std::string model = j["model"].get<std::string>();

  if (model == "homography") {
    require_keys(j, {"model", "h"}, {}, "camera");
    return Homography(mat3_at(j["h"], "camera h"));
  }
  if (model == "pinhole" || model == "pinhole_radial") {
    SimplifiedPinhole base;
    if (model == "pinhole") {
      require_keys(j, {"model", "focal", "principal_point", "rotation", "translation"}, {},
                   "camera");
    } else {
      require_keys(j, {"model", "focal", "principal_point", "rotation", "translation", "k1"},
                   {"k2"}, "camera");
    }
    base.focal = number_at(j["focal"], "camera focal");
    base.principal_point = vec2_at(j["principal_point"], "camera principal_point");
    base.rotation = mat3_at(j["rotation"], "camera rotation");
    base.translation = vec3_at(j["translation"], "camera translation");
    if (model == "pinhole") {
      base.validate();
      return base;
    }
    PinholeRadial camera;
    camera.base = base;
    camera.k1 = number_at(j["k1"], "camera k1");
    camera.k2 = j.contains("k2") ? number_at(j["k2"], "camera k2") : 0.0;
    camera.validate();
    return camera;
  }
  throw SchemaError("camera: unknown model \"" + model +
                    "\"; expected \"homography\", \"pinhole\", or \"pinhole_radial\"");
}

std::string format_camera(const CameraModel& camera) {
  std::string out = "{\n";
  if (const auto* h = std::get_if<Homography>(&camera)) {
    out += "  \"model\": \"homography\",\n  \"h\": ";
    append_matrix(out, h->h);
    out += "\n}\n";
    return out;
  }
  const SimplifiedPinhole* base = nullptr;
  const PinholeRadial* radial = std::get_if<PinholeRadial>(&camera);
  if (radial != nullptr) {
    base = &radial->base;
    out += "  \"model\": \"pinhole_radial\",\n";
  } else {
    base = &std::get<SimplifiedPinhole>(camera);
    out += "  \"model\": \"pinhole\",\n";
  }
  out += "  \"focal\": " + g17(base->focal) + ",\n";
  out += "  \"principal_point\": [" + g17(base->principal_point.x()) + ", " +
         g17(base->principal_point.y()) + "],\n";
  out += "  \"rotation\": ";
  append_matrix(out, base->rotation);
  out += ",\n  \"translation\": [" + g17(base->translation.x()) + ", " +
         g17(base->translation.y()) + ", " + g17(base->translation.z()) + "]";
  if (radial != nullptr) {
    out += ",\n  \"k1\": " + g17(radial->k1);
    out += ",\n  \"k2\": " + g17(radial->k2);
  }
  out += "\n}\n";
  return out;
}

CameraModel read_camera(const std::filesystem::path& path) {
  return parse_camera(read_text_file(path));
}

void write_camera(const CameraModel& camera, const std::filesystem::path& path) {
  write_text_file(path, format_camera(camera));
}

// --- Provenance ----------------------------------------------------------------

std::string format_provenance(const SceneProvenance& provenance) {
  std::string out = "{\n";
  out += "  \"seed\": " + std::to_string(provenance.seed) + ",\n";
  out += "  \"annotated\": ";
  append_class_list(out, provenance.annotated);
  out += ",\n  \"dropped\": ";
  append_class_list(out, provenance.dropped);
  out += ",\n  \"hallucinated\": ";
  append_class_list(out, provenance.hallucinated);
  out += "\n}\n";
  return out;
}

SceneProvenance parse_provenance(const std::string& text) {
  const json j = parse_json(text, "provenance");
  if (!j.is_object()) throw SchemaError("provenance: expected a JSON object");
  require_keys(j, {"seed", "annotated", "dropped", "hallucinated"}, {}, "provenance");
  if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
    throw SchemaError("provenance seed: expected an integer");
  }
  SceneProvenance p;
  p.seed = j["seed"].get<std::uint64_t>();
  p.annotated = class_list_at(j["annotated"], "provenance annotated");
  p.dropped = class_list_at(j["dropped"], "provenance dropped");
  p.hallucinated = class_list_at(j["hallucinated"], "provenance hallucinated");
  return p;
}

SceneProvenance read_provenance(const std::filesystem::path& path) {
  return parse_provenance(read_text_file(path));
}

void write_provenance(const SceneProvenance& provenance, const std::filesystem::path& path) {
  write_text_file(path, format_provenance(provenance));
}

// --- Legacy homography -----------------------------------------------------------

Homography parse_legacy_homography(const std::string& text,
                                   const LegacyHomographyOptions& options) {
  std::istringstream in(text);
  Mat3 m;
  for (int i = 0; i < 9; ++i) {
    double v = 0.0;
    if (!(in >> v)) {
      throw ParseError("legacy homography: expected 9 whitespace-separated numbers");
    }
    if (!std::isfinite(v)) throw ParseError("legacy homography: non-finite entry");
    m(i / 3, i % 3) = v;
  }
  std::string trailing;
  if (in >> trailing) {
    throw ParseError("legacy homography: trailing content after 9 numbers");
  }

  switch (options.convention) {
    case LegacyConvention::meters_to_pixels_center:
      return Homography(m);
    case LegacyConvention::pixels_to_yards_corner: {
      // File matrix: pixels -> yard grid anchored at the (-L/2, -W/2) corner.
      // Ours: meters about the center -> pixels. Compose the unit change and
      // origin shift, then invert the file direction.
      constexpr double kMetersPerYard = 0.9144;
      const double yards_per_meter = 1.0 / kMetersPerYard;
      Mat3 center_to_corner;
      center_to_corner << yards_per_meter, 0.0, yards_per_meter * options.pitch.length / 2.0,
                          0.0, yards_per_meter, yards_per_meter * options.pitch.width / 2.0,
                          0.0, 0.0, 1.0;
      return Homography(Mat3(m.inverse() * center_to_corner));
    }
    case LegacyConvention::custom:
      return Homography(Mat3(options.post * m * options.pre));
  }
  throw ValidationError("legacy homography: unknown convention");
}

Homography read_legacy_homography(const std::filesystem::path& path,
                                  const LegacyHomographyOptions& options) {
  return parse_legacy_homography(read_text_file(path), options);
}

bool homography_looks_plausible(const Homography& h, const PitchSpec& pitch,
                                ImageSize image_size) {
  const double hl = pitch.length / 2.0;
  const double hw = pitch.width / 2.0;
  Polygon2D projected;
  for (const Vec2& corner : {Vec2(-hl, -hw), Vec2(hl, -hw), Vec2(hl, hw), Vec2(-hl, hw)}) {
    const Projection2D p = project(h, Vec3(corner.x(), corner.y(), 0.0));
    if (!p.ok()) return false;
    projected.push_back(*p.point);
  }
  const double w = image_size.width;
  const double hh = image_size.height;
  const Polygon2D frame{{0.0, 0.0}, {w, 0.0}, {w, hh}, {0.0, hh}};
  try {
    return polygon_area(clip_polygon(projected, frame)) > 0.0;
  } catch (const GeometryError&) {
    return false;  // projected rectangle degenerate: certainly not plausible
  }
}

// --- Reports ---------------------------------------------------------------------

std::string format_image_eval(const std::string& image_id, const std::vector<ImageEval>& evals) {
  std::string out = "{\n";
  out += "  \"image_id\": \"" + json_escape(image_id) + "\",\n";
  out += "  \"evals\": [";
  for (std::size_t e = 0; e < evals.size(); ++e) {
    const ImageEval& eval = evals[e];
    if (e > 0) out += ",";
    out += "\n    {\n";
    out += "      \"tau\": " + g17(eval.tau) + ",\n";
    out += "      \"tp\": " + std::to_string(eval.counts.tp) + ",\n";
    out += "      \"fp_hallucinated\": " + std::to_string(eval.counts.fp_hallucinated) + ",\n";
    out += "      \"fp_inaccurate\": " + std::to_string(eval.counts.fp_inaccurate) + ",\n";
    out += "      \"fn\": " + std::to_string(eval.counts.fn) + ",\n";
    out += "      \"jaccard\": " + g17(eval.jaccard) + ",\n";
    out += std::string("      \"vacuous\": ") + (eval.vacuous ? "true" : "false") + ",\n";
    out += "      \"reprojection_px\": " +
           (eval.reprojection_px ? g17(*eval.reprojection_px) : std::string("null")) + ",\n";
    out += "      \"reprojection_norm\": " +
           (eval.reprojection_norm ? g17(*eval.reprojection_norm) : std::string("null")) + ",\n";
    out += "      \"excluded_points\": " + std::to_string(eval.excluded_points) + ",\n";
    out += "      \"classes\": [";
    for (std::size_t c = 0; c < eval.classes.size(); ++c) {
      const ClassEval& ce = eval.classes[c];
      if (c > 0) out += ",";
      out += "\n        {\"label\": \"";
      out += json_escape(class_label(ce.cls));
      out += "\", \"verdict\": \"";
      out += verdict_tag(ce.verdict);
      out += "\", \"worst_distance\": ";
      out += ce.worst_distance ? g17(*ce.worst_distance) : std::string("null");
      out += ", \"distances\": [";
      for (std::size_t d = 0; d < ce.point_distances.size(); ++d) {
        if (d > 0) out += ", ";
        out += g17(ce.point_distances[d]);
      }
      out += "]}";
    }
    out += eval.classes.empty() ? "]" : "\n      ]";
    out += "\n    }";
  }
  out += evals.empty() ? "]" : "\n  ]";
  out += "\n}\n";
  return out;
}

std::string format_dataset_csv(const std::vector<std::pair<std::string, ImageEval>>& rows) {
  std::string out = "image_id,tp,fp_halluc,fp_inacc,fn,jaccard,reproj_px,reproj_norm\n";
  for (const auto& [image_id, eval] : rows) {
    out += image_id;
    out += ',' + std::to_string(eval.counts.tp);
    out += ',' + std::to_string(eval.counts.fp_hallucinated);
    out += ',' + std::to_string(eval.counts.fp_inaccurate);
    out += ',' + std::to_string(eval.counts.fn);
    out += ',' + f6(eval.jaccard);
    out += ',';
    if (eval.reprojection_px) out += f6(*eval.reprojection_px);
    out += ',';
    if (eval.reprojection_norm) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.9f", *eval.reprojection_norm);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string format_summary(const std::vector<double>& taus,
                           const std::vector<DatasetSummary>& summaries,
                           const std::vector<std::string>& failures) {
  if (taus.size() != summaries.size()) {
    throw ValidationError("summary: one aggregate per tolerance required");
  }
  std::string out = "{\n  \"results\": [";
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const DatasetSummary& s = summaries[i];
    if (i > 0) out += ",";
    out += "\n    {\n";
    out += "      \"tau\": " + g17(taus[i]) + ",\n";
    out += "      \"images\": " + std::to_string(s.images) + ",\n";
    out += "      \"tp\": " + std::to_string(s.counts.tp) + ",\n";
    out += "      \"fp_hallucinated\": " + std::to_string(s.counts.fp_hallucinated) + ",\n";
    out += "      \"fp_inaccurate\": " + std::to_string(s.counts.fp_inaccurate) + ",\n";
    out += "      \"fn\": " + std::to_string(s.counts.fn) + ",\n";
    out += "      \"jaccard_micro\": " + g17(s.micro_jaccard) + ",\n";
    out += "      \"jaccard_mean\": " + g17(s.mean_jaccard) + ",\n";
    out += "      \"reprojection_px_mean\": " +
           (s.mean_reprojection_px ? g17(*s.mean_reprojection_px) : std::string("null")) + ",\n";
    out += "      \"reprojection_px_median\": " +
           (s.median_reprojection_px ? g17(*s.median_reprojection_px) : std::string("null")) +
           ",\n";
    out += "      \"reprojection_norm_mean\": " +
           (s.mean_reprojection_norm ? g17(*s.mean_reprojection_norm) : std::string("null")) +
           ",\n";
    out += "      \"images_without_reprojection\": " +
           std::to_string(s.images_without_reprojection) + "\n";
    out += "    }";
  }
  out += taus.empty() ? "]" : "\n  ]";
  out += ",\n  \"failures\": [";
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (i > 0) out += ", ";
    out += '"' + json_escape(failures[i]) + '"';
  }
  out += "]\n}\n";
  return out;
}

// --- SVG --------------------------------------------------------------------------

std::string format_overlay_svg(const CameraModel& camera,
                               const std::vector<FieldElement>& elements,
                               const ImageAnnotation& annotation, const ImageEval& eval) {
  const int w = annotation.image_size.width;
  const int h = annotation.image_size.height;

  const char* kGreen = "#2e9e44";
  const char* kOrange = "#e8842c";
  const char* kRed = "#d33c3c";

  std::map<SemanticClass, const ClassEval*> verdicts;
  for (const ClassEval& ce : eval.classes) verdicts.emplace(ce.cls, &ce);

  const auto f2 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };
  const auto polyline_tag = [&f2](const Polyline2D& pts, const char* color, bool dashed) {
    std::string tag = "  <polyline fill=\"none\" stroke=\"";
    tag += color;
    tag += "\" stroke-width=\"2\"";
    if (dashed) tag += " stroke-dasharray=\"8 6\"";
    tag += " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i > 0) tag += ' ';
      tag += f2(pts[i].x()) + ',' + f2(pts[i].y());
    }
    tag += "\"/>\n";
    return tag;
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(w) + "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " +
         std::to_string(w) + " " + std::to_string(h) + "\">\n";
  svg += "  <rect x=\"0\" y=\"0\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" fill=\"#20402a\"/>\n";

  for (const FieldElement& element : elements) {
    const auto it = verdicts.find(element.cls);
    if (it == verdicts.end()) continue;  // neither annotated nor predicted
    const ClassVerdict verdict = it->second->verdict;

    const char* color = kGreen;
    if (verdict == ClassVerdict::fp_inaccurate || verdict == ClassVerdict::fp_hallucinated) {
      color = kOrange;
    } else if (verdict == ClassVerdict::false_negative) {
      color = kRed;
    }

    if (verdict == ClassVerdict::false_negative) {
      // Nothing projects in-frame: trace the annotation itself, dashed.
      const auto ann = annotation.elements.find(element.cls);
      if (ann != annotation.elements.end() && ann->second.size() >= 2) {
        svg += polyline_tag(ann->second, color, /*dashed=*/true);
      }
    } else {
      for (const Polyline2D& piece :
           project_polyline(camera, sample_element(element, kDefaultMetricSpacing))) {
        svg += polyline_tag(piece, color, /*dashed=*/false);
      }
    }

    const auto ann = annotation.elements.find(element.cls);
    if (ann != annotation.elements.end()) {
      for (const Vec2& p : ann->second) {
        svg += "  <circle cx=\"" + f2(p.x()) + "\" cy=\"" + f2(p.y()) + "\" r=\"" +
               f2(eval.tau / 2.0) + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
      }
    }
  }

  // Legend.
  svg += "  <g font-family=\"sans-serif\" font-size=\"16\">\n";
  const struct {
    const char* color;
    const char* label;
  } legend[] = {{kGreen, "matched within tolerance"},
                {kOrange, "false positive"},
                {kRed, "missed (dashed along annotation)"}};
  for (int i = 0; i < 3; ++i) {
    const int y = 14 + 24 * i;
    svg += "    <rect x=\"12\" y=\"" + std::to_string(y) +
           "\" width=\"18\" height=\"18\" fill=\"" + legend[i].color + "\"/>\n";
    svg += "    <text x=\"36\" y=\"" + std::to_string(y + 14) + "\" fill=\"#ffffff\">" +
           xml_escape(legend[i].label) + "</text>\n";
  }
  svg += "  </g>\n</svg>\n";
  return svg;
}

void render_overlay(const CameraModel& camera, const std::vector<FieldElement>& elements,
                    const ImageAnnotation& annotation, const ImageEval& eval,
                    const std::filesystem::path& path) {
  write_text_file(path, format_overlay_svg(camera, elements, annotation, eval));
}

}  // namespace fieldcal
