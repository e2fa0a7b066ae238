#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <string>

#include "fieldcal/error.hpp"
#include "fieldcal/io.hpp"
#include "fieldcal/metrics.hpp"
#include "fieldcal/pitch.hpp"
#include "fieldcal/synth.hpp"
#include "test_util.hpp"

using namespace fieldcal;
using testutil::check_xml;
using testutil::main_camera;

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "fieldcal_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("annotation files are byte-stable across write and read") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SceneConfig cfg;
    cfg.seed = seed;
    cfg.noise_sigma = 1.0;  // non-trivial decimals
    const SyntheticScene scene = generate_scene(cfg);
    const std::string first = format_annotation(scene.annotation);
    const ImageAnnotation reread = parse_annotation(first);
    CHECK(format_annotation(reread) == first);
  }

  const auto path = scratch_dir() / "annotation.json";
  SceneConfig cfg;
  cfg.seed = 5;
  const SyntheticScene scene = generate_scene(cfg);
  write_annotation(scene.annotation, path);
  CHECK(format_annotation(read_annotation(path)) == format_annotation(scene.annotation));
}

TEST_CASE("a minimal hand-written annotation parses") {
  const std::string text = R"({
    "elements": {"Middle line": [{"y": 10, "x": 20}, {"x": 30.5, "y": 40}]},
    "image_height": 1080,
    "image_width": 1920
  })";
  const ImageAnnotation a = parse_annotation(text);
  CHECK(a.image_size.width == 1920);
  CHECK(a.image_size.height == 1080);
  REQUIRE(a.elements.size() == 1);
  const auto& points = a.elements.at(SemanticClass::MiddleLine);
  REQUIRE(points.size() == 2);
  CHECK(points[0] == Vec2(20.0, 10.0));
  CHECK(points[1] == Vec2(30.5, 40.0));

  const std::string canonical = format_annotation(a);
  CHECK(format_annotation(parse_annotation(canonical)) == canonical);
}

TEST_CASE("an annotation with no elements round trips") {
  ImageAnnotation empty;
  empty.image_size = ImageSize{640, 480};
  const std::string text = format_annotation(empty);
  const ImageAnnotation back = parse_annotation(text);
  CHECK(back.elements.empty());
  CHECK(back.image_size.width == 640);
  CHECK(format_annotation(back) == text);
}

TEST_CASE("annotation parsing rejects bad documents with the right errors") {
  const std::string skeleton =
      R"({"image_width": 1920, "image_height": 1080, "elements": %s})";

  // Unknown class label, with the valid ones spelled out.
  try {
    parse_annotation(R"({"image_width": 1920, "image_height": 1080,
                         "elements": {"Centre dot": [{"x": 1, "y": 1}]}})");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(contains(e.what(), "Centre dot"));
    CHECK(contains(e.what(), "Side line top"));
  }

  CHECK_THROWS_AS(parse_annotation("{"), ParseError);
  CHECK_THROWS_AS(parse_annotation("not json at all"), ParseError);
  CHECK_THROWS_AS(parse_annotation("[1, 2, 3]"), SchemaError);

  // Overflowing literal: rejected either at parse or at the finiteness check.
  CHECK_THROWS_AS(parse_annotation(R"({"image_width": 1920, "image_height": 1080,
      "elements": {"Middle line": [{"x": 1e999, "y": 0}]}})"),
                  Error);

  CHECK_THROWS_AS(parse_annotation(R"({"image_width": 1920, "image_height": 1080,
      "elements": {}, "extra": 1})"),
                  SchemaError);
  CHECK_THROWS_AS(parse_annotation(R"({"image_width": 1920, "elements": {}})"), SchemaError);
  CHECK_THROWS_AS(parse_annotation(R"({"image_width": 1920, "image_height": 1080,
      "elements": {"Middle line": []}})"),
                  SchemaError);
  CHECK_THROWS_AS(parse_annotation(R"({"image_width": 1920, "image_height": 1080,
      "elements": {"Middle line": [{"x": 1, "y": 2, "z": 3}]}})"),
                  SchemaError);
  CHECK_THROWS_AS(parse_annotation(R"({"image_width": 1920, "image_height": 1080,
      "elements": {"Middle line": [[1, 2]]}})"),
                  SchemaError);
  // Syntactically and schema-wise fine, but the point is far outside the
  // tolerated 5% overshoot margin.
  CHECK_THROWS_AS(parse_annotation(R"({"image_width": 1920, "image_height": 1080,
      "elements": {"Middle line": [{"x": 1, "y": -200}]}})"),
                  ValidationError);
  (void)skeleton;
}

TEST_CASE("cameras of every model survive the round trip bit-exactly") {
  const SimplifiedPinhole pin = main_camera(1987.6543210987654);

  const CameraModel as_h = ground_homography_of(pin);
  const CameraModel as_pin = pin;
  const CameraModel as_radial = PinholeRadial{pin, -0.0823456789012345, 0.0012345678901234};

  for (const CameraModel& cam : {as_h, as_pin, as_radial}) {
    const std::string text = format_camera(cam);
    const CameraModel back = parse_camera(text);
    CHECK(format_camera(back) == text);
    CHECK(back.index() == cam.index());
  }

  const auto* radial = std::get_if<PinholeRadial>(&as_radial);
  const auto back = std::get<PinholeRadial>(parse_camera(format_camera(as_radial)));
  CHECK(back.k1 == radial->k1);
  CHECK(back.k2 == radial->k2);
  CHECK(back.base.focal == radial->base.focal);
  CHECK(back.base.rotation == radial->base.rotation);
  CHECK(back.base.translation == radial->base.translation);

  const auto path = scratch_dir() / "camera.json";
  write_camera(as_radial, path);
  CHECK(format_camera(read_camera(path)) == format_camera(as_radial));
}

TEST_CASE("camera parsing covers the schema edge cases") {
  // k2 is optional and defaults to zero.
  const std::string no_k2 = R"({
    "model": "pinhole_radial", "focal": 2000.0, "principal_point": [960, 540],
    "rotation": [1,0,0, 0,0,1, 0,-1,0], "translation": [0, 5, 40], "k1": -0.05
  })";
  const auto cam = std::get<PinholeRadial>(parse_camera(no_k2));
  CHECK(cam.k2 == 0.0);
  CHECK(cam.k1 == -0.05);

  CHECK_THROWS_AS(parse_camera(R"({"model": "fisheye", "h": [1,0,0,0,1,0,0,0,1]})"),
                  SchemaError);
  CHECK_THROWS_AS(parse_camera(R"({"h": [1,0,0,0,1,0,0,0,1]})"), SchemaError);
  CHECK_THROWS_AS(parse_camera(R"({"model": "homography", "h": [1,0,0,0,1,0,0,0]})"),
                  SchemaError);
  // "k1" does not belong to the plain pinhole schema.
  CHECK_THROWS_AS(parse_camera(R"({
    "model": "pinhole", "focal": 2000.0, "principal_point": [960, 540],
    "rotation": [1,0,0, 0,0,1, 0,-1,0], "translation": [0, 5, 40], "k1": -0.05
  })"),
                  SchemaError);
  // Schema-valid but geometrically invalid.
  CHECK_THROWS_AS(parse_camera(R"({
    "model": "pinhole", "focal": -2000.0, "principal_point": [960, 540],
    "rotation": [1,0,0, 0,0,1, 0,-1,0], "translation": [0, 5, 40]
  })"),
                  ValidationError);
  CHECK_THROWS_AS(parse_camera(R"({"model": "homography", "h": [0,0,0,0,0,0,0,0,0]})"),
                  ValidationError);
}

TEST_CASE("legacy homography text maps through the chosen convention") {
  const Homography truth = ground_homography_of(main_camera());

  // Native direction: the file already maps centered meters to pixels.
  std::string native;
  for (int i = 0; i < 9; ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g ", truth.h(i / 3, i % 3));
    native += buf;
  }
  LegacyHomographyOptions opts;
  const Homography parsed = parse_legacy_homography(native, opts);
  for (const Vec2& g : {Vec2(-52.5, -34), Vec2(0, 0), Vec2(30, 20)}) {
    const auto a = project(CameraModel(truth), Vec3(g.x(), g.y(), 0));
    const auto b = project(CameraModel(parsed), Vec3(g.x(), g.y(), 0));
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK((*a.point - *b.point).norm() < 1e-9);
  }
}

TEST_CASE("the pixels-to-yards convention anchors the corner at zero") {
  // An identity file matrix means pixel coordinates ARE corner-anchored yards.
  LegacyHomographyOptions opts;
  opts.convention = LegacyConvention::pixels_to_yards_corner;
  const Homography h = parse_legacy_homography("1 0 0\n0 1 0\n0 0 1\n", opts);

  const auto corner = project(CameraModel(h), Vec3(-52.5, -34.0, 0.0));
  REQUIRE(corner.ok());
  CHECK(corner.point->norm() < 1e-9);

  // One yard along X from the corner lands at pixel (1, 0).
  const auto yard = project(CameraModel(h), Vec3(-52.5 + 0.9144, -34.0, 0.0));
  REQUIRE(yard.ok());
  CHECK((*yard.point - Vec2(1.0, 0.0)).norm() < 1e-9);
}

TEST_CASE("the pixels-to-yards convention inverts a synthetic export") {
  const Homography truth = ground_homography_of(main_camera());
  constexpr double yd = 1.0 / 0.9144;
  Mat3 center_to_corner;
  center_to_corner << yd, 0, yd * 52.5, 0, yd, yd * 34.0, 0, 0, 1;
  const Mat3 file_matrix = center_to_corner * truth.h.inverse();

  std::string text;
  for (int i = 0; i < 9; ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g ", file_matrix(i / 3, i % 3));
    text += buf;
  }
  LegacyHomographyOptions opts;
  opts.convention = LegacyConvention::pixels_to_yards_corner;
  const Homography parsed = parse_legacy_homography(text, opts);

  for (const Vec2& g : {Vec2(-52.5, -34), Vec2(52.5, 34), Vec2(10, -5)}) {
    const auto a = project(CameraModel(truth), Vec3(g.x(), g.y(), 0));
    const auto b = project(CameraModel(parsed), Vec3(g.x(), g.y(), 0));
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK((*a.point - *b.point).norm() < 1e-6);
  }
}

TEST_CASE("the custom convention composes caller matrices") {
  const Homography truth = ground_homography_of(main_camera());
  std::string text;
  for (int i = 0; i < 9; ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g ", truth.h(i / 3, i % 3));
    text += buf;
  }

  LegacyHomographyOptions opts;
  opts.convention = LegacyConvention::custom;  // identity pre/post
  const Homography parsed = parse_legacy_homography(text, opts);
  const auto a = project(CameraModel(parsed), Vec3(10, 5, 0));
  const auto b = project(CameraModel(truth), Vec3(10, 5, 0));
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK((*a.point - *b.point).norm() < 1e-9);
}

TEST_CASE("legacy parsing rejects malformed files") {
  LegacyHomographyOptions opts;
  CHECK_THROWS_AS(parse_legacy_homography("1 0 0 0 1 0 0 0", opts), ParseError);
  CHECK_THROWS_AS(parse_legacy_homography("1 0 0 0 1 0 0 0 1 7", opts), ParseError);
  CHECK_THROWS_AS(parse_legacy_homography("1 0 0 0 abc 0 0 0 1", opts), ParseError);
  CHECK_THROWS_AS(parse_legacy_homography("", opts), ParseError);
  CHECK_THROWS_AS(parse_legacy_homography("0 0 0 0 0 0 0 0 0", opts), ValidationError);
}

TEST_CASE("the plausibility probe flags convention mistakes") {
  const ImageSize size{1920, 1080};
  const Homography truth = ground_homography_of(main_camera());
  CHECK(homography_looks_plausible(truth, PitchSpec{}, size));

  // Shifts the whole pitch beyond the right image edge: no overlap.
  Mat3 far_away;
  far_away << 1, 0, 3000, 0, 1, 2000, 0, 0, 1;
  CHECK_FALSE(homography_looks_plausible(Homography(far_away), PitchSpec{}, size));
}

TEST_CASE("pitch files round trip and tolerate partial documents") {
  PitchSpec pitch;
  pitch.length = 100.123456789012;
  pitch.goal_height = 2.5;
  const std::string text = format_pitch(pitch);
  const PitchSpec back = parse_pitch(text);
  CHECK(back.length == pitch.length);
  CHECK(back.goal_height == pitch.goal_height);
  CHECK(format_pitch(back) == text);

  const PitchSpec partial = parse_pitch(R"({"length": 110.0})");
  CHECK(partial.length == 110.0);
  CHECK(partial.width == PitchSpec{}.width);

  CHECK_THROWS_AS(parse_pitch(R"({"circumference": 300})"), SchemaError);
  CHECK_THROWS_AS(parse_pitch(R"({"length": "long"})"), SchemaError);
  CHECK_THROWS_AS(parse_pitch(R"({"length": 30.0})"), ValidationError);  // shorter than wide
  CHECK_THROWS_AS(parse_pitch("{"), ParseError);

  const auto path = scratch_dir() / "pitch.json";
  write_pitch(pitch, path);
  CHECK(format_pitch(read_pitch(path)) == text);
}

TEST_CASE("provenance files round trip") {
  SceneConfig cfg;
  cfg.seed = 31;
  cfg.dropout_rate = 0.4;
  cfg.hallucination_rate = 0.5;
  const SceneProvenance p = generate_scene(cfg).provenance;
  REQUIRE(!p.annotated.empty());

  const std::string text = format_provenance(p);
  const SceneProvenance back = parse_provenance(text);
  CHECK(back.seed == p.seed);
  CHECK(back.annotated == p.annotated);
  CHECK(back.dropped == p.dropped);
  CHECK(back.hallucinated == p.hallucinated);
  CHECK(format_provenance(back) == text);

  CHECK_THROWS_AS(parse_provenance(R"({"seed": 1, "annotated": [], "dropped": []})"),
                  SchemaError);
  CHECK_THROWS_AS(parse_provenance(R"({"seed": 1, "annotated": ["Nope"], "dropped": [],
                                       "hallucinated": []})"),
                  SchemaError);

  const auto path = scratch_dir() / "provenance.json";
  write_provenance(p, path);
  CHECK(format_provenance(read_provenance(path)) == text);
}

TEST_CASE("dataset csv formatting is stable down to the byte") {
  ImageEval a;
  a.tau = 5.0;
  a.counts = {5, 1, 2, 3};
  a.jaccard = 5.0 / 11.0;
  a.reprojection_px = 1.25;
  a.reprojection_norm = 1.25 / 1080.0;

  ImageEval b;  // vacuous image: no reprojection defined
  b.tau = 5.0;

  const std::string csv = format_dataset_csv({{"match_04", a}, {"empty", b}});
  CHECK(csv ==
        "image_id,tp,fp_halluc,fp_inacc,fn,jaccard,reproj_px,reproj_norm\n"
        "match_04,5,1,2,3,0.454545,1.250000,0.001157407\n"
        "empty,0,0,0,0,1.000000,,\n");
}

TEST_CASE("summary json carries every aggregate and parses back") {
  SceneConfig cfg;
  cfg.seed = 3;
  const SyntheticScene scene = generate_scene(cfg);
  const auto elements = build_pitch_template(cfg.pitch);
  std::vector<ImageEval> at5, at2;
  at5.push_back(evaluate_image(scene.camera, elements, scene.annotation, 5.0));
  at2.push_back(evaluate_image(scene.camera, elements, scene.annotation, 2.0));

  const std::string text =
      format_summary({5.0, 2.0}, {aggregate(at5), aggregate(at2)}, {"broken_image.json"});
  const nlohmann::json j = nlohmann::json::parse(text);
  REQUIRE(j["results"].size() == 2);
  CHECK(j["results"][0]["tau"].get<double>() == 5.0);
  CHECK(j["results"][1]["tau"].get<double>() == 2.0);
  CHECK(j["results"][0]["jaccard_micro"].get<double>() == 1.0);
  CHECK(j["results"][0]["images"].get<int>() == 1);
  CHECK(j["results"][0]["fn"].get<int>() == 0);
  CHECK(j["results"][0]["reprojection_px_mean"].get<double>() <= 1e-9);
  CHECK(j["results"][0]["images_without_reprojection"].get<int>() == 0);
  REQUIRE(j["failures"].size() == 1);
  CHECK(j["failures"][0].get<std::string>() == "broken_image.json");

  CHECK_THROWS_AS(format_summary({5.0}, {}), ValidationError);
}

TEST_CASE("per-image eval json parses back with sane verdicts") {
  SceneConfig cfg;
  cfg.seed = 11;
  cfg.dropout_rate = 0.3;
  const SyntheticScene scene = generate_scene(cfg);
  const auto elements = build_pitch_template(cfg.pitch);
  const std::vector<ImageEval> evals{
      evaluate_image(scene.camera, elements, scene.annotation, 5.0),
      evaluate_image(scene.camera, elements, scene.annotation, 2.0)};

  const std::string text = format_image_eval("scene_11", evals);
  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j["image_id"].get<std::string>() == "scene_11");
  REQUIRE(j["evals"].size() == 2);
  for (const auto& e : j["evals"]) {
    CHECK(e["tp"].get<int>() + e["fp_hallucinated"].get<int>() + e["fp_inaccurate"].get<int>() +
              e["fn"].get<int>() >
          0);
    for (const auto& c : e["classes"]) {
      const std::string verdict = c["verdict"].get<std::string>();
      CHECK((verdict == "tp" || verdict == "fp_inaccurate" || verdict == "fp_hallucinated" ||
             verdict == "fn"));
      CHECK(class_from_label(c["label"].get<std::string>()).has_value());
    }
  }
}

TEST_CASE("overlay svg for a perfect scene is well-formed and all green") {
  SceneConfig cfg;
  cfg.seed = 21;
  const SyntheticScene scene = generate_scene(cfg);
  const auto elements = build_pitch_template(cfg.pitch);
  const ImageEval eval = evaluate_image(scene.camera, elements, scene.annotation, 5.0);
  REQUIRE(eval.jaccard == 1.0);

  const std::string svg = format_overlay_svg(scene.camera, elements, scene.annotation, eval);
  CHECK(check_xml(svg) == "");
  CHECK(contains(svg, "xmlns=\"http://www.w3.org/2000/svg\""));
  CHECK(contains(svg, "stroke=\"#2e9e44\""));
  // The legend swatches are rect fills; colored strokes only appear on
  // verdict geometry, so a perfect image has no orange or red strokes.
  CHECK_FALSE(contains(svg, "stroke=\"#e8842c\""));
  CHECK_FALSE(contains(svg, "stroke=\"#d33c3c\""));
  CHECK(contains(svg, "r=\"2.50\""));  // tau / 2 point markers

  const auto path = scratch_dir() / "overlay.svg";
  render_overlay(scene.camera, elements, scene.annotation, eval, path);
  CHECK(read_text_file(path) == svg);
}

TEST_CASE("overlay svg traces misses dashed along the annotation") {
  // Find a scene whose annotation includes goal geometry, then grade it with
  // a homography: the goal classes cannot project and become misses.
  const auto elements = build_pitch_template(PitchSpec{});
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SceneConfig cfg;
    cfg.seed = seed;
    const SyntheticScene scene = generate_scene(cfg);
    bool has_goal = false;
    for (const FieldElement& e : elements) {
      has_goal = has_goal ||
                 (!is_ground_element(e) && scene.annotation.elements.count(e.cls) > 0);
    }
    if (!has_goal) continue;

    const CameraModel flat = ground_homography_of(scene.camera, true);
    const ImageEval eval = evaluate_image(flat, elements, scene.annotation, 5.0);
    REQUIRE(eval.counts.fn > 0);
    const std::string svg = format_overlay_svg(flat, elements, scene.annotation, eval);
    CHECK(check_xml(svg) == "");
    CHECK(contains(svg, "stroke=\"#d33c3c\""));
    CHECK(contains(svg, "stroke-dasharray=\"8 6\""));
    return;
  }
  FAIL("no scene with goal annotations found");
}

TEST_CASE("file helpers raise IoError on filesystem failure") {
  CHECK_THROWS_AS(read_text_file(scratch_dir() / "does_not_exist.json"), IoError);
  CHECK_THROWS_AS(read_annotation(scratch_dir() / "missing" / "nope.json"), IoError);
  CHECK_THROWS_AS(write_text_file(scratch_dir() / "missing_dir" / "out.txt", "x"), IoError);
}
