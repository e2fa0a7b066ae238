#include "fieldcal/pitch.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <unordered_map>

#include "fieldcal/error.hpp"

namespace fieldcal {
namespace {

constexpr std::array<std::string_view, kSemanticClassCount> kLabels = {
    "Side line top",
    "Side line bottom",
    "Side line left",
    "Side line right",
    "Middle line",
    "Big rect. left top",
    "Big rect. left main",
    "Big rect. left bottom",
    "Big rect. right top",
    "Big rect. right main",
    "Big rect. right bottom",
    "Small rect. left top",
    "Small rect. left main",
    "Small rect. left bottom",
    "Small rect. right top",
    "Small rect. right main",
    "Small rect. right bottom",
    "Circle central",
    "Circle left",
    "Circle right",
    "Goal left post left",
    "Goal left post right",
    "Goal left crossbar",
    "Goal right post left",
    "Goal right post right",
    "Goal right crossbar",
};

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(std::string("invalid pitch spec: ") + what);
}

}  // namespace

const std::array<SemanticClass, kSemanticClassCount>& all_classes() {
  static const auto classes = [] {
    std::array<SemanticClass, kSemanticClassCount> out{};
    for (int i = 0; i < kSemanticClassCount; ++i) out[i] = static_cast<SemanticClass>(i);
    return out;
  }();
  return classes;
}

std::string_view class_label(SemanticClass cls) {
  return kLabels[static_cast<size_t>(cls)];
}

std::optional<SemanticClass> class_from_label(std::string_view label) {
  static const auto index = [] {
    std::unordered_map<std::string_view, SemanticClass> m;
    for (int i = 0; i < kSemanticClassCount; ++i)
      m.emplace(kLabels[static_cast<size_t>(i)], static_cast<SemanticClass>(i));
    return m;
  }();
  auto it = index.find(label);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> all_class_labels() {
  std::vector<std::string> out;
  out.reserve(kSemanticClassCount);
  for (auto l : kLabels) out.emplace_back(l);
  return out;
}

void PitchSpec::validate() const {
  const std::pair<double, const char*> fields[] = {
      {length, "length"},
      {width, "width"},
      {circle_radius, "circle_radius"},
      {penalty_area_length, "penalty_area_length"},
      {penalty_area_width, "penalty_area_width"},
      {goal_area_length, "goal_area_length"},
      {goal_area_width, "goal_area_width"},
      {penalty_mark_distance, "penalty_mark_distance"},
      {goal_width, "goal_width"},
      {goal_height, "goal_height"},
  };
  for (const auto& [value, name] : fields) {
    if (!(std::isfinite(value) && value > 0.0))
      throw ValidationError(std::string("invalid pitch spec: ") + name +
                            " must be strictly positive");
  }
  require(length > width, "length must exceed width");
  require(penalty_area_width < width, "penalty_area_width must be smaller than width");
  require(goal_area_length < penalty_area_length,
          "goal_area_length must be smaller than penalty_area_length");
  require(goal_width < goal_area_width, "goal_width must be smaller than goal_area_width");
}

bool is_ground_element(const FieldElement& element) {
  if (const auto* seg = std::get_if<Segment3D>(&element.geometry))
    return seg->a.z() == 0.0 && seg->b.z() == 0.0;
  const auto& c = std::get<Circle3D>(element.geometry);
  return c.center.z() == 0.0 && c.normal.x() == 0.0 && c.normal.y() == 0.0;
}

std::vector<FieldElement> build_pitch_template(const PitchSpec& spec) {
  spec.validate();

  const double hl = spec.length / 2.0;   // half length
  const double hw = spec.width / 2.0;    // half width
  const double paw = spec.penalty_area_width / 2.0;
  const double pal = spec.penalty_area_length;
  const double gaw = spec.goal_area_width / 2.0;
  const double gal = spec.goal_area_length;
  const double gw = spec.goal_width / 2.0;
  const double gh = spec.goal_height;
  const double r = spec.circle_radius;
  const double pm = spec.penalty_mark_distance;

  auto seg = [](SemanticClass cls, Vec3 a, Vec3 b) {
    return FieldElement{cls, Segment3D{a, b}};
  };

  std::vector<FieldElement> out;
  out.reserve(kSemanticClassCount);

  // Frame convention: "top" side line at Y = -hw, "bottom" at Y = +hw;
  // "left" half is X < 0. Posts named by Y sign (left post at -gw).
  out.push_back(seg(SemanticClass::SideLineTop, {-hl, -hw, 0}, {hl, -hw, 0}));
  out.push_back(seg(SemanticClass::SideLineBottom, {-hl, hw, 0}, {hl, hw, 0}));
  out.push_back(seg(SemanticClass::SideLineLeft, {-hl, -hw, 0}, {-hl, hw, 0}));
  out.push_back(seg(SemanticClass::SideLineRight, {hl, -hw, 0}, {hl, hw, 0}));
  out.push_back(seg(SemanticClass::MiddleLine, {0, -hw, 0}, {0, hw, 0}));

  out.push_back(seg(SemanticClass::BigRectLeftTop, {-hl, -paw, 0}, {-hl + pal, -paw, 0}));
  out.push_back(seg(SemanticClass::BigRectLeftMain, {-hl + pal, -paw, 0}, {-hl + pal, paw, 0}));
  out.push_back(seg(SemanticClass::BigRectLeftBottom, {-hl, paw, 0}, {-hl + pal, paw, 0}));
  out.push_back(seg(SemanticClass::BigRectRightTop, {hl, -paw, 0}, {hl - pal, -paw, 0}));
  out.push_back(seg(SemanticClass::BigRectRightMain, {hl - pal, -paw, 0}, {hl - pal, paw, 0}));
  out.push_back(seg(SemanticClass::BigRectRightBottom, {hl, paw, 0}, {hl - pal, paw, 0}));

  out.push_back(seg(SemanticClass::SmallRectLeftTop, {-hl, -gaw, 0}, {-hl + gal, -gaw, 0}));
  out.push_back(seg(SemanticClass::SmallRectLeftMain, {-hl + gal, -gaw, 0}, {-hl + gal, gaw, 0}));
  out.push_back(seg(SemanticClass::SmallRectLeftBottom, {-hl, gaw, 0}, {-hl + gal, gaw, 0}));
  out.push_back(seg(SemanticClass::SmallRectRightTop, {hl, -gaw, 0}, {hl - gal, -gaw, 0}));
  out.push_back(seg(SemanticClass::SmallRectRightMain, {hl - gal, -gaw, 0}, {hl - gal, gaw, 0}));
  out.push_back(seg(SemanticClass::SmallRectRightBottom, {hl, gaw, 0}, {hl - gal, gaw, 0}));

  out.push_back(FieldElement{SemanticClass::CircleCentral,
                             Circle3D{{0, 0, 0}, r, {0, 0, 1}, 0.0, 2.0 * std::numbers::pi}});

  // Penalty arcs: the part of the circle around the penalty mark that
  // lies beyond the penalty-area line. The visible window covers
  // |theta| < alpha around the pitch-center direction.
  const double d = pal - pm;  // mark to penalty-area line
  if (d >= r)
    throw ValidationError(
        "invalid pitch spec: penalty arc vanishes "
        "(penalty_area_length - penalty_mark_distance >= circle_radius)");
  const double alpha = std::acos(d / r);
  out.push_back(FieldElement{
      SemanticClass::CircleLeft,
      Circle3D{{-hl + pm, 0, 0}, r, {0, 0, 1}, -alpha, 2.0 * alpha}});
  out.push_back(FieldElement{
      SemanticClass::CircleRight,
      Circle3D{{hl - pm, 0, 0}, r, {0, 0, 1}, std::numbers::pi - alpha, 2.0 * alpha}});

  out.push_back(seg(SemanticClass::GoalLeftPostLeft, {-hl, -gw, 0}, {-hl, -gw, gh}));
  out.push_back(seg(SemanticClass::GoalLeftPostRight, {-hl, gw, 0}, {-hl, gw, gh}));
  out.push_back(seg(SemanticClass::GoalLeftCrossbar, {-hl, -gw, gh}, {-hl, gw, gh}));
  out.push_back(seg(SemanticClass::GoalRightPostLeft, {hl, -gw, 0}, {hl, -gw, gh}));
  out.push_back(seg(SemanticClass::GoalRightPostRight, {hl, gw, 0}, {hl, gw, gh}));
  out.push_back(seg(SemanticClass::GoalRightCrossbar, {hl, -gw, gh}, {hl, gw, gh}));

  return out;
}

std::vector<Vec3> sample_element(const FieldElement& element, double max_spacing) {
  if (!(max_spacing > 0.0))
    throw ValidationError("sample_element: max_spacing must be > 0");

  std::vector<Vec3> pts;
  if (const auto* seg = std::get_if<Segment3D>(&element.geometry)) {
    const double len = (seg->b - seg->a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / max_spacing)));
    pts.reserve(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(n);
      pts.push_back(seg->a + t * (seg->b - seg->a));
    }
    return pts;
  }

  const auto& c = std::get<Circle3D>(element.geometry);
  if (!(c.radius > 0.0)) throw ValidationError("sample_element: circle radius must be > 0");

  // In-plane basis; the shipped template only uses normal = +Z, where
  // u = +X and v = +Y gives counterclockwise order seen from above.
  const Vec3 n = c.normal.normalized();
  Vec3 u;
  if (n.isApprox(Vec3(0, 0, 1), 1e-12)) {
    u = Vec3(1, 0, 0);
  } else {
    const Vec3 ref = std::abs(n.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
    u = ref.cross(n).normalized();
  }
  const Vec3 v = n.cross(u);

  const double arc = c.radius * std::abs(c.sweep);
  const int steps = std::max(1, static_cast<int>(std::ceil(arc / max_spacing)));
  const bool full = std::abs(std::abs(c.sweep) - 2.0 * std::numbers::pi) < 1e-12;
  pts.reserve(steps + 1);
  const int last = full ? steps - 1 : steps;
  for (int k = 0; k <= last; ++k) {
    const double theta = c.start_angle + c.sweep * static_cast<double>(k) / steps;
    pts.push_back(c.center + c.radius * (std::cos(theta) * u + std::sin(theta) * v));
  }
  if (full) pts.push_back(pts.front());  // exact closure
  return pts;
}

}  // namespace fieldcal
