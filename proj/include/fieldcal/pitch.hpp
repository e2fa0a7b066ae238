#pragma once

#include <array>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fieldcal/types.hpp"

namespace fieldcal {

/// Soccer pitch dimensions in meters. Defaults follow the laws of the
/// game for a 105 x 68 pitch.
struct PitchSpec {
  double length = 105.0;
  double width = 68.0;
  double circle_radius = 9.15;
  double penalty_area_length = 16.5;
  double penalty_area_width = 40.32;
  double goal_area_length = 5.5;
  double goal_area_width = 18.32;
  double penalty_mark_distance = 11.0;
  double goal_width = 7.32;
  double goal_height = 2.44;

  /// Throws ValidationError naming the violated invariant.
  void validate() const;
};

/// The closed 26-label registry of semantic pitch elements.
enum class SemanticClass : int {
  SideLineTop = 0,
  SideLineBottom,
  SideLineLeft,
  SideLineRight,
  MiddleLine,
  BigRectLeftTop,
  BigRectLeftMain,
  BigRectLeftBottom,
  BigRectRightTop,
  BigRectRightMain,
  BigRectRightBottom,
  SmallRectLeftTop,
  SmallRectLeftMain,
  SmallRectLeftBottom,
  SmallRectRightTop,
  SmallRectRightMain,
  SmallRectRightBottom,
  CircleCentral,
  CircleLeft,
  CircleRight,
  GoalLeftPostLeft,
  GoalLeftPostRight,
  GoalLeftCrossbar,
  GoalRightPostLeft,
  GoalRightPostRight,
  GoalRightCrossbar,
};

inline constexpr int kSemanticClassCount = 26;

const std::array<SemanticClass, kSemanticClassCount>& all_classes();

std::string_view class_label(SemanticClass cls);

/// Lookup by exact label; no fuzzy matching.
std::optional<SemanticClass> class_from_label(std::string_view label);

/// All registry labels, in canonical order (for error messages).
std::vector<std::string> all_class_labels();

/// 3D line segment in world meters.
struct Segment3D {
  Vec3 a;
  Vec3 b;
};

/// Circle (or circular arc) in world meters. The arc spans angles
/// [start_angle, start_angle + sweep], counterclockwise seen from the
/// +normal side, with angle 0 along world +X within the circle plane.
struct Circle3D {
  Vec3 center;
  double radius = 0.0;
  Vec3 normal = Vec3(0, 0, 1);
  double start_angle = 0.0;
  double sweep = 2.0 * std::numbers::pi;
};

/// One semantic pitch element with exact world-frame geometry.
struct FieldElement {
  SemanticClass cls;
  std::variant<Segment3D, Circle3D> geometry;
};

/// True if every point of the element lies on the Z = 0 plane.
bool is_ground_element(const FieldElement& element);

/// Builds the full 26-element template. World frame: origin at pitch
/// center, X along pitch length, Y along pitch width, Z up. Throws
/// ValidationError if the dimensions violate their invariants.
std::vector<FieldElement> build_pitch_template(const PitchSpec& spec);

/// Discretizes an element into an ordered 3D polyline whose consecutive
/// point spacing (chord length for circles) is at most max_spacing.
/// Full circles are closed by repeating the first vertex. Throws
/// ValidationError if max_spacing <= 0.
std::vector<Vec3> sample_element(const FieldElement& element, double max_spacing);

}  // namespace fieldcal
