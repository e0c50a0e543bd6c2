#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sg/error.hpp"
#include "sg/units.hpp"

namespace sg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  bool operator==(const Vec2&) const = default;
};

// ---------------------------------------------------------------------------
// Primitives

enum class PrimitiveType { Point, Line, Circle, Arc, Ellipse, Spline };

inline constexpr std::array<PrimitiveType, 6> kPrimitiveTypes = {
    PrimitiveType::Point, PrimitiveType::Line,    PrimitiveType::Circle,
    PrimitiveType::Arc,   PrimitiveType::Ellipse, PrimitiveType::Spline};

std::string_view to_string(PrimitiveType t);
std::optional<PrimitiveType> parse_primitive_type(std::string_view name);

struct PointParams {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const PointParams&) const = default;
};

/// Infinite line through pnt with unit direction dir; the segment spans
/// signed distances [startParam, endParam] from pnt.
struct LineParams {
  double dirX = 1.0, dirY = 0.0;
  double pntX = 0.0, pntY = 0.0;
  double startParam = 0.0, endParam = 1.0;
  bool operator==(const LineParams&) const = default;
};

struct CircleParams {
  double xCenter = 0.0, yCenter = 0.0;
  double xDir = 1.0, yDir = 0.0;
  double radius = 1.0;
  bool clockwise = false;
  bool operator==(const CircleParams&) const = default;
};

/// Arc angles are measured from (xDir, yDir), counter-clockwise unless the
/// clockwise flag is set, in which case the sense is reversed.
struct ArcParams {
  double xCenter = 0.0, yCenter = 0.0;
  double xDir = 1.0, yDir = 0.0;
  double radius = 1.0;
  bool clockwise = false;
  double startParam = 0.0, endParam = 0.0;
  bool operator==(const ArcParams&) const = default;
};

struct EllipseParams {
  double xCenter = 0.0, yCenter = 0.0;
  double xDir = 1.0, yDir = 0.0;
  double radius = 1.0;
  double minorRadius = 0.5;
  bool clockwise = false;
  bool operator==(const EllipseParams&) const = default;
};

struct SplineParams {
  std::vector<Vec2> controlPoints;
  bool operator==(const SplineParams&) const = default;
};

/// Alternative order matches PrimitiveType.
using PrimitiveParams =
    std::variant<PointParams, LineParams, CircleParams, ArcParams, EllipseParams, SplineParams>;

struct Primitive {
  std::string id;
  bool isConstruction = false;
  PrimitiveParams params;
  /// Original record text, used to keep field order and unknown fields when
  /// re-serializing. Not part of value equality.
  std::string raw;

  PrimitiveType type() const { return static_cast<PrimitiveType>(params.index()); }

  bool operator==(const Primitive& o) const {
    return id == o.id && isConstruction == o.isConstruction && params == o.params;
  }
};

/// Throws Error{NonUnitDirection | DegenerateGeometry} if the parameter
/// invariants do not hold.
void check_primitive(const Primitive& p, double unitTolerance = 1e-6);

int dof_of_primitive(PrimitiveType t);
/// Splines have 2 DOF per control point; every other type is fixed.
int dof_of_primitive(const Primitive& p);

// Minimal parameterizations.
struct StdPoint {
  Vec2 p;
  bool operator==(const StdPoint&) const = default;
};
struct StdLine {
  Vec2 start, end;
  bool operator==(const StdLine&) const = default;
};
struct StdCircle {
  Vec2 center;
  double radius = 1.0;
  bool operator==(const StdCircle&) const = default;
};
struct StdArc {
  Vec2 center;
  double radius = 1.0;
  Vec2 startPoint, endPoint;
  bool clockwise = false;
  bool operator==(const StdArc&) const = default;
};
struct StdEllipse {
  Vec2 center;
  Vec2 majorAxisDir{1.0, 0.0};
  double radius = 1.0;
  double minorRadius = 0.5;
  bool operator==(const StdEllipse&) const = default;
};
struct StdSpline {
  std::vector<Vec2> controlPoints;
  bool operator==(const StdSpline&) const = default;
};

using StandardPrimitive =
    std::variant<StdPoint, StdLine, StdCircle, StdArc, StdEllipse, StdSpline>;

inline PrimitiveType type_of(const StandardPrimitive& s) {
  return static_cast<PrimitiveType>(s.index());
}

StandardPrimitive to_standard(const PrimitiveParams& p);
inline StandardPrimitive to_standard(const Primitive& p) { return to_standard(p.params); }

/// Canonical inverse of to_standard: lines anchor at their start point,
/// circles and arcs get direction (1, 0).
PrimitiveParams from_standard(const StandardPrimitive& s);

/// Like from_standard, but keeps the orientation fields (direction vector,
/// clockwise flag) of an existing parameterization where the type allows it.
PrimitiveParams from_standard_like(const StandardPrimitive& s, const PrimitiveParams& like);

/// Rigid translation of every point of a standard primitive.
StandardPrimitive translated(const StandardPrimitive& s, Vec2 by);

// ---------------------------------------------------------------------------
// Constraints

enum class ConstraintType {
  Coincident,
  Horizontal,
  Vertical,
  Parallel,
  Perpendicular,
  Tangent,
  Midpoint,
  Equal,
  Offset,
  Concentric,
  Mirror,
  Diameter,
  Radius,
  Length,
  Distance,
  Angle,
  Projected,  // external; parsed but never solved or counted
};

inline constexpr int kConstraintTypeCount = 17;

std::string_view to_string(ConstraintType t);
std::optional<ConstraintType> parse_constraint_type(std::string_view name);
inline bool is_external(ConstraintType t) { return t == ConstraintType::Projected; }

enum class SubSelector { None, Start, End, Center };

std::string_view to_string(SubSelector s);
bool selector_valid(PrimitiveType t, SubSelector s);
/// Sub-primitive selectors a primitive type exposes, in node-creation order.
std::vector<SubSelector> sub_selectors(PrimitiveType t);

struct EntityRef {
  int primitive = 0;
  SubSelector sel = SubSelector::None;
  auto operator<=>(const EntityRef&) const = default;
};

enum class Direction { Minimum, Vertical, Horizontal };
enum class HalfSpace { Left, Right };

std::string_view to_string(Direction d);
std::string_view to_string(HalfSpace h);
std::optional<Direction> parse_direction(std::string_view s);
std::optional<HalfSpace> parse_half_space(std::string_view s);

struct Constraint {
  ConstraintType type = ConstraintType::Coincident;
  std::vector<EntityRef> locals;
  std::optional<Quantity> length;
  std::optional<double> angle;  // degrees
  std::optional<bool> clockwise;
  std::optional<bool> aligned;
  std::optional<Direction> direction;
  std::optional<HalfSpace> halfSpace0;
  std::optional<HalfSpace> halfSpace1;
  /// "predicted" / "ground_truth" on exported predictions, empty otherwise.
  std::string provenance;
  std::string raw;

  bool operator==(const Constraint& o) const {
    return type == o.type && locals == o.locals && length == o.length && angle == o.angle &&
           clockwise == o.clockwise && aligned == o.aligned && direction == o.direction &&
           halfSpace0 == o.halfSpace0 && halfSpace1 == o.halfSpace1 &&
           provenance == o.provenance;
  }
};

struct Sketch {
  std::string id;
  std::vector<Primitive> primitives;
  std::vector<Constraint> constraints;
  std::string raw;

  bool operator==(const Sketch& o) const {
    return id == o.id && primitives == o.primitives && constraints == o.constraints;
  }
};

enum class SchemaErrorKind { UnknownSchema, DanglingReference, MissingParameter, ExtraParameter };

std::string_view to_string(SchemaErrorKind k);

struct SchemaError {
  SchemaErrorKind kind;
  std::string detail;
};

/// Checks the constraint's parameter set against the accepted schemata for
/// its type and resolves every local reference against the sketch.
std::optional<SchemaError> validate_constraint(const Constraint& c, const Sketch& s);

/// Throws Error{Schema} (or DanglingReference) for the first invalid constraint.
void validate_sketch(const Sketch& s);

}  // namespace sg
