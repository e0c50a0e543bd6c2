#include "sg/model.hpp"

#include <algorithm>
#include <numbers>

namespace sg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonUnitDirection: return "NonUnitDirection";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::Schema: return "SchemaError";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::UnsupportedPrimitive: return "UnsupportedPrimitive";
    case ErrorCode::UnsupportedConstraint: return "UnsupportedConstraint";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::OutOfVocabulary: return "OutOfVocabulary";
    case ErrorCode::InsufficientCorpus: return "InsufficientCorpus";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::InconsistentSequence: return "InconsistentSequence";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::Io: return "IoError";
  }
  return "Error";
}

namespace {

constexpr std::array<std::string_view, 6> kPrimitiveNames = {"Point",   "Line",   "Circle",
                                                             "Arc",     "Ellipse", "Spline"};

constexpr std::array<std::string_view, kConstraintTypeCount> kConstraintNames = {
    "Coincident", "Horizontal", "Vertical", "Parallel", "Perpendicular", "Tangent",
    "Midpoint",   "Equal",      "Offset",   "Concentric", "Mirror",      "Diameter",
    "Radius",     "Length",     "Distance", "Angle",      "Projected"};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec2 rotate(Vec2 v, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {v.x * c - v.y * s, v.x * s + v.y * c};
}

double polar_angle(Vec2 v) { return std::atan2(v.y, v.x); }

// Shifts angle by whole turns so it lands in (ref - pi, ref + pi].
double near_angle(double angle, double ref) {
  double d = std::remainder(angle - ref, kTwoPi);
  if (d <= -std::numbers::pi) d += kTwoPi;
  return ref + d;
}

ArcParams arc_from_points(const StdArc& a, Vec2 dir, double startHint) {
  ArcParams out;
  out.xCenter = a.center.x;
  out.yCenter = a.center.y;
  out.xDir = dir.x;
  out.yDir = dir.y;
  out.radius = a.radius;
  out.clockwise = a.clockwise;
  const double phi = polar_angle(dir);
  const double sign = a.clockwise ? -1.0 : 1.0;
  const double s = sign * (polar_angle(a.startPoint - a.center) - phi);
  const double e = sign * (polar_angle(a.endPoint - a.center) - phi);
  out.startParam = near_angle(s, startHint);
  out.endParam = out.startParam + std::remainder(e - out.startParam, kTwoPi);
  if (out.endParam <= out.startParam) out.endParam += kTwoPi;
  return out;
}

}  // namespace

StandardPrimitive translated(const StandardPrimitive& s, Vec2 by) {
  return std::visit(
      [&](auto v) -> StandardPrimitive {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, StdPoint>) {
          v.p = v.p + by;
        } else if constexpr (std::is_same_v<T, StdLine>) {
          v.start = v.start + by;
          v.end = v.end + by;
        } else if constexpr (std::is_same_v<T, StdArc>) {
          v.center = v.center + by;
          v.startPoint = v.startPoint + by;
          v.endPoint = v.endPoint + by;
        } else if constexpr (std::is_same_v<T, StdSpline>) {
          for (auto& q : v.controlPoints) q = q + by;
        } else {
          v.center = v.center + by;
        }
        return v;
      },
      s);
}

std::string_view to_string(PrimitiveType t) { return kPrimitiveNames[static_cast<int>(t)]; }

std::optional<PrimitiveType> parse_primitive_type(std::string_view name) {
  for (std::size_t i = 0; i < kPrimitiveNames.size(); ++i)
    if (kPrimitiveNames[i] == name) return static_cast<PrimitiveType>(i);
  return std::nullopt;
}

std::string_view to_string(ConstraintType t) { return kConstraintNames[static_cast<int>(t)]; }

std::optional<ConstraintType> parse_constraint_type(std::string_view name) {
  for (std::size_t i = 0; i < kConstraintNames.size(); ++i)
    if (kConstraintNames[i] == name) return static_cast<ConstraintType>(i);
  return std::nullopt;
}

std::string_view to_string(SubSelector s) {
  switch (s) {
    case SubSelector::None: return "";
    case SubSelector::Start: return "start";
    case SubSelector::End: return "end";
    case SubSelector::Center: return "center";
  }
  return "";
}

std::vector<SubSelector> sub_selectors(PrimitiveType t) {
  switch (t) {
    case PrimitiveType::Line: return {SubSelector::Start, SubSelector::End};
    case PrimitiveType::Arc: return {SubSelector::Start, SubSelector::End, SubSelector::Center};
    case PrimitiveType::Circle:
    case PrimitiveType::Ellipse: return {SubSelector::Center};
    case PrimitiveType::Point:
    case PrimitiveType::Spline: return {};
  }
  return {};
}

bool selector_valid(PrimitiveType t, SubSelector s) {
  if (s == SubSelector::None) return true;
  auto subs = sub_selectors(t);
  return std::find(subs.begin(), subs.end(), s) != subs.end();
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Minimum: return "minimum";
    case Direction::Vertical: return "vertical";
    case Direction::Horizontal: return "horizontal";
  }
  return "minimum";
}

std::string_view to_string(HalfSpace h) { return h == HalfSpace::Left ? "left" : "right"; }

std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "minimum") return Direction::Minimum;
  if (s == "vertical") return Direction::Vertical;
  if (s == "horizontal") return Direction::Horizontal;
  return std::nullopt;
}

std::optional<HalfSpace> parse_half_space(std::string_view s) {
  if (s == "left") return HalfSpace::Left;
  if (s == "right") return HalfSpace::Right;
  return std::nullopt;
}

std::string_view to_string(SchemaErrorKind k) {
  switch (k) {
    case SchemaErrorKind::UnknownSchema: return "UnknownSchema";
    case SchemaErrorKind::DanglingReference: return "DanglingReference";
    case SchemaErrorKind::MissingParameter: return "MissingParameter";
    case SchemaErrorKind::ExtraParameter: return "ExtraParameter";
  }
  return "";
}

// ---------------------------------------------------------------------------

int dof_of_primitive(PrimitiveType t) {
  switch (t) {
    case PrimitiveType::Point: return 2;
    case PrimitiveType::Line: return 4;
    case PrimitiveType::Circle: return 3;
    case PrimitiveType::Arc: return 5;
    case PrimitiveType::Ellipse: return 5;
    case PrimitiveType::Spline: return 0;
  }
  return 0;
}

int dof_of_primitive(const Primitive& p) {
  if (const auto* s = std::get_if<SplineParams>(&p.params))
    return 2 * static_cast<int>(s->controlPoints.size());
  return dof_of_primitive(p.type());
}

void check_primitive(const Primitive& p, double unitTolerance) {
  auto checkDir = [&](double x, double y) {
    if (std::abs(std::hypot(x, y) - 1.0) > unitTolerance)
      throw Error(ErrorCode::NonUnitDirection, "primitive '" + p.id + "' direction is not unit length");
  };
  auto checkRadius = [&](double r) {
    if (!(r > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "primitive '" + p.id + "' has radius <= 0");
  };
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LineParams>) {
          checkDir(v.dirX, v.dirY);
          if (v.startParam == v.endParam)
            throw Error(ErrorCode::DegenerateGeometry, "line '" + p.id + "' has zero length");
        } else if constexpr (std::is_same_v<T, CircleParams> || std::is_same_v<T, ArcParams>) {
          checkDir(v.xDir, v.yDir);
          checkRadius(v.radius);
        } else if constexpr (std::is_same_v<T, EllipseParams>) {
          checkDir(v.xDir, v.yDir);
          checkRadius(v.radius);
          checkRadius(v.minorRadius);
          if (v.minorRadius > v.radius)
            throw Error(ErrorCode::DegenerateGeometry, "ellipse '" + p.id + "' minor radius exceeds major");
        } else if constexpr (std::is_same_v<T, SplineParams>) {
          if (v.controlPoints.size() < 2)
            throw Error(ErrorCode::DegenerateGeometry, "spline '" + p.id + "' needs two control points");
        }
      },
      p.params);
}

StandardPrimitive to_standard(const PrimitiveParams& params) {
  return std::visit(
      [](const auto& v) -> StandardPrimitive {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointParams>) {
          return StdPoint{{v.x, v.y}};
        } else if constexpr (std::is_same_v<T, LineParams>) {
          const Vec2 dir{v.dirX, v.dirY};
          if (std::abs(dir.norm() - 1.0) > 1e-6)
            throw Error(ErrorCode::NonUnitDirection, "line direction is not unit length");
          const Vec2 pnt{v.pntX, v.pntY};
          return StdLine{pnt + dir * v.startParam, pnt + dir * v.endParam};
        } else if constexpr (std::is_same_v<T, CircleParams>) {
          if (std::abs(std::hypot(v.xDir, v.yDir) - 1.0) > 1e-6)
            throw Error(ErrorCode::NonUnitDirection, "circle direction is not unit length");
          return StdCircle{{v.xCenter, v.yCenter}, v.radius};
        } else if constexpr (std::is_same_v<T, ArcParams>) {
          const Vec2 dir{v.xDir, v.yDir};
          if (std::abs(dir.norm() - 1.0) > 1e-6)
            throw Error(ErrorCode::NonUnitDirection, "arc direction is not unit length");
          const Vec2 c{v.xCenter, v.yCenter};
          const double sign = v.clockwise ? -1.0 : 1.0;
          return StdArc{c, v.radius, c + rotate(dir, sign * v.startParam) * v.radius,
                        c + rotate(dir, sign * v.endParam) * v.radius, v.clockwise};
        } else if constexpr (std::is_same_v<T, EllipseParams>) {
          const Vec2 dir{v.xDir, v.yDir};
          if (std::abs(dir.norm() - 1.0) > 1e-6)
            throw Error(ErrorCode::NonUnitDirection, "ellipse direction is not unit length");
          return StdEllipse{{v.xCenter, v.yCenter}, dir, v.radius, v.minorRadius};
        } else {
          return StdSpline{v.controlPoints};
        }
      },
      params);
}

PrimitiveParams from_standard(const StandardPrimitive& s) {
  return std::visit(
      [](const auto& v) -> PrimitiveParams {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, StdPoint>) {
          return PointParams{v.p.x, v.p.y};
        } else if constexpr (std::is_same_v<T, StdLine>) {
          const Vec2 d = v.end - v.start;
          const double len = d.norm();
          if (!(len > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "zero-length line");
          return LineParams{d.x / len, d.y / len, v.start.x, v.start.y, 0.0, len};
        } else if constexpr (std::is_same_v<T, StdCircle>) {
          if (!(v.radius > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "circle radius <= 0");
          return CircleParams{v.center.x, v.center.y, 1.0, 0.0, v.radius, false};
        } else if constexpr (std::is_same_v<T, StdArc>) {
          if (!(v.radius > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "arc radius <= 0");
          return arc_from_points(v, {1.0, 0.0}, 0.0);
        } else if constexpr (std::is_same_v<T, StdEllipse>) {
          if (!(v.radius > 0.0) || !(v.minorRadius > 0.0))
            throw Error(ErrorCode::DegenerateGeometry, "ellipse radius <= 0");
          const double n = v.majorAxisDir.norm();
          if (!(n > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "ellipse axis has zero length");
          return EllipseParams{v.center.x, v.center.y, v.majorAxisDir.x / n, v.majorAxisDir.y / n,
                               v.radius,   v.minorRadius, false};
        } else {
          return SplineParams{v.controlPoints};
        }
      },
      s);
}

PrimitiveParams from_standard_like(const StandardPrimitive& s, const PrimitiveParams& like) {
  if (s.index() != like.index()) return from_standard(s);
  if (const auto* c = std::get_if<StdCircle>(&s)) {
    auto out = std::get<CircleParams>(like);
    if (!(c->radius > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "circle radius <= 0");
    out.xCenter = c->center.x;
    out.yCenter = c->center.y;
    out.radius = c->radius;
    return out;
  }
  if (const auto* a = std::get_if<StdArc>(&s)) {
    const auto& old = std::get<ArcParams>(like);
    if (!(a->radius > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "arc radius <= 0");
    return arc_from_points(*a, {old.xDir, old.yDir}, old.startParam);
  }
  if (std::holds_alternative<StdEllipse>(s)) {
    auto out = std::get<EllipseParams>(from_standard(s));
    out.clockwise = std::get<EllipseParams>(like).clockwise;
    return out;
  }
  return from_standard(s);
}

// ---------------------------------------------------------------------------
// Schemata

namespace {

enum ParamBit : unsigned {
  kLength = 1u << 0,
  kAngle = 1u << 1,
  kClockwise = 1u << 2,
  kAligned = 1u << 3,
  kDirection = 1u << 4,
  kHalfSpace0 = 1u << 5,
  kHalfSpace1 = 1u << 6,
};

struct Schema {
  int locals;
  unsigned params;
};

std::vector<Schema> schemata(ConstraintType t) {
  using CT = ConstraintType;
  switch (t) {
    case CT::Horizontal:
    case CT::Vertical: return {{1, 0}, {2, 0}};
    case CT::Coincident:
    case CT::Parallel:
    case CT::Perpendicular:
    case CT::Tangent:
    case CT::Midpoint:
    case CT::Equal:
    case CT::Offset:
    case CT::Concentric: return {{2, 0}};
    case CT::Mirror: return {{3, 0}};
    case CT::Diameter:
    case CT::Radius: return {{1, kLength}};
    case CT::Length: return {{1, kDirection | kLength}};
    case CT::Distance:
      // The second form (no half-spaces) is one of the less frequent schemas
      // seen in exported data.
      return {{2, kDirection | kHalfSpace0 | kHalfSpace1 | kLength}, {2, kDirection | kLength}};
    case CT::Angle: return {{2, kAligned | kClockwise | kAngle}};
    case CT::Projected: return {};
  }
  return {};
}

std::string describe_params(unsigned mask) {
  static constexpr std::array<std::string_view, 7> names = {
      "length", "angle", "clockwise", "aligned", "direction", "halfSpace0", "halfSpace1"};
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (mask & (1u << i)) {
      if (!out.empty()) out += ", ";
      out += names[i];
    }
  }
  return out;
}

}  // namespace

std::optional<SchemaError> validate_constraint(const Constraint& c, const Sketch& s) {
  const auto n = static_cast<int>(s.primitives.size());
  for (std::size_t i = 0; i < c.locals.size(); ++i) {
    const auto& ref = c.locals[i];
    if (ref.primitive < 0 || ref.primitive >= n)
      return SchemaError{SchemaErrorKind::DanglingReference,
                         "local" + std::to_string(i) + " refers to missing primitive"};
    if (!selector_valid(s.primitives[ref.primitive].type(), ref.sel))
      return SchemaError{SchemaErrorKind::DanglingReference,
                         "local" + std::to_string(i) + " selects '" + std::string(to_string(ref.sel)) +
                             "' on a " + std::string(to_string(s.primitives[ref.primitive].type()))};
  }

  unsigned present = 0;
  if (c.length) present |= kLength;
  if (c.angle) present |= kAngle;
  if (c.clockwise) present |= kClockwise;
  if (c.aligned) present |= kAligned;
  if (c.direction) present |= kDirection;
  if (c.halfSpace0) present |= kHalfSpace0;
  if (c.halfSpace1) present |= kHalfSpace1;
  const int nLocals = static_cast<int>(c.locals.size());

  if (c.type == ConstraintType::Projected) {
    if (nLocals == 0) return SchemaError{SchemaErrorKind::UnknownSchema, "Projected without locals"};
    return std::nullopt;
  }

  std::optional<SchemaError> missing, extra;
  bool localsMatched = false;
  for (const auto& schema : schemata(c.type)) {
    if (schema.locals != nLocals) continue;
    localsMatched = true;
    const unsigned lacking = schema.params & ~present;
    const unsigned surplus = present & ~schema.params;
    if (lacking == 0 && surplus == 0) return std::nullopt;
    if (lacking != 0 && surplus == 0 && !missing)
      missing = SchemaError{SchemaErrorKind::MissingParameter,
                            std::string(to_string(c.type)) + " requires " + describe_params(lacking)};
    if (surplus != 0 && lacking == 0 && !extra)
      extra = SchemaError{SchemaErrorKind::ExtraParameter,
                          std::string(to_string(c.type)) + " does not take " + describe_params(surplus)};
  }
  if (!localsMatched)
    return SchemaError{SchemaErrorKind::UnknownSchema,
                       std::string(to_string(c.type)) + " with " + std::to_string(nLocals) + " locals"};
  if (missing) return missing;
  if (extra) return extra;
  return SchemaError{SchemaErrorKind::UnknownSchema,
                     std::string(to_string(c.type)) + " parameter set {" + describe_params(present) + "}"};
}

void validate_sketch(const Sketch& s) {
  for (std::size_t i = 0; i < s.constraints.size(); ++i) {
    if (auto err = validate_constraint(s.constraints[i], s)) {
      const auto code = err->kind == SchemaErrorKind::DanglingReference ? ErrorCode::DanglingReference
                                                                        : ErrorCode::Schema;
      throw Error(code, "constraint " + std::to_string(i) + " (" +
                            std::string(to_string(s.constraints[i].type)) + "): " +
                            std::string(to_string(err->kind)) + ": " + err->detail);
    }
  }
}

}  // namespace sg
