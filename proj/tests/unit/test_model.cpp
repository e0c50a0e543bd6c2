#include <doctest.h>

#include <numbers>
#include <random>

#include "sg/model.hpp"
#include "support.hpp"

using namespace sg;
using sgt::Builder;

namespace {

double max_coord_error(const StandardPrimitive& a, const StandardPrimitive& b) {
  auto d = [](Vec2 p, Vec2 q) { return std::max(std::abs(p.x - q.x), std::abs(p.y - q.y)); };
  REQUIRE(a.index() == b.index());
  if (auto* l = std::get_if<StdLine>(&a)) {
    const auto& m = std::get<StdLine>(b);
    return std::max(d(l->start, m.start), d(l->end, m.end));
  }
  if (auto* c = std::get_if<StdCircle>(&a)) {
    const auto& m = std::get<StdCircle>(b);
    return std::max(d(c->center, m.center), std::abs(c->radius - m.radius));
  }
  if (auto* c = std::get_if<StdArc>(&a)) {
    const auto& m = std::get<StdArc>(b);
    return std::max({d(c->center, m.center), std::abs(c->radius - m.radius), d(c->startPoint, m.startPoint),
                     d(c->endPoint, m.endPoint)});
  }
  const auto& p = std::get<StdPoint>(a);
  return d(p.p, std::get<StdPoint>(b).p);
}

}  // namespace

TEST_CASE("dof per primitive type") {
  CHECK(dof_of_primitive(PrimitiveType::Point) == 2);
  CHECK(dof_of_primitive(PrimitiveType::Line) == 4);
  CHECK(dof_of_primitive(PrimitiveType::Circle) == 3);
  CHECK(dof_of_primitive(PrimitiveType::Arc) == 5);
  CHECK(dof_of_primitive(PrimitiveType::Ellipse) == 5);
  Primitive sp{"s", false, SplineParams{{{0, 0}, {1, 1}, {2, 0}}}, ""};
  CHECK(dof_of_primitive(sp) == 6);
}

TEST_CASE("to_standard evaluates line and arc parameters") {
  auto l = std::get<StdLine>(to_standard(PrimitiveParams{LineParams{0, 1, 2, 3, -1, 2}}));
  CHECK(l.start.x == doctest::Approx(2));
  CHECK(l.start.y == doctest::Approx(2));
  CHECK(l.end.y == doctest::Approx(5));

  ArcParams a;
  a.radius = 1.0;
  a.endParam = std::numbers::pi / 2;
  auto s = std::get<StdArc>(to_standard(PrimitiveParams{a}));
  CHECK(s.startPoint.x == doctest::Approx(1));
  CHECK(s.endPoint.x == doctest::Approx(0).epsilon(1e-12));
  CHECK(s.endPoint.y == doctest::Approx(1));

  // Clockwise sense runs the other way round.
  a.clockwise = true;
  auto c = std::get<StdArc>(to_standard(PrimitiveParams{a}));
  CHECK(c.endPoint.y == doctest::Approx(-1));
  CHECK(c.clockwise);
}

TEST_CASE("from_standard picks canonical fields") {
  auto l = std::get<LineParams>(from_standard(StdLine{{0, 0}, {1, 0}}));
  CHECK(l == LineParams{1, 0, 0, 0, 0, 1});
  auto c = std::get<CircleParams>(from_standard(StdCircle{{1, 1}, 2}));
  CHECK(c.xCenter == 1);
  CHECK(c.xDir == 1);
  CHECK(c.yDir == 0);
  CHECK(c.radius == 2);
  CHECK_FALSE(c.clockwise);
}

TEST_CASE("standard round trip on random primitives") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10, 10), r(0.01, 5), t(-3.1, 3.1);
  for (int i = 0; i < 400; ++i) {
    const Vec2 c{u(rng), u(rng)};
    const double rad = r(rng), a0 = t(rng), a1 = a0 + 0.05 + std::abs(t(rng));
    const bool cw = i % 2 == 1;
    const std::vector<StandardPrimitive> cases = {
        StdPoint{c}, StdLine{c, {u(rng), u(rng)}}, StdCircle{c, rad},
        StdArc{c, rad, c + Vec2{std::cos(a0), std::sin(a0)} * rad, c + Vec2{std::cos(a1), std::sin(a1)} * rad, cw}};
    for (const auto& s : cases) {
      CHECK(max_coord_error(s, to_standard(from_standard(s))) < 1e-9);
      Primitive p{"x", false, from_standard(s), ""};
      CHECK_NOTHROW(check_primitive(p));
    }
  }
}

TEST_CASE("check_primitive rejects bad parameters") {
  Primitive p{"x", false, LineParams{0.6, 0.6, 0, 0, 0, 1}, ""};
  CHECK_THROWS_AS(check_primitive(p), Error);
  p.params = CircleParams{0, 0, 1, 0, -1.0, false};
  CHECK_THROWS_AS(check_primitive(p), Error);
  p.params = LineParams{1, 0, 0, 0, 1, 1};
  CHECK_THROWS_AS(check_primitive(p), Error);
}

TEST_CASE("translated moves every point") {
  const Vec2 by{0.5, -2};
  auto a = std::get<StdArc>(translated(StdArc{{1, 1}, 1, {2, 1}, {1, 2}, false}, by));
  CHECK(a.center == Vec2{1.5, -1});
  CHECK(a.startPoint == Vec2{2.5, -1});
  CHECK(a.endPoint == Vec2{1.5, 0});
  auto l = std::get<StdLine>(translated(StdLine{{0, 0}, {1, 0}}, by));
  CHECK(l.end == Vec2{1.5, -2});
}

TEST_CASE("quantities keep their unit") {
  auto q = parse_quantity("5 mm");
  REQUIRE(q);
  CHECK(q->unit == LengthUnit::Millimeter);
  CHECK(q->meters() == doctest::Approx(0.005));
  CHECK(parse_quantity("0.5in")->meters() == doctest::Approx(0.0127));
  CHECK(parse_quantity("2")->meters() == 2.0);
  CHECK_FALSE(parse_quantity("mm"));
  CHECK_FALSE(parse_quantity("3 furlongs"));
  CHECK(format_quantity(*q) == "5 mm");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_length_fewest_digits(0.0254) == "1 in");
}

TEST_CASE("constraint schemata") {
  Builder b;
  const int l0 = b.line(0, 0, 1, 0), l1 = b.line(0, 1, 1, 1), l2 = b.line(0, 0, 0, 1);
  const int c = b.circle(0, 0, 1);
  auto kind = [&](const Constraint& k) {
    auto e = validate_constraint(k, b.s);
    return e ? std::optional(e->kind) : std::nullopt;
  };
  Constraint m{ConstraintType::Mirror, {sgt::whole(l0), sgt::whole(l1), sgt::whole(l2)}};
  CHECK_FALSE(kind(m));

  Constraint r{ConstraintType::Radius, {sgt::whole(c)}};
  CHECK(kind(r) == SchemaErrorKind::MissingParameter);
  r.length = Quantity::from_meters(1);
  CHECK_FALSE(kind(r));

  Constraint h{ConstraintType::Horizontal, {sgt::whole(l0)}};
  CHECK_FALSE(kind(h));
  h.locals.push_back(sgt::start(l1));
  CHECK_FALSE(kind(h));
  h.locals.push_back(sgt::end(l1));
  CHECK(kind(h) == SchemaErrorKind::UnknownSchema);

  Constraint d{ConstraintType::Coincident, {sgt::start(l0), EntityRef{9, SubSelector::None}}};
  CHECK(kind(d) == SchemaErrorKind::DanglingReference);
  Constraint sel{ConstraintType::Coincident, {sgt::start(l0), sgt::start(c)}};
  CHECK(kind(sel) == SchemaErrorKind::DanglingReference);

  Constraint p{ConstraintType::Parallel, {sgt::whole(l0), sgt::whole(l1)}};
  p.length = Quantity::from_meters(1);
  CHECK(kind(p) == SchemaErrorKind::ExtraParameter);
}
