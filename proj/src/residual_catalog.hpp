#pragma once

// Residual functional forms for every solver-supported constraint. Templated
// on the scalar so the same code yields values (double) and exact first
// derivatives (Eigen::AutoDiffScalar).

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/AutoDiff>

#include "sg/model.hpp"

namespace sg::detail {

using Deriv = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 16, 1>;
using AD = Eigen::AutoDiffScalar<Deriv>;

inline double value_of(double v) { return v; }
inline double value_of(const AD& v) { return v.value(); }

template <class T>
struct V2 {
  T x, y;
};

template <class T>
V2<T> operator+(const V2<T>& a, const V2<T>& b) {
  return {T(a.x + b.x), T(a.y + b.y)};
}
template <class T>
V2<T> operator-(const V2<T>& a, const V2<T>& b) {
  return {T(a.x - b.x), T(a.y - b.y)};
}
template <class T>
V2<T> scale(const V2<T>& a, const T& s) {
  return {T(a.x * s), T(a.y * s)};
}
template <class T>
T dot(const V2<T>& a, const V2<T>& b) {
  return T(a.x * b.x + a.y * b.y);
}
template <class T>
T cross(const V2<T>& a, const V2<T>& b) {
  return T(a.x * b.y - a.y * b.x);
}
template <class T>
T norm(const V2<T>& a) {
  using std::sqrt;
  return T(sqrt(a.x * a.x + a.y * a.y));
}
template <class T>
V2<T> unit(const V2<T>& a) {
  T n = norm(a);
  return {T(a.x / n), T(a.y / n)};
}
template <class T>
T wrap_angle(const T& a) {
  using std::atan2;
  using std::cos;
  using std::sin;
  return T(atan2(sin(a), cos(a)));
}

enum class Shape { Point, Line, Circle, Arc };

/// A resolved constraint operand. Lines use a (start), b (end); circles and
/// arcs use a (center) and r; arcs add absolute angles t0, t1.
template <class T>
struct Geo {
  Shape shape = Shape::Point;
  V2<T> a{}, b{};
  T r{}, t0{}, t1{};
  bool cw = false;

  bool round() const { return shape == Shape::Circle || shape == Shape::Arc; }
};

template <class T>
V2<T> arc_point(const Geo<T>& g, const T& t) {
  using std::cos;
  using std::sin;
  return {T(g.a.x + g.r * cos(t)), T(g.a.y + g.r * sin(t))};
}

/// Narrows a primitive operand to the sub-primitive point it selects.
template <class T>
Geo<T> select(const Geo<T>& g, SubSelector sel) {
  if (sel == SubSelector::None) return g;
  Geo<T> p;
  p.shape = Shape::Point;
  switch (sel) {
    case SubSelector::Start: p.a = g.shape == Shape::Line ? g.a : arc_point(g, g.t0); break;
    case SubSelector::End: p.a = g.shape == Shape::Line ? g.b : arc_point(g, g.t1); break;
    case SubSelector::Center: p.a = g.a; break;
    case SubSelector::None: break;
  }
  return p;
}

[[noreturn]] inline void unsupported(const Constraint& c, const char* why) {
  throw Error(ErrorCode::UnsupportedConstraint, std::string(to_string(c.type)) + ": " + why);
}

/// Chooses among alternative residual branches. A negative `branch` picks
/// the alternative nearest zero and records it; otherwise it is reused.
template <class T>
T pick_branch(std::span<const T> options, int& branch) {
  if (branch < 0 || branch >= static_cast<int>(options.size())) {
    branch = 0;
    for (std::size_t i = 1; i < options.size(); ++i)
      if (std::abs(value_of(options[i])) < std::abs(value_of(options[branch]))) branch = static_cast<int>(i);
  }
  return options[branch];
}

template <class T>
T signed_or_abs(const T& s, const std::optional<HalfSpace>& side) {
  using std::abs;
  if (!side) return T(abs(s));
  return *side == HalfSpace::Left ? s : T(-s);
}

template <class T>
V2<T> reflect(const V2<T>& p, const Geo<T>& axis) {
  V2<T> u = unit(axis.b - axis.a);
  V2<T> rel = p - axis.a;
  T along = dot(rel, u);
  V2<T> foot = axis.a + scale(u, along);
  return {T(2.0 * foot.x - p.x), T(2.0 * foot.y - p.y)};
}

template <class T>
void distance_residual(const Constraint& c, const Geo<T>& g0, const Geo<T>& g1, std::vector<T>& out) {
  using std::abs;
  const double target = c.length->meters();
  const Direction dir = c.direction.value_or(Direction::Minimum);
  const bool p0 = g0.shape == Shape::Point, p1 = g1.shape == Shape::Point;
  const bool l0 = g0.shape == Shape::Line, l1 = g1.shape == Shape::Line;

  if (dir != Direction::Minimum) {
    if (!(p0 && p1)) unsupported(c, "axis-aligned distance needs two points");
    // Reference is the axis through local0: +y for horizontal measurement,
    // +x for vertical; left of it is the positive side.
    V2<T> d = g1.a - g0.a;
    T s = dir == Direction::Horizontal ? T(-d.x) : T(d.y);
    out.push_back(T(signed_or_abs(s, c.halfSpace1) - target));
    return;
  }
  if (p0 && p1) {
    out.push_back(T(norm(g1.a - g0.a) - target));
  } else if ((p0 && l1) || (l0 && p1)) {
    const Geo<T>& pt = p0 ? g0 : g1;
    const Geo<T>& ln = p0 ? g1 : g0;
    T s = cross(unit(ln.b - ln.a), pt.a - ln.a);
    out.push_back(T(signed_or_abs(s, p0 ? c.halfSpace0 : c.halfSpace1) - target));
  } else if (l0 && l1) {
    V2<T> mid = scale(g1.a + g1.b, T(0.5));
    T s = cross(unit(g0.b - g0.a), mid - g0.a);
    out.push_back(T(signed_or_abs(s, c.halfSpace1) - target));
  } else if ((p0 && g1.round()) || (g0.round() && p1)) {
    const Geo<T>& pt = p0 ? g0 : g1;
    const Geo<T>& rc = p0 ? g1 : g0;
    T outside = T(norm(pt.a - rc.a) - rc.r);
    T left = rc.cw ? outside : T(-outside);
    out.push_back(T(signed_or_abs(left, p0 ? c.halfSpace0 : c.halfSpace1) - target));
  } else if ((l0 && g1.round()) || (g0.round() && l1)) {
    const Geo<T>& ln = l0 ? g0 : g1;
    const Geo<T>& rc = l0 ? g1 : g0;
    T d = T(abs(cross(unit(ln.b - ln.a), rc.a - ln.a)));
    out.push_back(T(d - rc.r - target));
  } else if (g0.round() && g1.round()) {
    out.push_back(T(norm(g1.a - g0.a) - g0.r - g1.r - target));
  } else {
    unsupported(c, "operand combination");
  }
}

/// Appends the residuals of `c` given its resolved operands (one per local).
template <class T>
void constraint_residuals(const Constraint& c, std::span<const Geo<T>> g, int& branch, std::vector<T>& out) {
  using std::abs;
  using std::atan2;
  using CT = ConstraintType;
  const std::size_t n = g.size();
  auto is = [&](std::size_t i, Shape s) { return i < n && g[i].shape == s; };
  auto pt = [&](std::size_t i) { return is(i, Shape::Point); };
  auto ln = [&](std::size_t i) { return is(i, Shape::Line); };
  auto rd = [&](std::size_t i) { return i < n && g[i].round(); };

  switch (c.type) {
    case CT::Coincident: {
      if (n != 2) unsupported(c, "needs two operands");
      if (pt(0) && pt(1)) {
        out.push_back(T(g[1].a.x - g[0].a.x));
        out.push_back(T(g[1].a.y - g[0].a.y));
      } else if ((pt(0) && ln(1)) || (ln(0) && pt(1))) {
        const auto& p = pt(0) ? g[0] : g[1];
        const auto& l = pt(0) ? g[1] : g[0];
        out.push_back(cross(unit(l.b - l.a), p.a - l.a));
      } else if ((pt(0) && rd(1)) || (rd(0) && pt(1))) {
        const auto& p = pt(0) ? g[0] : g[1];
        const auto& r = pt(0) ? g[1] : g[0];
        out.push_back(T(norm(p.a - r.a) - r.r));
      } else if (ln(0) && ln(1)) {
        V2<T> u = unit(g[0].b - g[0].a);
        out.push_back(cross(u, g[1].a - g[0].a));
        out.push_back(cross(u, g[1].b - g[0].a));
      } else if (rd(0) && rd(1)) {
        out.push_back(T(g[1].a.x - g[0].a.x));
        out.push_back(T(g[1].a.y - g[0].a.y));
        out.push_back(T(g[1].r - g[0].r));
      } else {
        unsupported(c, "operand combination");
      }
      return;
    }
    case CT::Horizontal:
    case CT::Vertical: {
      const bool horizontal = c.type == CT::Horizontal;
      auto delta = [&](const V2<T>& p, const V2<T>& q) { return horizontal ? T(q.y - p.y) : T(q.x - p.x); };
      if (n == 1 && ln(0)) {
        out.push_back(delta(g[0].a, g[0].b));
      } else if (n == 2 && pt(0) && pt(1)) {
        out.push_back(delta(g[0].a, g[1].a));
      } else {
        unsupported(c, "expects one line or two points");
      }
      return;
    }
    case CT::Parallel:
    case CT::Perpendicular:
    case CT::Offset: {
      if (!(n == 2 && ln(0) && ln(1))) unsupported(c, "expects two lines");
      V2<T> u0 = unit(g[0].b - g[0].a), u1 = unit(g[1].b - g[1].a);
      out.push_back(c.type == CT::Perpendicular ? dot(u0, u1) : cross(u0, u1));
      return;
    }
    case CT::Tangent: {
      if (n != 2) unsupported(c, "needs two operands");
      if ((ln(0) && rd(1)) || (rd(0) && ln(1))) {
        const auto& l = ln(0) ? g[0] : g[1];
        const auto& r = ln(0) ? g[1] : g[0];
        T s = cross(unit(l.b - l.a), r.a - l.a);
        const T options[] = {T(s - r.r), T(-s - r.r)};
        out.push_back(pick_branch<T>(options, branch));
      } else if (rd(0) && rd(1)) {
        T d = norm(g[1].a - g[0].a);
        const T options[] = {T(d - (g[0].r + g[1].r)), T(d - (g[0].r - g[1].r)), T(d - (g[1].r - g[0].r))};
        out.push_back(pick_branch<T>(options, branch));
      } else {
        unsupported(c, "expects line-circle or circle-circle");
      }
      return;
    }
    case CT::Equal: {
      if (n == 2 && ln(0) && ln(1)) {
        out.push_back(T(norm(g[0].b - g[0].a) - norm(g[1].b - g[1].a)));
      } else if (n == 2 && rd(0) && rd(1)) {
        out.push_back(T(g[0].r - g[1].r));
      } else {
        unsupported(c, "expects two lines or two circles");
      }
      return;
    }
    case CT::Concentric: {
      if (!(n == 2 && (rd(0) || pt(0)) && (rd(1) || pt(1)) && (rd(0) || rd(1))))
        unsupported(c, "expects two circles or a point and a circle");
      out.push_back(T(g[0].a.x - g[1].a.x));
      out.push_back(T(g[0].a.y - g[1].a.y));
      return;
    }
    case CT::Midpoint: {
      if (!(n == 2 && ((pt(0) && ln(1)) || (ln(0) && pt(1))))) unsupported(c, "expects a point and a line");
      const auto& p = pt(0) ? g[0] : g[1];
      const auto& l = pt(0) ? g[1] : g[0];
      out.push_back(T(p.a.x - 0.5 * (l.a.x + l.b.x)));
      out.push_back(T(p.a.y - 0.5 * (l.a.y + l.b.y)));
      return;
    }
    case CT::Mirror: {
      if (!(n == 3 && ln(2))) unsupported(c, "expects two entities and a line axis");
      const auto& a = g[0];
      const auto& b = g[1];
      const auto& axis = g[2];
      auto push2 = [&](const V2<T>& v) {
        out.push_back(v.x);
        out.push_back(v.y);
      };
      if (a.shape != b.shape) unsupported(c, "mirrored entities differ in type");
      switch (a.shape) {
        case Shape::Point: push2(reflect(a.a, axis) - b.a); break;
        case Shape::Line:
          push2(reflect(a.a, axis) - b.a);
          push2(reflect(a.b, axis) - b.b);
          break;
        case Shape::Circle:
          push2(reflect(a.a, axis) - b.a);
          out.push_back(T(a.r - b.r));
          break;
        case Shape::Arc: {
          push2(reflect(a.a, axis) - b.a);
          out.push_back(T(a.r - b.r));
          V2<T> d = axis.b - axis.a;
          T phi2 = T(2.0 * atan2(d.y, d.x));
          // Reflection reverses the sweep: with equal orientation flags the
          // mirrored start lands on the other arc's end.
          if (a.cw == b.cw) {
            out.push_back(wrap_angle(T(phi2 - a.t0 - b.t1)));
            out.push_back(wrap_angle(T(phi2 - a.t1 - b.t0)));
          } else {
            out.push_back(wrap_angle(T(phi2 - a.t0 - b.t0)));
            out.push_back(wrap_angle(T(phi2 - a.t1 - b.t1)));
          }
          break;
        }
      }
      return;
    }
    case CT::Diameter:
    case CT::Radius: {
      if (!(n == 1 && rd(0))) unsupported(c, "expects one circle or arc");
      const double factor = c.type == CT::Diameter ? 2.0 : 1.0;
      out.push_back(T(factor * g[0].r - c.length->meters()));
      return;
    }
    case CT::Length: {
      if (!(n == 1 && ln(0))) unsupported(c, "expects one line");
      V2<T> d = g[0].b - g[0].a;
      T measured = norm(d);
      switch (c.direction.value_or(Direction::Minimum)) {
        case Direction::Minimum: break;
        case Direction::Vertical: measured = T(abs(d.y)); break;
        case Direction::Horizontal: measured = T(abs(d.x)); break;
      }
      out.push_back(T(measured - c.length->meters()));
      return;
    }
    case CT::Distance: {
      if (n != 2) unsupported(c, "needs two operands");
      distance_residual(c, g[0], g[1], out);
      return;
    }
    case CT::Angle: {
      if (!(n == 2 && ln(0) && ln(1))) unsupported(c, "expects two lines");
      V2<T> d0 = g[0].b - g[0].a;
      V2<T> d1 = c.aligned.value_or(true) ? V2<T>(g[1].b - g[1].a) : V2<T>(g[1].a - g[1].b);
      T theta = T(atan2(cross(d0, d1), dot(d0, d1)));
      if (c.clockwise.value_or(false)) theta = T(-theta);
      out.push_back(wrap_angle(T(theta - *c.angle * std::numbers::pi / 180.0)));
      return;
    }
    case CT::Projected: unsupported(c, "external constraint");
  }
  unsupported(c, "unknown type");
}

}  // namespace sg::detail
