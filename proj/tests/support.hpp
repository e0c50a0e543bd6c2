#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sg/model.hpp"

namespace sgt {

using sg::ConstraintType;
using sg::EntityRef;
using sg::SubSelector;
using sg::Vec2;

inline EntityRef whole(int p) { return {p, SubSelector::None}; }
inline EntityRef start(int p) { return {p, SubSelector::Start}; }
inline EntityRef end(int p) { return {p, SubSelector::End}; }
inline EntityRef center(int p) { return {p, SubSelector::Center}; }

// Sketch construction by standard geometry.
struct Builder {
  sg::Sketch s;

  explicit Builder(std::string id = "t") { s.id = std::move(id); }

  int add(sg::StandardPrimitive g, bool construction = false) {
    sg::Primitive p;
    p.id = "e" + std::to_string(s.primitives.size());
    p.isConstruction = construction;
    p.params = sg::from_standard(g);
    s.primitives.push_back(std::move(p));
    return static_cast<int>(s.primitives.size()) - 1;
  }
  int point(double x, double y) { return add(sg::StdPoint{{x, y}}); }
  int line(double x0, double y0, double x1, double y1, bool construction = false) {
    return add(sg::StdLine{{x0, y0}, {x1, y1}}, construction);
  }
  int circle(double cx, double cy, double r, bool construction = false) {
    return add(sg::StdCircle{{cx, cy}, r}, construction);
  }
  int arc(double cx, double cy, double r, double a0, double a1, bool cw = false) {
    return add(sg::StdArc{{cx, cy}, r, {cx + r * std::cos(a0), cy + r * std::sin(a0)},
                          {cx + r * std::cos(a1), cy + r * std::sin(a1)}, cw});
  }

  sg::Constraint& rel(ConstraintType t, std::vector<EntityRef> locals) {
    sg::Constraint c;
    c.type = t;
    c.locals = std::move(locals);
    s.constraints.push_back(std::move(c));
    return s.constraints.back();
  }
  sg::Constraint& dim(ConstraintType t, std::vector<EntityRef> locals, double meters) {
    auto& c = rel(t, std::move(locals));
    c.length = sg::Quantity::from_meters(meters);
    return c;
  }
};

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace sgt
