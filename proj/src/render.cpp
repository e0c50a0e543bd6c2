#include "sg/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

namespace sg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kSegmentsPerTurn = 64;
constexpr int kLineSegments = 8;
constexpr int kSplineSpanSegments = 4;

Vec2 polar(Vec2 c, double r, double t) { return {c.x + r * std::cos(t), c.y + r * std::sin(t)}; }
Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

struct ArcSpan {
  Vec2 center;
  double radius;
  double start;  // world angle
  double sweep;  // signed world sweep
};

ArcSpan arc_span(const ArcParams& a) {
  const double phi = std::atan2(a.yDir, a.xDir);
  const double sign = a.clockwise ? -1.0 : 1.0;
  double delta = std::fmod(a.endParam - a.startParam, kTwoPi);
  if (delta <= 0.0) delta += kTwoPi;
  return {{a.xCenter, a.yCenter}, a.radius, phi + sign * a.startParam, sign * delta};
}

struct Box {
  double minX = std::numeric_limits<double>::infinity(), minY = minX;
  double maxX = -std::numeric_limits<double>::infinity(), maxY = maxX;
  void add(Vec2 p) {
    minX = std::min(minX, p.x);
    minY = std::min(minY, p.y);
    maxX = std::max(maxX, p.x);
    maxY = std::max(maxY, p.y);
  }
  bool empty() const { return minX > maxX; }
  double diagonal() const { return empty() ? 0.0 : std::hypot(maxX - minX, maxY - minY); }
};

void add_bounds(const Primitive& p, Box& box) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointParams>) {
          box.add({v.x, v.y});
        } else if constexpr (std::is_same_v<T, LineParams>) {
          const auto l = std::get<StdLine>(to_standard(p.params));
          box.add(l.start);
          box.add(l.end);
        } else if constexpr (std::is_same_v<T, CircleParams>) {
          box.add({v.xCenter - v.radius, v.yCenter - v.radius});
          box.add({v.xCenter + v.radius, v.yCenter + v.radius});
        } else if constexpr (std::is_same_v<T, ArcParams>) {
          const auto span = arc_span(v);
          box.add(polar(span.center, span.radius, span.start));
          box.add(polar(span.center, span.radius, span.start + span.sweep));
          const double lo = std::min(span.start, span.start + span.sweep);
          const double hi = std::max(span.start, span.start + span.sweep);
          for (int k = static_cast<int>(std::ceil(lo / (std::numbers::pi / 2))); k * std::numbers::pi / 2 <= hi; ++k)
            box.add(polar(span.center, span.radius, k * std::numbers::pi / 2));
        } else if constexpr (std::is_same_v<T, EllipseParams>) {
          const double psi = std::atan2(v.yDir, v.xDir);
          const double c = std::cos(psi), s = std::sin(psi);
          const double ex = std::hypot(v.radius * c, v.minorRadius * s);
          const double ey = std::hypot(v.radius * s, v.minorRadius * c);
          box.add({v.xCenter - ex, v.yCenter - ey});
          box.add({v.xCenter + ex, v.yCenter + ey});
        } else if constexpr (std::is_same_v<T, SplineParams>) {
          for (const auto& q : v.controlPoints) box.add(q);
        }
      },
      p.params);
}

Box bounds(const Sketch& s) {
  Box box;
  for (const auto& p : s.primitives) add_bounds(p, box);
  return box;
}

std::string fmt(double v) { return svg_number(v); }

/// Sketch point to document coordinates.
std::string xy(Vec2 p) { return fmt(p.x) + " " + fmt(-p.y); }

double stroke_width(const RenderOptions& o, const ViewBox& vb) {
  return o.strokeWidth > 0.0 ? o.strokeWidth : 0.003 * std::hypot(vb.width, vb.height);
}

std::string escape_comment(std::string text) {
  for (std::size_t pos; (pos = text.find("--")) != std::string::npos;) text.replace(pos, 2, "- -");
  return text;
}

std::string style(const Primitive& p, double width, const RenderOptions& o) {
  if (p.type() == PrimitiveType::Point) return " fill=\"black\" stroke=\"none\"";
  if (!p.isConstruction) return "";
  return " stroke-dasharray=\"" + fmt(o.dashPattern[0] * width) + " " + fmt(o.dashPattern[1] * width) + "\"";
}

std::string point_element(const PointParams& v, const Primitive& p, double width, const RenderOptions& o) {
  return "<circle cx=\"" + fmt(v.x) + "\" cy=\"" + fmt(-v.y) + "\" r=\"" + fmt(1.5 * width) + "\"" +
         style(p, width, o) + "/>";
}

std::string clean_element(const Primitive& p, double width, const RenderOptions& o) {
  const std::string attrs = style(p, width, o);
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointParams>) {
          return point_element(v, p, width, o);
        } else if constexpr (std::is_same_v<T, LineParams>) {
          const auto l = std::get<StdLine>(to_standard(p.params));
          return "<path d=\"M " + xy(l.start) + " L " + xy(l.end) + "\"" + attrs + "/>";
        } else if constexpr (std::is_same_v<T, CircleParams>) {
          return "<circle cx=\"" + fmt(v.xCenter) + "\" cy=\"" + fmt(-v.yCenter) + "\" r=\"" + fmt(v.radius) + "\"" +
                 attrs + "/>";
        } else if constexpr (std::is_same_v<T, ArcParams>) {
          const auto span = arc_span(v);
          const std::string r = fmt(span.radius) + " " + fmt(span.radius) + " 0 ";
          const std::string sweepFlag = v.clockwise ? "1" : "0";
          std::string d = "M " + xy(polar(span.center, span.radius, span.start));
          // A single elliptical-arc command cannot close a full turn.
          const int pieces = std::abs(span.sweep) > std::numbers::pi * 1.999 ? 2 : 1;
          for (int k = 1; k <= pieces; ++k) {
            const double piece = span.sweep / pieces;
            const std::string large = std::abs(piece) > std::numbers::pi ? "1" : "0";
            d += " A " + r + large + " " + sweepFlag + " " +
                 xy(polar(span.center, span.radius, span.start + piece * k));
          }
          return "<path d=\"" + d + "\"" + attrs + "/>";
        } else if constexpr (std::is_same_v<T, EllipseParams>) {
          const double deg = -std::atan2(v.yDir, v.xDir) * 180.0 / std::numbers::pi;
          return "<ellipse cx=\"" + fmt(v.xCenter) + "\" cy=\"" + fmt(-v.yCenter) + "\" rx=\"" + fmt(v.radius) +
                 "\" ry=\"" + fmt(v.minorRadius) + "\" transform=\"rotate(" + fmt(deg) + " " + fmt(v.xCenter) +
                 " " + fmt(-v.yCenter) + ")\"" + attrs + "/>";
        } else {
          std::string pts;
          for (const auto& q : v.controlPoints) {
            if (!pts.empty()) pts += ' ';
            pts += fmt(q.x) + "," + fmt(-q.y);
          }
          return "<polyline points=\"" + pts + "\"" + attrs + "/>";
        }
      },
      p.params);
}

std::string curve_element(const std::vector<Bezier>& segs, const Primitive& p, double width, const RenderOptions& o) {
  std::string d;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (i == 0) d += "M " + xy(segs[i].p0);
    d += " C " + xy(segs[i].c0) + " " + xy(segs[i].c1) + " " + xy(segs[i].p1);
  }
  return "<path d=\"" + d + "\"" + style(p, width, o) + "/>";
}

std::string document(const Sketch& s, const RenderOptions& o, const ViewBox& vb, const std::vector<std::string>& body,
                     bool withSeed) {
  const double width = stroke_width(o, vb);
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" + fmt(vb.minX) + " " +
         fmt(-(vb.minY + vb.height)) + " " + fmt(vb.width) + " " + fmt(vb.height) + "\">\n";
  if (o.metadataComment) {
    out += "<!-- sketch: " + escape_comment(s.id);
    if (withSeed) out += " seed: " + std::to_string(o.noiseSeed);
    out += " -->\n";
  }
  out += "<g fill=\"none\" stroke=\"black\" stroke-width=\"" + fmt(width) +
         "\" stroke-linecap=\"round\" stroke-linejoin=\"round\">\n";
  for (const auto& e : body) out += e + "\n";
  out += "</g>\n</svg>\n";
  return out;
}

/// Unit-circle cubic pieces from angle t0 over signed sweep, mapped by
/// center + M * (cos t, sin t).
void circle_pieces(Vec2 center, const std::array<double, 4>& m, double t0, double sweep, std::vector<Bezier>& out) {
  const int n = std::max(2, static_cast<int>(std::ceil(std::abs(sweep) / kTwoPi * kSegmentsPerTurn)));
  const double step = sweep / n;
  const double k = 4.0 / 3.0 * std::tan(step / 4.0);
  auto map = [&](Vec2 u) { return Vec2{center.x + m[0] * u.x + m[1] * u.y, center.y + m[2] * u.x + m[3] * u.y}; };
  for (int i = 0; i < n; ++i) {
    const double a = t0 + step * i, b = t0 + step * (i + 1);
    const Vec2 pa{std::cos(a), std::sin(a)}, pb{std::cos(b), std::sin(b)};
    out.push_back({map(pa), map(pa + perp(pa) * k), map(pb - perp(pb) * k), map(pb)});
  }
}

void straight_pieces(Vec2 a, Vec2 b, int n, std::vector<Bezier>& out) {
  for (int i = 0; i < n; ++i) {
    const Vec2 p = a + (b - a) * (static_cast<double>(i) / n);
    const Vec2 q = a + (b - a) * (static_cast<double>(i + 1) / n);
    out.push_back({p, p + (q - p) * (1.0 / 3.0), p + (q - p) * (2.0 / 3.0), q});
  }
}

/// Standard normal draws from the raw 64-bit engine (Box-Muller), so the
/// sequence does not depend on the standard library's distributions.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  double truncated(double limit) {
    for (;;) {
      const double z = next();
      if (std::abs(z) <= limit) return z;
    }
  }

 private:
  double uniform() { return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53; }
  double next() {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double t = kTwoPi * uniform();
    spare_ = r * std::sin(t);
    return r * std::cos(t);
  }

  std::mt19937_64 rng_;
  std::optional<double> spare_;
};

Vec2 unit_or_zero(Vec2 v) {
  const double n = v.norm();
  return n > 0.0 ? v * (1.0 / n) : Vec2{};
}

void jitter(std::vector<Bezier>& segs, double sigma, Gaussian& g) {
  if (segs.empty()) return;
  const std::size_t m = segs.size();
  const Vec2 first = segs.front().p0, last = segs.back().p1;
  const double scale = std::max(1.0, std::max(std::abs(first.x), std::abs(first.y)));
  const bool closed = (first - last).norm() <= 1e-12 * scale;
  const std::size_t points = closed ? m : m + 1;
  for (std::size_t i = 0; i < points; ++i) {
    Vec2 tangent = i < m ? segs[i].c0 - segs[i].p0 : segs[i - 1].p1 - segs[i - 1].c1;
    if (tangent.norm() == 0.0) tangent = i < m ? segs[i].p1 - segs[i].p0 : segs[i - 1].p1 - segs[i - 1].p0;
    const Vec2 offset = perp(unit_or_zero(tangent)) * (sigma * g.truncated(3.0));
    if (i < m) {
      segs[i].p0 = segs[i].p0 + offset;
      segs[i].c0 = segs[i].c0 + offset;
    }
    const std::size_t prev = i > 0 ? i - 1 : (closed ? m - 1 : m);
    if (prev < m) {
      segs[prev].p1 = segs[prev].p1 + offset;
      segs[prev].c1 = segs[prev].c1 + offset;
    }
  }
}

}  // namespace

std::string svg_number(double v) {
  if (v == 0.0 || std::abs(v) < 1e-300) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  std::string out = buf;
  if (out == "-0") out = "0";
  return out;
}

Vec2 Bezier::at(double t) const {
  const double u = 1.0 - t;
  return p0 * (u * u * u) + c0 * (3.0 * u * u * t) + c1 * (3.0 * u * t * t) + p1 * (t * t * t);
}

ViewBox auto_view_box(const Sketch& s, double noiseMagnitude) {
  const Box box = bounds(s);
  if (box.empty()) return {-0.5, -0.5, 1.0, 1.0};
  const double w = box.maxX - box.minX, h = box.maxY - box.minY;
  const double side = std::max(w, h) > 0.0 ? std::max(w, h) : 1e-3;
  const double margin = 0.05 * side + 3.0 * noiseMagnitude * box.diagonal();
  const double cx = 0.5 * (box.minX + box.maxX), cy = 0.5 * (box.minY + box.maxY);
  return {cx - 0.5 * w - margin, cy - 0.5 * h - margin, w + 2.0 * margin, h + 2.0 * margin};
}

std::string render_svg(const Sketch& s, const RenderOptions& o) {
  const ViewBox vb = o.viewBox.value_or(auto_view_box(s));
  const double width = stroke_width(o, vb);
  std::vector<std::string> body;
  body.reserve(s.primitives.size());
  for (const auto& p : s.primitives) body.push_back(clean_element(p, width, o));
  return document(s, o, vb, body, false);
}

std::vector<std::string> render_steps(const Sketch& s, const ConstructionSequence& seq, const RenderOptions& o) {
  std::vector<int> order;
  std::vector<bool> seen(s.primitives.size(), false);
  for (std::size_t i = 0; i < seq.ops.size(); ++i) {
    const auto& op = seq.ops[i];
    if (const auto* n = std::get_if<AddNode>(&op)) {
      if (n->primitive < 0 || n->primitive >= static_cast<int>(s.primitives.size()) || seen[n->primitive])
        throw Error(ErrorCode::InconsistentSequence, "step " + std::to_string(i) + " adds an unknown or repeated node");
      const auto& p = s.primitives[n->primitive];
      if (p.type() != n->type || p.isConstruction != n->isConstruction)
        throw Error(ErrorCode::InconsistentSequence, "step " + std::to_string(i) + " disagrees with primitive type");
      seen[n->primitive] = true;
      order.push_back(n->primitive);
    } else if (const auto* e = std::get_if<AddEdge>(&op)) {
      if (e->constraint < 0 || e->constraint >= static_cast<int>(s.constraints.size()))
        throw Error(ErrorCode::InconsistentSequence, "step " + std::to_string(i) + " adds an unknown edge");
    } else if (i + 1 != seq.ops.size()) {
      throw Error(ErrorCode::InconsistentSequence, "stop before the end of the sequence");
    }
  }
  if (order.size() != s.primitives.size())
    throw Error(ErrorCode::InconsistentSequence, "sequence does not insert every primitive");

  RenderOptions frameOpts = o;
  frameOpts.viewBox = o.viewBox.value_or(auto_view_box(s));
  std::vector<std::string> frames;
  frames.reserve(order.size());
  Sketch partial;
  partial.id = s.id;
  for (int p : order) {
    partial.primitives.push_back(s.primitives[p]);
    frames.push_back(render_svg(partial, frameOpts));
  }
  return frames;
}

std::vector<Bezier> primitive_curves(const Primitive& p) {
  std::vector<Bezier> out;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LineParams>) {
          const auto l = std::get<StdLine>(to_standard(p.params));
          straight_pieces(l.start, l.end, kLineSegments, out);
        } else if constexpr (std::is_same_v<T, CircleParams>) {
          circle_pieces({v.xCenter, v.yCenter}, {v.radius, 0.0, 0.0, v.radius}, std::atan2(v.yDir, v.xDir), kTwoPi,
                        out);
        } else if constexpr (std::is_same_v<T, ArcParams>) {
          const auto span = arc_span(v);
          circle_pieces(span.center, {span.radius, 0.0, 0.0, span.radius}, span.start, span.sweep, out);
        } else if constexpr (std::is_same_v<T, EllipseParams>) {
          const double psi = std::atan2(v.yDir, v.xDir);
          const double c = std::cos(psi), s = std::sin(psi);
          circle_pieces({v.xCenter, v.yCenter},
                        {c * v.radius, -s * v.minorRadius, s * v.radius, c * v.minorRadius}, 0.0, kTwoPi, out);
        } else if constexpr (std::is_same_v<T, SplineParams>) {
          for (std::size_t i = 0; i + 1 < v.controlPoints.size(); ++i)
            straight_pieces(v.controlPoints[i], v.controlPoints[i + 1], kSplineSpanSegments, out);
        }
      },
      p.params);
  return out;
}

std::vector<std::vector<Bezier>> handdrawn_curves(const Sketch& s, const RenderOptions& o) {
  const double sigma = std::max(0.0, o.noiseMagnitude) * bounds(s).diagonal();
  Gaussian g(o.noiseSeed);
  std::vector<std::vector<Bezier>> out;
  out.reserve(s.primitives.size());
  for (const auto& p : s.primitives) {
    auto segs = primitive_curves(p);
    if (sigma > 0.0) jitter(segs, sigma, g);
    out.push_back(std::move(segs));
  }
  return out;
}

std::string render_handdrawn(const Sketch& s, const RenderOptions& o) {
  const ViewBox vb = o.viewBox.value_or(auto_view_box(s, o.noiseMagnitude));
  const double width = stroke_width(o, vb);
  const auto curves = handdrawn_curves(s, o);
  std::vector<std::string> body;
  body.reserve(s.primitives.size());
  for (std::size_t i = 0; i < s.primitives.size(); ++i) {
    const auto& p = s.primitives[i];
    if (const auto* pt = std::get_if<PointParams>(&p.params))
      body.push_back(point_element(*pt, p, width, o));
    else
      body.push_back(curve_element(curves[i], p, width, o));
  }
  return document(s, o, vb, body, true);
}

}  // namespace sg
