#include "sg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace sg {

namespace {

using CT = ConstraintType;
constexpr double kPi = std::numbers::pi;

std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed ^ (index * 0x9e3779b97f4a7c15ull + 0x632be59bd9b4e019ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Dimension source: integer ticks of 1 mm, or 1/8 in for inch sketches.
class Dims {
 public:
  Dims(std::uint64_t seed) : rng_(seed) { inch_ = uniform(4) == 0; }

  std::uint64_t uniform(std::uint64_t n) { return rng_() % n; }
  int between(int lo, int hi) { return lo + static_cast<int>(uniform(static_cast<std::uint64_t>(hi - lo + 1))); }

  /// A length drawn from [loMm, hiMm] on the tick grid.
  Quantity length(double loMm, double hiMm) {
    const double tick = inch_ ? 3.175 : 1.0;
    const int lo = static_cast<int>(std::ceil(loMm / tick));
    const int hi = std::max(lo, static_cast<int>(std::floor(hiMm / tick)));
    const int n = between(lo, hi);
    return inch_ ? Quantity{n * 0.125, LengthUnit::Inch} : Quantity{static_cast<double>(n), LengthUnit::Millimeter};
  }

  Quantity unit_value(double v) const {
    return inch_ ? Quantity{v, LengthUnit::Inch} : Quantity{v, LengthUnit::Millimeter};
  }
  double to_mm(const Quantity& q) const { return q.meters() * 1000.0; }

 private:
  std::mt19937_64 rng_;
  bool inch_ = false;
};

EntityRef ref(int p, SubSelector s = SubSelector::None) { return {p, s}; }
const SubSelector kStart = SubSelector::Start, kEnd = SubSelector::End, kCenter = SubSelector::Center;

class Builder {
 public:
  explicit Builder(std::string id) { s_.id = std::move(id); }

  int add(StandardPrimitive geo, bool construction = false) {
    Primitive p;
    p.id = "p" + std::to_string(s_.primitives.size());
    p.isConstruction = construction;
    p.params = from_standard(geo);
    s_.primitives.push_back(std::move(p));
    return static_cast<int>(s_.primitives.size()) - 1;
  }
  int point(Vec2 p) { return add(StdPoint{p}); }
  int line(Vec2 a, Vec2 b, bool construction = false) { return add(StdLine{a, b}, construction); }
  int circle(Vec2 c, double r, bool construction = false) { return add(StdCircle{c, r}, construction); }
  int arc(Vec2 c, double r, Vec2 from, Vec2 to) { return add(StdArc{c, r, from, to, false}); }

  Constraint& relate(CT t, std::vector<EntityRef> locals) {
    Constraint c;
    c.type = t;
    c.locals = std::move(locals);
    s_.constraints.push_back(std::move(c));
    return s_.constraints.back();
  }
  void dimension(CT t, EntityRef r, Quantity q) {
    auto& c = relate(t, {r});
    c.length = q;
    if (t == CT::Length) c.direction = Direction::Minimum;
  }
  /// Point-to-point distance along `dir`, sides chosen to match the geometry.
  void distance(EntityRef a, Vec2 pa, EntityRef b, Vec2 pb, Direction dir, Quantity q) {
    auto& c = relate(CT::Distance, {a, b});
    c.direction = dir;
    c.length = q;
    const Vec2 d = pb - pa;
    const double side = dir == Direction::Horizontal ? -d.x : d.y;
    c.halfSpace0 = c.halfSpace1 = side >= 0.0 ? HalfSpace::Left : HalfSpace::Right;
  }

  Sketch take() { return std::move(s_); }

 private:
  Sketch s_;
};

Vec2 mm(double x, double y) { return {x * 1e-3, y * 1e-3}; }

struct Rect {
  int bottom, right, top, left;
  Vec2 origin;
};

Rect rectangle(Builder& b, Dims& d, double ox, double oy, const Quantity& w, const Quantity& h) {
  const double W = d.to_mm(w), H = d.to_mm(h);
  Rect r;
  r.origin = mm(ox, oy);
  r.bottom = b.line(mm(ox, oy), mm(ox + W, oy));
  r.right = b.line(mm(ox + W, oy), mm(ox + W, oy + H));
  r.top = b.line(mm(ox + W, oy + H), mm(ox, oy + H));
  r.left = b.line(mm(ox, oy + H), mm(ox, oy));
  b.relate(CT::Coincident, {ref(r.bottom, kEnd), ref(r.right, kStart)});
  b.relate(CT::Coincident, {ref(r.right, kEnd), ref(r.top, kStart)});
  b.relate(CT::Coincident, {ref(r.top, kEnd), ref(r.left, kStart)});
  b.relate(CT::Coincident, {ref(r.left, kEnd), ref(r.bottom, kStart)});
  b.relate(CT::Horizontal, {ref(r.bottom)});
  b.relate(CT::Horizontal, {ref(r.top)});
  b.relate(CT::Vertical, {ref(r.left)});
  b.relate(CT::Vertical, {ref(r.right)});
  b.dimension(CT::Length, ref(r.bottom), w);
  b.dimension(CT::Length, ref(r.left), h);
  return r;
}

void rectangle_template(Builder& b, Dims& d) {
  const double ox = d.between(-100, 100), oy = d.between(-100, 100);
  const auto w = d.length(10, 200), h = d.length(10, 200);
  const Rect r = rectangle(b, d, ox, oy, w, h);
  if (d.uniform(2) == 0) {
    const double W = d.to_mm(w), H = d.to_mm(h);
    const auto dia = d.length(2, std::max(2.0, std::min(W, H) * 0.6));
    const Vec2 c = mm(ox + W / 2, oy + H / 2);
    const int hole = b.circle(c, 0.5 * dia.meters());
    b.dimension(CT::Diameter, ref(hole), dia);
    b.distance(ref(r.bottom, kStart), r.origin, ref(hole, kCenter), c, Direction::Horizontal,
               d.unit_value(0.5 * w.value));
    b.distance(ref(r.bottom, kStart), r.origin, ref(hole, kCenter), c, Direction::Vertical,
               d.unit_value(0.5 * h.value));
  }
}

void slotted_plate_template(Builder& b, Dims& d) {
  const double ox = d.between(-100, 100), oy = d.between(-100, 100);
  const auto w = d.length(60, 200), h = d.length(40, 150);
  const Rect rect = rectangle(b, d, ox, oy, w, h);
  const double W = d.to_mm(w), H = d.to_mm(h);

  const auto r = d.length(3, 10);
  const double R = d.to_mm(r);
  const auto a = d.length(R + 5, std::max(R + 5, W / 3));
  const auto bq = d.length(R + 5, std::max(R + 5, H - R - 5));
  const double A = d.to_mm(a), B = d.to_mm(bq);
  const auto len = d.length(5, std::max(5.0, W - A - R - 5));
  const double L = d.to_mm(len);

  const Vec2 c1 = mm(ox + A, oy + B), c2 = mm(ox + A + L, oy + B);
  const double rm = r.meters();
  const Vec2 up{0.0, rm};
  const int leftArc = b.arc(c1, rm, c1 + up, c1 - up);
  const int rightArc = b.arc(c2, rm, c2 - up, c2 + up);
  const int top = b.line(c1 + up, c2 + up);
  const int bottom = b.line(c1 - up, c2 - up);
  b.relate(CT::Coincident, {ref(top, kStart), ref(leftArc, kStart)});
  b.relate(CT::Coincident, {ref(bottom, kStart), ref(leftArc, kEnd)});
  b.relate(CT::Coincident, {ref(bottom, kEnd), ref(rightArc, kStart)});
  b.relate(CT::Coincident, {ref(top, kEnd), ref(rightArc, kEnd)});
  b.relate(CT::Tangent, {ref(top), ref(leftArc)});
  b.relate(CT::Tangent, {ref(top), ref(rightArc)});
  b.relate(CT::Tangent, {ref(bottom), ref(leftArc)});
  b.relate(CT::Tangent, {ref(bottom), ref(rightArc)});
  b.relate(CT::Horizontal, {ref(top)});
  b.relate(CT::Equal, {ref(leftArc), ref(rightArc)});
  b.dimension(CT::Radius, ref(leftArc), r);
  auto& span = b.relate(CT::Distance, {ref(leftArc, kCenter), ref(rightArc, kCenter)});
  span.direction = Direction::Minimum;
  span.length = len;
  span.halfSpace0 = span.halfSpace1 = HalfSpace::Left;
  b.distance(ref(rect.bottom, kStart), rect.origin, ref(leftArc, kCenter), c1, Direction::Horizontal, a);
  b.distance(ref(rect.bottom, kStart), rect.origin, ref(leftArc, kCenter), c1, Direction::Vertical, bq);
}

void bolt_circle_template(Builder& b, Dims& d) {
  const Vec2 c = mm(d.between(-100, 100), d.between(-100, 100));
  const auto outer = d.length(40, 200);
  const double D = d.to_mm(outer);
  const auto pitch = d.length(D * 0.4, D * 0.75);
  const double P = d.to_mm(pitch);
  const auto hole = d.length(2, std::max(2.0, std::min(P * 0.25, (D - P) * 0.4)));
  const int k = 3 + static_cast<int>(d.uniform(4));
  const double offset = d.uniform(2) == 0 ? 0.0 : kPi / 2;

  const int centerPoint = b.point(c);
  const int outerCircle = b.circle(c, 0.5 * outer.meters());
  const int pitchCircle = b.circle(c, 0.5 * pitch.meters(), true);
  b.relate(CT::Coincident, {ref(centerPoint), ref(outerCircle, kCenter)});
  b.relate(CT::Concentric, {ref(outerCircle), ref(pitchCircle)});
  b.dimension(CT::Diameter, ref(outerCircle), outer);
  b.dimension(CT::Diameter, ref(pitchCircle), pitch);
  int first = -1;
  for (int i = 0; i < k; ++i) {
    const double t = offset + 2.0 * kPi * i / k;
    const double pr = 0.5 * pitch.meters();
    const int h = b.circle({c.x + pr * std::cos(t), c.y + pr * std::sin(t)}, 0.5 * hole.meters());
    b.relate(CT::Coincident, {ref(h, kCenter), ref(pitchCircle)});
    if (first < 0) {
      first = h;
      b.dimension(CT::Diameter, ref(h), hole);
    } else {
      b.relate(CT::Equal, {ref(first), ref(h)});
    }
  }
}

/// Axis-aligned polyline through `pts` (meters) with every interior corner
/// rounded by radius f; closed polylines round every corner.
void filleted_polyline(Builder& b, const std::vector<Vec2>& pts, bool closed, const Quantity& f, Dims& d) {
  const std::size_t n = closed ? pts.size() : pts.size() - 1;  // segment count
  const double fr = f.meters();
  auto dir = [&](std::size_t i) {
    const Vec2 v = pts[(i + 1) % pts.size()] - pts[i];
    return v * (1.0 / v.norm());
  };
  auto joint = [&](std::size_t i) { return closed || (i > 0 && i < pts.size() - 1); };  // corner at pts[i]

  std::vector<int> lines(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 u = dir(i);
    Vec2 a = pts[i], e = pts[(i + 1) % pts.size()];
    if (joint(i)) a = a + u * fr;
    if (joint((i + 1) % pts.size())) e = e - u * fr;
    lines[i] = b.line(a, e);
    b.relate(std::abs(u.y) < 0.5 ? CT::Horizontal : CT::Vertical, {ref(lines[i])});
    const double lenMm = (e - a).norm() * 1000.0;
    b.dimension(CT::Length, ref(lines[i]), d.unit_value(std::round(lenMm / d.to_mm(d.unit_value(1.0)) * 8.0) / 8.0));
  }
  int firstArc = -1;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (!joint(j)) continue;
    const std::size_t in = (j + n - 1) % n, out = j % n;
    const Vec2 din = dir(in), dout = dir(out);
    const Vec2 t1 = pts[j] - din * fr, t2 = pts[j] + dout * fr;
    const Vec2 center = t1 + dout * fr;
    const bool left = din.cross(dout) > 0.0;
    const int arc = left ? b.arc(center, fr, t1, t2) : b.arc(center, fr, t2, t1);
    b.relate(CT::Coincident, {ref(lines[in], kEnd), ref(arc, left ? kStart : kEnd)});
    b.relate(CT::Coincident, {ref(lines[out], kStart), ref(arc, left ? kEnd : kStart)});
    b.relate(CT::Tangent, {ref(lines[in]), ref(arc)});
    b.relate(CT::Tangent, {ref(lines[out]), ref(arc)});
    if (firstArc < 0) {
      firstArc = arc;
      b.dimension(CT::Radius, ref(arc), f);
    } else {
      b.relate(CT::Equal, {ref(firstArc), ref(arc)});
    }
  }
}

void filleted_polyline_template(Builder& b, Dims& d) {
  const double ox = d.between(-100, 100), oy = d.between(-100, 100);
  std::vector<Vec2> pts;
  const bool closed = d.uniform(2) == 0;
  double minSide;
  if (closed) {
    const double W = d.to_mm(d.length(20, 150)), H = d.to_mm(d.length(20, 150));
    pts = {mm(ox, oy), mm(ox + W, oy), mm(ox + W, oy + H), mm(ox, oy + H)};
    minSide = std::min(W, H);
  } else {
    const int segments = 3 + static_cast<int>(d.uniform(3));
    const double ySign = d.uniform(2) == 0 ? 1.0 : -1.0;
    double x = ox, y = oy;
    pts.push_back(mm(x, y));
    minSide = 1e9;
    for (int i = 0; i < segments; ++i) {
      const double len = d.to_mm(d.length(20, 80));
      minSide = std::min(minSide, len);
      if (i % 2 == 0)
        x += len;
      else
        y += ySign * len;
      pts.push_back(mm(x, y));
    }
  }
  const auto f = d.length(2, std::max(2.0, minSide / 2 - 1));
  filleted_polyline(b, pts, closed, f, d);
}

}  // namespace

std::string_view to_string(SynthTemplate t) {
  switch (t) {
    case SynthTemplate::Rectangle: return "rectangle";
    case SynthTemplate::SlottedPlate: return "slotted-plate";
    case SynthTemplate::BoltCircle: return "bolt-circle";
    case SynthTemplate::FilletedPolyline: return "polyline-fillets";
  }
  return "rectangle";
}

SynthProfile SynthProfile::parse(std::string_view name) {
  if (name == "mixed") return {};
  for (auto t : SynthProfile{}.templates)
    if (to_string(t) == name) return SynthProfile{{t}};
  throw Error(ErrorCode::MalformedRecord, "unknown generator profile '" + std::string(name) + "'");
}

Sketch synth_sketch(std::uint64_t seed, std::size_t index, const SynthProfile& profile) {
  Dims d(mix(seed, index));
  const auto t = profile.templates[d.uniform(profile.templates.size())];
  Builder b("synth-" + std::to_string(seed) + "-" + std::to_string(index));
  switch (t) {
    case SynthTemplate::Rectangle: rectangle_template(b, d); break;
    case SynthTemplate::SlottedPlate: slotted_plate_template(b, d); break;
    case SynthTemplate::BoltCircle: bolt_circle_template(b, d); break;
    case SynthTemplate::FilletedPolyline: filleted_polyline_template(b, d); break;
  }
  return b.take();
}

std::vector<Sketch> synth_corpus(std::size_t n, std::uint64_t seed, const SynthProfile& profile) {
  std::vector<Sketch> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(synth_sketch(seed, i, profile));
  return out;
}

}  // namespace sg
