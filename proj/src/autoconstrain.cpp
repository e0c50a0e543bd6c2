#include "sg/autoconstrain.hpp"

#include <algorithm>
#include <limits>
#include <array>
#include <cmath>
#include <set>

#include "sg/solver.hpp"

namespace sg {

namespace {

using CT = ConstraintType;

constexpr std::array<Quantity, 10> kCommonLengths = {{
    {5, LengthUnit::Millimeter},
    {1, LengthUnit::Centimeter},
    {3, LengthUnit::Millimeter},
    {0.5, LengthUnit::Inch},
    {2, LengthUnit::Millimeter},
    {1, LengthUnit::Inch},
    {2, LengthUnit::Centimeter},
    {4, LengthUnit::Millimeter},
    {8, LengthUnit::Millimeter},
    {0.25, LengthUnit::Inch},
}};

constexpr std::array<double, 10> kCommonAngles = {45, 15, 60, 120, 30, 135, 90, 10, 20, 150};

enum class Kind { Pt, Ln, Rd };

struct NodeGeo {
  EntityRef ref;
  Kind kind = Kind::Pt;
  Vec2 p;     // point, or center of a round
  Vec2 a, b;  // line ends
  double r = 0.0;
};

std::vector<NodeGeo> node_geometry(const Sketch& s) {
  std::vector<NodeGeo> out;
  for (int i = 0; i < static_cast<int>(s.primitives.size()); ++i) {
    const auto& prim = s.primitives[i];
    if (!is_solver_supported(prim.type())) continue;
    const auto geo = to_standard(prim);
    auto point = [&](SubSelector sel, Vec2 p) { out.push_back({{i, sel}, Kind::Pt, p, {}, {}, 0.0}); };
    if (const auto* p = std::get_if<StdPoint>(&geo)) {
      point(SubSelector::None, p->p);
    } else if (const auto* l = std::get_if<StdLine>(&geo)) {
      out.push_back({{i, SubSelector::None}, Kind::Ln, {}, l->start, l->end, 0.0});
      point(SubSelector::Start, l->start);
      point(SubSelector::End, l->end);
    } else if (const auto* c = std::get_if<StdCircle>(&geo)) {
      out.push_back({{i, SubSelector::None}, Kind::Rd, c->center, {}, {}, c->radius});
      point(SubSelector::Center, c->center);
    } else if (const auto* a = std::get_if<StdArc>(&geo)) {
      out.push_back({{i, SubSelector::None}, Kind::Rd, a->center, {}, {}, a->radius});
      point(SubSelector::Start, a->startPoint);
      point(SubSelector::End, a->endPoint);
      point(SubSelector::Center, a->center);
    }
  }
  return out;
}

double line_distance(const NodeGeo& ln, Vec2 p) {
  const Vec2 d = ln.b - ln.a;
  return std::abs(d.cross(p - ln.a)) / d.norm();
}

bool parallel(const NodeGeo& l0, const NodeGeo& l1, double tol) {
  const Vec2 d0 = l0.b - l0.a, d1 = l1.b - l1.a;
  return std::abs(d0.cross(d1)) / (d0.norm() * d1.norm()) <= tol;
}

class Collector {
 public:
  Collector(const Sketch& s, double tol) : s_(s), tol_(tol) {}

  /// Adds c when satisfied and new. Returns whether it was satisfied.
  bool offer(Constraint c) {
    double worst = 0.0;
    for (double r : residuals(c, s_)) {
      if (!(std::abs(r) <= tol_)) return false;
      worst = std::max(worst, std::abs(r));
    }
    if (seen_.insert(ConstraintKey::of(c)).second) set_.items.push_back({std::move(c), worst});
    return true;
  }

  CandidateSet take() { return std::move(set_); }

 private:
  const Sketch& s_;
  double tol_;
  CandidateSet set_;
  std::set<ConstraintKey> seen_;
};

Constraint make(CT type, std::vector<EntityRef> locals) {
  Constraint c;
  c.type = type;
  c.locals = std::move(locals);
  return c;
}

double percentile(std::vector<double> v, double pct) {
  if (v.empty() || pct <= 0.0) return -std::numeric_limits<double>::infinity();
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(v.size() - 1);
  return v[static_cast<std::size_t>(std::ceil(pos))];
}

}  // namespace

bool is_enumerable(ConstraintType t) {
  switch (t) {
    case CT::Coincident:
    case CT::Horizontal:
    case CT::Vertical:
    case CT::Parallel:
    case CT::Perpendicular:
    case CT::Tangent:
    case CT::Equal:
    case CT::Concentric:
    case CT::Midpoint:
    case CT::Radius:
    case CT::Diameter:
    case CT::Length:
    case CT::Distance: return true;
    default: return false;
  }
}

std::span<const Quantity> common_lengths() { return kCommonLengths; }
std::span<const double> common_angles() { return kCommonAngles; }

Quantity snap_length(double meters, double tol) {
  for (const auto& q : kCommonLengths)
    if (std::abs(q.meters() - meters) <= tol) return q;
  // Whole millimeters, then sixteenths of an inch.
  const double mm = std::round(meters * 1e3);
  if (mm > 0 && std::abs(mm * 1e-3 - meters) <= tol) return {mm, LengthUnit::Millimeter};
  const double sixteenths = std::round(meters / 0.0254 * 16.0);
  if (sixteenths > 0 && std::abs(sixteenths / 16.0 * 0.0254 - meters) <= tol)
    return {sixteenths / 16.0, LengthUnit::Inch};
  return Quantity::from_meters(meters);
}

CandidateSet enumerate_candidates(const Sketch& s, double tol, const CandidateOptions& opts) {
  const auto nodes = node_geometry(s);
  Collector out(s, tol);
  auto value = [&](double m) { return opts.snapToCommonValues ? snap_length(m, tol) : Quantity::from_meters(m); };

  // Single-node instantiations.
  for (const auto& n : nodes) {
    if (n.ref.sel != SubSelector::None) continue;
    if (n.kind == Kind::Ln) {
      out.offer(make(CT::Horizontal, {n.ref}));
      out.offer(make(CT::Vertical, {n.ref}));
      auto len = make(CT::Length, {n.ref});
      len.direction = Direction::Minimum;
      len.length = value((n.b - n.a).norm());
      out.offer(std::move(len));
    } else if (n.kind == Kind::Rd) {
      auto rad = make(CT::Radius, {n.ref});
      rad.length = value(n.r);
      out.offer(std::move(rad));
      auto dia = make(CT::Diameter, {n.ref});
      dia.length = value(2.0 * n.r);
      out.offer(std::move(dia));
    }
  }

  // Two-node instantiations, lower node first.
  struct DistancePair {
    std::size_t i, j;
    double d;
  };
  std::vector<DistancePair> distancePairs;
  std::set<std::pair<EntityRef, EntityRef>> related;
  auto relate = [&](const EntityRef& a, const EntityRef& b) { related.insert({a, b}); };

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const auto& u = nodes[i];
      const auto& v = nodes[j];
      if (u.ref.primitive == v.ref.primitive) continue;
      const std::vector<EntityRef> uv = {u.ref, v.ref};
      auto offer = [&](CT t) {
        if (out.offer(make(t, uv))) relate(u.ref, v.ref);
      };
      const Kind ku = u.kind, kv = v.kind;
      auto is = [&](Kind a, Kind b) { return (ku == a && kv == b) || (ku == b && kv == a); };

      if (ku == Kind::Pt && kv == Kind::Pt) {
        const Vec2 d = v.p - u.p;
        if (d.norm() <= tol) {
          // Shared centers of two round primitives are offered as Concentric.
          const bool centers = u.ref.sel == SubSelector::Center && v.ref.sel == SubSelector::Center;
          if (!centers) offer(CT::Coincident);
        } else {
          offer(CT::Horizontal);
          offer(CT::Vertical);
          distancePairs.push_back({i, j, d.norm()});
        }
      } else if (is(Kind::Pt, Kind::Ln)) {
        const auto& pt = ku == Kind::Pt ? u : v;
        const auto& ln = ku == Kind::Pt ? v : u;
        const double d = line_distance(ln, pt.p);
        if (d <= tol) {
          offer(CT::Coincident);
          offer(CT::Midpoint);
        } else {
          distancePairs.push_back({i, j, d});
        }
      } else if (is(Kind::Pt, Kind::Rd)) {
        offer(CT::Coincident);
        offer(CT::Concentric);
      } else if (ku == Kind::Ln && kv == Kind::Ln) {
        offer(CT::Coincident);
        offer(CT::Parallel);
        offer(CT::Perpendicular);
        offer(CT::Equal);
        if (parallel(u, v, tol)) {
          const double d = line_distance(u, (v.a + v.b) * 0.5);
          if (d > tol) distancePairs.push_back({i, j, d});
        }
      } else if (is(Kind::Ln, Kind::Rd)) {
        offer(CT::Tangent);
      } else if (ku == Kind::Rd && kv == Kind::Rd) {
        offer(CT::Coincident);
        offer(CT::Concentric);
        offer(CT::Equal);
        if ((v.p - u.p).norm() > tol) offer(CT::Tangent);
      }
    }
  }

  std::vector<double> ds;
  for (const auto& dp : distancePairs) ds.push_back(dp.d);
  const double cap = percentile(ds, opts.distancePercentile);
  for (const auto& dp : distancePairs) {
    const auto& u = nodes[dp.i];
    const auto& v = nodes[dp.j];
    if (dp.d > cap && !related.contains({u.ref, v.ref})) continue;
    std::vector<Direction> dirs = {Direction::Minimum};
    if (u.kind == Kind::Pt && v.kind == Kind::Pt) {
      if (std::abs(v.p.x - u.p.x) > tol) dirs.push_back(Direction::Horizontal);
      if (std::abs(v.p.y - u.p.y) > tol) dirs.push_back(Direction::Vertical);
    }
    for (Direction dir : dirs) {
      double measured = dp.d;
      if (dir == Direction::Horizontal) measured = std::abs(v.p.x - u.p.x);
      if (dir == Direction::Vertical) measured = std::abs(v.p.y - u.p.y);
      auto c = make(CT::Distance, {u.ref, v.ref});
      c.direction = dir;
      c.length = value(measured);
      static constexpr std::array<std::pair<HalfSpace, HalfSpace>, 4> sides = {{
          {HalfSpace::Left, HalfSpace::Left},
          {HalfSpace::Right, HalfSpace::Right},
          {HalfSpace::Left, HalfSpace::Right},
          {HalfSpace::Right, HalfSpace::Left},
      }};
      for (const auto& [h0, h1] : sides) {
        c.halfSpace0 = h0;
        c.halfSpace1 = h1;
        if (out.offer(c)) break;
      }
    }
  }
  return out.take();
}

// ---------------------------------------------------------------------------

RankingPolicy RankingPolicy::default_policy() {
  return {{
      {CT::Coincident},
      {CT::Horizontal, CT::Vertical},
      {CT::Parallel, CT::Perpendicular, CT::Tangent, CT::Concentric, CT::Midpoint},
      {CT::Equal},
      {CT::Radius, CT::Diameter, CT::Length, CT::Distance},
  }, 3};
}

std::optional<int> RankingPolicy::tier_of(const Constraint& c) const {
  const bool pointAlignment =
      (c.type == CT::Horizontal || c.type == CT::Vertical) && c.locals.size() == 2 && pointAlignmentTier >= 0;
  return pointAlignment ? std::optional(pointAlignmentTier) : tier_of(c.type);
}

std::optional<int> RankingPolicy::tier_of(ConstraintType t) const {
  for (std::size_t i = 0; i < tiers.size(); ++i)
    if (std::find(tiers[i].begin(), tiers[i].end(), t) != tiers[i].end()) return static_cast<int>(i);
  return std::nullopt;
}

std::vector<Constraint> infer_constraints(const Sketch& s, const RankingPolicy& policy, int dofTarget, double tol,
                                          const CandidateOptions& opts) {
  auto candidates = enumerate_candidates(s, tol, opts).items;

  struct Ranked {
    int tier, span, dimension, position;
    long long score;
    std::size_t index;
  };
  std::vector<Ranked> ranked;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i].constraint;
    const auto tier = policy.tier_of(c);
    if (!tier) continue;
    const auto& members = policy.tiers[*tier];
    int position = static_cast<int>(std::find(members.begin(), members.end(), c.type) - members.begin());
    // Circles are dimensioned by diameter, arcs by radius.
    if (c.type == CT::Diameter || c.type == CT::Radius) {
      const bool circle = s.primitives[c.locals[0].primitive].type() == PrimitiveType::Circle;
      position = (c.type == CT::Diameter) == circle ? -1 : position;
    }
    // Residuals are compared on a grid well below the tolerance so that
    // round-off does not reorder exactly satisfied candidates.
    const auto score = static_cast<long long>(std::floor(candidates[i].score / (tol * 1e-3)));
    std::set<int> touched;
    for (const auto& l : c.locals) touched.insert(l.primitive);
    ranked.push_back({*tier, static_cast<int>(touched.size()), residual_dimension(c, s), position, score, i});
  }
  std::sort(ranked.begin(), ranked.end(), [&](const Ranked& a, const Ranked& b) {
    if (a.tier != b.tier) return a.tier < b.tier;
    if (a.score != b.score) return a.score < b.score;
    if (a.span != b.span) return a.span < b.span;
    if (a.dimension != b.dimension) return a.dimension > b.dimension;
    if (a.position != b.position) return a.position < b.position;
    return candidates[a.index].constraint.locals < candidates[b.index].constraint.locals;
  });

  Sketch system = s;
  system.constraints.clear();
  for (const auto& r : ranked) system.constraints.push_back(candidates[r.index].constraint);
  ConstraintSystem sys(system, {}, true);
  const int total = sys.variable_count();
  std::vector<Constraint> selected;
  if (total - dofTarget <= 0 || sys.residual_count() == 0) return selected;

  // Rigid motions in variable space: two translations and a rotation about
  // the origin. Motions the selected set fixes count toward the target.
  Eigen::MatrixXd rigid = Eigen::MatrixXd::Zero(total, 3);
  for (int i = 0; i < static_cast<int>(s.primitives.size()); ++i) {
    const auto [offset, size] = sys.slice(i);
    if (offset < 0) continue;
    const Eigen::VectorXd x = sys.initial().segment(offset, size);
    auto point = [&](int at) {
      rigid(offset + at, 0) = 1.0;
      rigid(offset + at + 1, 1) = 1.0;
      rigid(offset + at, 2) = -x[at + 1];
      rigid(offset + at + 1, 2) = x[at];
    };
    switch (s.primitives[i].type()) {
      case PrimitiveType::Point: point(0); break;
      case PrimitiveType::Line: point(0), point(2); break;
      case PrimitiveType::Circle: point(0); break;
      case PrimitiveType::Arc:
        point(0);
        rigid(offset + 3, 2) = rigid(offset + 4, 2) = 1.0;
        break;
      default: break;
    }
  }
  for (int j = 0; j < 3; ++j)
    if (rigid.col(j).norm() > 0) rigid.col(j).normalize();
  auto rigid_fixed = [&](const Eigen::MatrixXd& b) {
    if (b.cols() == 0) return 0;
    const Eigen::MatrixXd m = b.transpose() * rigid;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return static_cast<int>((svd.singularValues().array() > 1e-6).count());
  };

  Eigen::MatrixXd jac;
  sys.evaluate(sys.initial(), nullptr, &jac);
  Eigen::MatrixXd basis(total, 0);
  int contacts = 0;
  const auto& active = sys.active_constraints();
  for (int k = 0; k < static_cast<int>(active.size()) && basis.cols() + contacts < total; ++k) {
    const auto [offset, count] = sys.rows(k);
    Eigen::MatrixXd fresh(total, 0);
    for (int row = 0; row < count; ++row) {
      Eigen::VectorXd v = jac.row(offset + row).transpose();
      const double n = v.norm();
      if (n < 1e-12) continue;
      v /= n;
      for (int pass = 0; pass < 2; ++pass) {
        if (basis.cols() > 0) v -= basis * (basis.transpose() * v);
        if (fresh.cols() > 0) v -= fresh * (fresh.transpose() * v);
      }
      const double left = v.norm();
      if (left < 1e-6) continue;
      fresh.conservativeResize(Eigen::NoChange, fresh.cols() + 1);
      fresh.col(fresh.cols() - 1) = v / left;
    }
    // Tangency at a shared endpoint is first-order dependent on the
    // coincidence there; it still removes its residual dimension.
    const bool contact = fresh.cols() == 0 && system.constraints[active[k]].type == CT::Tangent;
    if (fresh.cols() == 0 && !contact) continue;
    Eigen::MatrixXd grown(total, basis.cols() + fresh.cols());
    grown << basis, fresh;
    const int removed = static_cast<int>(grown.cols()) + contacts + (contact ? count : 0);
    if (total - removed < dofTarget - rigid_fixed(grown)) continue;
    basis = std::move(grown);
    if (contact) contacts += count;
    selected.push_back(system.constraints[active[k]]);
  }
  return selected;
}

// ---------------------------------------------------------------------------

ConstraintKey ConstraintKey::of(const Constraint& c) {
  ConstraintKey k;
  k.type = c.type;
  k.members = c.locals;
  std::sort(k.members.begin(), k.members.end());
  if (c.length) k.length = std::llround(c.length->meters() * 1e6);
  if (c.angle) k.angle = std::llround(*c.angle * 1e4);
  k.direction = c.direction;
  return k;
}

namespace {

std::set<ConstraintKey> key_set(std::span<const Constraint> cs) {
  std::set<ConstraintKey> out;
  for (const auto& c : cs) out.insert(ConstraintKey::of(c));
  return out;
}

}  // namespace

EvalMetrics evaluate_prediction(std::span<const Constraint> predicted, std::span<const Constraint> groundTruth) {
  if (groundTruth.empty()) throw Error(ErrorCode::EmptyGroundTruth, "ground truth has no constraints");
  const auto pred = key_set(predicted);
  const auto gt = key_set(groundTruth);
  std::size_t hit = 0;
  for (const auto& k : pred) hit += gt.contains(k) ? 1 : 0;
  EvalMetrics m;
  m.precision = pred.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(pred.size());
  m.recall = static_cast<double>(hit) / static_cast<double>(gt.size());
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

double candidate_recall(const CandidateSet& candidates, std::span<const Constraint> groundTruth) {
  std::set<ConstraintKey> have;
  for (const auto& c : candidates.items) have.insert(ConstraintKey::of(c.constraint));
  std::size_t total = 0, hit = 0;
  for (const auto& c : groundTruth) {
    if (!is_enumerable(c.type)) continue;
    ++total;
    hit += have.contains(ConstraintKey::of(c)) ? 1 : 0;
  }
  return total == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(total);
}

bool EvalAccumulator::add(const std::string& sketchId, std::span<const Constraint> predicted,
                          std::span<const Constraint> groundTruth) {
  if (groundTruth.empty()) {
    ++skipped_;
    return false;
  }
  perSketch_[sketchId] = evaluate_prediction(predicted, groundTruth);
  return true;
}

void EvalAccumulator::merge(const EvalAccumulator& other) {
  for (const auto& [id, m] : other.perSketch_) perSketch_[id] = m;
  skipped_ += other.skipped_;
}

EvalMetrics EvalAccumulator::mean() const {
  EvalMetrics m;
  if (perSketch_.empty()) return m;
  for (const auto& [id, e] : perSketch_) {
    m.precision += e.precision;
    m.recall += e.recall;
    m.f1 += e.f1;
  }
  const double n = static_cast<double>(perSketch_.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

}  // namespace sg
