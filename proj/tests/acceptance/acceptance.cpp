// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "golden_fixtures.hpp"
#include "sg/autoconstrain.hpp"
#include "sg/compress.hpp"
#include "sg/corpus.hpp"
#include "sg/dof.hpp"
#include "sg/graph.hpp"
#include "sg/render.hpp"
#include "sg/sequence.hpp"
#include "sg/solver.hpp"
#include "sg/stats.hpp"
#include "sg/synth.hpp"
#include "support.hpp"

using namespace sg;
using CT = ConstraintType;
using sgt::Builder;
using sgt::whole;
namespace fs = std::filesystem;

namespace {

// Mean F1 of the greedy policy on the 500-sketch suite, measured once.
constexpr double kF1Baseline = 0.8075;
constexpr double kF1Floor = 0.6;

const fs::path kData = SG_TEST_DATA;

int failures = 0;

void report(int n, const char* name, bool ok, const std::string& detail) {
  std::printf("%s %2d %-28s %s\n", ok ? "PASS" : "FAIL", n, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// 1 ----------------------------------------------------------------------
void dof_constants() {
  const auto t0 = std::chrono::steady_clock::now();
  const bool ok = dof_of_primitive(PrimitiveType::Point) == 2 && dof_of_primitive(PrimitiveType::Line) == 4 &&
                  dof_of_primitive(PrimitiveType::Circle) == 3 && dof_of_primitive(PrimitiveType::Arc) == 5 &&
                  dof_of_primitive(PrimitiveType::Ellipse) == 5;
  const double dt = seconds_since(t0);
  report(1, "dof constants", ok && dt < 1e-3, fmt("%.1f us", dt * 1e6));
}

// 2 ----------------------------------------------------------------------
double coord_error(const StandardPrimitive& a, const StandardPrimitive& b) {
  auto d = [](Vec2 p, Vec2 q) { return std::max(std::abs(p.x - q.x), std::abs(p.y - q.y)); };
  return std::visit(
      [&](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b);
        if constexpr (std::is_same_v<T, StdPoint>) return d(x.p, y.p);
        if constexpr (std::is_same_v<T, StdLine>) return std::max(d(x.start, y.start), d(x.end, y.end));
        if constexpr (std::is_same_v<T, StdCircle>) return std::max(d(x.center, y.center), std::abs(x.radius - y.radius));
        if constexpr (std::is_same_v<T, StdArc>)
          return std::max({d(x.center, y.center), std::abs(x.radius - y.radius), d(x.startPoint, y.startPoint),
                           d(x.endPoint, y.endPoint), x.clockwise == y.clockwise ? 0.0 : 1.0});
        if constexpr (std::is_same_v<T, StdEllipse>)
          return std::max({d(x.center, y.center), d(x.majorAxisDir, y.majorAxisDir), std::abs(x.radius - y.radius),
                           std::abs(x.minorRadius - y.minorRadius)});
        return 0.0;
      },
      a);
}

void parameterization_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1, 1), r(1e-3, 1), ang(-std::numbers::pi, std::numbers::pi);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 c{u(rng), u(rng)};
    const double rad = r(rng);
    StandardPrimitive s;
    switch (i % 5) {
      case 0: s = StdPoint{c}; break;
      case 1: s = StdLine{c, {u(rng), u(rng)}}; break;
      case 2: s = StdCircle{c, rad}; break;
      case 3: {
        const double a0 = ang(rng), a1 = ang(rng);
        s = StdArc{c, rad, c + Vec2{std::cos(a0), std::sin(a0)} * rad, c + Vec2{std::cos(a1), std::sin(a1)} * rad,
                   rng() % 2 == 0};
        break;
      }
      default: {
        const double a = ang(rng);
        s = StdEllipse{c, {std::cos(a), std::sin(a)}, rad, rad * 0.5};
      }
    }
    worst = std::max(worst, coord_error(s, to_standard(from_standard(s))));
  }
  const double dt = seconds_since(t0);
  report(2, "parameterization round trip", worst < 1e-9 && dt < 1.0, fmt("max error %.2e, %.3f s", worst, dt));
}

// 3 ----------------------------------------------------------------------
// Synthetic sketches with every primitive shifted by up to 0.2 mm.
Sketch perturbed(const Sketch& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> n(-2e-4, 2e-4);
  Sketch out = s;
  for (auto& p : out.primitives) {
    auto g = to_standard(p);
    std::visit(
        [&](auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, StdPoint>) x.p = x.p + Vec2{n(rng), n(rng)};
          if constexpr (std::is_same_v<T, StdLine>) {
            x.start = x.start + Vec2{n(rng), n(rng)};
            x.end = x.end + Vec2{n(rng), n(rng)};
          }
          if constexpr (std::is_same_v<T, StdCircle>) x.radius += std::abs(n(rng));
          if constexpr (std::is_same_v<T, StdArc>) {
            const Vec2 shift{n(rng), n(rng)};
            x.center = x.center + shift;
            x.startPoint = x.startPoint + shift;
            x.endPoint = x.endPoint + shift;
          }
        },
        g);
    p.params = from_standard_like(g, p.params);
    p.raw.clear();
  }
  return out;
}

void solver_convergence() {
  std::mt19937_64 rng(99);
  const auto t0 = std::chrono::steady_clock::now();
  int ok = 0, worstIter = 0;
  double worstResidual = 0;
  for (std::size_t i = 0; i < 25; ++i) {
    const auto r = solve(perturbed(synth_sketch(31, i), rng));
    worstIter = std::max(worstIter, r.iterations);
    worstResidual = std::max(worstResidual, r.maxAbsResidual);
    ok += r.converged && r.maxAbsResidual < 1e-8 && r.iterations <= 200;
  }
  const double dt = seconds_since(t0);
  report(3, "solver convergence", ok == 25 && dt < 5.0,
         fmt("%g/25 converged, max residual %.1e, ", ok, worstResidual) +
             fmt("max %g iterations, %.2f s", worstIter, dt));
}

// 4 ----------------------------------------------------------------------
/// Random operands for one constraint type; variant k cycles through the
/// operand combinations the type accepts.
Sketch random_case(CT t, int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1), r(0.1, 1), a(-3, 3);
  Builder b;
  auto pt = [&] { return b.point(u(rng), u(rng)); };
  auto ln = [&] { return b.line(u(rng), u(rng), u(rng), u(rng)); };
  auto ci = [&] { return b.circle(u(rng), u(rng), r(rng)); };
  auto ar = [&] {
    const double a0 = a(rng);
    return b.arc(u(rng), u(rng), r(rng), a0, a0 + 0.5 + std::abs(a(rng)) * 0.8, rng() % 2 == 0);
  };
  auto hs = [&] { return rng() % 2 ? HalfSpace::Left : HalfSpace::Right; };
  switch (t) {
    case CT::Coincident:
      switch (k % 6) {
        case 0: b.rel(t, {whole(pt()), whole(pt())}); break;
        case 1: b.rel(t, {whole(pt()), whole(ln())}); break;
        case 2: b.rel(t, {sgt::start(ln()), whole(ci())}); break;
        case 3: b.rel(t, {whole(ln()), whole(ln())}); break;
        case 4: b.rel(t, {whole(ci()), whole(ar())}); break;
        default: b.rel(t, {sgt::end(ar()), whole(ln())});
      }
      break;
    case CT::Horizontal:
    case CT::Vertical:
      if (k % 2) b.rel(t, {whole(ln())});
      else b.rel(t, {whole(pt()), sgt::center(ar())});
      break;
    case CT::Parallel:
    case CT::Perpendicular:
    case CT::Offset: b.rel(t, {whole(ln()), whole(ln())}); break;
    case CT::Tangent:
      if (k % 2) b.rel(t, {whole(ln()), whole(ar())});
      else b.rel(t, {whole(ci()), whole(ar())});
      break;
    case CT::Midpoint: b.rel(t, {sgt::end(ar()), whole(ln())}); break;
    case CT::Equal:
      if (k % 2) b.rel(t, {whole(ln()), whole(ln())});
      else b.rel(t, {whole(ci()), whole(ar())});
      break;
    case CT::Concentric:
      if (k % 2) b.rel(t, {whole(ci()), whole(ar())});
      else b.rel(t, {whole(pt()), whole(ci())});
      break;
    case CT::Mirror:
      switch (k % 4) {
        case 0: b.rel(t, {whole(pt()), whole(pt()), whole(ln())}); break;
        case 1: b.rel(t, {whole(ln()), whole(ln()), whole(ln())}); break;
        case 2: b.rel(t, {whole(ci()), whole(ci()), whole(ln())}); break;
        default: b.rel(t, {whole(ar()), whole(ar()), whole(ln())});
      }
      break;
    case CT::Diameter:
    case CT::Radius: b.dim(t, {whole(k % 2 ? ci() : ar())}, r(rng)); break;
    case CT::Length: b.dim(t, {whole(ln())}, r(rng)).direction = static_cast<Direction>(k % 3); break;
    case CT::Distance: {
      const int kind = k % 7;
      std::vector<EntityRef> ops;
      switch (kind) {
        case 0:
        case 1:
        case 2: ops = {whole(pt()), sgt::start(ln())}; break;
        case 3: ops = {whole(pt()), whole(ln())}; break;
        case 4: ops = {whole(ln()), whole(ln())}; break;
        case 5: ops = {whole(pt()), whole(ci())}; break;
        default: ops = {whole(ci()), whole(ar())};
      }
      auto& c = b.dim(t, ops, r(rng));
      c.direction = kind < 3 ? static_cast<Direction>(kind) : Direction::Minimum;
      c.halfSpace0 = hs();
      c.halfSpace1 = hs();
      break;
    }
    case CT::Angle: {
      auto& c = b.rel(t, {whole(ln()), whole(ln())});
      c.angle = a(rng) * 50;
      c.aligned = rng() % 2 == 0;
      c.clockwise = rng() % 2 == 0;
      break;
    }
    case CT::Projected: break;
  }
  return b.s;
}

/// Max relative deviation between the assembled Jacobian and central
/// differences; negative when the configuration sits on a kink (angle wrap
/// or absolute value) where differences are meaningless.
double jacobian_deviation(const Sketch& s) {
  ConstraintSystem sys(s);
  const Eigen::VectorXd x = sys.initial();
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  sys.evaluate(x, &r, &J);
  const double h = 1e-7;
  double worst = 0;
  for (int j = 0; j < sys.variable_count(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Eigen::VectorXd rp = sys.residual_vector(xp), rm = sys.residual_vector(xm);
    for (int i = 0; i < r.size(); ++i) {
      if (std::abs(rp[i] - rm[i]) > 1.0) return -1;  // wrapped across +-pi
      const double fd = (rp[i] - rm[i]) / (2 * h);
      const double one = (rp[i] - r[i]) / h, other = (r[i] - rm[i]) / h;
      if (std::abs(one - other) > 1e-2 * std::max(1.0, std::abs(fd))) return -1;  // kink between samples
      worst = std::max(worst, std::abs(fd - J(i, j)) / std::max(1.0, std::abs(fd)));
    }
  }
  return worst;
}

void jacobian_check() {
  std::mt19937_64 rng(7);
  double worst = 0;
  int types = 0, checked = 0, kinks = 0;
  for (int ti = 0; ti < kConstraintTypeCount; ++ti) {
    const auto t = static_cast<CT>(ti);
    if (is_external(t)) continue;
    ++types;
    for (int k = 0, done = 0; done < 100; ++k) {
      const double d = jacobian_deviation(random_case(t, k, rng));
      if (d < 0) {
        ++kinks;
        continue;
      }
      worst = std::max(worst, d);
      ++done;
      ++checked;
    }
  }
  report(4, "jacobian check", worst < 1e-5,
         fmt("%g types x 100 configurations, max relative error %.1e, ", types, worst) +
             fmt("%g resampled at kinks", kinks));
}

// 5 ----------------------------------------------------------------------
// Independent residual formulas for the oracle.
struct Oracle {
  static Vec2 P(const Sketch& s, EntityRef r) {
    const auto g = to_standard(s.primitives[r.primitive]);
    if (auto* p = std::get_if<StdPoint>(&g)) return p->p;
    if (auto* l = std::get_if<StdLine>(&g)) return r.sel == SubSelector::Start ? l->start : l->end;
    if (auto* c = std::get_if<StdCircle>(&g)) return c->center;
    const auto& a = std::get<StdArc>(g);
    return r.sel == SubSelector::Start ? a.startPoint : r.sel == SubSelector::End ? a.endPoint : a.center;
  }
  static StdLine L(const Sketch& s, EntityRef r) { return std::get<StdLine>(to_standard(s.primitives[r.primitive])); }
  static StdCircle C(const Sketch& s, EntityRef r) {
    return std::get<StdCircle>(to_standard(s.primitives[r.primitive]));
  }

  static std::vector<double> eval(const Constraint& c, const Sketch& s) {
    const auto& l = c.locals;
    auto dir = [](const StdLine& x) {
      const Vec2 d = x.end - x.start;
      return d * (1.0 / d.norm());
    };
    switch (c.type) {
      case CT::Coincident:
        if (s.primitives[l[1].primitive].type() == PrimitiveType::Line && l[1].sel == SubSelector::None) {
          const auto ln = L(s, l[1]);
          return {dir(ln).cross(P(s, l[0]) - ln.start)};
        } else {
          const Vec2 d = P(s, l[1]) - P(s, l[0]);
          return {d.x, d.y};
        }
      case CT::Horizontal: {
        const auto ln = L(s, l[0]);
        return {ln.end.y - ln.start.y};
      }
      case CT::Vertical: {
        const auto ln = L(s, l[0]);
        return {ln.end.x - ln.start.x};
      }
      case CT::Parallel: return {dir(L(s, l[0])).cross(dir(L(s, l[1])))};
      case CT::Perpendicular: return {dir(L(s, l[0])).dot(dir(L(s, l[1])))};
      case CT::Equal: {
        const auto a = L(s, l[0]), b = L(s, l[1]);
        return {(a.end - a.start).norm() - (b.end - b.start).norm()};
      }
      case CT::Radius: return {C(s, l[0]).radius - c.length->meters()};
      case CT::Diameter: return {2 * C(s, l[0]).radius - c.length->meters()};
      case CT::Length: {
        const auto a = L(s, l[0]);
        return {(a.end - a.start).norm() - c.length->meters()};
      }
      case CT::Concentric: {
        const Vec2 d = C(s, l[0]).center - C(s, l[1]).center;
        return {d.x, d.y};
      }
      case CT::Midpoint: {
        const auto a = L(s, l[1]);
        const Vec2 d = P(s, l[0]) - (a.start + a.end) * 0.5;
        return {d.x, d.y};
      }
      case CT::Distance: return {(P(s, l[1]) - P(s, l[0])).norm() - c.length->meters()};
      default: return {};
    }
  }
};

/// A constraint on exactly satisfying geometry, then nudged by `eps` (0 keeps it exact).
Sketch oracle_case(int k, double eps, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1), r(0.1, 1), unit(0, 2 * std::numbers::pi);
  const double th = unit(rng);
  const Vec2 e{eps * std::cos(th), eps * std::sin(th)};
  const Vec2 p{u(rng), u(rng)}, q{u(rng), u(rng)};
  Builder b;
  switch (k % 12) {
    case 0: b.rel(CT::Coincident, {whole(b.point(p.x, p.y)), whole(b.point(p.x + e.x, p.y + e.y))}); break;
    case 1: {
      const Vec2 m = p + (q - p) * 0.3 + e;
      b.rel(CT::Coincident, {whole(b.point(m.x, m.y)), whole(b.line(p.x, p.y, q.x, q.y))});
      break;
    }
    case 2: b.rel(CT::Horizontal, {whole(b.line(p.x, p.y, q.x, p.y + e.y))}); break;
    case 3: b.rel(CT::Vertical, {whole(b.line(p.x, p.y, p.x + e.x, q.y))}); break;
    case 4: {
      const Vec2 d = q - p;
      b.rel(CT::Parallel, {whole(b.line(p.x, p.y, q.x, q.y)), whole(b.line(0, 0, d.x * 0.5 + e.x, d.y * 0.5))});
      break;
    }
    case 5: {
      const Vec2 d = q - p;
      b.rel(CT::Perpendicular, {whole(b.line(p.x, p.y, q.x, q.y)), whole(b.line(0, 0, -d.y + e.x, d.x))});
      break;
    }
    case 6: {
      const Vec2 d = q - p;
      b.rel(CT::Equal, {whole(b.line(p.x, p.y, q.x, q.y)), whole(b.line(0, 0, -d.y, d.x + e.y))});
      break;
    }
    case 7: {
      const double rad = r(rng);
      b.dim(CT::Radius, {whole(b.circle(p.x, p.y, rad))}, rad + e.x);
      break;
    }
    case 8: {
      const double rad = r(rng);
      b.dim(CT::Diameter, {whole(b.circle(p.x, p.y, rad))}, 2 * rad + e.y);
      break;
    }
    case 9: {
      const int c0 = b.circle(p.x, p.y, r(rng)), c1 = b.circle(p.x + e.x, p.y + e.y, r(rng));
      b.rel(CT::Concentric, {whole(c0), whole(c1)});
      break;
    }
    case 10: {
      const Vec2 m = (p + q) * 0.5 + e;
      b.rel(CT::Midpoint, {whole(b.point(m.x, m.y)), whole(b.line(p.x, p.y, q.x, q.y))});
      break;
    }
    default: {
      const double len = (q - p).norm();
      if (k % 24 < 12) {
        b.dim(CT::Length, {whole(b.line(p.x, p.y, q.x, q.y))}, len + e.x).direction = Direction::Minimum;
      } else {
        auto& c = b.dim(CT::Distance, {whole(b.point(p.x, p.y)), whole(b.point(q.x, q.y))}, len + e.y);
        c.direction = Direction::Minimum;
        c.halfSpace0 = c.halfSpace1 = HalfSpace::Left;
      }
    }
  }
  return b.s;
}

void mask_oracle() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> logEps(-10, -3);
  const double tol = 1e-6;
  int disagreements = 0, satisfied = 0;
  for (int i = 0; i < 10000; ++i) {
    const double eps = i % 3 == 0 ? 0.0 : std::pow(10.0, logEps(rng));
    const auto s = oracle_case(i, eps, rng);
    const auto& c = s.constraints[0];
    const bool brute = sgt::max_abs(Oracle::eval(c, s)) <= tol;
    satisfied += brute;
    disagreements += is_satisfied(c, s, tol) != brute;
  }
  report(5, "mask/oracle equivalence", disagreements == 0,
         fmt("%g disagreements in 10000 pairs (%g satisfied)", disagreements, satisfied));
}

// 6 ----------------------------------------------------------------------
void sequence_invariants() {
  int violations = 0;
  bool deterministic = true;
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto s = synth_sketch(61, i);
    const auto g = build_graph(s);
    const auto seq = canonical_sequence(s, g);
    deterministic &= seq == canonical_sequence(s, build_graph(s));
    std::set<int> present;
    int nextPrimitive = 0, lastEdge = -1, lastEdgeReadyAt = -1;
    for (const auto& op : seq.ops) {
      if (auto* n = std::get_if<AddNode>(&op)) {
        violations += n->primitive != nextPrimitive++;
        present.insert(n->primitive);
      } else if (auto* e = std::get_if<AddEdge>(&op)) {
        const auto members = g.member_primitives(g.edges()[g.constraint_edge(e->constraint)]);
        int readyAt = 0;
        for (int m : members) {
          violations += present.count(m) == 0;
          readyAt = std::max(readyAt, m);
        }
        // Emitted as soon as ready: its last member is the newest node.
        violations += readyAt != nextPrimitive - 1;
        // Among edges ready at the same node, standalone order holds.
        if (readyAt == lastEdgeReadyAt) violations += e->constraint < lastEdge;
        lastEdge = e->constraint;
        lastEdgeReadyAt = readyAt;
      }
    }
    violations += nextPrimitive != static_cast<int>(s.primitives.size());
    violations += !std::holds_alternative<Stop>(seq.ops.back());
  }
  report(6, "sequence invariants", violations == 0 && deterministic,
         fmt("%g violations over 1000 sketches, deterministic ", violations) + (deterministic ? "yes" : "no"));
}

// 7 ----------------------------------------------------------------------
void autoconstrain_self_consistency() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto corpus = synth_corpus(500, 71);
  const int threads = std::max(1u, std::min(4u, std::thread::hardware_concurrency()));
  std::vector<EvalAccumulator> acc(threads);
  std::vector<double> minRecall(threads, 1.0);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < corpus.size(); i += threads) {
        Sketch bare = corpus[i];
        bare.constraints.clear();
        minRecall[t] = std::min(minRecall[t], candidate_recall(enumerate_candidates(bare), corpus[i].constraints));
        acc[t].add(corpus[i].id, infer_constraints(bare), corpus[i].constraints);
      }
    });
  }
  for (auto& th : pool) th.join();
  for (int t = 1; t < threads; ++t) acc[0].merge(acc[t]);
  const double recall = *std::min_element(minRecall.begin(), minRecall.end());
  const auto m = acc[0].mean();
  const double dt = seconds_since(t0);
  const bool pinned = std::abs(m.f1 - kF1Baseline) < 1e-3;
  report(7, "autoconstrain self-consistency", recall == 1.0 && m.f1 >= kF1Floor && pinned && dt < 30,
         fmt("enumeration recall %.4f, P %.3f R %.3f, ", recall, m.precision, m.recall) +
             fmt("F1 %.4f (pinned %.4f), %.1f s", m.f1, kF1Baseline, dt));
}

// 8 ----------------------------------------------------------------------
/// Rectangle, vertical construction line between the midpoints of bottom and
/// top, a circle centered on it near the top and a smaller concentric circle.
Sketch fig5_fixture() {
  Builder b("fig5");
  const double W = 0.10, H = 0.06;
  b.line(0, 0, W, 0);
  b.line(W, 0, W, H);
  b.line(W, H, 0, H);
  b.line(0, H, 0, 0);
  b.line(W / 2, 0, W / 2, H, true);
  b.circle(W / 2, 0.042, 0.009);
  b.circle(W / 2, 0.042, 0.004);
  return b.s;
}

void edit_propagation() {
  Sketch s = fig5_fixture();
  s.constraints = infer_constraints(s);
  const int bottom = 0, top = 2, axis = 4, outer = 5, inner = 6;
  bool midpoints = false, concentric = false;
  for (const auto& c : s.constraints) {
    if (c.type == CT::Midpoint) midpoints = true;
    if (c.type == CT::Concentric || (c.type == CT::Coincident && c.locals.size() == 2 &&
                                     c.locals[0].primitive >= outer && c.locals[1].primitive >= outer))
      concentric = true;
  }
  const Edit drag{outer, translated(to_standard(s.primitives[outer]), {0, 0.008})};
  const auto r = edit_propagate(s, std::span(&drag, 1));

  double worst = 0;
  for (const auto& c : r.solvedSketch.constraints)
    if (c.type == CT::Coincident || c.type == CT::Concentric || c.type == CT::Midpoint)
      worst = std::max(worst, sgt::max_abs(residuals(c, r.solvedSketch)));

  auto line = [&](int i) { return std::get<StdLine>(to_standard(r.solvedSketch.primitives[i])); };
  auto circle = [&](int i) { return std::get<StdCircle>(to_standard(r.solvedSketch.primitives[i])); };
  const auto ax = line(axis), bo = line(bottom), tp = line(top);
  const double midError = std::max(((bo.start + bo.end) * 0.5 - ax.start).norm(), ((tp.start + tp.end) * 0.5 - ax.end).norm());
  const double moved = circle(outer).center.y - 0.042;
  const double apart = (circle(outer).center - circle(inner).center).norm();
  report(8, "edit propagation", r.converged && worst < 1e-6 && midError < 1e-6 && apart < 1e-6 && moved > 1e-3 &&
                                    midpoints && concentric,
         fmt("%g inferred, max relation residual %.1e, midpoint error %.1e, ", s.constraints.size(), worst, midError) +
             fmt("circle moved %.2f mm", moved * 1e3));
}

// 9 ----------------------------------------------------------------------
void rendering_determinism() {
  const auto cases = sgt::golden_cases(kData);
  int goldens = 0;
  for (const auto& g : cases) goldens += sgt::matches_golden(kData, g);
  bool stable = true;
  double deviation = 0;
  for (const auto& g : cases) {
    RenderOptions noisy;
    noisy.noiseMagnitude = 0.004;
    noisy.noiseSeed = 1234;
    stable &= render_handdrawn(g.sketch, noisy) == render_handdrawn(g.sketch, noisy);
    RenderOptions clean;
    const auto drawn = handdrawn_curves(g.sketch, clean);
    for (std::size_t i = 0; i < g.sketch.primitives.size(); ++i) {
      const auto exact = primitive_curves(g.sketch.primitives[i]);
      if (drawn[i].size() != exact.size()) {
        deviation = 1;
        continue;
      }
      for (std::size_t k = 0; k < exact.size(); ++k)
        for (double t = 0; t <= 1.0; t += 0.25) deviation = std::max(deviation, (drawn[i][k].at(t) - exact[k].at(t)).norm());
    }
  }
  report(9, "rendering determinism", goldens == 10 && stable && deviation < 1e-9,
         fmt("%g/10 goldens, noisy renders stable ", goldens) + (stable ? "yes" : "no") +
             fmt(", zero-noise deviation %.1e", deviation));
}

// 10 ---------------------------------------------------------------------
void pipeline_throughput() {
  const auto path = fs::temp_directory_path() / "sg_acceptance_100k.sgl";
  {
    CorpusWriter w(path.string());
    for (std::size_t i = 0; i < 100000; ++i) w.write(synth_sketch(101, i));
    w.close();
  }
  const auto t0 = std::chrono::steady_clock::now();
  StatsAccumulator acc;
  CorpusReader reader(path.string(), false);
  while (auto s = reader.next()) acc.add(*s);
  const auto r = acc.report();
  const double dt = seconds_since(t0);
  double p = 0, c = 0;
  for (const auto& row : r.primitiveTypes) p += row.percent;
  for (const auto& row : r.constraintTypes) c += row.percent;
  fs::remove(path);
  report(10, "pipeline throughput",
         r.sketches == 100000 && reader.errors().empty() && dt < 60 && std::abs(p - 100) <= 0.01 &&
             std::abs(c - 100) <= 0.01,
         fmt("%g sketches in %.1f s, frequency sums %.4f", static_cast<double>(r.sketches), dt, p) + fmt(" / %.4f", c));
}

// 11 ---------------------------------------------------------------------
void entropy_sanity() {
  LzmaCompressor codec;
  const auto s = synth_sketch(5, 2);
  VocabularyBuilder counts;
  const auto seq = canonical_sequence(s, build_graph(s));
  counts.add(seq);
  const auto tokens = TokenVocabulary(counts, {}).tokenize(seq);
  const std::vector<std::vector<int>> same(2000, tokens);
  const double raw = 16.0 * static_cast<double>(tokens.size());
  const double repeated = entropy_rate_estimate(same, 1000, 2000, codec);

  std::mt19937_64 rng(17);
  std::vector<std::vector<int>> noise(2000, std::vector<int>(tokens.size()));
  for (auto& v : noise)
    for (auto& t : v) t = static_cast<int>(rng() % 65536);
  const double random = entropy_rate_estimate(noise, 1000, 2000, codec);
  report(11, "entropy-rate sanity", repeated < 0.05 * raw && std::abs(random - raw) <= 0.10 * raw,
         fmt("raw %.0f bits/sketch, identical %.2f, random %.1f", raw, repeated, random));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {
      dof_constants,       parameterization_round_trip, solver_convergence, jacobian_check,
      mask_oracle,         sequence_invariants,         autoconstrain_self_consistency, edit_propagation,
      rendering_determinism, pipeline_throughput,       entropy_sanity};
  for (const auto& run : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      std::printf("FAIL    exception: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
