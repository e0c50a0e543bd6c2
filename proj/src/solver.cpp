#include "sg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "residual_catalog.hpp"

namespace sg {

using detail::AD;
using detail::Geo;
using detail::Shape;

namespace {

int param_count(PrimitiveType t) {
  switch (t) {
    case PrimitiveType::Point: return 2;
    case PrimitiveType::Line: return 4;
    case PrimitiveType::Circle: return 3;
    case PrimitiveType::Arc: return 5;
    default: return 0;
  }
}

/// Solver variables for one primitive (see ConstraintSystem).
void append_params(const Primitive& p, std::vector<double>& out) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointParams>) {
          out.insert(out.end(), {v.x, v.y});
        } else if constexpr (std::is_same_v<T, LineParams>) {
          const auto l = std::get<StdLine>(to_standard(p.params));
          out.insert(out.end(), {l.start.x, l.start.y, l.end.x, l.end.y});
        } else if constexpr (std::is_same_v<T, CircleParams>) {
          out.insert(out.end(), {v.xCenter, v.yCenter, v.radius});
        } else if constexpr (std::is_same_v<T, ArcParams>) {
          const double phi = std::atan2(v.yDir, v.xDir);
          const double sign = v.clockwise ? -1.0 : 1.0;
          out.insert(out.end(),
                     {v.xCenter, v.yCenter, v.radius, phi + sign * v.startParam, phi + sign * v.endParam});
        }
      },
      p.params);
}

bool clockwise_of(const Primitive& p) {
  if (const auto* c = std::get_if<CircleParams>(&p.params)) return c->clockwise;
  if (const auto* a = std::get_if<ArcParams>(&p.params)) return a->clockwise;
  return false;
}

template <class T>
Geo<T> make_geo(PrimitiveType type, const T* v, bool cw) {
  Geo<T> g;
  g.cw = cw;
  switch (type) {
    case PrimitiveType::Point:
      g.shape = Shape::Point;
      g.a = {v[0], v[1]};
      break;
    case PrimitiveType::Line:
      g.shape = Shape::Line;
      g.a = {v[0], v[1]};
      g.b = {v[2], v[3]};
      break;
    case PrimitiveType::Circle:
      g.shape = Shape::Circle;
      g.a = {v[0], v[1]};
      g.r = v[2];
      break;
    case PrimitiveType::Arc:
      g.shape = Shape::Arc;
      g.a = {v[0], v[1]};
      g.r = v[2];
      g.t0 = v[3];
      g.t1 = v[4];
      break;
    default: break;
  }
  return g;
}

[[noreturn]] void unsupported_primitive(const Sketch& s, int prim) {
  throw Error(ErrorCode::UnsupportedPrimitive,
              std::string(to_string(s.primitives[prim].type())) + " '" + s.primitives[prim].id +
                  "' is not handled by the solver");
}

/// Distinct primitives referenced by a constraint, in first-use order.
std::vector<int> operand_primitives(const Constraint& c) {
  std::vector<int> prims;
  for (const auto& ref : c.locals)
    if (std::find(prims.begin(), prims.end(), ref.primitive) == prims.end()) prims.push_back(ref.primitive);
  return prims;
}

/// Evaluates one constraint. `value(prim)` yields a pointer to that
/// primitive's solver variables; with T = AD the caller seeds derivatives.
template <class T, class ParamFn>
std::vector<T> eval_constraint(const Constraint& c, const Sketch& s, const std::vector<int>& prims,
                               ParamFn&& values, int& branch) {
  if (is_external(c.type)) detail::unsupported(c, "external constraint");
  std::vector<Geo<T>> primGeo;
  primGeo.reserve(prims.size());
  for (int p : prims) {
    if (p < 0 || p >= static_cast<int>(s.primitives.size()))
      throw Error(ErrorCode::DanglingReference, "constraint refers to missing primitive");
    if (!is_solver_supported(s.primitives[p].type())) unsupported_primitive(s, p);
    primGeo.push_back(make_geo<T>(s.primitives[p].type(), values(p), clockwise_of(s.primitives[p])));
  }
  std::vector<Geo<T>> operands;
  operands.reserve(c.locals.size());
  for (const auto& ref : c.locals) {
    const auto k = std::find(prims.begin(), prims.end(), ref.primitive) - prims.begin();
    operands.push_back(detail::select(primGeo[k], ref.sel));
  }
  std::vector<T> out;
  detail::constraint_residuals<T>(c, operands, branch, out);
  return out;
}

}  // namespace

bool is_solver_supported(PrimitiveType t) {
  return t == PrimitiveType::Point || t == PrimitiveType::Line || t == PrimitiveType::Circle ||
         t == PrimitiveType::Arc;
}

std::vector<double> residuals(const Constraint& c, const Sketch& s) {
  const auto prims = operand_primitives(c);
  std::vector<std::vector<double>> values(prims.size());
  for (std::size_t i = 0; i < prims.size(); ++i) {
    const int p = prims[i];
    if (p < 0 || p >= static_cast<int>(s.primitives.size()))
      throw Error(ErrorCode::DanglingReference, "constraint refers to missing primitive");
    if (!is_solver_supported(s.primitives[p].type())) unsupported_primitive(s, p);
    append_params(s.primitives[p], values[i]);
  }
  int branch = -1;
  return eval_constraint<double>(
      c, s, prims,
      [&](int p) { return values[std::find(prims.begin(), prims.end(), p) - prims.begin()].data(); }, branch);
}

int residual_dimension(const Constraint& c, const Sketch& s) {
  return static_cast<int>(residuals(c, s).size());
}

bool is_satisfied(const Constraint& c, const Sketch& s, double tol) {
  for (double r : residuals(c, s))
    if (!(std::abs(r) <= tol)) return false;
  return true;
}

// ---------------------------------------------------------------------------

ConstraintSystem::ConstraintSystem(const Sketch& s, const std::set<int>& fixed, bool skipUnsupported)
    : sketch_(&s) {
  blocks_.resize(s.primitives.size());
  int freeCount = 0;
  for (std::size_t i = 0; i < s.primitives.size(); ++i) {
    const auto type = s.primitives[i].type();
    if (!is_solver_supported(type)) continue;
    auto& b = blocks_[i];
    b.paramOffset = static_cast<int>(params_.size());
    b.size = param_count(type);
    append_params(s.primitives[i], params_);
    if (!fixed.contains(static_cast<int>(i))) {
      b.freeOffset = freeCount;
      freeCount += b.size;
    }
  }
  x0_.resize(freeCount);
  for (const auto& b : blocks_)
    if (b.freeOffset >= 0)
      for (int j = 0; j < b.size; ++j) x0_[b.freeOffset + j] = params_[b.paramOffset + j];

  branches_.assign(s.constraints.size(), -1);
  for (std::size_t ci = 0; ci < s.constraints.size(); ++ci) {
    const auto& c = s.constraints[ci];
    try {
      const auto prims = operand_primitives(c);
      // Sticky branch selection happens here, at the input geometry.
      const auto r = eval_constraint<double>(
          c, s, prims, [&](int p) { return params_.data() + blocks_[p].paramOffset; }, branches_[ci]);
      active_.push_back(static_cast<int>(ci));
      rowOffset_.push_back(residualCount_);
      rowCount_.push_back(static_cast<int>(r.size()));
      residualCount_ += static_cast<int>(r.size());
    } catch (const Error& e) {
      const bool skippable =
          e.code() == ErrorCode::UnsupportedConstraint || e.code() == ErrorCode::UnsupportedPrimitive;
      if (!(skipUnsupported && skippable)) throw;
    }
  }
}

std::pair<int, int> ConstraintSystem::slice(int primitive) const {
  const auto& b = blocks_.at(primitive);
  return {b.freeOffset, b.size};
}

void ConstraintSystem::assemble(const Eigen::VectorXd& x, std::vector<double>& params) const {
  params = params_;
  for (const auto& b : blocks_)
    if (b.freeOffset >= 0)
      for (int j = 0; j < b.size; ++j) params[b.paramOffset + j] = x[b.freeOffset + j];
}

void ConstraintSystem::evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* r, Eigen::MatrixXd* jac) const {
  std::vector<double> params;
  assemble(x, params);
  if (r) r->resize(residualCount_);
  if (jac) jac->setZero(residualCount_, x.size());
  const Sketch& s = *sketch_;

  for (std::size_t k = 0; k < active_.size(); ++k) {
    const auto& c = s.constraints[active_[k]];
    int branch = branches_[active_[k]];
    const auto prims = operand_primitives(c);
    if (!jac) {
      const auto vals = eval_constraint<double>(
          c, s, prims, [&](int p) { return params.data() + blocks_[p].paramOffset; }, branch);
      for (std::size_t i = 0; i < vals.size(); ++i) (*r)[rowOffset_[k] + i] = vals[i];
      continue;
    }
    // Seed one derivative direction per local variable.
    std::vector<int> localOffset(prims.size());
    int nloc = 0;
    for (std::size_t i = 0; i < prims.size(); ++i) {
      localOffset[i] = nloc;
      nloc += blocks_[prims[i]].size;
    }
    std::vector<AD> vars(nloc);
    for (std::size_t i = 0; i < prims.size(); ++i) {
      const auto& b = blocks_[prims[i]];
      for (int j = 0; j < b.size; ++j)
        vars[localOffset[i] + j] = AD(params[b.paramOffset + j], nloc, localOffset[i] + j);
    }
    const auto vals = eval_constraint<AD>(
        c, s, prims,
        [&](int p) { return vars.data() + localOffset[std::find(prims.begin(), prims.end(), p) - prims.begin()]; },
        branch);
    for (std::size_t row = 0; row < vals.size(); ++row) {
      const int R = rowOffset_[k] + static_cast<int>(row);
      if (r) (*r)[R] = vals[row].value();
      const auto& d = vals[row].derivatives();
      if (d.size() == 0) continue;
      for (std::size_t i = 0; i < prims.size(); ++i) {
        const auto& b = blocks_[prims[i]];
        if (b.freeOffset < 0) continue;
        for (int j = 0; j < b.size; ++j) (*jac)(R, b.freeOffset + j) += d[localOffset[i] + j];
      }
    }
  }
}

Eigen::VectorXd ConstraintSystem::residual_vector(const Eigen::VectorXd& x) const {
  Eigen::VectorXd r;
  evaluate(x, &r, nullptr);
  return r;
}

std::vector<std::vector<double>> ConstraintSystem::per_constraint(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd r = residual_vector(x);
  std::vector<std::vector<double>> out(sketch_->constraints.size());
  for (std::size_t k = 0; k < active_.size(); ++k)
    out[active_[k]].assign(r.data() + rowOffset_[k], r.data() + rowOffset_[k] + rowCount_[k]);
  return out;
}

std::vector<double> ConstraintSystem::variables_of(int primitive, const StandardPrimitive& target) const {
  const auto& orig = sketch_->primitives.at(primitive);
  if (type_of(target) != orig.type())
    throw Error(ErrorCode::DegenerateGeometry, "edit target type differs from primitive");
  Primitive p = orig;
  p.params = from_standard_like(target, orig.params);
  std::vector<double> out;
  append_params(p, out);
  if (orig.type() == PrimitiveType::Arc) {
    // Keep angles on the same turn as the current variables.
    const auto& b = blocks_[primitive];
    for (int j = 3; j < 5; ++j) {
      const double cur = params_[b.paramOffset + j];
      out[j] = cur + std::remainder(out[j] - cur, 2.0 * std::numbers::pi);
    }
  }
  return out;
}

Sketch ConstraintSystem::write_back(const Eigen::VectorXd& x) const {
  Sketch out = *sketch_;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    if (b.freeOffset < 0) continue;
    const double* v = x.data() + b.freeOffset;
    bool changed = false;
    for (int j = 0; j < b.size; ++j) changed |= v[j] != x0_[b.freeOffset + j];
    if (!changed) continue;
    auto& prim = out.primitives[i];
    StandardPrimitive sp;
    switch (prim.type()) {
      case PrimitiveType::Point: sp = StdPoint{{v[0], v[1]}}; break;
      case PrimitiveType::Line: sp = StdLine{{v[0], v[1]}, {v[2], v[3]}}; break;
      case PrimitiveType::Circle: sp = StdCircle{{v[0], v[1]}, v[2]}; break;
      case PrimitiveType::Arc: {
        const Vec2 c{v[0], v[1]};
        sp = StdArc{c, v[2], c + Vec2{std::cos(v[3]), std::sin(v[3])} * v[2],
                    c + Vec2{std::cos(v[4]), std::sin(v[4])} * v[2], clockwise_of(prim)};
        break;
      }
      default: continue;
    }
    prim.params = from_standard_like(sp, prim.params);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

double max_abs(const Eigen::VectorXd& r) { return r.size() == 0 ? 0.0 : r.lpNorm<Eigen::Infinity>(); }

struct Anchors {
  Eigen::VectorXd weight;
  Eigen::VectorXd target;
};

/// Levenberg-Marquardt on |r(x)|^2 + sum w (x - t)^2 with fixed anchors.
void pull_phase(const ConstraintSystem& sys, Eigen::VectorXd& x, const Anchors& anchors, const SolveOptions& o,
                int& iterations, std::vector<TracePoint>& trace) {
  const auto n = x.size();
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  sys.evaluate(x, &r, &J);
  auto objective = [&](const Eigen::VectorXd& res, const Eigen::VectorXd& at) {
    return res.squaredNorm() + (anchors.weight.array() * (at - anchors.target).array().square()).sum();
  };
  double F = objective(r, x);
  double mu = o.dampingInit;
  while (iterations < o.maxIterations) {
    Eigen::MatrixXd H = J.transpose() * J;
    H.diagonal() += anchors.weight + Eigen::VectorXd::Constant(n, mu);
    const Eigen::VectorXd g =
        J.transpose() * r + (anchors.weight.array() * (x - anchors.target).array()).matrix();
    if (g.lpNorm<Eigen::Infinity>() < 1e-15) break;
    const Eigen::VectorXd step = -H.ldlt().solve(g);
    ++iterations;
    const Eigen::VectorXd xn = x + step;
    Eigen::VectorXd rn = sys.residual_vector(xn);
    const double Fn = finite(step) && finite(rn) ? objective(rn, xn) : std::numeric_limits<double>::infinity();
    if (Fn < F) {
      const double gain = F - Fn;
      x = xn;
      F = Fn;
      trace.push_back({0, F});
      mu = std::max(mu / 10.0, 1e-15);
      if (gain <= 1e-14 * F || step.lpNorm<Eigen::Infinity>() < 1e-14) break;
      sys.evaluate(x, &r, &J);
    } else {
      mu *= 10.0;
      if (mu > 1e12) break;
    }
  }
}

/// Proximal Levenberg-Marquardt on |r(x)|^2 + lambda |x - x_k|^2, the anchor
/// moving to each accepted iterate; drives r to zero near the start point.
bool project_phase(const ConstraintSystem& sys, Eigen::VectorXd& x, const SolveOptions& o, int& iterations,
                   std::vector<TracePoint>& trace) {
  const auto n = x.size();
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  sys.evaluate(x, &r, &J);
  double F = r.squaredNorm();
  double mu = o.dampingInit;
  while (max_abs(r) > o.residualTolerance && iterations < o.maxIterations) {
    Eigen::MatrixXd H = J.transpose() * J;
    H.diagonal() += Eigen::VectorXd::Constant(n, o.anchorWeight + mu);
    const Eigen::VectorXd g = J.transpose() * r;
    const Eigen::VectorXd step = -H.ldlt().solve(g);
    ++iterations;
    const Eigen::VectorXd xn = x + step;
    Eigen::VectorXd rn = sys.residual_vector(xn);
    const double Fn = finite(step) && finite(rn) ? rn.squaredNorm() + o.anchorWeight * step.squaredNorm()
                                                 : std::numeric_limits<double>::infinity();
    if (Fn < F) {
      x = xn;
      sys.evaluate(x, &r, &J);
      F = r.squaredNorm();
      trace.push_back({1, F});
      mu = std::max(mu / 10.0, 1e-15);
    } else {
      mu *= 10.0;
      if (mu > 1e12) break;
    }
  }
  return max_abs(r) <= o.residualTolerance;
}

SolveResult run_solver(const Sketch& s, const std::set<int>& fixed, std::span<const Edit> edits,
                       const SolveOptions& o) {
  ConstraintSystem sys(s, fixed, o.skipUnsupported);
  Eigen::VectorXd x = sys.initial();
  SolveResult result;

  if (!edits.empty() && x.size() > 0) {
    Anchors anchors{Eigen::VectorXd::Constant(x.size(), o.anchorWeight), x};
    for (const auto& e : edits) {
      const auto [offset, size] = sys.slice(e.primitive);
      if (offset < 0) continue;
      const auto target = sys.variables_of(e.primitive, e.target);
      for (int j = 0; j < size; ++j) {
        anchors.weight[offset + j] = e.stiffness;
        anchors.target[offset + j] = target[j];
      }
    }
    pull_phase(sys, x, anchors, o, result.iterations, result.objectiveTrace);
  }
  result.converged = project_phase(sys, x, o, result.iterations, result.objectiveTrace);
  result.perConstraintResiduals = sys.per_constraint(x);
  result.maxAbsResidual = max_abs(sys.residual_vector(x));
  result.solvedSketch = sys.write_back(x);
  return result;
}

}  // namespace

SolveResult solve(const Sketch& s, const std::set<int>& fixed, const SolveOptions& opts) {
  return run_solver(s, fixed, {}, opts);
}

SolveResult edit_propagate(const Sketch& s, std::span<const Edit> edits, const SolveOptions& opts,
                           const std::set<int>& fixed) {
  return run_solver(s, fixed, edits, opts);
}

}  // namespace sg
