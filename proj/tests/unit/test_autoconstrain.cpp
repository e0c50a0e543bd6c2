#include <doctest.h>

#include <algorithm>

#include "sg/autoconstrain.hpp"
#include "sg/dof.hpp"
#include "sg/solver.hpp"
#include "support.hpp"

using namespace sg;
using CT = ConstraintType;
using sgt::Builder;
using sgt::whole;

namespace {

bool has(const CandidateSet& c, CT type, std::vector<EntityRef> members, std::optional<double> meters = {}) {
  std::sort(members.begin(), members.end());
  return std::any_of(c.items.begin(), c.items.end(), [&](const Candidate& k) {
    auto m = k.constraint.locals;
    std::sort(m.begin(), m.end());
    if (k.constraint.type != type || m != members) return false;
    return !meters || (k.constraint.length && std::abs(k.constraint.length->meters() - *meters) < 1e-12);
  });
}

}  // namespace

TEST_CASE("candidate enumeration") {
  Builder b;
  const int l0 = b.line(0, 0, 1, 0), l1 = b.line(2, 0, 3, 0);
  auto c = enumerate_candidates(b.s);
  CHECK(has(c, CT::Horizontal, {whole(l0)}));
  CHECK(has(c, CT::Horizontal, {whole(l1)}));
  CHECK(has(c, CT::Parallel, {whole(l0), whole(l1)}));
  CHECK(has(c, CT::Equal, {whole(l0), whole(l1)}));
  CHECK(has(c, CT::Coincident, {whole(l0), whole(l1)}));
  // Brute force: every candidate is satisfied.
  for (const auto& k : c.items) CHECK(sgt::max_abs(residuals(k.constraint, b.s)) <= 1e-6);

  Builder r;
  const int circ = r.circle(0, 0, 0.005);
  auto rc = enumerate_candidates(r.s);
  CHECK(has(rc, CT::Radius, {whole(circ)}, 0.005));
  CHECK(has(rc, CT::Diameter, {whole(circ)}, 0.010));

  CHECK(enumerate_candidates(Sketch{}).empty());
  CHECK(snap_length(0.00499999999, 1e-6).unit == LengthUnit::Millimeter);
}

TEST_CASE("greedy inference") {
  Builder g;
  g.point(0.0123, 0.771);
  g.point(0.4531, -0.2911);
  g.point(-0.3307, 0.1947);
  CandidateOptions noDistances;
  noDistances.distancePercentile = 0;
  CHECK(infer_constraints(g.s, RankingPolicy::default_policy(), 3, 1e-6, noDistances).empty());

  Builder r;
  const int s0 = r.line(0, 0, 0.02, 0), s1 = r.line(0.02, 0, 0.02, 0.01);
  auto total = sketch_dof_report(r.s).totalDof;
  CHECK(infer_constraints(r.s, RankingPolicy::default_policy(), total).empty());

  auto picked = infer_constraints(r.s);
  REQUIRE_FALSE(picked.empty());
  CHECK(picked.front().type == CT::Coincident);
  CHECK(picked.front().locals == std::vector{sgt::end(s0), sgt::start(s1)});
  Sketch with = r.s;
  with.constraints = picked;
  auto rep = sketch_dof_report(with);
  // H or V in the picked set already pins rotation.
  CHECK(rep.remainingDof >= 2);
  CHECK(RankingPolicy::default_policy().tier_of(CT::Horizontal) == 1);
  CHECK_FALSE(RankingPolicy::default_policy().tier_of(CT::Projected));
}

TEST_CASE("prediction metrics") {
  Builder b;
  const int l = b.line(0, 0, 1, 0), m = b.line(0, 1, 1, 1), n = b.line(0, 0, 0, 1);
  const Constraint e1{CT::Horizontal, {whole(l)}}, e2{CT::Parallel, {whole(l), whole(m)}},
      e3{CT::Vertical, {whole(n)}};
  const std::vector pred{e1, e3}, gt{e1, e2};
  CHECK(evaluate_prediction(pred, gt) == EvalMetrics{0.5, 0.5, 0.5});
  CHECK(evaluate_prediction(gt, gt) == EvalMetrics{1, 1, 1});
  CHECK(evaluate_prediction({}, gt) == EvalMetrics{0, 0, 0});
  CHECK_THROWS_AS(evaluate_prediction(gt, {}), Error);

  // Member order does not matter.
  const Constraint swapped{CT::Parallel, {whole(m), whole(l)}};
  CHECK(ConstraintKey::of(swapped) == ConstraintKey::of(e2));

  EvalAccumulator acc, other;
  CHECK(acc.add("a", pred, gt));
  CHECK_FALSE(acc.add("b", pred, {}));
  CHECK(other.add("c", gt, gt));
  acc.merge(other);
  CHECK(acc.evaluated() == 2);
  CHECK(acc.skipped() == 1);
  CHECK(acc.mean().f1 == doctest::Approx(0.75));
}
