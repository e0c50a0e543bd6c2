#include "sg/dof.hpp"

#include <cmath>

#include "sg/solver.hpp"

namespace sg {

namespace {

std::optional<int> counted_dimension(const Constraint& c, const Sketch& s) {
  if (validate_constraint(c, s)) return std::nullopt;
  try {
    return residual_dimension(c, s);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnsupportedConstraint || e.code() == ErrorCode::UnsupportedPrimitive)
      return std::nullopt;
    throw;
  }
}

}  // namespace

int constraint_dof_removed(const Constraint& c, const Sketch& s) { return counted_dimension(c, s).value_or(0); }

bool is_dof_counted(const Constraint& c, const Sketch& s) { return counted_dimension(c, s).has_value(); }

DofReport sketch_dof_report(const Sketch& s) {
  DofReport r;
  for (const auto& p : s.primitives) r.totalDof += dof_of_primitive(p);
  for (const auto& c : s.constraints) {
    if (auto dim = counted_dimension(c, s))
      r.removedDof += *dim;
    else
      ++r.uncountedConstraints;
  }
  r.overConstrained = r.removedDof > r.totalDof;
  r.remainingDof = r.overConstrained ? 0 : r.totalDof - r.removedDof;
  return r;
}

double dof_correlation(std::span<const DofSample> samples) {
  if (samples.size() < 2) throw Error(ErrorCode::DegenerateVariance, "need at least two sketches");
  const double n = static_cast<double>(samples.size());
  double mt = 0.0, mr = 0.0;
  for (const auto& s : samples) {
    mt += s.total;
    mr += s.removed;
  }
  mt /= n;
  mr /= n;
  double stt = 0.0, srr = 0.0, str = 0.0;
  for (const auto& s : samples) {
    stt += (s.total - mt) * (s.total - mt);
    srr += (s.removed - mr) * (s.removed - mr);
    str += (s.total - mt) * (s.removed - mr);
  }
  if (stt == 0.0 || srr == 0.0) throw Error(ErrorCode::DegenerateVariance, "constant DOF series");
  return str / std::sqrt(stt * srr);
}

double dof_correlation(std::span<const Sketch> corpus) {
  std::vector<DofSample> samples;
  samples.reserve(corpus.size());
  for (const auto& s : corpus) {
    const auto r = sketch_dof_report(s);
    samples.push_back({static_cast<double>(r.totalDof), static_cast<double>(r.removedDof)});
  }
  return dof_correlation(samples);
}

std::string format_dof_line(const std::string& sketchId, const DofReport& r) {
  return sketchId + "\t" + std::to_string(r.totalDof) + "\t" + std::to_string(r.removedDof) + "\t" +
         std::to_string(r.remainingDof);
}

}  // namespace sg
