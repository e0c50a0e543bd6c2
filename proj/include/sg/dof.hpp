#pragma once

#include <span>
#include <string>
#include <vector>

#include "sg/model.hpp"

namespace sg {

struct DofReport {
  int totalDof = 0;
  int removedDof = 0;
  int remainingDof = 0;  // max(0, total - removed)
  bool overConstrained = false;
  /// Constraints outside the residual catalog; they remove nothing.
  int uncountedConstraints = 0;

  bool operator==(const DofReport&) const = default;
};

/// DOF removed by a constraint, defined as its residual dimension. Returns 0
/// for constraints the solver cannot express.
int constraint_dof_removed(const Constraint& c, const Sketch& s);
bool is_dof_counted(const Constraint& c, const Sketch& s);

DofReport sketch_dof_report(const Sketch& s);

struct DofSample {
  double total = 0.0;
  double removed = 0.0;
};

/// Pearson correlation between total and removed DOF across sketches.
/// Throws DegenerateVariance when either series is constant.
double dof_correlation(std::span<const DofSample> samples);
double dof_correlation(std::span<const Sketch> corpus);

/// "id\ttotal\tremoved\tremaining"
std::string format_dof_line(const std::string& sketchId, const DofReport& r);

}  // namespace sg
