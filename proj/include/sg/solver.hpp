#pragma once

#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sg/model.hpp"

namespace sg {

struct SolveOptions {
  double residualTolerance = 1e-8;  // meters / radians
  int maxIterations = 200;
  double anchorWeight = 1e-4;  // pull of every free variable toward its input value
  double dampingInit = 1e-3;
  /// Drop constraints outside the residual catalog instead of throwing.
  bool skipUnsupported = false;
};

struct TracePoint {
  int phase = 0;  // 0 = edit pull, 1 = projection onto the constraint set
  double objective = 0.0;
};

struct SolveResult {
  Sketch solvedSketch;
  bool converged = false;
  int iterations = 0;
  double maxAbsResidual = 0.0;
  std::vector<std::vector<double>> perConstraintResiduals;
  /// Objective after every accepted step.
  std::vector<TracePoint> objectiveTrace;
};

bool is_solver_supported(PrimitiveType t);

/// Residual vector of one constraint under the catalog; zero iff satisfied.
/// Throws Error{UnsupportedPrimitive | UnsupportedConstraint}.
std::vector<double> residuals(const Constraint& c, const Sketch& s);

/// Number of residual components (equals the DOF the constraint removes).
int residual_dimension(const Constraint& c, const Sketch& s);

bool is_satisfied(const Constraint& c, const Sketch& s, double tol);

/// Free parameters of a sketch in the solver's minimal parameterization:
/// Point (x, y), Line (x0, y0, x1, y1), Circle (cx, cy, r),
/// Arc (cx, cy, r, start angle, end angle), angles absolute from +x.
class ConstraintSystem {
 public:
  ConstraintSystem(const Sketch& s, const std::set<int>& fixed = {}, bool skipUnsupported = false);

  int variable_count() const { return static_cast<int>(x0_.size()); }
  int residual_count() const { return residualCount_; }
  const Eigen::VectorXd& initial() const { return x0_; }

  /// Free-variable slice of a primitive: (offset, size); offset -1 if fixed.
  std::pair<int, int> slice(int primitive) const;

  void evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* r, Eigen::MatrixXd* jac) const;
  Eigen::VectorXd residual_vector(const Eigen::VectorXd& x) const;
  std::vector<std::vector<double>> per_constraint(const Eigen::VectorXd& x) const;

  /// Variables of a standard primitive in this system's layout.
  std::vector<double> variables_of(int primitive, const StandardPrimitive& target) const;

  Sketch write_back(const Eigen::VectorXd& x) const;

  const std::vector<int>& active_constraints() const { return active_; }
  /// Residual rows (offset, count) of the k-th active constraint.
  std::pair<int, int> rows(int k) const { return {rowOffset_[k], rowCount_[k]}; }

 private:
  struct Block {
    int paramOffset = -1;  // into params_
    int size = 0;
    int freeOffset = -1;  // into the free vector
  };

  void assemble(const Eigen::VectorXd& x, std::vector<double>& params) const;

  const Sketch* sketch_;
  std::vector<Block> blocks_;
  std::vector<double> params_;  // all supported primitives, fixed included
  Eigen::VectorXd x0_;
  std::vector<int> active_;  // constraint indices in the system
  std::vector<int> rowOffset_;
  std::vector<int> rowCount_;
  std::vector<int> branches_;
  int residualCount_ = 0;
};

SolveResult solve(const Sketch& s, const std::set<int>& fixed = {}, const SolveOptions& opts = {});

struct Edit {
  int primitive = 0;
  StandardPrimitive target;
  double stiffness = 1e3;
};

/// Pulls edited primitives toward their targets, then re-imposes every
/// constraint exactly.
SolveResult edit_propagate(const Sketch& s, std::span<const Edit> edits, const SolveOptions& opts = {},
                           const std::set<int>& fixed = {});

}  // namespace sg
