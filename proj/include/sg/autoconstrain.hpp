#pragma once

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sg/model.hpp"

namespace sg {

struct Candidate {
  Constraint constraint;
  double score = 0.0;  // max |residual| at the input geometry
};

/// Satisfied constraints found by exhaustive instantiation; deduplicated.
struct CandidateSet {
  std::vector<Candidate> items;
  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
};

struct CandidateOptions {
  /// Point-pair and point/line Distance candidates are kept only below this
  /// percentile of the measured pair distances, or when another candidate
  /// already relates the pair. 100 keeps all.
  double distancePercentile = 100.0;
  bool snapToCommonValues = true;
};

/// Types instantiated by enumerate_candidates.
bool is_enumerable(ConstraintType t);

CandidateSet enumerate_candidates(const Sketch& s, double tol = 1e-6, const CandidateOptions& opts = {});

/// Common dimension values tried before the measured value.
std::span<const Quantity> common_lengths();
std::span<const double> common_angles();

/// Measured value snapped to the common table when within tol.
Quantity snap_length(double meters, double tol);

struct RankingPolicy {
  /// Priority tiers, highest first. Within a tier: smaller residual, then
  /// fewer primitives touched, then larger residual dimension, then position
  /// in the tier, then member ids.
  std::vector<std::vector<ConstraintType>> tiers;
  /// Tier for Horizontal/Vertical between two points; -1 keeps the type's tier.
  int pointAlignmentTier = -1;

  static RankingPolicy default_policy();
  std::optional<int> tier_of(ConstraintType t) const;
  std::optional<int> tier_of(const Constraint& c) const;
};

/// Greedy selection from the candidate set. A candidate is taken when it
/// removes at least one DOF the already selected set does not (rank of the
/// stacked constraint Jacobian grows) and the remaining DOF stay at or above
/// dofTarget.
std::vector<Constraint> infer_constraints(const Sketch& s, const RankingPolicy& policy = RankingPolicy::default_policy(),
                                          int dofTarget = 3, double tol = 1e-6,
                                          const CandidateOptions& opts = {});

/// Identity used when comparing predicted and ground-truth constraints:
/// type, unordered members, lengths to 1e-6 m, angles to 1e-4 deg, direction.
struct ConstraintKey {
  ConstraintType type = ConstraintType::Coincident;
  std::vector<EntityRef> members;
  std::optional<long long> length;
  std::optional<long long> angle;
  std::optional<Direction> direction;

  static ConstraintKey of(const Constraint& c);
  auto operator<=>(const ConstraintKey&) const = default;
};

struct EvalMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool operator==(const EvalMetrics&) const = default;
};

/// Throws Error{EmptyGroundTruth} when groundTruth is empty.
EvalMetrics evaluate_prediction(std::span<const Constraint> predicted, std::span<const Constraint> groundTruth);

/// Fraction of ground-truth constraints of enumerable types present in the
/// candidate set. 1 when there are none.
double candidate_recall(const CandidateSet& candidates, std::span<const Constraint> groundTruth);

/// Unweighted mean over sketches, aggregated in sketch id order.
class EvalAccumulator {
 public:
  /// Returns false (and counts the sketch as skipped) on empty ground truth.
  bool add(const std::string& sketchId, std::span<const Constraint> predicted, std::span<const Constraint> groundTruth);
  void merge(const EvalAccumulator& other);

  EvalMetrics mean() const;
  int evaluated() const { return static_cast<int>(perSketch_.size()); }
  int skipped() const { return skipped_; }
  const std::map<std::string, EvalMetrics>& per_sketch() const { return perSketch_; }

 private:
  std::map<std::string, EvalMetrics> perSketch_;
  int skipped_ = 0;
};

}  // namespace sg
