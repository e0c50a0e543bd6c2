#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sg/model.hpp"

namespace sg {

struct FrequencyRow {
  std::string key;
  long count = 0;
  double percent = 0.0;
};

struct PercentileRow {
  int primitives = 0;
  long sketches = 0;
  std::array<int, 4> constraints{};  // at kStatsPercentiles
};

inline constexpr std::array<int, 4> kStatsPercentiles = {50, 69, 84, 93};

struct ValueRow {
  double value = 0.0;  // meters or degrees
  std::string label;   // lengths in the unit needing the fewest digits
  long count = 0;
  double percent = 0.0;
  double cumulative = 0.0;  // coverage fraction at this rank
};

struct StatsReport {
  long sketches = 0;
  long primitives = 0;
  long constraints = 0;
  std::vector<FrequencyRow> primitiveTypes;
  std::vector<FrequencyRow> constraintTypes;
  std::map<int, long> primitiveCountHistogram;
  std::map<int, long> constraintCountHistogram;
  std::vector<PercentileRow> constraintsVsPrimitives;
  std::vector<ValueRow> lengths;  // most frequent first
  std::vector<ValueRow> angles;
};

/// Single-pass counters. merge is commutative and associative, so any
/// partition of the stream gives the same report.
class StatsAccumulator {
 public:
  void add(const Sketch& s);
  void merge(const StatsAccumulator& other);
  StatsReport report() const;

  bool operator==(const StatsAccumulator&) const = default;

 private:
  long sketches_ = 0;
  std::map<PrimitiveType, long> primitiveTypes_;
  std::map<ConstraintType, long> constraintTypes_;
  std::map<int, std::map<int, long>> sizes_;  // primitives -> constraints -> sketches
  std::map<std::int64_t, long> lengths_;      // nanometers
  std::map<std::int64_t, long> angles_;       // micro-degrees
};

/// Human-readable report; tables are truncated to `topValues` rows.
std::string format_stats_text(const StatsReport& r, std::size_t topValues = 10);

/// Machine-readable tables, each comma separated with a header row, keyed
/// by file stem.
std::map<std::string, std::string> stats_csv_tables(const StatsReport& r);

}  // namespace sg
