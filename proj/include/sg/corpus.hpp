#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sg/model.hpp"

namespace sg {

struct MalformedRecord {
  std::size_t line = 0;  // 1-based
  std::string cause;
};

/// One JSON object per line:
///   {"id": ..., "primitives": [{"id", "type", "isConstruction", <params>}],
///    "constraints": [{"type", "local0", ..., <params>}]}
/// Parameter names follow the Onshape parameterization (pntX, startParam,
/// halfSpace0, ...). Sub-primitive references are written "<id>.start".
/// With keepRaw, the record text is kept on the sketch and its elements so
/// that format_record reproduces field order and unknown fields.
Sketch parse_record(const std::string& line, bool keepRaw = true);
std::string format_record(const Sketch& s);

/// Streams sketches from a corpus file. Malformed lines are reported and
/// skipped.
class CorpusReader {
 public:
  /// Throws Error{Io} if the file cannot be opened.
  explicit CorpusReader(const std::string& path, bool keepRaw = true);

  std::optional<Sketch> next();
  /// Record (line) number of the sketch last returned.
  std::size_t line() const { return line_; }
  const std::vector<MalformedRecord>& errors() const { return errors_; }

  void on_error(std::function<void(const MalformedRecord&)> f) { onError_ = std::move(f); }

 private:
  std::ifstream in_;
  bool keepRaw_;
  std::size_t line_ = 0;
  std::vector<MalformedRecord> errors_;
  std::function<void(const MalformedRecord&)> onError_;
};

struct ParsedCorpus {
  std::vector<Sketch> sketches;
  std::vector<MalformedRecord> errors;
};

ParsedCorpus parse_corpus(const std::string& path);

class CorpusWriter {
 public:
  explicit CorpusWriter(const std::string& path);
  void write(const Sketch& s);
  std::size_t count() const { return count_; }
  void close();

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t count_ = 0;
};

std::size_t write_corpus(const std::vector<Sketch>& sketches, const std::string& path);

struct FilterOptions {
  std::size_t minPrimitives = 1;
  std::size_t minConstraints = 1;
  std::size_t maxPrimitives = std::numeric_limits<std::size_t>::max();
  std::optional<std::set<PrimitiveType>> allowedTypes;
};

bool passes_filter(const Sketch& s, const FilterOptions& o);

struct FilterCount {
  std::size_t kept = 0;
  std::size_t dropped = 0;
};

FilterCount filter_corpus(const std::string& inPath, const std::string& outPath, const FilterOptions& o,
                          std::vector<MalformedRecord>* errors = nullptr);

/// Position of a sketch id in the seeded shuffle.
std::uint64_t split_hash(const std::string& id, std::uint64_t seed);

struct SplitCount {
  std::size_t train = 0;
  std::size_t test = 0;
};

/// The testCount sketches with the smallest seeded id hash go to the test
/// file; both outputs keep input order. Throws Error{InsufficientCorpus}.
SplitCount split_corpus(const std::string& inPath, std::size_t testCount, std::uint64_t seed,
                        const std::string& trainPath, const std::string& testPath);

}  // namespace sg
