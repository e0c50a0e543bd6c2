#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sg/compress.hpp"
#include "sg/graph.hpp"
#include "sg/model.hpp"

namespace sg {

/// Constraint parameters carried by an edge-insertion step.
struct EdgeParams {
  std::optional<double> lengthMeters;
  std::optional<double> angleDegrees;
  std::optional<Direction> direction;
  std::optional<HalfSpace> halfSpace0;
  std::optional<HalfSpace> halfSpace1;
  std::optional<bool> aligned;
  std::optional<bool> clockwise;

  static EdgeParams of(const Constraint& c);
  bool operator==(const EdgeParams&) const = default;
};

struct AddNode {
  int primitive = 0;
  PrimitiveType type = PrimitiveType::Point;
  bool isConstruction = false;
  bool operator==(const AddNode&) const = default;
};

struct AddEdge {
  int constraint = 0;
  ConstraintType type = ConstraintType::Coincident;
  std::vector<int> members;  // graph node ids
  EdgeParams params;
  bool operator==(const AddEdge&) const = default;
};

struct Stop {
  bool operator==(const Stop&) const = default;
};

using ConstructionOp = std::variant<AddNode, AddEdge, Stop>;

struct ConstructionSequence {
  std::vector<ConstructionOp> ops;
  bool operator==(const ConstructionSequence&) const = default;
};

/// Primitives in insertion order, each constraint right after the last of
/// its member primitives; ties keep the standalone constraint order.
ConstructionSequence canonical_sequence(const Sketch& s, const ConstraintGraph& g);

/// All primitives, then all constraints in standalone order.
ConstructionSequence constraints_last_sequence(const Sketch& s, const ConstraintGraph& g);

std::string describe(const ConstructionSequence& seq);

// ---------------------------------------------------------------------------
// Tokens

/// Collects parameter-value frequencies for vocabulary construction.
class VocabularyBuilder {
 public:
  void add(const ConstructionSequence& seq);
  void add_length(double meters);
  void add_angle(double degrees);
  void merge(const VocabularyBuilder& other);

  const std::map<std::int64_t, long>& length_counts() const { return lengths_; }
  const std::map<std::int64_t, long>& angle_counts() const { return angles_; }

 private:
  std::map<std::int64_t, long> lengths_;  // key: nanometers
  std::map<std::int64_t, long> angles_;   // key: micro-degrees
};

struct VocabularyOptions {
  int topLengths = 300;
  int topAngles = 300;
  int lengthBins = 256;  // log-uniform over [minLength, maxLength)
  double minLength = 1e-6;
  double maxLength = 1e3;
  int angleBins = 1440;  // uniform over [-360, 360)
  int maxNodes = 1024;
};

/// Integer layout for construction sequences. Ranges are disjoint, so every
/// token identifies its role:
///   stop | node type x construction flag | edge type | node reference |
///   direction | halfSpace0 | halfSpace1 | aligned | clockwise |
///   frequent lengths | length bins | frequent angles | angle bins
class TokenVocabulary {
 public:
  TokenVocabulary() : TokenVocabulary(VocabularyBuilder{}, VocabularyOptions{}) {}
  TokenVocabulary(const VocabularyBuilder& counts, const VocabularyOptions& opts);

  int size() const { return angleBinBase_ + opts_.angleBins; }
  int stop_token() const { return 0; }
  int node_token(PrimitiveType t, bool construction) const {
    return 1 + 2 * static_cast<int>(t) + (construction ? 1 : 0);
  }
  int edge_token(ConstraintType t) const { return 13 + static_cast<int>(t); }

  std::vector<int> tokenize(const ConstructionSequence& seq) const;
  ConstructionSequence detokenize(std::span<const int> tokens) const;

  /// Parameter values as they survive a tokenize/detokenize round trip.
  double quantize_length(double meters) const;
  double quantize_angle(double degrees) const;

  const VocabularyOptions& options() const { return opts_; }
  const std::vector<double>& frequent_lengths() const { return lengths_; }
  const std::vector<double>& frequent_angles() const { return angles_; }

  std::string to_json() const;
  static TokenVocabulary from_json(const std::string& text);

 private:
  TokenVocabulary(VocabularyOptions opts, std::vector<double> lengths, std::vector<double> angles);
  void layout();
  int length_token(double meters) const;
  int angle_token(double degrees) const;
  double length_of(int token) const;
  double angle_of(int token) const;

  VocabularyOptions opts_;
  std::vector<double> lengths_;  // meters, most frequent first
  std::vector<double> angles_;   // degrees
  int nodeRefBase_ = 0, directionBase_ = 0, hs0Base_ = 0, hs1Base_ = 0, alignedBase_ = 0, clockwiseBase_ = 0,
      lengthBase_ = 0, lengthBinBase_ = 0, angleBase_ = 0, angleBinBase_ = 0;
};

/// Convenience: the vocabulary-quantized version of a sequence.
ConstructionSequence quantize(const ConstructionSequence& seq, const TokenVocabulary& vocab);

/// "12 3 45 0": one sketch per line in exported token streams.
std::string format_token_line(std::span<const int> tokens);
std::vector<int> parse_token_line(const std::string& line);

/// Little-endian fixed-width packing of concatenated token streams.
std::vector<std::uint8_t> pack_tokens(std::span<const std::vector<int>> sketches, std::size_t count,
                                      int bytesPerToken);

/// Bits per sketch estimated as (s_n2 - s_n1) / (n2 - n1), where s_n is the
/// compressed size in bits of the first n sketches concatenated.
double entropy_rate_estimate(std::span<const std::vector<int>> corpus, std::size_t n1, std::size_t n2,
                             const Compressor& codec, int bytesPerToken = 2);

}  // namespace sg
