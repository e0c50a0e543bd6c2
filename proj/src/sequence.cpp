#include "sg/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace sg {

EdgeParams EdgeParams::of(const Constraint& c) {
  EdgeParams p;
  if (c.length) p.lengthMeters = c.length->meters();
  p.angleDegrees = c.angle;
  p.direction = c.direction;
  p.halfSpace0 = c.halfSpace0;
  p.halfSpace1 = c.halfSpace1;
  p.aligned = c.aligned;
  p.clockwise = c.clockwise;
  return p;
}

namespace {

void check_graph(const Sketch& s, const ConstraintGraph& g) {
  if (g.primitive_count() != s.primitives.size())
    throw Error(ErrorCode::InconsistentSequence, "graph does not match sketch primitives");
  for (std::size_t ci = 0; ci < s.constraints.size(); ++ci) {
    const auto& e = g.edges().at(g.constraint_edge(static_cast<int>(ci)));
    if (e.constraint != static_cast<int>(ci))
      throw Error(ErrorCode::InconsistentSequence, "graph does not match sketch constraints");
  }
}

AddNode node_op(const Sketch& s, int i) {
  return {i, s.primitives[i].type(), s.primitives[i].isConstruction};
}

AddEdge edge_op(const Sketch& s, const ConstraintGraph& g, int ci) {
  const auto& e = g.edges()[g.constraint_edge(ci)];
  return {ci, s.constraints[ci].type, e.members, EdgeParams::of(s.constraints[ci])};
}

}  // namespace

ConstructionSequence canonical_sequence(const Sketch& s, const ConstraintGraph& g) {
  check_graph(s, g);
  const int n = static_cast<int>(s.primitives.size());
  std::vector<std::vector<int>> ready(n);
  for (int ci = 0; ci < static_cast<int>(s.constraints.size()); ++ci) {
    const auto prims = g.member_primitives(g.edges()[g.constraint_edge(ci)]);
    if (prims.empty() || prims.back() >= n)
      throw Error(ErrorCode::DanglingReference, "constraint " + std::to_string(ci) + " member never inserted");
    ready[prims.back()].push_back(ci);
  }
  ConstructionSequence seq;
  seq.ops.reserve(s.primitives.size() + s.constraints.size() + 1);
  for (int i = 0; i < n; ++i) {
    seq.ops.emplace_back(node_op(s, i));
    for (int ci : ready[i]) seq.ops.emplace_back(edge_op(s, g, ci));
  }
  seq.ops.emplace_back(Stop{});
  return seq;
}

ConstructionSequence constraints_last_sequence(const Sketch& s, const ConstraintGraph& g) {
  check_graph(s, g);
  ConstructionSequence seq;
  seq.ops.reserve(s.primitives.size() + s.constraints.size() + 1);
  for (int i = 0; i < static_cast<int>(s.primitives.size()); ++i) seq.ops.emplace_back(node_op(s, i));
  for (int ci = 0; ci < static_cast<int>(s.constraints.size()); ++ci) seq.ops.emplace_back(edge_op(s, g, ci));
  seq.ops.emplace_back(Stop{});
  return seq;
}

std::string describe(const ConstructionSequence& seq) {
  std::string out;
  for (const auto& op : seq.ops) {
    if (!out.empty()) out += ",";
    if (const auto* n = std::get_if<AddNode>(&op))
      out += "N" + std::to_string(n->primitive);
    else if (const auto* e = std::get_if<AddEdge>(&op))
      out += "E" + std::to_string(e->constraint);
    else
      out += "Stop";
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::int64_t length_key(double meters) { return std::llround(meters * 1e9); }
std::int64_t angle_key(double degrees) { return std::llround(degrees * 1e6); }

std::vector<double> top_values(const std::map<std::int64_t, long>& counts, int k, double unit) {
  std::vector<std::pair<std::int64_t, long>> v(counts.begin(), counts.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<double> out;
  for (int i = 0; i < k && i < static_cast<int>(v.size()); ++i) out.push_back(static_cast<double>(v[i].first) * unit);
  return out;
}

int index_of(const std::vector<double>& values, std::int64_t key, std::int64_t (*keyFn)(double)) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (keyFn(values[i]) == key) return static_cast<int>(i);
  return -1;
}

}  // namespace

void VocabularyBuilder::add(const ConstructionSequence& seq) {
  for (const auto& op : seq.ops) {
    const auto* e = std::get_if<AddEdge>(&op);
    if (!e) continue;
    if (e->params.lengthMeters) add_length(*e->params.lengthMeters);
    if (e->params.angleDegrees) add_angle(*e->params.angleDegrees);
  }
}

void VocabularyBuilder::add_length(double meters) { ++lengths_[length_key(meters)]; }
void VocabularyBuilder::add_angle(double degrees) { ++angles_[angle_key(degrees)]; }

void VocabularyBuilder::merge(const VocabularyBuilder& other) {
  for (const auto& [k, n] : other.lengths_) lengths_[k] += n;
  for (const auto& [k, n] : other.angles_) angles_[k] += n;
}

TokenVocabulary::TokenVocabulary(const VocabularyBuilder& counts, const VocabularyOptions& opts)
    : TokenVocabulary(opts, top_values(counts.length_counts(), opts.topLengths, 1e-9),
                      top_values(counts.angle_counts(), opts.topAngles, 1e-6)) {}

TokenVocabulary::TokenVocabulary(VocabularyOptions opts, std::vector<double> lengths, std::vector<double> angles)
    : opts_(opts), lengths_(std::move(lengths)), angles_(std::move(angles)) {
  layout();
}

void TokenVocabulary::layout() {
  nodeRefBase_ = 13 + kConstraintTypeCount;
  directionBase_ = nodeRefBase_ + opts_.maxNodes;
  hs0Base_ = directionBase_ + 3;
  hs1Base_ = hs0Base_ + 2;
  alignedBase_ = hs1Base_ + 2;
  clockwiseBase_ = alignedBase_ + 2;
  lengthBase_ = clockwiseBase_ + 2;
  lengthBinBase_ = lengthBase_ + static_cast<int>(lengths_.size());
  angleBase_ = lengthBinBase_ + opts_.lengthBins;
  angleBinBase_ = angleBase_ + static_cast<int>(angles_.size());
}

int TokenVocabulary::length_token(double meters) const {
  if (int i = index_of(lengths_, length_key(meters), length_key); i >= 0) return lengthBase_ + i;
  if (!(meters >= opts_.minLength && meters < opts_.maxLength))
    throw Error(ErrorCode::OutOfVocabulary, "length " + format_number(meters) + " m");
  const double w = std::log(opts_.maxLength / opts_.minLength) / opts_.lengthBins;
  const int bin = std::min(opts_.lengthBins - 1, static_cast<int>(std::log(meters / opts_.minLength) / w));
  return lengthBinBase_ + bin;
}

int TokenVocabulary::angle_token(double degrees) const {
  if (int i = index_of(angles_, angle_key(degrees), angle_key); i >= 0) return angleBase_ + i;
  if (!(degrees >= -360.0 && degrees < 360.0))
    throw Error(ErrorCode::OutOfVocabulary, "angle " + format_number(degrees) + " deg");
  const int bin = std::min(opts_.angleBins - 1, static_cast<int>((degrees + 360.0) / 720.0 * opts_.angleBins));
  return angleBinBase_ + bin;
}

double TokenVocabulary::length_of(int token) const {
  if (token < lengthBinBase_) return lengths_[token - lengthBase_];
  const double w = std::log(opts_.maxLength / opts_.minLength) / opts_.lengthBins;
  return opts_.minLength * std::exp((token - lengthBinBase_ + 0.5) * w);
}

double TokenVocabulary::angle_of(int token) const {
  if (token < angleBinBase_) return angles_[token - angleBase_];
  return -360.0 + (token - angleBinBase_ + 0.5) * 720.0 / opts_.angleBins;
}

double TokenVocabulary::quantize_length(double meters) const { return length_of(length_token(meters)); }
double TokenVocabulary::quantize_angle(double degrees) const { return angle_of(angle_token(degrees)); }

std::vector<int> TokenVocabulary::tokenize(const ConstructionSequence& seq) const {
  std::vector<int> out;
  out.reserve(seq.ops.size() * 3);
  for (const auto& op : seq.ops) {
    if (const auto* n = std::get_if<AddNode>(&op)) {
      out.push_back(node_token(n->type, n->isConstruction));
    } else if (const auto* e = std::get_if<AddEdge>(&op)) {
      out.push_back(edge_token(e->type));
      for (int m : e->members) {
        if (m < 0 || m >= opts_.maxNodes)
          throw Error(ErrorCode::OutOfVocabulary, "node reference " + std::to_string(m));
        out.push_back(nodeRefBase_ + m);
      }
      const auto& p = e->params;
      if (p.direction) out.push_back(directionBase_ + static_cast<int>(*p.direction));
      if (p.halfSpace0) out.push_back(hs0Base_ + static_cast<int>(*p.halfSpace0));
      if (p.halfSpace1) out.push_back(hs1Base_ + static_cast<int>(*p.halfSpace1));
      if (p.aligned) out.push_back(alignedBase_ + (*p.aligned ? 1 : 0));
      if (p.clockwise) out.push_back(clockwiseBase_ + (*p.clockwise ? 1 : 0));
      if (p.lengthMeters) out.push_back(length_token(*p.lengthMeters));
      if (p.angleDegrees) out.push_back(angle_token(*p.angleDegrees));
    } else {
      out.push_back(stop_token());
    }
  }
  return out;
}

ConstructionSequence TokenVocabulary::detokenize(std::span<const int> tokens) const {
  ConstructionSequence seq;
  int nodes = 0, edges = 0;
  AddEdge* edge = nullptr;
  for (int t : tokens) {
    if (t < 0 || t >= size()) throw Error(ErrorCode::OutOfVocabulary, "token " + std::to_string(t));
    if (!seq.ops.empty() && std::holds_alternative<Stop>(seq.ops.back()))
      throw Error(ErrorCode::InconsistentSequence, "token after stop");
    if (t == stop_token()) {
      seq.ops.emplace_back(Stop{});
      edge = nullptr;
    } else if (t < 13) {
      seq.ops.emplace_back(AddNode{nodes++, static_cast<PrimitiveType>((t - 1) / 2), (t - 1) % 2 == 1});
      edge = nullptr;
    } else if (t < nodeRefBase_) {
      seq.ops.emplace_back(AddEdge{edges++, static_cast<ConstraintType>(t - 13), {}, {}});
      edge = &std::get<AddEdge>(seq.ops.back());
    } else {
      if (!edge) throw Error(ErrorCode::InconsistentSequence, "parameter token outside an edge");
      auto& p = edge->params;
      if (t < directionBase_) edge->members.push_back(t - nodeRefBase_);
      else if (t < hs0Base_) p.direction = static_cast<Direction>(t - directionBase_);
      else if (t < hs1Base_) p.halfSpace0 = static_cast<HalfSpace>(t - hs0Base_);
      else if (t < alignedBase_) p.halfSpace1 = static_cast<HalfSpace>(t - hs1Base_);
      else if (t < clockwiseBase_) p.aligned = (t - alignedBase_) == 1;
      else if (t < lengthBase_) p.clockwise = (t - clockwiseBase_) == 1;
      else if (t < angleBase_) p.lengthMeters = length_of(t);
      else p.angleDegrees = angle_of(t);
    }
  }
  return seq;
}

std::string TokenVocabulary::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "sketchgraph-token-vocabulary";
  j["layout"] = {{"stop", 0},
                 {"node_types", {1, 12}},
                 {"edge_types", {13, nodeRefBase_ - 1}},
                 {"node_refs", nodeRefBase_},
                 {"direction", directionBase_},
                 {"halfSpace0", hs0Base_},
                 {"halfSpace1", hs1Base_},
                 {"aligned", alignedBase_},
                 {"clockwise", clockwiseBase_},
                 {"frequent_lengths", lengthBase_},
                 {"length_bins", lengthBinBase_},
                 {"frequent_angles", angleBase_},
                 {"angle_bins", angleBinBase_},
                 {"size", size()}};
  j["options"] = {{"topLengths", opts_.topLengths}, {"topAngles", opts_.topAngles},
                  {"lengthBins", opts_.lengthBins}, {"minLength", opts_.minLength},
                  {"maxLength", opts_.maxLength},   {"angleBins", opts_.angleBins},
                  {"maxNodes", opts_.maxNodes}};
  j["lengths_m"] = lengths_;
  j["angles_deg"] = angles_;
  return j.dump(1);
}

TokenVocabulary TokenVocabulary::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  VocabularyOptions o;
  const auto& jo = j.at("options");
  o.topLengths = jo.at("topLengths");
  o.topAngles = jo.at("topAngles");
  o.lengthBins = jo.at("lengthBins");
  o.minLength = jo.at("minLength");
  o.maxLength = jo.at("maxLength");
  o.angleBins = jo.at("angleBins");
  o.maxNodes = jo.at("maxNodes");
  return TokenVocabulary(o, j.at("lengths_m").get<std::vector<double>>(),
                         j.at("angles_deg").get<std::vector<double>>());
}

ConstructionSequence quantize(const ConstructionSequence& seq, const TokenVocabulary& vocab) {
  ConstructionSequence out = seq;
  int edges = 0;
  for (auto& op : out.ops) {
    auto* e = std::get_if<AddEdge>(&op);
    if (!e) continue;
    e->constraint = edges++;
    if (e->params.lengthMeters) e->params.lengthMeters = vocab.quantize_length(*e->params.lengthMeters);
    if (e->params.angleDegrees) e->params.angleDegrees = vocab.quantize_angle(*e->params.angleDegrees);
  }
  return out;
}

std::string format_token_line(std::span<const int> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(tokens[i]);
  }
  return out;
}

std::vector<int> parse_token_line(const std::string& line) {
  std::vector<int> out;
  std::istringstream in(line);
  int t;
  while (in >> t) out.push_back(t);
  return out;
}

std::vector<std::uint8_t> pack_tokens(std::span<const std::vector<int>> sketches, std::size_t count,
                                      int bytesPerToken) {
  std::vector<std::uint8_t> out;
  const std::uint64_t limit = bytesPerToken >= 8 ? ~0ull : (1ull << (8 * bytesPerToken));
  for (std::size_t i = 0; i < count && i < sketches.size(); ++i) {
    for (int t : sketches[i]) {
      if (t < 0 || static_cast<std::uint64_t>(t) >= limit)
        throw Error(ErrorCode::OutOfVocabulary, "token " + std::to_string(t) + " does not fit the packing width");
      for (int b = 0; b < bytesPerToken; ++b) out.push_back(static_cast<std::uint8_t>((t >> (8 * b)) & 0xff));
    }
  }
  return out;
}

double entropy_rate_estimate(std::span<const std::vector<int>> corpus, std::size_t n1, std::size_t n2,
                             const Compressor& codec, int bytesPerToken) {
  if (!(n1 < n2) || n2 > corpus.size())
    throw Error(ErrorCode::InsufficientCorpus, "need n1 < n2 <= " + std::to_string(corpus.size()));
  const auto bits = [&](std::size_t n) {
    return 8.0 * static_cast<double>(codec.compress(pack_tokens(corpus, n, bytesPerToken)).size());
  };
  return (bits(n2) - bits(n1)) / static_cast<double>(n2 - n1);
}

}  // namespace sg
