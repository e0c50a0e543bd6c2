#include "sg/corpus.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include <json.hpp>

namespace sg {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedRecord, what); }

double num(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) malformed(std::string("missing field '") + key + "'");
  if (!it->is_number()) malformed(std::string("field '") + key + "' is not a number");
  return it->get<double>();
}

bool flag(const Json& j, const char* key, bool fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) malformed(std::string("field '") + key + "' is not a boolean");
  return it->get<bool>();
}

std::string text(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) malformed(std::string("missing field '") + key + "'");
  if (!it->is_string()) malformed(std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

Primitive parse_primitive(const Json& j, bool keepRaw) {
  if (!j.is_object()) malformed("primitive is not an object");
  Primitive p;
  p.id = text(j, "id");
  const auto typeName = text(j, "type");
  const auto type = parse_primitive_type(typeName);
  if (!type) malformed("unknown primitive type '" + typeName + "'");
  p.isConstruction = flag(j, "isConstruction", false);
  switch (*type) {
    case PrimitiveType::Point: p.params = PointParams{num(j, "x"), num(j, "y")}; break;
    case PrimitiveType::Line:
      p.params = LineParams{num(j, "dirX"), num(j, "dirY"),       num(j, "pntX"),
                            num(j, "pntY"), num(j, "startParam"), num(j, "endParam")};
      break;
    case PrimitiveType::Circle:
      p.params = CircleParams{num(j, "xCenter"), num(j, "yCenter"), num(j, "xDir"), num(j, "yDir"),
                              num(j, "radius"),  flag(j, "clockwise", false)};
      break;
    case PrimitiveType::Arc:
      p.params = ArcParams{num(j, "xCenter"), num(j, "yCenter"),          num(j, "xDir"),
                           num(j, "yDir"),    num(j, "radius"),           flag(j, "clockwise", false),
                           num(j, "startParam"), num(j, "endParam")};
      break;
    case PrimitiveType::Ellipse:
      p.params = EllipseParams{num(j, "xCenter"), num(j, "yCenter"),     num(j, "xDir"),
                               num(j, "yDir"),    num(j, "radius"),      num(j, "minorRadius"),
                               flag(j, "clockwise", false)};
      break;
    case PrimitiveType::Spline: {
      SplineParams sp;
      const auto it = j.find("controlPoints");
      if (it == j.end() || !it->is_array()) malformed("spline without controlPoints");
      for (const auto& q : *it) {
        if (!q.is_array() || q.size() != 2 || !q[0].is_number() || !q[1].is_number())
          malformed("control point is not an [x, y] pair");
        sp.controlPoints.push_back({q[0].get<double>(), q[1].get<double>()});
      }
      p.params = std::move(sp);
      break;
    }
  }
  if (keepRaw) p.raw = j.dump();
  return p;
}

EntityRef parse_ref(const std::string& ref, const std::map<std::string, int>& ids) {
  if (auto it = ids.find(ref); it != ids.end()) return {it->second, SubSelector::None};
  const auto dot = ref.rfind('.');
  if (dot != std::string::npos) {
    const auto base = ref.substr(0, dot);
    const auto sel = ref.substr(dot + 1);
    if (auto it = ids.find(base); it != ids.end()) {
      for (SubSelector s : {SubSelector::Start, SubSelector::End, SubSelector::Center})
        if (to_string(s) == sel) return {it->second, s};
    }
  }
  throw Error(ErrorCode::DanglingReference, "reference '" + ref + "' does not resolve");
}

constexpr const char* kLocalKeys[3] = {"local0", "local1", "local2"};
constexpr const char* kLocalAliases[3] = {"localFirst", "localSecond", nullptr};

/// Key under which local slot i is stored in j (alias spelling if used).
const char* local_key(const Json& j, int i) {
  if (!j.contains(kLocalKeys[i]) && kLocalAliases[i] && j.contains(kLocalAliases[i])) return kLocalAliases[i];
  return kLocalKeys[i];
}

Constraint parse_constraint(const Json& j, const std::map<std::string, int>& ids, bool keepRaw) {
  if (!j.is_object()) malformed("constraint is not an object");
  Constraint c;
  const auto typeName = text(j, "type");
  const auto type = parse_constraint_type(typeName);
  if (!type) malformed("unknown constraint type '" + typeName + "'");
  c.type = *type;
  for (int i = 0; i < 3; ++i) {
    const char* key = local_key(j, i);
    if (j.contains(kLocalKeys[i]) && kLocalAliases[i] && j.contains(kLocalAliases[i]))
      malformed(std::string("both ") + kLocalKeys[i] + " and " + kLocalAliases[i] + " given");
    if (!j.contains(key)) break;
    c.locals.push_back(parse_ref(text(j, key), ids));
  }
  if (auto it = j.find("length"); it != j.end()) {
    if (it->is_number()) {
      c.length = Quantity{it->get<double>(), LengthUnit::Meter};
    } else if (it->is_string()) {
      c.length = parse_quantity(it->get<std::string>());
      if (!c.length) malformed("unreadable length '" + it->get<std::string>() + "'");
    } else {
      malformed("length is neither a number nor a quantity string");
    }
  }
  if (j.contains("angle")) c.angle = num(j, "angle");
  if (j.contains("clockwise")) c.clockwise = flag(j, "clockwise", false);
  if (j.contains("aligned")) c.aligned = flag(j, "aligned", false);
  if (j.contains("direction")) {
    const auto d = text(j, "direction");
    c.direction = parse_direction(d);
    if (!c.direction) malformed("unknown direction '" + d + "'");
  }
  for (auto [key, slot] : {std::pair{"halfSpace0", &c.halfSpace0}, std::pair{"halfSpace1", &c.halfSpace1}}) {
    if (!j.contains(key)) continue;
    const auto h = text(j, key);
    *slot = parse_half_space(h);
    if (!*slot) malformed("unknown " + std::string(key) + " '" + h + "'");
  }
  if (j.contains("provenance")) c.provenance = text(j, "provenance");
  if (keepRaw) c.raw = j.dump();
  return c;
}

// Writers keep an existing value when it already matches, so untouched
// records re-serialize byte for byte.

template <class T>
void put(Json& j, const char* key, const T& v) {
  const auto it = j.find(key);
  if (it != j.end()) {
    if constexpr (std::is_same_v<T, double>) {
      if (it->is_number() && it->template get<double>() == v) return;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (it->is_boolean() && it->template get<bool>() == v) return;
    } else {
      if (it->is_string() && it->template get<std::string>() == v) return;
    }
  }
  j[key] = v;
}

void put_text(Json& j, const char* key, std::string_view v) { put(j, key, std::string(v)); }

Json primitive_json(const Primitive& p) {
  Json j = Json::object();
  if (!p.raw.empty()) {
    j = Json::parse(p.raw);
    if (!j.is_object() || j.value("type", std::string()) != to_string(p.type())) j = Json::object();
  }
  put_text(j, "id", p.id);
  put_text(j, "type", to_string(p.type()));
  put(j, "isConstruction", p.isConstruction);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointParams>) {
          put(j, "x", v.x);
          put(j, "y", v.y);
        } else if constexpr (std::is_same_v<T, LineParams>) {
          put(j, "dirX", v.dirX);
          put(j, "dirY", v.dirY);
          put(j, "pntX", v.pntX);
          put(j, "pntY", v.pntY);
          put(j, "startParam", v.startParam);
          put(j, "endParam", v.endParam);
        } else if constexpr (std::is_same_v<T, CircleParams> || std::is_same_v<T, ArcParams> ||
                             std::is_same_v<T, EllipseParams>) {
          put(j, "xCenter", v.xCenter);
          put(j, "yCenter", v.yCenter);
          put(j, "xDir", v.xDir);
          put(j, "yDir", v.yDir);
          put(j, "radius", v.radius);
          if constexpr (std::is_same_v<T, EllipseParams>) put(j, "minorRadius", v.minorRadius);
          put(j, "clockwise", v.clockwise);
          if constexpr (std::is_same_v<T, ArcParams>) {
            put(j, "startParam", v.startParam);
            put(j, "endParam", v.endParam);
          }
        } else {
          Json pts = Json::array();
          for (const auto& q : v.controlPoints) pts.push_back({q.x, q.y});
          if (!(j.contains("controlPoints") && j["controlPoints"] == pts)) j["controlPoints"] = pts;
        }
      },
      p.params);
  return j;
}

std::string ref_text(const EntityRef& r, const Sketch& s) {
  std::string out = s.primitives.at(r.primitive).id;
  if (r.sel != SubSelector::None) out += "." + std::string(to_string(r.sel));
  return out;
}

Json constraint_json(const Constraint& c, const Sketch& s) {
  Json j = Json::object();
  if (!c.raw.empty()) {
    j = Json::parse(c.raw);
    if (!j.is_object()) j = Json::object();
  }
  put_text(j, "type", to_string(c.type));
  for (int i = 0; i < 3; ++i) {
    const char* key = local_key(j, i);
    if (i < static_cast<int>(c.locals.size()))
      put(j, key, ref_text(c.locals[i], s));
    else
      j.erase(key);
  }
  auto optional_field = [&](const char* key, bool present, auto&& write) {
    if (present)
      write();
    else
      j.erase(key);
  };
  optional_field("length", c.length.has_value(), [&] {
    const auto it = j.find("length");
    if (it != j.end()) {
      if (it->is_string() && parse_quantity(it->get<std::string>()) == c.length) return;
      if (it->is_number() && c.length->unit == LengthUnit::Meter && it->get<double>() == c.length->value) return;
    }
    j["length"] = format_quantity(*c.length);
  });
  optional_field("angle", c.angle.has_value(), [&] { put(j, "angle", *c.angle); });
  optional_field("clockwise", c.clockwise.has_value(), [&] { put(j, "clockwise", *c.clockwise); });
  optional_field("aligned", c.aligned.has_value(), [&] { put(j, "aligned", *c.aligned); });
  optional_field("direction", c.direction.has_value(), [&] { put_text(j, "direction", to_string(*c.direction)); });
  optional_field("halfSpace0", c.halfSpace0.has_value(),
                 [&] { put_text(j, "halfSpace0", to_string(*c.halfSpace0)); });
  optional_field("halfSpace1", c.halfSpace1.has_value(),
                 [&] { put_text(j, "halfSpace1", to_string(*c.halfSpace1)); });
  optional_field("provenance", !c.provenance.empty(), [&] { put_text(j, "provenance", c.provenance); });
  return j;
}

}  // namespace

Sketch parse_record(const std::string& line, bool keepRaw) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) malformed("record is not an object");
  Sketch s;
  s.id = text(j, "id");
  std::map<std::string, int> ids;
  if (auto it = j.find("primitives"); it != j.end()) {
    if (!it->is_array()) malformed("primitives is not an array");
    for (const auto& pj : *it) {
      auto p = parse_primitive(pj, keepRaw);
      if (!ids.emplace(p.id, static_cast<int>(s.primitives.size())).second)
        malformed("duplicate primitive id '" + p.id + "'");
      check_primitive(p);
      s.primitives.push_back(std::move(p));
    }
  }
  if (auto it = j.find("constraints"); it != j.end()) {
    if (!it->is_array()) malformed("constraints is not an array");
    for (const auto& cj : *it) s.constraints.push_back(parse_constraint(cj, ids, keepRaw));
  }
  validate_sketch(s);
  if (keepRaw) s.raw = line;
  return s;
}

std::string format_record(const Sketch& s) {
  Json j = Json::object();
  if (!s.raw.empty()) {
    j = Json::parse(s.raw);
    if (!j.is_object()) j = Json::object();
  }
  put_text(j, "id", s.id);
  Json prims = Json::array();
  for (const auto& p : s.primitives) prims.push_back(primitive_json(p));
  j["primitives"] = std::move(prims);
  Json cons = Json::array();
  for (const auto& c : s.constraints) cons.push_back(constraint_json(c, s));
  j["constraints"] = std::move(cons);
  return j.dump();
}

// ---------------------------------------------------------------------------

CorpusReader::CorpusReader(const std::string& path, bool keepRaw) : in_(path), keepRaw_(keepRaw) {
  if (!in_) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
}

std::optional<Sketch> CorpusReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      return parse_record(text, keepRaw_);
    } catch (const Error& e) {
      MalformedRecord m{line_, std::string(to_string(e.code())) + ": " + e.what()};
      if (onError_) onError_(m);
      errors_.push_back(std::move(m));
    }
  }
  return std::nullopt;
}

ParsedCorpus parse_corpus(const std::string& path) {
  CorpusReader reader(path);
  ParsedCorpus out;
  while (auto s = reader.next()) out.sketches.push_back(std::move(*s));
  out.errors = reader.errors();
  return out;
}

CorpusWriter::CorpusWriter(const std::string& path) : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
}

void CorpusWriter::write(const Sketch& s) {
  out_ << format_record(s) << '\n';
  if (!out_) throw Error(ErrorCode::Io, "write to '" + path_ + "' failed");
  ++count_;
}

void CorpusWriter::close() {
  out_.close();
  if (out_.fail()) throw Error(ErrorCode::Io, "closing '" + path_ + "' failed");
}

std::size_t write_corpus(const std::vector<Sketch>& sketches, const std::string& path) {
  CorpusWriter w(path);
  for (const auto& s : sketches) w.write(s);
  w.close();
  return w.count();
}

bool passes_filter(const Sketch& s, const FilterOptions& o) {
  if (s.primitives.size() < o.minPrimitives || s.primitives.size() > o.maxPrimitives) return false;
  if (s.constraints.size() < o.minConstraints) return false;
  if (o.allowedTypes)
    for (const auto& p : s.primitives)
      if (!o.allowedTypes->contains(p.type())) return false;
  return true;
}

FilterCount filter_corpus(const std::string& inPath, const std::string& outPath, const FilterOptions& o,
                          std::vector<MalformedRecord>* errors) {
  CorpusReader reader(inPath);
  CorpusWriter writer(outPath);
  FilterCount n;
  while (auto s = reader.next()) {
    if (passes_filter(*s, o)) {
      writer.write(*s);
      ++n.kept;
    } else {
      ++n.dropped;
    }
  }
  writer.close();
  if (errors) *errors = reader.errors();
  return n;
}

std::uint64_t split_hash(const std::string& id, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : id) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  // splitmix64 finalizer over the seeded hash
  std::uint64_t z = h + seed * 0x9e3779b97f4a7c15ull + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

SplitCount split_corpus(const std::string& inPath, std::size_t testCount, std::uint64_t seed,
                        const std::string& trainPath, const std::string& testPath) {
  std::vector<std::tuple<std::uint64_t, std::string, std::size_t>> keys;
  {
    CorpusReader reader(inPath, false);
    while (auto s = reader.next()) keys.emplace_back(split_hash(s->id, seed), s->id, keys.size());
  }
  if (testCount > keys.size())
    throw Error(ErrorCode::InsufficientCorpus, "test count " + std::to_string(testCount) + " exceeds corpus size " +
                                                   std::to_string(keys.size()));
  std::sort(keys.begin(), keys.end());
  std::vector<bool> isTest(keys.size(), false);
  for (std::size_t i = 0; i < testCount; ++i) isTest[std::get<2>(keys[i])] = true;

  CorpusReader reader(inPath);
  CorpusWriter train(trainPath), test(testPath);
  std::size_t index = 0;
  while (auto s = reader.next()) (isTest[index++] ? test : train).write(*s);
  train.close();
  test.close();
  return {train.count(), test.count()};
}

}  // namespace sg
