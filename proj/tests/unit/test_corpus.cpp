#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sg/corpus.hpp"
#include "sg/stats.hpp"
#include "sg/synth.hpp"
#include "support.hpp"

using namespace sg;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SG_TEST_DATA;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "sg_unit";
  fs::create_directories(dir);
  return dir / name;
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST_CASE("fixture corpus re-serializes byte for byte") {
  auto parsed = parse_corpus((kData / "fixture.sgl").string());
  CHECK(parsed.errors.empty());
  REQUIRE(parsed.sketches.size() == 6);
  const auto out = scratch("fixture_copy.sgl");
  write_corpus(parsed.sketches, out.string());
  CHECK(slurp(out) == slurp(kData / "fixture.sgl"));

  // Value-level round trip without the stored text.
  for (const auto& s : parsed.sketches) {
    const auto again = parse_record(format_record(s), false);
    CHECK(again == s);
    auto bare = s;
    bare.raw.clear();
    for (auto& p : bare.primitives) p.raw.clear();
    for (auto& c : bare.constraints) c.raw.clear();
    CHECK(parse_record(format_record(bare), false) == s);
  }
}

TEST_CASE("field aliases") {
  auto s = parse_corpus((kData / "fixture.sgl").string()).sketches[4];
  const auto& c = s.constraints[0];
  CHECK(c.locals.size() == 2);
  CHECK(c.locals[0] == EntityRef{0, SubSelector::End});
  CHECK(c.locals[1] == EntityRef{1, SubSelector::Start});
  CHECK(s.constraints[3].length->unit == LengthUnit::Millimeter);
  CHECK(s.constraints[5].type == ConstraintType::Projected);
}

TEST_CASE("negative schema suite") {
  CorpusReader r((kData / "negative_schema.sgl").string());
  int accepted = 0;
  while (r.next()) ++accepted;
  CHECK(accepted == 0);
  CHECK(r.errors().size() == 12);
}

TEST_CASE("reader recovers after a bad line") {
  const auto good = format_record(synth_sketch(1, 0));
  const auto path = scratch("recover.sgl");
  put(path, good + "\n{\"id\":\"x\",\"primi\n\n" + good + "\r\n");
  CorpusReader r(path.string());
  int n = 0;
  while (r.next()) ++n;
  CHECK(n == 2);
  REQUIRE(r.errors().size() == 1);
  CHECK(r.errors()[0].line == 2);
  CHECK_THROWS_AS(CorpusReader("/nonexistent/x.sgl"), Error);

  const auto empty = scratch("empty.sgl");
  CHECK(write_corpus({}, empty.string()) == 0);
  CHECK(fs::file_size(empty) == 0);
}

TEST_CASE("filter rules") {
  sgt::Builder b;
  b.line(0, 0, 1, 0);
  FilterOptions o;
  CHECK_FALSE(passes_filter(b.s, o));
  b.rel(ConstraintType::Horizontal, {sgt::whole(0)});
  CHECK(passes_filter(b.s, o));
  for (int i = 0; i < 16; ++i) b.point(i, i);
  o.maxPrimitives = 16;
  CHECK_FALSE(passes_filter(b.s, o));

  sgt::Builder e;
  e.add(StdEllipse{});
  e.point(0, 0);
  e.rel(ConstraintType::Coincident, {sgt::center(0), sgt::whole(1)});
  FilterOptions t;
  t.allowedTypes = std::set{PrimitiveType::Point, PrimitiveType::Line, PrimitiveType::Circle, PrimitiveType::Arc};
  CHECK_FALSE(passes_filter(e.s, t));
}

TEST_CASE("seeded split") {
  const auto in = scratch("split_in.sgl");
  write_corpus(synth_corpus(10, 9), in.string());
  auto ids = [](const fs::path& p) {
    std::set<std::string> out;
    for (auto& s : parse_corpus(p.string()).sketches) out.insert(s.id);
    return out;
  };
  const auto tr = scratch("train.sgl"), te = scratch("test.sgl");
  auto n = split_corpus(in.string(), 3, 77, tr.string(), te.string());
  CHECK(n.train == 7);
  CHECK(n.test == 3);
  const auto a = ids(tr), b = ids(te);
  for (const auto& id : b) CHECK(a.count(id) == 0);
  const auto first = slurp(te);
  split_corpus(in.string(), 3, 77, tr.string(), te.string());
  CHECK(slurp(te) == first);
  CHECK(split_corpus(in.string(), 0, 77, tr.string(), te.string()).train == 10);
  CHECK_THROWS_AS(split_corpus(in.string(), 11, 77, tr.string(), te.string()), Error);
}

TEST_CASE("statistics") {
  sgt::Builder b;
  b.line(0, 0, 1, 0);
  b.line(0, 0, 0, 1);
  b.line(0, 0, 1, 1);
  b.circle(0, 0, 1);
  StatsAccumulator acc;
  acc.add(b.s);
  auto r = acc.report();
  REQUIRE(r.primitiveTypes.size() == 2);
  CHECK(r.primitiveTypes[0].key == "Line");
  CHECK(r.primitiveTypes[0].percent == doctest::Approx(75));
  CHECK(r.primitiveTypes[1].percent == doctest::Approx(25));

  // Ten lengths; three values cover nine of them.
  sgt::Builder v;
  const int l = v.line(0, 0, 1, 0);
  const double values[] = {1, 1, 1, 1, 2, 2, 2, 3, 3, 4};
  for (double x : values) v.dim(ConstraintType::Length, {sgt::whole(l)}, x).direction = Direction::Minimum;
  StatsAccumulator lv;
  lv.add(v.s);
  auto lr = lv.report();
  REQUIRE(lr.lengths.size() == 4);
  CHECK(lr.lengths[2].cumulative == doctest::Approx(0.9));

  // Same-size sketches: every percentile equals that size.
  StatsAccumulator same;
  for (int i = 0; i < 5; ++i) same.add(v.s);
  auto sr = same.report();
  REQUIRE(sr.constraintsVsPrimitives.size() == 1);
  for (int p : sr.constraintsVsPrimitives[0].constraints) CHECK(p == 10);

  // Merging halves equals one pass.
  StatsAccumulator whole, h1, h2;
  const auto corpus = synth_corpus(30, 4);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    whole.add(corpus[i]);
    (i % 2 ? h1 : h2).add(corpus[i]);
  }
  h1.merge(h2);
  CHECK(h1 == whole);
  CHECK(format_stats_text(h1.report()) == format_stats_text(whole.report()));
  CHECK(stats_csv_tables(whole.report()).size() == 7);
}

TEST_CASE("synthetic corpus") {
  CHECK(synth_corpus(0, 1).empty());
  CHECK(format_record(synth_sketch(8, 3)) == format_record(synth_sketch(8, 3)));
  CHECK(synth_corpus(5, 8)[3] == synth_sketch(8, 3));
  CHECK_THROWS_AS(SynthProfile::parse("castle"), Error);
  for (auto t : {"rectangle", "slotted-plate", "bolt-circle", "polyline-fillets"}) {
    auto s = synth_sketch(2, 0, SynthProfile::parse(t));
    CHECK_FALSE(s.constraints.empty());
  }
}
