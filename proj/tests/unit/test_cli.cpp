#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sg/cli.hpp"
#include "sg/corpus.hpp"
#include "sg/stats.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run sg_run(std::vector<std::string> args) {
  args.insert(args.begin(), "sg");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = sg::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string dir() {
  const auto d = fs::temp_directory_path() / "sg_cli";
  fs::create_directories(d);
  return d.string();
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(sg_run({}).code == 1);
  CHECK(sg_run({"--help"}).code == 0);
  CHECK(sg_run({"stats"}).code == 1);
  CHECK(sg_run({"synth", "--n", "3", "--out", dir() + "/x.sgl"}).code == 1);  // --seed is required
  CHECK(sg_run({"stats", dir() + "/missing.sgl"}).code == 2);
  auto bad = sg_run({"stats", std::string(SG_TEST_DATA) + "/negative_schema.sgl"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("negative_schema.sgl:12:") != std::string::npos);
}

TEST_CASE("pipeline") {
  const auto d = dir();
  REQUIRE(sg_run({"synth", "--n", "60", "--seed", "7", "--out", d + "/c.sgl"}).code == 0);
  auto stats = sg_run({"stats", d + "/c.sgl", "--csv-dir", d + "/csv"});
  CHECK(stats.code == 0);
  CHECK(stats.out.find("total         100.00%") != std::string::npos);
  CHECK(fs::exists(d + "/csv/primitive_types.csv"));

  // Thin delegate: same text as the module.
  sg::StatsAccumulator acc;
  for (auto& s : sg::parse_corpus(d + "/c.sgl").sketches) acc.add(s);
  CHECK(stats.out == sg::format_stats_text(acc.report()));

  auto one = sg_run({"autoconstrain", "--in", d + "/c.sgl", "--out", d + "/p1.sgl", "--strip-constraints"});
  auto four = sg_run({"autoconstrain", "--in", d + "/c.sgl", "--out", d + "/p4.sgl", "--strip-constraints", "--jobs", "4"});
  CHECK(one.code == 0);
  CHECK(four.code == 0);
  std::ifstream a(d + "/p1.sgl"), b(d + "/p4.sgl");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  auto ev = sg_run({"eval", "--pred", d + "/p1.sgl", "--gt", d + "/c.sgl"});
  CHECK(ev.code == 0);
  CHECK(ev.out.find("f1 ") != std::string::npos);

  auto frames = sg_run({"render", "--in", d + "/c.sgl", "--id", "5", "--steps", "--out-dir", d + "/frames"});
  CHECK(frames.code == 0);
  const auto s5 = sg::parse_corpus(d + "/c.sgl").sketches[5];
  CHECK(fs::exists(d + "/frames/" + s5.id + "_step" + std::to_string(s5.primitives.size()) + ".svg"));
  CHECK_FALSE(fs::exists(d + "/frames/" + s5.id + "_step" + std::to_string(s5.primitives.size() + 1) + ".svg"));
  CHECK(sg_run({"render", "--in", d + "/c.sgl", "--handdrawn", "--out-dir", d + "/hd"}).code == 1);

  CHECK(sg_run({"solve", "--in", d + "/c.sgl"}).code == 0);
  CHECK(sg_run({"dof", d + "/c.sgl"}).out.find("pearson") != std::string::npos);
  CHECK(sg_run({"sequence", "--in", d + "/c.sgl", "--out", d + "/t.txt", "--vocab-out", d + "/v.json"}).code == 0);
  CHECK(sg_run({"entropy", "--in", d + "/c.sgl"}).code == 0);
  CHECK(sg_run({"filter", "--in", d + "/c.sgl", "--out", d + "/f.sgl", "--max-primitives", "5"}).code == 0);
  CHECK(sg_run({"split", "--in", d + "/c.sgl", "--test-count", "10", "--seed", "1", "--train", d + "/tr.sgl",
                "--test", d + "/te.sgl"})
            .out == "train 50 test 10\n");
  auto ed = sg_run({"edit", "--in", d + "/c.sgl", "--id", "0", "--primitive", "p0", "--dy", "2 mm"});
  CHECK(ed.code == 0);
}
