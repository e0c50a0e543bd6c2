#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sg/corpus.hpp"
#include "sg/render.hpp"
#include "sg/synth.hpp"

namespace sgt {

struct GoldenCase {
  std::string name;
  sg::Sketch sketch;
};

// Ten sketches: the fixture corpus plus one per synthetic template.
inline std::vector<GoldenCase> golden_cases(const std::filesystem::path& data) {
  std::vector<GoldenCase> out;
  int k = 0;
  for (auto& s : sg::parse_corpus((data / "fixture.sgl").string()).sketches)
    out.push_back({"fixture" + std::to_string(k++), std::move(s)});
  for (const char* t : {"rectangle", "slotted-plate", "bolt-circle", "polyline-fillets"})
    out.push_back({t, sg::synth_sketch(21, 0, sg::SynthProfile::parse(t))});
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

/// Compares against data/golden/<name>.svg; with SG_UPDATE_GOLDENS set, rewrites it.
inline bool matches_golden(const std::filesystem::path& data, const GoldenCase& g) {
  const auto path = data / "golden" / (g.name + ".svg");
  const auto svg = sg::render_svg(g.sketch);
  if (std::getenv("SG_UPDATE_GOLDENS")) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << svg;
    return true;
  }
  return std::filesystem::exists(path) && read_file(path) == svg;
}

}  // namespace sgt
