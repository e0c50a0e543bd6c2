#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sg/model.hpp"

namespace sg {

enum class SynthTemplate { Rectangle, SlottedPlate, BoltCircle, FilletedPolyline };

std::string_view to_string(SynthTemplate t);

/// "mixed" draws a template per sketch; a template name pins it.
struct SynthProfile {
  std::vector<SynthTemplate> templates = {SynthTemplate::Rectangle, SynthTemplate::SlottedPlate,
                                          SynthTemplate::BoltCircle, SynthTemplate::FilletedPolyline};
  static SynthProfile parse(std::string_view name);  // throws Error{MalformedRecord} on unknown names
};

/// Sketch `index` of the corpus for `seed`. Geometry is exact for every
/// emitted constraint; primitives and constraints appear in construction
/// order. Depends only on (seed, index, profile).
Sketch synth_sketch(std::uint64_t seed, std::size_t index, const SynthProfile& profile = {});

std::vector<Sketch> synth_corpus(std::size_t n, std::uint64_t seed, const SynthProfile& profile = {});

}  // namespace sg
