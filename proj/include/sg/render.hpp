#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sg/model.hpp"
#include "sg/sequence.hpp"

namespace sg {

struct ViewBox {
  double minX = 0.0, minY = 0.0, width = 1.0, height = 1.0;  // sketch coordinates, y up
  bool operator==(const ViewBox&) const = default;
};

struct RenderOptions {
  double strokeWidth = 0.0;  // user units; 0 picks 0.3% of the view diagonal
  std::optional<ViewBox> viewBox;
  /// Dash and gap lengths for construction geometry, in stroke widths.
  std::array<double, 2> dashPattern = {6.0, 4.0};
  double noiseMagnitude = 0.0;  // fraction of the bounding-box diagonal
  std::uint64_t noiseSeed = 0;
  bool metadataComment = true;
};

/// Bounding box of the exact geometry plus a 5% margin (of the larger side)
/// and room for hand-drawn noise when noiseMagnitude > 0.
ViewBox auto_view_box(const Sketch& s, double noiseMagnitude = 0.0);

/// One element per primitive, in primitive order. Sketch y points up; the
/// document flips it.
std::string render_svg(const Sketch& s, const RenderOptions& o = {});

/// Frame k shows the primitives of the first k AddNode steps; all frames
/// share the final view box. Throws Error{InconsistentSequence}.
std::vector<std::string> render_steps(const Sketch& s, const ConstructionSequence& seq, const RenderOptions& o = {});

struct Bezier {
  Vec2 p0, c0, c1, p1;
  Vec2 at(double t) const;
};

/// Cubic approximation of a primitive's outline (none for points). Circles,
/// arcs and ellipses use about 64 segments per turn.
std::vector<Bezier> primitive_curves(const Primitive& p);

/// Curves as drawn by render_handdrawn: on-curve points moved along the
/// normal by Gaussian noise truncated at 3 sigma, handles carried along.
std::vector<std::vector<Bezier>> handdrawn_curves(const Sketch& s, const RenderOptions& o);

std::string render_handdrawn(const Sketch& s, const RenderOptions& o);

/// Fixed-precision number text used in documents (6 significant digits).
std::string svg_number(double v);

}  // namespace sg
