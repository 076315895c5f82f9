#pragma once
// Deterministic top-down SVG rendering of a scene and layout at 100 px/m:
// room border, door swing arcs, rotated object rectangles with labels,
// dashed clearance regions, the agent start marker, and optional viewpoint
// candidates.  Byte-stable for identical inputs, so renders golden-test.

#include <string>
#include <vector>

#include "placekit/scene.hpp"
#include "placekit/vr.hpp"

namespace placekit {

inline constexpr double kPixelsPerMeter = 100.0;

std::string render_svg(const SceneSpec& scene, const Layout& layout,
                       const std::vector<ViewpointCandidate>& viewpoints = {});

}  // namespace placekit
