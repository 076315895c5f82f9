#pragma once
// Sampling-based selection of a standing viewpoint near an anchor object.
// Candidates ring the anchor at a fixed standoff, pass interaction and
// collision checks, and are ranked by distance to the room center.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "placekit/scene.hpp"

namespace placekit {

// Standing eye height carried as metadata; the checks are 2D.
inline constexpr double kStandingHeight = 1.6;

enum class ViewpointFailure { no_interaction, wall_collision, object_collision, out_of_room };

std::string to_string(ViewpointFailure reason);

struct ViewpointCandidate {
  Vec2 position;                // standing point on the floor
  double z = kStandingHeight;
  Vec2 direction;               // unit vector toward the anchor center
  double dist_to_center = 0.0;  // to the room center
  bool valid = false;           // <=> failure_reasons empty
  std::set<ViewpointFailure> failure_reasons;
};

struct SamplerConfig {
  double standoff = 1.0;          // candidate distance from the anchor center
  int trials = 64;
  double interaction_reach = 1.2; // max distance to the anchor footprint
  double body_radius = 0.3;       // clearance disc around the standing point
  std::uint64_t seed = 0;

  // standoff in (0, interaction_reach], trials >= 1, body_radius >= 0.
  void validate() const;
};

struct ViewpointCheck {
  bool valid = false;
  std::set<ViewpointFailure> failure_reasons;
};

// Interaction: the candidate stands within interaction_reach of the anchor
// footprint and the segment to the anchor center crosses no other footprint.
// Collision: a disc of body_radius at the candidate touches no placed
// footprint and lies fully inside the room (out_of_room when the point
// itself is outside, wall_collision when only the disc pokes past a wall).
// All reasons are accumulated, never short-circuited.
ViewpointCheck validate_candidate(const ViewpointCandidate& candidate, const SceneSpec& scene,
                                  const Layout& layout, const std::string& anchor_id,
                                  const SamplerConfig& config);

// Samples `trials` directions uniformly on the circle (seeded), places a
// candidate at anchor_center + standoff * direction for each, validates
// them, and returns the valid ones sorted by dist_to_center ascending with
// ties broken by direction angle.  May be empty.  The anchor must be placed.
std::vector<ViewpointCandidate> sample_viewpoints(const SceneSpec& scene, const Layout& layout,
                                                  const std::string& anchor_id,
                                                  const SamplerConfig& config = {});

}  // namespace placekit
