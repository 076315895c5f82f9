#include "placekit/vr.hpp"

#include <algorithm>
#include <cmath>

#include "placekit/error.hpp"
#include "placekit/geometry.hpp"
#include "placekit/rng.hpp"

namespace placekit {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct PlacedFootprint {
  const Placement* placement = nullptr;
  Polygon poly;
};

std::vector<PlacedFootprint> placed_footprints(const SceneSpec& scene, const Layout& layout) {
  std::vector<PlacedFootprint> placed;
  placed.reserve(layout.placements.size());
  for (const Placement& p : layout.placements) {
    const ObjectSpec* object = scene.find_object(p.object_id);
    if (object == nullptr)
      throw_error(ErrorKind::reference, "placement references unknown object " + p.object_id);
    placed.push_back({&p, footprint_polygon(*object, p)});
  }
  return placed;
}

Vec2 polygon_centroid(const Polygon& poly) {
  Vec2 c{0.0, 0.0};
  for (const Vec2& p : poly.pts) {
    c.x += p.x;
    c.y += p.y;
  }
  const double n = static_cast<double>(poly.pts.size());
  return {c.x / n, c.y / n};
}

const PlacedFootprint* find_anchor(const std::vector<PlacedFootprint>& placed,
                                   const std::string& anchor_id) {
  for (const PlacedFootprint& f : placed)
    if (f.placement->object_id == anchor_id) return &f;
  return nullptr;
}

// Angle of the candidate as seen from the anchor center, in [0, 2*pi).
double ring_angle(const Vec2& position, const Vec2& anchor_center) {
  double a = std::atan2(position.y - anchor_center.y, position.x - anchor_center.x);
  if (a < 0.0) a += kTwoPi;
  return a;
}

ViewpointCheck check_candidate(const ViewpointCandidate& candidate,
                               const std::vector<PlacedFootprint>& placed,
                               const PlacedFootprint& anchor, const RoomSpec& room,
                               const SamplerConfig& config) {
  ViewpointCheck check;
  const Vec2 p = candidate.position;
  const Vec2 anchor_center = polygon_centroid(anchor.poly);

  bool interacts = distance_point_polygon(p, anchor.poly) <= config.interaction_reach;
  for (const PlacedFootprint& f : placed) {
    if (f.placement == anchor.placement) continue;
    if (segment_crosses_polygon(p, anchor_center, f.poly)) {
      interacts = false;
      break;
    }
  }
  if (!interacts) check.failure_reasons.insert(ViewpointFailure::no_interaction);

  for (const PlacedFootprint& f : placed) {
    if (distance_point_polygon(p, f.poly) < config.body_radius) {
      check.failure_reasons.insert(ViewpointFailure::object_collision);
      break;
    }
  }

  if (p.x < 0.0 || p.x > room.width || p.y < 0.0 || p.y > room.depth) {
    check.failure_reasons.insert(ViewpointFailure::out_of_room);
  } else {
    const double wall_gap =
        std::min(std::min(p.x, room.width - p.x), std::min(p.y, room.depth - p.y));
    if (wall_gap < config.body_radius)
      check.failure_reasons.insert(ViewpointFailure::wall_collision);
  }

  check.valid = check.failure_reasons.empty();
  return check;
}

}  // namespace

std::string to_string(ViewpointFailure reason) {
  switch (reason) {
    case ViewpointFailure::no_interaction: return "no_interaction";
    case ViewpointFailure::wall_collision: return "wall_collision";
    case ViewpointFailure::object_collision: return "object_collision";
    case ViewpointFailure::out_of_room: return "out_of_room";
  }
  return "unknown";
}

void SamplerConfig::validate() const {
  if (standoff <= 0.0) throw_error(ErrorKind::contract, "standoff must be positive");
  if (standoff > interaction_reach)
    throw_error(ErrorKind::contract, "standoff must not exceed interaction_reach");
  if (trials < 1) throw_error(ErrorKind::contract, "trials must be at least 1");
  if (body_radius < 0.0) throw_error(ErrorKind::contract, "body_radius must be non-negative");
}

ViewpointCheck validate_candidate(const ViewpointCandidate& candidate, const SceneSpec& scene,
                                  const Layout& layout, const std::string& anchor_id,
                                  const SamplerConfig& config) {
  config.validate();
  const std::vector<PlacedFootprint> placed = placed_footprints(scene, layout);
  const PlacedFootprint* anchor = find_anchor(placed, anchor_id);
  if (anchor == nullptr)
    throw_error(ErrorKind::reference, "anchor " + anchor_id + " is not placed");
  return check_candidate(candidate, placed, *anchor, scene.room, config);
}

std::vector<ViewpointCandidate> sample_viewpoints(const SceneSpec& scene, const Layout& layout,
                                                  const std::string& anchor_id,
                                                  const SamplerConfig& config) {
  config.validate();
  const std::vector<PlacedFootprint> placed = placed_footprints(scene, layout);
  const PlacedFootprint* anchor = find_anchor(placed, anchor_id);
  if (anchor == nullptr)
    throw_error(ErrorKind::reference, "anchor " + anchor_id + " is not placed");

  const Vec2 anchor_center = polygon_centroid(anchor->poly);
  const Vec2 room_center{scene.room.width / 2.0, scene.room.depth / 2.0};

  Rng rng(config.seed);
  std::vector<ViewpointCandidate> valid;
  for (int t = 0; t < config.trials; ++t) {
    const double angle = rng.uniform(0.0, kTwoPi);
    const Vec2 out{std::cos(angle), std::sin(angle)};
    ViewpointCandidate candidate;
    candidate.position = {anchor_center.x + config.standoff * out.x,
                          anchor_center.y + config.standoff * out.y};
    const double dx = anchor_center.x - candidate.position.x;
    const double dy = anchor_center.y - candidate.position.y;
    const double norm = std::hypot(dx, dy);
    candidate.direction = {dx / norm, dy / norm};
    candidate.dist_to_center = std::hypot(candidate.position.x - room_center.x,
                                          candidate.position.y - room_center.y);
    const ViewpointCheck check =
        check_candidate(candidate, placed, *anchor, scene.room, config);
    candidate.valid = check.valid;
    candidate.failure_reasons = check.failure_reasons;
    if (candidate.valid) valid.push_back(std::move(candidate));
  }

  std::sort(valid.begin(), valid.end(),
            [&](const ViewpointCandidate& a, const ViewpointCandidate& b) {
              if (a.dist_to_center != b.dist_to_center)
                return a.dist_to_center < b.dist_to_center;
              return ring_angle(a.position, anchor_center) <
                     ring_angle(b.position, anchor_center);
            });
  return valid;
}

}  // namespace placekit
