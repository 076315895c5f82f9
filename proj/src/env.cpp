#include "placekit/env.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "placekit/error.hpp"
#include "placekit/geometry.hpp"

namespace placekit {
namespace {

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

double wrap_pi(double a) {
  while (a <= -M_PI) a += 2.0 * M_PI;
  while (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

const std::string& node_text(const ObjectSpec& spec) {
  return spec.name.empty() ? spec.id : spec.name;
}

}  // namespace

int encode_action(int col, int row, int orientation) {
  return (row * kGridCap + col) * kOrientationCount + orientation;
}

DecodedAction decode_action(const ActionGrid& grid, int action) {
  if (action < 0 || action >= kActionCount) {
    throw_error(ErrorKind::contract, "action index out of range: " + std::to_string(action));
  }
  DecodedAction out;
  out.orientation = action % kOrientationCount;
  const int cell = action / kOrientationCount;
  out.col = cell % kGridCap;
  out.row = cell / kGridCap;
  if (out.col >= grid.cols || out.row >= grid.rows) {
    throw_error(ErrorKind::contract, "action addresses a cell outside the grid window");
  }
  out.x = (out.col + 0.5) * grid.cell_w;
  out.y = (out.row + 0.5) * grid.cell_h;
  out.theta = out.orientation * (M_PI / 2.0);
  return out;
}

PlacementEnv::PlacementEnv(const SceneSpec& scene, EnvConfig config)
    : scene_(scene), config_(std::move(config)) {
  reset();
}

std::vector<std::string> placement_order(const SceneSpec& scene) {
  std::vector<std::string> order;
  order.reserve(scene.objects.size());
  for (const auto& object : scene.objects) order.push_back(object.id);
  std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    const double area_a = scene.find_object(a)->footprint_area();
    const double area_b = scene.find_object(b)->footprint_area();
    if (area_a != area_b) return area_a > area_b;
    return a < b;
  });
  return order;
}

ActionGrid build_action_grid(const SceneSpec& scene, const ObjectSpec& object,
                             const EnvConfig& config) {
  const double width = scene.room.width;
  const double depth = scene.room.depth;
  ActionGrid grid;
  grid.cols =
      std::clamp(static_cast<int>(std::ceil(width / config.resolution - 1e-12)), 1, kGridCap);
  grid.rows =
      std::clamp(static_cast<int>(std::ceil(depth / config.resolution - 1e-12)), 1, kGridCap);
  grid.cell_w = width / grid.cols;
  grid.cell_h = depth / grid.rows;
  grid.mask.assign(kActionCount, 0);
  grid.valid_count = 0;

  const Polygon room = room_polygon(scene.room);
  const double area = object.footprint_area();
  for (int row = 0; row < grid.rows; ++row) {
    for (int col = 0; col < grid.cols; ++col) {
      const double x = (col + 0.5) * grid.cell_w;
      const double y = (row + 0.5) * grid.cell_h;
      for (int o = 0; o < kOrientationCount; ++o) {
        const double theta = o * (M_PI / 2.0);
        const Polygon fp = footprint_polygon(object.dims[0], object.dims[1], {"", x, y, theta});
        // Valid only when the footprint is wholly inside the room (the cell
        // center is strictly interior by construction).
        if (intersection_area(fp, room) >= area - 1e-9) {
          grid.mask[static_cast<std::size_t>(encode_action(col, row, o))] = 1;
          ++grid.valid_count;
        }
      }
    }
  }
  return grid;
}

void PlacementEnv::reset() {
  layout_ = Layout{};
  cursor_ = 0;
  retries_ = 0;
  steps_ = 0;
  last_total_ = 0.0;
  rejected_.assign(kActionCount, 0);
  order_ = placement_order(scene_);
  if (!done()) build_grid();
}

const ObjectSpec& PlacementEnv::pending() const {
  if (done()) {
    throw_error(ErrorKind::contract, "episode is complete; no pending object");
  }
  return *scene_.find_object(order_[static_cast<std::size_t>(cursor_)]);
}

void PlacementEnv::build_grid() {
  grid_ = build_action_grid(scene_, pending(), config_);
  rejected_.assign(kActionCount, 0);
}

void PlacementEnv::advance() {
  ++cursor_;
  retries_ = 0;
  if (!done()) build_grid();
}

GlobalState PlacementEnv::encode_global_state() const {
  const ObjectSpec& next = pending();
  int with_subject = 0;
  int global = 0;
  for (const auto& constraint : scene_.constraints) {
    if (constraint.subject != next.id) continue;
    ++with_subject;
    if (is_global_kind(constraint.kind)) ++global;
  }
  GlobalState state;
  state.v[0] = with_subject == 0
                   ? 0.0
                   : static_cast<double>(global) / static_cast<double>(with_subject);
  state.v[1] = clip01(next.dims[0] / scene_.room.width);
  state.v[2] = clip01(next.dims[1] / scene_.room.depth);
  state.v[3] = clip01(next.footprint_area() / (scene_.room.width * scene_.room.depth));
  const double total = static_cast<double>(order_.size());
  state.v[4] = clip01(static_cast<double>(order_.size() - cursor_) / total);
  return state;
}

LocalGraph PlacementEnv::encode_local_graph(const EmbeddingProvider& embedder) const {
  const ObjectSpec& next = pending();
  const double width = scene_.room.width;
  const double depth = scene_.room.depth;

  LocalGraph graph;
  const std::size_t placed = layout_.placements.size();
  const std::size_t m = placed + 1;
  graph.pending = static_cast<int>(placed);
  graph.nodes.reserve(m);
  graph.neighbors.assign(m, {});

  std::vector<const ObjectSpec*> specs(m, nullptr);
  for (std::size_t i = 0; i < placed; ++i) {
    const auto& p = layout_.placements[i];
    const ObjectSpec* spec = scene_.find_object(p.object_id);
    specs[i] = spec;
    auto features = embedder.embed(node_text(*spec));
    features.reserve(kNodeFeatureDim);
    features.push_back(spec->dims[0] / width);
    features.push_back(spec->dims[1] / depth);
    features.push_back(p.x / width);
    features.push_back(p.y / depth);
    features.push_back(std::sin(p.theta));
    features.push_back(std::cos(p.theta));
    graph.nodes.push_back(std::move(features));
  }
  specs[placed] = &next;
  auto features = embedder.embed(node_text(next));
  features.reserve(kNodeFeatureDim);
  features.push_back(next.dims[0] / width);
  features.push_back(next.dims[1] / depth);
  features.insert(features.end(), {0.0, 0.0, 0.0, 0.0});
  graph.nodes.push_back(std::move(features));

  // Constraint links by node-index pair, collected once.
  std::map<std::pair<int, int>, std::array<double, kConstraintKindCount>> links;
  auto node_of = [&](const std::string& id) -> int {
    for (std::size_t i = 0; i < placed; ++i) {
      if (layout_.placements[i].object_id == id) return static_cast<int>(i);
    }
    return id == next.id ? static_cast<int>(placed) : -1;
  };
  for (const auto& constraint : scene_.constraints) {
    if (!constraint.target.has_value()) continue;
    const int a = node_of(constraint.subject);
    const int b = node_of(*constraint.target);
    if (a < 0 || b < 0 || a == b) continue;
    auto key = std::minmax(a, b);
    auto& hot = links[{key.first, key.second}];
    hot[static_cast<std::size_t>(constraint.kind)] = 1.0;
  }

  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      const bool involves_pending = b == placed;
      const auto link = links.find({static_cast<int>(a), static_cast<int>(b)});
      const bool linked = link != links.end();
      double distance = 0.0;
      double rel_angle = 0.0;
      double alignment = 0.0;
      bool near_enough = false;
      if (!involves_pending) {
        const auto& pa = layout_.placements[a];
        const auto& pb = layout_.placements[b];
        distance = std::hypot(pb.x - pa.x, pb.y - pa.y);
        rel_angle = wrap_pi(pb.theta - pa.theta);
        alignment = (1.0 + std::cos(4.0 * (pb.theta - pa.theta))) / 2.0;
        near_enough = distance < kNeighborRadius;
      }
      if (!near_enough && !linked) continue;
      LocalEdge edge;
      edge.a = static_cast<int>(a);
      edge.b = static_cast<int>(b);
      if (!involves_pending) {
        edge.features[0] = distance;
        edge.features[1] = rel_angle;
        edge.features[2] = alignment;
      }
      if (linked) {
        for (int k = 0; k < kConstraintKindCount; ++k) {
          edge.features[static_cast<std::size_t>(3 + k)] = link->second[static_cast<std::size_t>(k)];
        }
      }
      graph.edges.push_back(edge);
      graph.neighbors[a].push_back(static_cast<int>(b));
      graph.neighbors[b].push_back(static_cast<int>(a));
    }
  }
  for (auto& list : graph.neighbors) std::sort(list.begin(), list.end());
  return graph;
}

const ActionGrid& PlacementEnv::action_grid() const {
  if (done()) {
    throw_error(ErrorKind::contract, "episode is complete; no action grid");
  }
  return grid_;
}

EnergyBreakdown PlacementEnv::current_energy() const {
  return energy_breakdown(scene_, layout_, config_.prior, config_.weights, config_.params);
}

StepOutcome PlacementEnv::step(int action) {
  if (done()) {
    throw_error(ErrorKind::contract, "cannot step a completed episode");
  }
  if (action < 0 || action >= kActionCount ||
      grid_.mask[static_cast<std::size_t>(action)] == 0) {
    throw_error(ErrorKind::contract, "action is masked: " + std::to_string(action));
  }
  ++steps_;
  const ObjectSpec& object = pending();
  const auto pose = decode_action(grid_, action);
  layout_.placements.push_back({object.id, pose.x, pose.y, pose.theta});

  // Hard rejection rules: pairwise overlap beyond tau_reject or containment
  // below tau_contain.
  const Polygon fp = footprint_polygon(object.dims[0], object.dims[1],
                                       layout_.placements.back());
  bool rejected = false;
  for (std::size_t i = 0; i + 1 < layout_.placements.size(); ++i) {
    const auto& other = layout_.placements[i];
    const ObjectSpec* other_spec = scene_.find_object(other.object_id);
    const Polygon ofp =
        footprint_polygon(other_spec->dims[0], other_spec->dims[1], other);
    if (intersection_area(fp, ofp) > config_.tau_reject) {
      rejected = true;
      break;
    }
  }
  if (!rejected) {
    const double rho = intersection_area(fp, room_polygon(scene_.room)) /
                       (object.footprint_area() + 1e-8);
    if (rho < config_.tau_contain) rejected = true;
  }

  StepOutcome outcome;
  outcome.breakdown = current_energy();
  outcome.reward_g = config_.delta_reward ? -(outcome.breakdown.total - last_total_)
                                          : -outcome.breakdown.total;
  if (rejected) {
    layout_.placements.pop_back();
    rejected_[static_cast<std::size_t>(action)] = 1;
    ++retries_;
    if (retries_ >= config_.n_retry) {
      layout_.skipped.push_back(object.id);
      outcome.skipped = true;
      advance();
    }
  } else {
    outcome.placed = true;
    last_total_ = outcome.breakdown.total;
    advance();
  }
  outcome.done = done();
  return outcome;
}

StepOutcome PlacementEnv::skip_pending() {
  if (done()) {
    throw_error(ErrorKind::contract, "cannot skip on a completed episode");
  }
  layout_.skipped.push_back(pending().id);
  advance();
  StepOutcome outcome;
  outcome.breakdown = current_energy();
  outcome.reward_g = config_.delta_reward ? -(outcome.breakdown.total - last_total_)
                                          : -outcome.breakdown.total;
  outcome.skipped = true;
  outcome.done = done();
  return outcome;
}

}  // namespace placekit
