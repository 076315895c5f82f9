#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "placekit/env.hpp"
#include "placekit/error.hpp"
#include "placekit/geometry.hpp"
#include "placekit/providers.hpp"
#include "placekit/rng.hpp"
#include "support/helpers.hpp"

using namespace placekit;
using testsupport::make_object;
using testsupport::make_room;

namespace {

ConstraintSpec global_constraint(const std::string& subject, ConstraintKind kind) {
  ConstraintSpec c;
  c.kind = kind;
  c.subject = subject;
  return c;
}

ConstraintSpec near_constraint(const std::string& subject, const std::string& target,
                               double d_max) {
  ConstraintSpec c;
  c.kind = ConstraintKind::near;
  c.subject = subject;
  c.target = target;
  c.params.d_max = d_max;
  return c;
}

// Canonical action whose decoded cell center is closest to (x, y).
int action_near(const ActionGrid& grid, double x, double y, int orientation) {
  const int col = std::clamp(static_cast<int>(x / grid.cell_w), 0, grid.cols - 1);
  const int row = std::clamp(static_cast<int>(y / grid.cell_h), 0, grid.rows - 1);
  return encode_action(col, row, orientation);
}

}  // namespace

TEST_CASE("reset orders objects largest-first with id tie-breaks") {
  SUBCASE("area ordering") {
    auto scene = make_room(6.0, 6.0);
    scene.objects.push_back(make_object("small", 0.5, 1.0));
    scene.objects.push_back(make_object("big", 2.0, 1.0));
    scene.objects.push_back(make_object("mid", 1.0, 1.0));
    PlacementEnv env(scene);
    CHECK(env.order() == std::vector<std::string>{"big", "mid", "small"});
    CHECK(env.pending().id == "big");
  }
  SUBCASE("equal areas fall back to id order") {
    auto scene = make_room(6.0, 6.0);
    scene.objects.push_back(make_object("b", 1.0, 1.0));
    scene.objects.push_back(make_object("a", 1.0, 1.0));
    PlacementEnv env(scene);
    CHECK(env.order() == std::vector<std::string>{"a", "b"});
  }
  SUBCASE("a scene with no objects is immediately done") {
    PlacementEnv env(make_room(4.0, 4.0));
    CHECK(env.done());
    CHECK_THROWS_AS(env.pending(), Error);
    CHECK_THROWS_AS(env.encode_global_state(), Error);
    CHECK_THROWS_AS(env.action_grid(), Error);
    CHECK_THROWS_AS(env.step(0), Error);
  }
}

TEST_CASE("global state encodes constraint mix, size ratios, and progress") {
  auto scene = make_room(4.0, 4.0);
  scene.objects.push_back(make_object("big", 1.0, 1.0));
  scene.objects.push_back(make_object("mid", 0.5, 0.5));
  scene.objects.push_back(make_object("small", 0.4, 0.4));
  scene.constraints.push_back(global_constraint("big", ConstraintKind::center));
  scene.constraints.push_back(near_constraint("big", "mid", 1.0));
  PlacementEnv env(scene);

  const auto s = env.encode_global_state();
  CHECK(s.v[0] == doctest::Approx(0.5));
  CHECK(s.v[1] == doctest::Approx(0.25));
  CHECK(s.v[2] == doctest::Approx(0.25));
  CHECK(s.v[3] == doctest::Approx(0.0625));
  CHECK(s.v[4] == doctest::Approx(1.0));

  SUBCASE("the last remaining object reports one third left and no constraints") {
    REQUIRE(env.step(action_near(env.action_grid(), 2.0, 2.0, 0)).placed);
    REQUIRE(env.step(action_near(env.action_grid(), 0.8, 0.8, 0)).placed);
    const auto last = env.encode_global_state();
    CHECK(last.v[0] == doctest::Approx(0.0));
    CHECK(last.v[1] == doctest::Approx(0.1));
    CHECK(last.v[4] == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("global state ratios clip at one for oversized objects") {
  auto scene = make_room(4.0, 4.0);
  scene.objects.push_back(make_object("huge", 6.0, 6.0));
  PlacementEnv env(scene);
  const auto s = env.encode_global_state();
  CHECK(s.v[1] == 1.0);
  CHECK(s.v[2] == 1.0);
  CHECK(s.v[3] == 1.0);
}

TEST_CASE("local graph connects by distance and by constraint") {
  auto embedder = make_mock_embedding_provider();

  SUBCASE("a lone pending node forms a single-node graph") {
    auto scene = make_room(4.0, 4.0);
    scene.objects.push_back(make_object("bed", 1.0, 1.0));
    PlacementEnv env(scene);
    const auto graph = env.encode_local_graph(*embedder);
    REQUIRE(graph.nodes.size() == 1);
    CHECK(graph.pending == 0);
    CHECK(graph.edges.empty());
    CHECK(graph.neighbors[0].empty());
    REQUIRE(graph.nodes[0].size() == static_cast<std::size_t>(kNodeFeatureDim));
    // Pending pose dims (the last four entries) are zeroed.
    for (int d = 2; d < 6; ++d) {
      CHECK(graph.nodes[0][static_cast<std::size_t>(kEmbedDim + d)] == 0.0);
    }
    CHECK(graph.nodes[0][kEmbedDim] == doctest::Approx(0.25));
    // The first 512 entries are the unit-norm text embedding.
    double norm = 0.0;
    for (int d = 0; d < kEmbedDim; ++d) {
      norm += graph.nodes[0][static_cast<std::size_t>(d)] *
              graph.nodes[0][static_cast<std::size_t>(d)];
    }
    CHECK(std::abs(norm - 1.0) < 1e-9);
  }

  SUBCASE("nearby placed objects and constraint partners gain edges") {
    auto scene = make_room(6.0, 6.0);
    scene.objects.push_back(make_object("a", 1.0, 1.0));
    scene.objects.push_back(make_object("b", 0.9, 0.9));
    scene.objects.push_back(make_object("c", 0.5, 0.5));
    scene.constraints.push_back(near_constraint("c", "a", 1.5));
    PlacementEnv env(scene);
    REQUIRE(env.step(action_near(env.action_grid(), 2.0, 2.0, 0)).placed);   // a
    REQUIRE(env.step(action_near(env.action_grid(), 3.0, 2.0, 0)).placed);   // b

    const auto graph = env.encode_local_graph(*embedder);
    REQUIRE(graph.nodes.size() == 3);
    CHECK(graph.pending == 2);
    REQUIRE(graph.edges.size() == 2);

    // Edge 0: a-b by proximity (1 m apart), with geometric features.
    CHECK(graph.edges[0].a == 0);
    CHECK(graph.edges[0].b == 1);
    CHECK(graph.edges[0].features[0] == doctest::Approx(1.0));
    CHECK(graph.edges[0].features[1] == doctest::Approx(0.0));
    CHECK(graph.edges[0].features[2] == doctest::Approx(1.0));
    for (int k = 0; k < kConstraintKindCount; ++k) {
      CHECK(graph.edges[0].features[static_cast<std::size_t>(3 + k)] == 0.0);
    }

    // Edge 1: a-pending via the near constraint; geometry zeroed, kind set.
    CHECK(graph.edges[1].a == 0);
    CHECK(graph.edges[1].b == 2);
    CHECK(graph.edges[1].features[0] == 0.0);
    CHECK(graph.edges[1].features[3 + static_cast<int>(ConstraintKind::near)] == 1.0);

    CHECK(graph.neighbors[0] == std::vector<int>{1, 2});
    CHECK(graph.neighbors[1] == std::vector<int>{0});
    CHECK(graph.neighbors[2] == std::vector<int>{0});
  }

  SUBCASE("distant unconstrained objects stay disconnected") {
    auto scene = make_room(8.0, 8.0);
    scene.objects.push_back(make_object("a", 1.0, 1.0));
    scene.objects.push_back(make_object("b", 0.9, 0.9));
    scene.objects.push_back(make_object("c", 0.5, 0.5));
    PlacementEnv env(scene);
    REQUIRE(env.step(action_near(env.action_grid(), 1.0, 1.0, 0)).placed);
    REQUIRE(env.step(action_near(env.action_grid(), 6.0, 6.0, 0)).placed);
    const auto graph = env.encode_local_graph(*embedder);
    CHECK(graph.edges.empty());
  }
}

TEST_CASE("the action grid discretizes the room and masks containment") {
  SUBCASE("a 4 m room at 0.25 m resolution gives 16 cells per axis") {
    auto scene = make_room(4.0, 4.0);
    scene.objects.push_back(make_object("box", 1.0, 1.0));
    PlacementEnv env(scene);
    const auto& grid = env.action_grid();
    CHECK(grid.cols == 16);
    CHECK(grid.rows == 16);
    CHECK(grid.cell_w == doctest::Approx(0.25));
    // A 1x1 footprint fits when its center is in [0.5, 3.5]^2: cell centers
    // (c+0.5)/4 land there for c in [2, 13], i.e. 12 columns x 12 rows x 4
    // orientations.
    CHECK(grid.valid_count == 12 * 12 * 4);
    CHECK(static_cast<int>(grid.mask.size()) == kActionCount);
  }
  SUBCASE("large rooms are capped at 40 cells by coarsening") {
    auto scene = make_room(12.0, 4.0);
    scene.objects.push_back(make_object("box", 1.0, 1.0));
    PlacementEnv env(scene);
    const auto& grid = env.action_grid();
    CHECK(grid.cols == kGridCap);
    CHECK(grid.cell_w == doctest::Approx(0.3));
    CHECK(grid.rows == 16);
  }
  SUBCASE("every unmasked action decodes to a fully contained footprint") {
    auto scene = make_room(5.0, 3.0);
    scene.objects.push_back(make_object("sofa", 2.0, 0.9));
    PlacementEnv env(scene);
    const auto& grid = env.action_grid();
    const Polygon room = room_polygon(scene.room);
    int checked = 0;
    for (int action = 0; action < kActionCount; ++action) {
      if (grid.mask[static_cast<std::size_t>(action)] == 0) continue;
      const auto pose = decode_action(grid, action);
      CHECK(pose.x > 0.0);
      CHECK(pose.x < 5.0);
      const Polygon fp =
          footprint_polygon(2.0, 0.9, {"sofa", pose.x, pose.y, pose.theta});
      CHECK(intersection_area(fp, room) >= 2.0 * 0.9 - 1e-9);
      ++checked;
    }
    CHECK(checked == grid.valid_count);
    CHECK(checked > 0);
    // The 2.0-wide footprint fits upright everywhere it fits rotated only
    // if the room is wide enough; at depth 3 the rotated (0.9 x 2.0) variant
    // has fewer valid rows than the upright one has columns.
    CHECK_THROWS_AS(decode_action(grid, -1), Error);
    CHECK_THROWS_AS(decode_action(grid, kActionCount), Error);
  }
  SUBCASE("an object larger than the room has an empty mask") {
    auto scene = make_room(4.0, 4.0);
    scene.objects.push_back(make_object("huge", 5.0, 5.0));
    PlacementEnv env(scene);
    CHECK(env.action_grid().valid_count == 0);
    const auto outcome = env.skip_pending();
    CHECK(outcome.skipped);
    CHECK(outcome.done);
    CHECK(env.layout().skipped == std::vector<std::string>{"huge"});
  }
}

TEST_CASE("stepping places objects and rewards the negated energy") {
  auto scene = make_room(4.0, 4.0);
  scene.room.doors.push_back({Wall::south, 1.5, 1.0});
  scene.objects.push_back(make_object("table", 1.0, 1.0));
  PlacementEnv env(scene);

  SUBCASE("a clean centered placement of the sole object scores zero") {
    const auto outcome = env.step(action_near(env.action_grid(), 2.0, 2.0, 0));
    CHECK(outcome.placed);
    CHECK(outcome.done);
    CHECK(outcome.reward_g == doctest::Approx(0.0));
    CHECK(outcome.breakdown.total == doctest::Approx(0.0));
    REQUIRE(env.layout().placements.size() == 1);
    CHECK(env.layout().placements[0].object_id == "table");
    CHECK(env.done());
  }
  SUBCASE("masked actions and double-stepping are contract errors") {
    CHECK_THROWS_AS(env.step(encode_action(0, 0, 0)), Error);  // corner: no fit
    REQUIRE(env.step(action_near(env.action_grid(), 2.0, 2.0, 0)).placed);
    CHECK_THROWS_AS(env.step(action_near(ActionGrid{16, 16, 0.25, 0.25, {}, 0}, 2.0, 2.0, 0)),
                    Error);
  }
}

TEST_CASE("collisions reject the attempt and eventually skip the object") {
  auto scene = make_room(4.0, 4.0);
  scene.room.doors.push_back({Wall::south, 1.5, 1.0});
  scene.objects.push_back(make_object("a", 3.0, 3.0));
  scene.objects.push_back(make_object("b", 3.0, 3.0));
  PlacementEnv env(scene);
  REQUIRE(env.step(action_near(env.action_grid(), 2.0, 2.0, 0)).placed);

  // Any placement of the second 3x3 object in a 4x4 room overlaps the first.
  const auto& grid = env.action_grid();
  int first_valid = -1;
  for (int action = 0; action < kActionCount && first_valid < 0; ++action) {
    if (grid.mask[static_cast<std::size_t>(action)] != 0) first_valid = action;
  }
  REQUIRE(first_valid >= 0);

  auto outcome = env.step(first_valid);
  CHECK_FALSE(outcome.placed);
  CHECK_FALSE(outcome.done);
  CHECK(env.retries_used() == 1);
  CHECK(outcome.reward_g < 0.0);  // the tentative layout carries collision energy
  CHECK(env.layout().placements.size() == 1);

  for (int attempt = 1; attempt < env.config().n_retry; ++attempt) {
    outcome = env.step(first_valid);
  }
  CHECK(outcome.skipped);
  CHECK(outcome.done);
  CHECK(env.layout().skipped == std::vector<std::string>{"b"});
  CHECK(env.steps_taken() <= 2 * (1 + env.config().n_retry));
}

TEST_CASE("episodes are deterministic and rewards never exceed zero") {
  auto scene = make_room(5.0, 5.0);
  scene.room.doors.push_back({Wall::west, 2.0, 1.0});
  scene.objects.push_back(make_object("bed", 2.0, 1.5));
  scene.objects.push_back(make_object("desk", 1.2, 0.6));
  scene.objects.push_back(make_object("chair", 0.5, 0.5));
  scene.constraints.push_back(near_constraint("chair", "desk", 1.0));
  scene.constraints.push_back(global_constraint("bed", ConstraintKind::against_wall));

  auto run = [&](std::uint64_t seed) {
    PlacementEnv env(scene);
    Rng rng(seed);
    std::vector<double> rewards;
    while (!env.done()) {
      const auto& grid = env.action_grid();
      std::vector<int> valid;
      for (int action = 0; action < kActionCount; ++action) {
        if (grid.mask[static_cast<std::size_t>(action)] != 0) valid.push_back(action);
      }
      REQUIRE_FALSE(valid.empty());
      const auto outcome =
          env.step(valid[rng.uniform_int(valid.size())]);
      rewards.push_back(outcome.reward_g);
    }
    return std::make_pair(env.layout(), rewards);
  };

  const auto [layout1, rewards1] = run(7);
  const auto [layout2, rewards2] = run(7);
  REQUIRE(layout1.placements.size() == layout2.placements.size());
  for (std::size_t i = 0; i < layout1.placements.size(); ++i) {
    CHECK(layout1.placements[i].object_id == layout2.placements[i].object_id);
    CHECK(layout1.placements[i].x == layout2.placements[i].x);
    CHECK(layout1.placements[i].y == layout2.placements[i].y);
    CHECK(layout1.placements[i].theta == layout2.placements[i].theta);
  }
  CHECK(rewards1 == rewards2);
  for (double r : rewards1) CHECK(r <= 1e-12);

  const auto [layout3, rewards3] = run(8);
  CHECK((layout3.placements.size() != layout1.placements.size() ||
         rewards3 != rewards1 || true));  // different seed may or may not differ
}

TEST_CASE("delta rewards track energy differences") {
  auto scene = make_room(4.0, 4.0);
  scene.room.doors.push_back({Wall::south, 1.5, 1.0});
  scene.objects.push_back(make_object("a", 1.0, 1.0));
  scene.objects.push_back(make_object("b", 0.9, 0.9));
  scene.constraints.push_back(near_constraint("b", "a", 0.5));
  EnvConfig config;
  config.delta_reward = true;
  PlacementEnv env(scene, config);

  const auto first = env.step(action_near(env.action_grid(), 1.0, 1.0, 0));
  REQUIRE(first.placed);
  // Far from "a": the near constraint is violated, energy rises, reward dips.
  const auto second = env.step(action_near(env.action_grid(), 3.0, 3.0, 0));
  REQUIRE(second.placed);
  CHECK(second.reward_g == doctest::Approx(-(second.breakdown.total - first.breakdown.total)));
  CHECK(second.reward_g < 0.0);
}
