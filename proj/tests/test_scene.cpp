#include <cmath>

#include "doctest.h"
#include "placekit/error.hpp"
#include "placekit/rng.hpp"
#include "placekit/scene.hpp"

using namespace placekit;

namespace {

const char* kBedroomJson = R"({
  "room": {"width": 4.0, "depth": 3.0,
           "doors": [{"wall": "S", "offset": 1.5, "width": 1.0}]},
  "objects": [
    {"id": "bed", "name": "bed", "dims": [2.0, 1.6, 0.5], "role": "anchor"},
    {"id": "lamp", "name": "lamp", "dims": [0.3, 0.3, 1.2],
     "flags": ["pickupable"], "mass": 2.5},
    {"id": "heater", "name": "heater", "dims": [0.5, 0.3, 0.8],
     "functional": true, "flags": ["heat_source"]}
  ],
  "constraints": [
    {"kind": "against_wall", "subject": "bed"},
    {"kind": "near", "subject": "lamp", "target": "bed", "params": {"d_max": 0.8}}
  ],
  "instruction": "set up a cozy bedroom",
  "room_type": "bedroom"
})";

}  // namespace

TEST_CASE("scene: loads a full scene with defaults applied") {
  const SceneSpec scene = load_scene(kBedroomJson);
  CHECK(scene.room.width == 4.0);
  CHECK(scene.room.depth == 3.0);
  REQUIRE(scene.room.doors.size() == 1);
  CHECK(scene.room.doors[0].wall == Wall::south);
  REQUIRE(scene.objects.size() == 3);
  CHECK(scene.objects[0].role == Role::anchor);
  CHECK(scene.objects[1].role == Role::filler);  // default
  CHECK(scene.objects[1].flags.pickupable);
  CHECK(scene.objects[1].mass == 2.5);
  CHECK_FALSE(scene.objects[0].functional);  // default
  CHECK(scene.objects[2].functional);
  REQUIRE(scene.constraints.size() == 2);
  CHECK(scene.constraints[0].kind == ConstraintKind::against_wall);
  CHECK_FALSE(scene.constraints[0].target.has_value());
  CHECK(scene.constraints[1].params.d_max == 0.8);
  CHECK(scene.instruction == "set up a cozy bedroom");
}

TEST_CASE("scene: agent start defaults to first door centroid, else room center") {
  SceneSpec scene = load_scene(kBedroomJson);
  const Vec2 start = scene.room.start();
  CHECK(start.x == doctest::Approx(2.0));
  CHECK(start.y == doctest::Approx(0.0));

  scene.room.doors.clear();
  const Vec2 center = scene.room.start();
  CHECK(center.x == doctest::Approx(2.0));
  CHECK(center.y == doctest::Approx(1.5));

  scene.room.agent_start = Vec2{1.0, 1.0};
  CHECK(scene.room.start().x == doctest::Approx(1.0));
}

TEST_CASE("scene: malformed JSON raises a parse error") {
  CHECK_THROWS_AS(load_scene("{not json"), Error);
  try {
    load_scene("{not json");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
  }
}

TEST_CASE("scene: schema errors name the offending path") {
  try {
    load_scene(R"({"room": {"width": 4.0, "depth": 3.0},
                   "objects": [{"id": "a", "name": "a", "dims": [1, 1]}]})");
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::schema);
    CHECK(std::string(e.what()).find("$.objects[0].dims") != std::string::npos);
  }
}

TEST_CASE("scene: dangling constraint reference is rejected") {
  try {
    load_scene(R"({"room": {"width": 4.0, "depth": 3.0},
                   "objects": [{"id": "a", "name": "a", "dims": [1, 1, 1]}],
                   "constraints": [{"kind": "near", "subject": "a", "target": "ghost",
                                    "params": {"d_max": 1.0}}]})");
    FAIL("expected a reference error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::reference);
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
}

TEST_CASE("scene: validate_scene flags semantic violations") {
  SceneSpec scene = load_scene(kBedroomJson);

  SUBCASE("valid scene has no violations") { CHECK(validate_scene(scene).empty()); }

  SUBCASE("non-positive room dims") {
    scene.room.width = 0.0;
    CHECK_FALSE(validate_scene(scene).empty());
  }
  SUBCASE("door overflowing its wall") {
    scene.room.doors[0].offset = 3.8;  // 3.8 + 1.0 > 4.0
    CHECK_FALSE(validate_scene(scene).empty());
  }
  SUBCASE("duplicate object ids") {
    scene.objects.push_back(scene.objects[0]);
    CHECK_FALSE(validate_scene(scene).empty());
  }
  SUBCASE("agent start outside the room") {
    scene.room.agent_start = Vec2{9.0, 0.5};
    CHECK_FALSE(validate_scene(scene).empty());
  }
  SUBCASE("global kind with a target") {
    scene.constraints[0].target = "lamp";
    CHECK_FALSE(validate_scene(scene).empty());
  }
  SUBCASE("near without d_max") {
    scene.constraints[1].params.d_max.reset();
    CHECK_FALSE(validate_scene(scene).empty());
  }
  SUBCASE("params on a kind that takes none") {
    scene.constraints[0].params.d_min = 1.0;
    CHECK_FALSE(validate_scene(scene).empty());
  }
  SUBCASE("pairwise constraint aimed at itself") {
    scene.constraints[1].target = "lamp";
    CHECK_FALSE(validate_scene(scene).empty());
  }
}

TEST_CASE("scene: save/load round-trip is the identity on the serialized form") {
  const SceneSpec scene = load_scene(kBedroomJson);
  const std::string text = save_scene(scene);
  const SceneSpec again = load_scene(text);
  CHECK(save_scene(again) == text);
  CHECK(again.objects.size() == scene.objects.size());
  CHECK(again.room.doors.size() == scene.room.doors.size());
}

TEST_CASE("layout: placements round-trip bit-exactly at 9 significant digits") {
  Rng rng(20240816);
  Layout layout;
  for (int i = 0; i < 10; ++i) {
    Placement p;
    p.object_id = "obj" + std::to_string(i);
    // Positions quantized to millimeters and angles to 1e-6 rad are well
    // within the 9-significant-digit budget of the layout format.
    p.x = std::round(rng.uniform(0.0, 8.0) * 1000.0) / 1000.0;
    p.y = std::round(rng.uniform(0.0, 8.0) * 1000.0) / 1000.0;
    p.theta = std::round(rng.uniform(0.0, 6.28) * 1e6) / 1e6;
    layout.placements.push_back(p);
  }
  layout.skipped = {"left_out"};
  layout.pto_seconds = 0.125;

  const Layout parsed = load_layout(save_layout(layout));
  REQUIRE(parsed.placements.size() == layout.placements.size());
  for (std::size_t i = 0; i < layout.placements.size(); ++i) {
    CHECK(parsed.placements[i].object_id == layout.placements[i].object_id);
    CHECK(parsed.placements[i].x == layout.placements[i].x);
    CHECK(parsed.placements[i].y == layout.placements[i].y);
    CHECK(parsed.placements[i].theta == layout.placements[i].theta);
  }
  CHECK(parsed.skipped == layout.skipped);
  CHECK(parsed.pto_seconds == layout.pto_seconds);
}

TEST_CASE("layout: serialization is byte-stable after one quantization cycle") {
  Layout layout;
  layout.placements.push_back({"a", M_PI, std::sqrt(2.0), M_PI / 2.0});
  const std::string first = save_layout(layout);
  const std::string second = save_layout(load_layout(first));
  CHECK(first == second);
}

TEST_CASE("layout: validate_layout cross-checks against the scene") {
  const SceneSpec scene = load_scene(kBedroomJson);
  Layout layout;
  layout.placements.push_back({"bed", 2.0, 1.5, 0.0});

  SUBCASE("valid") { CHECK(validate_layout(layout, scene).empty()); }
  SUBCASE("unknown object id") {
    layout.placements.push_back({"ghost", 1.0, 1.0, 0.0});
    CHECK_FALSE(validate_layout(layout, scene).empty());
  }
  SUBCASE("duplicate placement") {
    layout.placements.push_back({"bed", 1.0, 1.0, 0.0});
    CHECK_FALSE(validate_layout(layout, scene).empty());
  }
  SUBCASE("theta outside [0, 2*pi)") {
    layout.placements[0].theta = 2.0 * M_PI;
    CHECK_FALSE(validate_layout(layout, scene).empty());
  }
  SUBCASE("placed and skipped simultaneously") {
    layout.skipped.push_back("bed");
    CHECK_FALSE(validate_layout(layout, scene).empty());
  }
}

TEST_CASE("graph: load, validate and round-trip") {
  const char* text = R"({
    "nodes": [{"name": "bed", "size": [2.0, 1.6, 0.5]},
              {"name": "lamp", "description": "reading lamp"}],
    "edges": [{"subject": 1, "relation": "near", "object": 0}]
  })";
  const SceneGraph g = load_graph(text);
  REQUIRE(g.nodes.size() == 2);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].relation == "near");
  CHECK(save_graph(load_graph(save_graph(g))) == save_graph(g));

  SceneGraph bad = g;
  SUBCASE("unknown relation") {
    bad.edges[0].relation = "levitates_above";
    CHECK_FALSE(validate_graph(bad).empty());
  }
  SUBCASE("index out of range") {
    bad.edges[0].object = 7;
    CHECK_FALSE(validate_graph(bad).empty());
  }
  SUBCASE("self loop") {
    bad.edges[0].object = 1;
    CHECK_FALSE(validate_graph(bad).empty());
  }
  SUBCASE("relation vocabulary covers constraint kinds plus on/in") {
    CHECK(graph_relation_vocabulary().size() == 11);
  }
}
