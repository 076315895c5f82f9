#include <cstdlib>
#include <string>
#include <vector>

#include "doctest.h"
#include "placekit/error.hpp"
#include "placekit/render.hpp"
#include "placekit/scene.hpp"
#include "placekit/vr.hpp"
#include "support/helpers.hpp"

using namespace placekit;
using testsupport::make_object;
using testsupport::make_room;
using testsupport::place;

namespace {

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t at = text.find(needle); at != std::string::npos;
       at = text.find(needle, at + needle.size()))
    ++n;
  return n;
}

// The scene behind the committed golden render: one object per role, a south
// door, a rotated bed, a functional desk, and the top viewpoint candidates.
SceneSpec golden_scene() {
  SceneSpec scene = make_room(5.0, 4.0);
  Door door;
  door.wall = Wall::south;
  door.offset = 2.0;
  door.width = 0.9;
  scene.room.doors.push_back(door);

  ObjectSpec bed = make_object("bed", 2.0, 1.5);
  bed.role = Role::anchor;
  ObjectSpec desk = make_object("desk", 1.2, 0.6);
  desk.role = Role::inference;
  desk.functional = true;
  ObjectSpec mug = make_object("mug", 0.3, 0.3);
  mug.role = Role::key;
  ObjectSpec plant = make_object("plant", 0.4, 0.4);
  scene.objects = {bed, desk, mug, plant};
  return scene;
}

Layout golden_layout() {
  Layout layout;
  layout.placements = {place("bed", 1.2, 2.9), place("desk", 3.9, 2.0, -1.5707963267948966),
                       place("mug", 3.0, 1.5), place("plant", 4.5, 0.6, 0.25)};
  return layout;
}

}  // namespace

TEST_CASE("an empty layout renders the room outline only") {
  SceneSpec scene = make_room(3.0, 2.0);
  const std::string svg = render_svg(scene, Layout{});
  CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
  CHECK(svg.find("class=\"room\"") != std::string::npos);
  CHECK(svg.find("width=\"300.00\"") != std::string::npos);
  CHECK(svg.find("class=\"object\"") == std::string::npos);
  CHECK(svg.find("class=\"clearance\"") == std::string::npos);
  CHECK(svg.substr(svg.size() - 7) == "</svg>\n");
  // The agent start marker defaults to the room center.
  CHECK(svg.find("cx=\"150.00\" cy=\"100.00\"") != std::string::npos);
}

TEST_CASE("a rotated object carries its angle in degrees") {
  SceneSpec scene = make_room(4.0, 4.0);
  scene.objects.push_back(make_object("sofa", 1.8, 0.9));
  Layout layout;
  layout.placements = {place("sofa", 2.0, 2.0, 0.5)};
  const std::string svg = render_svg(scene, layout);
  CHECK(svg.find("transform=\"rotate(28.65 200.00 200.00)\"") != std::string::npos);
  CHECK(svg.find(">sofa</text>") != std::string::npos);
}

TEST_CASE("functional objects render a dashed clearance region") {
  SceneSpec scene = make_room(5.0, 5.0);
  ObjectSpec desk = make_object("desk", 1.2, 0.6);
  desk.functional = true;
  scene.objects = {desk, make_object("plant", 0.4, 0.4)};
  Layout layout;
  layout.placements = {place("desk", 2.5, 2.5), place("plant", 1.0, 1.0)};
  const std::string svg = render_svg(scene, layout);
  CHECK(count_of(svg, "class=\"clearance\"") == 1);
  CHECK(count_of(svg, "class=\"object\"") == 2);
}

TEST_CASE("doors render a panel and a swing arc") {
  SceneSpec scene = make_room(5.0, 4.0);
  Door door;
  door.wall = Wall::south;
  door.offset = 1.0;
  door.width = 0.8;
  scene.room.doors.push_back(door);
  const std::string svg = render_svg(scene, Layout{});
  CHECK(svg.find("class=\"door-panel\" x1=\"100.00\" y1=\"0.00\" x2=\"100.00\" y2=\"80.00\"") !=
        std::string::npos);
  CHECK(svg.find("d=\"M 180.00 0.00 A 80.00 80.00 0 0 1 100.00 80.00\"") != std::string::npos);
}

TEST_CASE("object names are XML-escaped") {
  SceneSpec scene = make_room(3.0, 3.0);
  scene.objects.push_back(make_object("tv", 1.0, 0.4));
  scene.objects.back().name = "tv & <stand>";
  Layout layout;
  layout.placements = {place("tv", 1.5, 1.5)};
  const std::string svg = render_svg(scene, layout);
  CHECK(svg.find(">tv &amp; &lt;stand&gt;</text>") != std::string::npos);
}

TEST_CASE("viewpoint candidates render as circles with gaze lines") {
  SceneSpec scene = make_room(6.0, 6.0);
  scene.objects.push_back(make_object("anchor", 1.0, 1.0));
  Layout layout;
  layout.placements = {place("anchor", 3.0, 3.0)};
  const auto viewpoints = sample_viewpoints(scene, layout, "anchor", {});
  REQUIRE(viewpoints.size() >= 2);
  const std::vector<ViewpointCandidate> two(viewpoints.begin(), viewpoints.begin() + 2);
  const std::string svg = render_svg(scene, layout, two);
  CHECK(count_of(svg, "class=\"viewpoint\"") == 2);
  CHECK(count_of(svg, "class=\"gaze\"") == 2);
}

TEST_CASE("a dangling placement id fails the render") {
  SceneSpec scene = make_room(3.0, 3.0);
  Layout layout;
  layout.placements = {place("ghost", 1.0, 1.0)};
  try {
    render_svg(scene, layout);
    FAIL("expected a reference error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::reference);
  }
}

TEST_CASE("the golden fixture render is byte-stable") {
  const SceneSpec scene = golden_scene();
  const Layout layout = golden_layout();
  SamplerConfig config;
  config.seed = 7;
  auto viewpoints = sample_viewpoints(scene, layout, "desk", config);
  REQUIRE(viewpoints.size() >= 3);
  viewpoints.resize(3);
  const std::string svg = render_svg(scene, layout, viewpoints);
  CHECK(svg == render_svg(scene, layout, viewpoints));

  const std::string golden_path = std::string(PLACEKIT_GOLDEN_DIR) + "/layout.svg";
  if (std::getenv("PLACEKIT_REBUILD_GOLDEN") != nullptr) {
    write_text_file(golden_path, svg);
    MESSAGE("rebuilt golden fixture at ", golden_path);
  }
  CHECK(svg == read_text_file(golden_path));
}
