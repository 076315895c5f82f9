#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace placekit {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }

enum class Wall { north, south, east, west };

// Door on a wall.  `offset` is measured from the west end for N/S walls and
// from the south end for E/W walls; `width` extends along the same axis.
struct Door {
  Wall wall = Wall::south;
  double offset = 0.0;
  double width = 0.0;
};

// Axis-aligned rectangular room spanning [0,width] x [0,depth].
struct RoomSpec {
  double width = 0.0;
  double depth = 0.0;
  std::vector<Door> doors;
  std::optional<Vec2> agent_start;

  // Resolved navigation start: explicit value, else the centroid of the first
  // door, else the room center.
  Vec2 start() const;
  Vec2 door_centroid(const Door& d) const;
};

enum class Role { key, anchor, inference, filler };

struct ObjectFlags {
  bool pickupable = false;
  bool heat_source = false;
  bool cold_source = false;
};

struct ObjectSpec {
  std::string id;
  std::string name;
  std::array<double, 3> dims{0.0, 0.0, 0.0};  // width, depth, height (m)
  Role role = Role::filler;
  bool functional = false;
  ObjectFlags flags;
  std::optional<double> mass;

  double footprint_area() const { return dims[0] * dims[1]; }
};

enum class ConstraintKind {
  edge,
  center,
  against_wall,
  near,
  far_from,
  facing,
  in_front_of,
  side_of,
  aligned_with,
};

constexpr int kConstraintKindCount = 9;

// edge/center/against_wall relate an object to the room; the rest are pairwise.
bool is_global_kind(ConstraintKind k);

enum class Side { left, right };

struct ConstraintParams {
  std::optional<double> d_max;      // near
  std::optional<double> d_min;      // far_from
  std::optional<Side> side;         // side_of
};

struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::near;
  std::string subject;
  std::optional<std::string> target;  // empty for global kinds
  ConstraintParams params;
};

struct SceneSpec {
  RoomSpec room;
  std::vector<ObjectSpec> objects;
  std::vector<ConstraintSpec> constraints;
  std::optional<std::string> instruction;
  std::optional<std::string> room_type;

  const ObjectSpec* find_object(const std::string& id) const;
  int object_index(const std::string& id) const;  // -1 when absent
};

// theta is the counterclockwise rotation of the object frame, in [0, 2*pi).
// The object's facing direction is its local +y axis.
struct Placement {
  std::string object_id;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

struct Layout {
  std::vector<Placement> placements;
  std::vector<std::string> skipped;
  double pto_seconds = 0.0;  // wall seconds spent per object while solving

  const Placement* find(const std::string& object_id) const;
};

struct GraphNode {
  std::string name;
  std::string description;
  std::array<double, 3> size{0.0, 0.0, 0.0};
};

struct GraphEdge {
  int subject = 0;  // node index
  std::string relation;
  int object = 0;  // node index
};

struct SceneGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
};

const char* to_string(Role r);
const char* to_string(ConstraintKind k);
const char* to_string(Wall w);
const char* to_string(Side s);
std::optional<Role> role_from_string(const std::string& s);
std::optional<ConstraintKind> constraint_kind_from_string(const std::string& s);

// Relation labels accepted in scene graphs: the nine constraint kinds plus
// the containment relations "on" and "in".
const std::vector<std::string>& graph_relation_vocabulary();

// --- JSON (de)serialization -------------------------------------------------
//
// Scene files:
//   {"room":{"width":f,"depth":f,"doors":[{"wall":"N","offset":f,"width":f}],
//            "agent_start":[x,y]?},
//    "objects":[{"id":s,"name":s,"dims":[w,d,h],"role":s?,"functional":b?,
//                "flags":[s]?,"mass":f?}],
//    "constraints":[{"kind":s,"subject":s,"target":s?,"params":{...}?}],
//    "instruction":s?,"room_type":s?}
//
// Layout files:
//   {"placements":[{"id":s,"x":f,"y":f,"theta":f}],"skipped":[s],
//    "pto_seconds":f}
//
// Layout numbers are written with 9 significant decimal digits; values
// representable at that precision round-trip bit-exactly and a second
// save/load cycle is always byte-stable.

SceneSpec load_scene(const std::string& json_text);
std::string save_scene(const SceneSpec& scene);

// Semantic checks (dangling references, bad params, ...).  Returns one
// human-readable violation per problem; empty means valid.  load_scene runs
// this and throws on the first violation.
std::vector<std::string> validate_scene(const SceneSpec& scene);

Layout load_layout(const std::string& json_text);
std::string save_layout(const Layout& layout);
std::vector<std::string> validate_layout(const Layout& layout, const SceneSpec& scene);

SceneGraph load_graph(const std::string& json_text);
std::string save_graph(const SceneGraph& graph);
std::vector<std::string> validate_graph(const SceneGraph& graph);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace placekit
