#include "placekit/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "placekit/error.hpp"

namespace placekit {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
  throw_error(ErrorKind::schema, path + ": " + what);
}

double require_number(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) schema_fail(path, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) schema_fail(path, "expected a finite number");
  return v;
}

std::string require_string(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) schema_fail(path, "expected a string");
  return j.get<std::string>();
}

bool require_bool(const ordered_json& j, const std::string& path) {
  if (!j.is_boolean()) schema_fail(path, "expected a boolean");
  return j.get<bool>();
}

const ordered_json& require_array(const ordered_json& j, const std::string& path) {
  if (!j.is_array()) schema_fail(path, "expected an array");
  return j;
}

const ordered_json& require_object(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) schema_fail(path, "expected an object");
  return j;
}

void reject_unknown_keys(const ordered_json& j, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) schema_fail(path, "unknown key \"" + it.key() + "\"");
  }
}

std::array<double, 3> parse_dims3(const ordered_json& j, const std::string& path) {
  require_array(j, path);
  if (j.size() != 3) schema_fail(path, "expected 3 numbers");
  return {require_number(j[0], path + "[0]"), require_number(j[1], path + "[1]"),
          require_number(j[2], path + "[2]")};
}

ordered_json parse_json_text(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw_error(ErrorKind::parse, "malformed JSON");
  return j;
}

// Formats a double with 9 significant digits; a value already representable
// at that precision survives a parse/format cycle byte-for-byte.
std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string quoted(const std::string& s) { return ordered_json(s).dump(); }

}  // namespace

Vec2 RoomSpec::door_centroid(const Door& d) const {
  switch (d.wall) {
    case Wall::south: return {d.offset + d.width / 2.0, 0.0};
    case Wall::north: return {d.offset + d.width / 2.0, depth};
    case Wall::west: return {0.0, d.offset + d.width / 2.0};
    case Wall::east: return {width, d.offset + d.width / 2.0};
  }
  return {0.0, 0.0};
}

Vec2 RoomSpec::start() const {
  if (agent_start) return *agent_start;
  if (!doors.empty()) return door_centroid(doors.front());
  return {width / 2.0, depth / 2.0};
}

bool is_global_kind(ConstraintKind k) {
  return k == ConstraintKind::edge || k == ConstraintKind::center ||
         k == ConstraintKind::against_wall;
}

const ObjectSpec* SceneSpec::find_object(const std::string& id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

int SceneSpec::object_index(const std::string& id) const {
  for (std::size_t i = 0; i < objects.size(); ++i)
    if (objects[i].id == id) return static_cast<int>(i);
  return -1;
}

const Placement* Layout::find(const std::string& object_id) const {
  for (const auto& p : placements)
    if (p.object_id == object_id) return &p;
  return nullptr;
}

const char* to_string(Role r) {
  switch (r) {
    case Role::key: return "key";
    case Role::anchor: return "anchor";
    case Role::inference: return "inference";
    case Role::filler: return "filler";
  }
  return "filler";
}

const char* to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::edge: return "edge";
    case ConstraintKind::center: return "center";
    case ConstraintKind::against_wall: return "against_wall";
    case ConstraintKind::near: return "near";
    case ConstraintKind::far_from: return "far_from";
    case ConstraintKind::facing: return "facing";
    case ConstraintKind::in_front_of: return "in_front_of";
    case ConstraintKind::side_of: return "side_of";
    case ConstraintKind::aligned_with: return "aligned_with";
  }
  return "near";
}

const char* to_string(Wall w) {
  switch (w) {
    case Wall::north: return "N";
    case Wall::south: return "S";
    case Wall::east: return "E";
    case Wall::west: return "W";
  }
  return "S";
}

const char* to_string(Side s) { return s == Side::left ? "left" : "right"; }

std::optional<Role> role_from_string(const std::string& s) {
  if (s == "key") return Role::key;
  if (s == "anchor") return Role::anchor;
  if (s == "inference") return Role::inference;
  if (s == "filler") return Role::filler;
  return std::nullopt;
}

std::optional<ConstraintKind> constraint_kind_from_string(const std::string& s) {
  static const std::pair<const char*, ConstraintKind> table[] = {
      {"edge", ConstraintKind::edge},
      {"center", ConstraintKind::center},
      {"against_wall", ConstraintKind::against_wall},
      {"near", ConstraintKind::near},
      {"far_from", ConstraintKind::far_from},
      {"facing", ConstraintKind::facing},
      {"in_front_of", ConstraintKind::in_front_of},
      {"side_of", ConstraintKind::side_of},
      {"aligned_with", ConstraintKind::aligned_with},
  };
  for (const auto& [name, kind] : table)
    if (s == name) return kind;
  return std::nullopt;
}

const std::vector<std::string>& graph_relation_vocabulary() {
  static const std::vector<std::string> vocab = {
      "edge",       "center",  "against_wall", "near",         "far_from", "facing",
      "in_front_of", "side_of", "aligned_with", "on",           "in"};
  return vocab;
}

SceneSpec load_scene(const std::string& json_text) {
  ordered_json j = parse_json_text(json_text);
  require_object(j, "$");
  reject_unknown_keys(j, "$", {"room", "objects", "constraints", "instruction", "room_type"});
  if (!j.contains("room")) schema_fail("$", "missing \"room\"");
  if (!j.contains("objects")) schema_fail("$", "missing \"objects\"");

  SceneSpec scene;
  const auto& room = require_object(j["room"], "$.room");
  reject_unknown_keys(room, "$.room", {"width", "depth", "doors", "agent_start"});
  if (!room.contains("width") || !room.contains("depth"))
    schema_fail("$.room", "missing \"width\" or \"depth\"");
  scene.room.width = require_number(room["width"], "$.room.width");
  scene.room.depth = require_number(room["depth"], "$.room.depth");
  if (room.contains("doors")) {
    const auto& doors = require_array(room["doors"], "$.room.doors");
    for (std::size_t i = 0; i < doors.size(); ++i) {
      const std::string path = "$.room.doors[" + std::to_string(i) + "]";
      const auto& dj = require_object(doors[i], path);
      reject_unknown_keys(dj, path, {"wall", "offset", "width"});
      if (!dj.contains("wall") || !dj.contains("offset") || !dj.contains("width"))
        schema_fail(path, "missing \"wall\", \"offset\" or \"width\"");
      Door d;
      const std::string wall = require_string(dj["wall"], path + ".wall");
      if (wall == "N") d.wall = Wall::north;
      else if (wall == "S") d.wall = Wall::south;
      else if (wall == "E") d.wall = Wall::east;
      else if (wall == "W") d.wall = Wall::west;
      else schema_fail(path + ".wall", "expected one of N/S/E/W");
      d.offset = require_number(dj["offset"], path + ".offset");
      d.width = require_number(dj["width"], path + ".width");
      scene.room.doors.push_back(d);
    }
  }
  if (room.contains("agent_start")) {
    const auto& a = require_array(room["agent_start"], "$.room.agent_start");
    if (a.size() != 2) schema_fail("$.room.agent_start", "expected [x,y]");
    scene.room.agent_start = Vec2{require_number(a[0], "$.room.agent_start[0]"),
                                  require_number(a[1], "$.room.agent_start[1]")};
  }

  const auto& objects = require_array(j["objects"], "$.objects");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string path = "$.objects[" + std::to_string(i) + "]";
    const auto& oj = require_object(objects[i], path);
    reject_unknown_keys(oj, path, {"id", "name", "dims", "role", "functional", "flags", "mass"});
    if (!oj.contains("id") || !oj.contains("name") || !oj.contains("dims"))
      schema_fail(path, "missing \"id\", \"name\" or \"dims\"");
    ObjectSpec o;
    o.id = require_string(oj["id"], path + ".id");
    o.name = require_string(oj["name"], path + ".name");
    o.dims = parse_dims3(oj["dims"], path + ".dims");
    if (oj.contains("role")) {
      const std::string role = require_string(oj["role"], path + ".role");
      auto r = role_from_string(role);
      if (!r) schema_fail(path + ".role", "unknown role \"" + role + "\"");
      o.role = *r;
    }
    if (oj.contains("functional")) o.functional = require_bool(oj["functional"], path + ".functional");
    if (oj.contains("flags")) {
      const auto& flags = require_array(oj["flags"], path + ".flags");
      for (std::size_t k = 0; k < flags.size(); ++k) {
        const std::string fpath = path + ".flags[" + std::to_string(k) + "]";
        const std::string f = require_string(flags[k], fpath);
        if (f == "pickupable") o.flags.pickupable = true;
        else if (f == "heat_source") o.flags.heat_source = true;
        else if (f == "cold_source") o.flags.cold_source = true;
        else schema_fail(fpath, "unknown flag \"" + f + "\"");
      }
    }
    if (oj.contains("mass")) o.mass = require_number(oj["mass"], path + ".mass");
    scene.objects.push_back(std::move(o));
  }

  if (j.contains("constraints")) {
    const auto& constraints = require_array(j["constraints"], "$.constraints");
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const std::string path = "$.constraints[" + std::to_string(i) + "]";
      const auto& cj = require_object(constraints[i], path);
      reject_unknown_keys(cj, path, {"kind", "subject", "target", "params"});
      if (!cj.contains("kind") || !cj.contains("subject"))
        schema_fail(path, "missing \"kind\" or \"subject\"");
      ConstraintSpec c;
      const std::string kind = require_string(cj["kind"], path + ".kind");
      auto k = constraint_kind_from_string(kind);
      if (!k) schema_fail(path + ".kind", "unknown constraint kind \"" + kind + "\"");
      c.kind = *k;
      c.subject = require_string(cj["subject"], path + ".subject");
      if (cj.contains("target") && !cj["target"].is_null())
        c.target = require_string(cj["target"], path + ".target");
      if (cj.contains("params")) {
        const auto& pj = require_object(cj["params"], path + ".params");
        reject_unknown_keys(pj, path + ".params", {"d_max", "d_min", "side"});
        if (pj.contains("d_max")) c.params.d_max = require_number(pj["d_max"], path + ".params.d_max");
        if (pj.contains("d_min")) c.params.d_min = require_number(pj["d_min"], path + ".params.d_min");
        if (pj.contains("side")) {
          const std::string side = require_string(pj["side"], path + ".params.side");
          if (side == "left") c.params.side = Side::left;
          else if (side == "right") c.params.side = Side::right;
          else schema_fail(path + ".params.side", "expected \"left\" or \"right\"");
        }
      }
      scene.constraints.push_back(std::move(c));
    }
  }

  if (j.contains("instruction"))
    scene.instruction = require_string(j["instruction"], "$.instruction");
  if (j.contains("room_type"))
    scene.room_type = require_string(j["room_type"], "$.room_type");

  auto violations = validate_scene(scene);
  if (!violations.empty()) throw_error(ErrorKind::reference, violations.front());
  return scene;
}

std::vector<std::string> validate_scene(const SceneSpec& scene) {
  std::vector<std::string> out;
  auto flag = [&out](const std::string& msg) { out.push_back(msg); };

  if (!(scene.room.width > 0.0) || !(scene.room.depth > 0.0))
    flag("room: width and depth must be positive");
  for (std::size_t i = 0; i < scene.room.doors.size(); ++i) {
    const Door& d = scene.room.doors[i];
    const double wall_len =
        (d.wall == Wall::north || d.wall == Wall::south) ? scene.room.width : scene.room.depth;
    if (!(d.width > 0.0) || d.offset < 0.0 || d.offset + d.width > wall_len + 1e-9)
      flag("room.doors[" + std::to_string(i) + "]: door does not fit on its wall");
  }
  if (scene.room.agent_start) {
    const Vec2 a = *scene.room.agent_start;
    if (a.x < 0.0 || a.x > scene.room.width || a.y < 0.0 || a.y > scene.room.depth)
      flag("room.agent_start: outside the room rectangle");
  }

  if (scene.objects.empty()) flag("objects: at least one object is required");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const ObjectSpec& o = scene.objects[i];
    const std::string path = "objects[" + std::to_string(i) + "]";
    if (o.id.empty()) flag(path + ": id must be non-empty");
    if (!ids.insert(o.id).second) flag(path + ": duplicate id \"" + o.id + "\"");
    if (o.name.empty()) flag(path + ": name must be non-empty");
    if (!(o.dims[0] > 0.0) || !(o.dims[1] > 0.0) || !(o.dims[2] > 0.0))
      flag(path + ": dims must be positive");
    if (o.mass && !(*o.mass > 0.0)) flag(path + ": mass must be positive");
  }

  for (std::size_t i = 0; i < scene.constraints.size(); ++i) {
    const ConstraintSpec& c = scene.constraints[i];
    const std::string path = "constraints[" + std::to_string(i) + "]";
    if (!scene.find_object(c.subject))
      flag(path + ": subject \"" + c.subject + "\" is not an object id");
    if (is_global_kind(c.kind)) {
      if (c.target) flag(path + ": " + to_string(c.kind) + " takes no target");
    } else {
      if (!c.target) {
        flag(path + ": " + to_string(c.kind) + " requires a target");
      } else {
        if (!scene.find_object(*c.target))
          flag(path + ": target \"" + *c.target + "\" is not an object id");
        if (*c.target == c.subject) flag(path + ": subject and target must differ");
      }
    }
    const ConstraintParams& p = c.params;
    const bool wants_dmax = c.kind == ConstraintKind::near;
    const bool wants_dmin = c.kind == ConstraintKind::far_from;
    const bool wants_side = c.kind == ConstraintKind::side_of;
    if (wants_dmax && (!p.d_max || !(*p.d_max > 0.0)))
      flag(path + ": near requires params.d_max > 0");
    if (wants_dmin && (!p.d_min || !(*p.d_min > 0.0)))
      flag(path + ": far_from requires params.d_min > 0");
    if (wants_side && !p.side) flag(path + ": side_of requires params.side");
    if (!wants_dmax && p.d_max) flag(path + ": params.d_max not accepted here");
    if (!wants_dmin && p.d_min) flag(path + ": params.d_min not accepted here");
    if (!wants_side && p.side) flag(path + ": params.side not accepted here");
  }
  return out;
}

std::string save_scene(const SceneSpec& scene) {
  ordered_json j;
  ordered_json room;
  room["width"] = scene.room.width;
  room["depth"] = scene.room.depth;
  if (!scene.room.doors.empty()) {
    ordered_json doors = ordered_json::array();
    for (const Door& d : scene.room.doors)
      doors.push_back({{"wall", to_string(d.wall)}, {"offset", d.offset}, {"width", d.width}});
    room["doors"] = std::move(doors);
  }
  if (scene.room.agent_start)
    room["agent_start"] = {scene.room.agent_start->x, scene.room.agent_start->y};
  j["room"] = std::move(room);

  ordered_json objects = ordered_json::array();
  for (const ObjectSpec& o : scene.objects) {
    ordered_json oj;
    oj["id"] = o.id;
    oj["name"] = o.name;
    oj["dims"] = {o.dims[0], o.dims[1], o.dims[2]};
    if (o.role != Role::filler) oj["role"] = to_string(o.role);
    if (o.functional) oj["functional"] = true;
    ordered_json flags = ordered_json::array();
    if (o.flags.pickupable) flags.push_back("pickupable");
    if (o.flags.heat_source) flags.push_back("heat_source");
    if (o.flags.cold_source) flags.push_back("cold_source");
    if (!flags.empty()) oj["flags"] = std::move(flags);
    if (o.mass) oj["mass"] = *o.mass;
    objects.push_back(std::move(oj));
  }
  j["objects"] = std::move(objects);

  if (!scene.constraints.empty()) {
    ordered_json constraints = ordered_json::array();
    for (const ConstraintSpec& c : scene.constraints) {
      ordered_json cj;
      cj["kind"] = to_string(c.kind);
      cj["subject"] = c.subject;
      if (c.target) cj["target"] = *c.target;
      ordered_json params;
      if (c.params.d_max) params["d_max"] = *c.params.d_max;
      if (c.params.d_min) params["d_min"] = *c.params.d_min;
      if (c.params.side) params["side"] = to_string(*c.params.side);
      if (!params.empty()) cj["params"] = std::move(params);
      constraints.push_back(std::move(cj));
    }
    j["constraints"] = std::move(constraints);
  }
  if (scene.instruction) j["instruction"] = *scene.instruction;
  if (scene.room_type) j["room_type"] = *scene.room_type;
  return j.dump(2) + "\n";
}

Layout load_layout(const std::string& json_text) {
  ordered_json j = parse_json_text(json_text);
  require_object(j, "$");
  reject_unknown_keys(j, "$", {"placements", "skipped", "pto_seconds"});
  if (!j.contains("placements")) schema_fail("$", "missing \"placements\"");
  Layout layout;
  const auto& placements = require_array(j["placements"], "$.placements");
  for (std::size_t i = 0; i < placements.size(); ++i) {
    const std::string path = "$.placements[" + std::to_string(i) + "]";
    const auto& pj = require_object(placements[i], path);
    reject_unknown_keys(pj, path, {"id", "x", "y", "theta"});
    if (!pj.contains("id") || !pj.contains("x") || !pj.contains("y") || !pj.contains("theta"))
      schema_fail(path, "missing \"id\", \"x\", \"y\" or \"theta\"");
    Placement p;
    p.object_id = require_string(pj["id"], path + ".id");
    p.x = require_number(pj["x"], path + ".x");
    p.y = require_number(pj["y"], path + ".y");
    p.theta = require_number(pj["theta"], path + ".theta");
    layout.placements.push_back(std::move(p));
  }
  if (j.contains("skipped")) {
    const auto& skipped = require_array(j["skipped"], "$.skipped");
    for (std::size_t i = 0; i < skipped.size(); ++i)
      layout.skipped.push_back(require_string(skipped[i], "$.skipped[" + std::to_string(i) + "]"));
  }
  if (j.contains("pto_seconds"))
    layout.pto_seconds = require_number(j["pto_seconds"], "$.pto_seconds");
  return layout;
}

std::string save_layout(const Layout& layout) {
  std::ostringstream os;
  os << "{\n  \"placements\": [";
  for (std::size_t i = 0; i < layout.placements.size(); ++i) {
    const Placement& p = layout.placements[i];
    os << (i == 0 ? "\n" : ",\n");
    os << "    {\"id\": " << quoted(p.object_id) << ", \"x\": " << format_g9(p.x)
       << ", \"y\": " << format_g9(p.y) << ", \"theta\": " << format_g9(p.theta) << "}";
  }
  os << (layout.placements.empty() ? "],\n" : "\n  ],\n");
  os << "  \"skipped\": [";
  for (std::size_t i = 0; i < layout.skipped.size(); ++i)
    os << (i == 0 ? "" : ", ") << quoted(layout.skipped[i]);
  os << "],\n";
  os << "  \"pto_seconds\": " << format_g9(layout.pto_seconds) << "\n}\n";
  return os.str();
}

std::vector<std::string> validate_layout(const Layout& layout, const SceneSpec& scene) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  constexpr double two_pi = 2.0 * M_PI;
  for (std::size_t i = 0; i < layout.placements.size(); ++i) {
    const Placement& p = layout.placements[i];
    const std::string path = "placements[" + std::to_string(i) + "]";
    if (!scene.find_object(p.object_id))
      out.push_back(path + ": id \"" + p.object_id + "\" is not a scene object");
    if (!seen.insert(p.object_id).second)
      out.push_back(path + ": duplicate placement for \"" + p.object_id + "\"");
    if (p.theta < 0.0 || p.theta >= two_pi)
      out.push_back(path + ": theta must lie in [0, 2*pi)");
  }
  for (std::size_t i = 0; i < layout.skipped.size(); ++i) {
    const std::string& id = layout.skipped[i];
    const std::string path = "skipped[" + std::to_string(i) + "]";
    if (!scene.find_object(id)) out.push_back(path + ": id \"" + id + "\" is not a scene object");
    if (seen.count(id)) out.push_back(path + ": \"" + id + "\" is both placed and skipped");
  }
  if (layout.pto_seconds < 0.0) out.push_back("pto_seconds: must be non-negative");
  return out;
}

SceneGraph load_graph(const std::string& json_text) {
  ordered_json j = parse_json_text(json_text);
  require_object(j, "$");
  reject_unknown_keys(j, "$", {"nodes", "edges"});
  if (!j.contains("nodes")) schema_fail("$", "missing \"nodes\"");
  SceneGraph g;
  const auto& nodes = require_array(j["nodes"], "$.nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "$.nodes[" + std::to_string(i) + "]";
    const auto& nj = require_object(nodes[i], path);
    reject_unknown_keys(nj, path, {"name", "description", "size"});
    if (!nj.contains("name")) schema_fail(path, "missing \"name\"");
    GraphNode n;
    n.name = require_string(nj["name"], path + ".name");
    if (nj.contains("description"))
      n.description = require_string(nj["description"], path + ".description");
    if (nj.contains("size")) n.size = parse_dims3(nj["size"], path + ".size");
    g.nodes.push_back(std::move(n));
  }
  if (j.contains("edges")) {
    const auto& edges = require_array(j["edges"], "$.edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string path = "$.edges[" + std::to_string(i) + "]";
      const auto& ej = require_object(edges[i], path);
      reject_unknown_keys(ej, path, {"subject", "relation", "object"});
      if (!ej.contains("subject") || !ej.contains("relation") || !ej.contains("object"))
        schema_fail(path, "missing \"subject\", \"relation\" or \"object\"");
      GraphEdge e;
      if (!ej["subject"].is_number_integer()) schema_fail(path + ".subject", "expected an integer");
      if (!ej["object"].is_number_integer()) schema_fail(path + ".object", "expected an integer");
      e.subject = ej["subject"].get<int>();
      e.object = ej["object"].get<int>();
      e.relation = require_string(ej["relation"], path + ".relation");
      g.edges.push_back(std::move(e));
    }
  }
  auto violations = validate_graph(g);
  if (!violations.empty()) throw_error(ErrorKind::reference, violations.front());
  return g;
}

std::string save_graph(const SceneGraph& graph) {
  ordered_json j;
  ordered_json nodes = ordered_json::array();
  for (const GraphNode& n : graph.nodes) {
    ordered_json nj;
    nj["name"] = n.name;
    if (!n.description.empty()) nj["description"] = n.description;
    if (n.size[0] != 0.0 || n.size[1] != 0.0 || n.size[2] != 0.0)
      nj["size"] = {n.size[0], n.size[1], n.size[2]};
    nodes.push_back(std::move(nj));
  }
  j["nodes"] = std::move(nodes);
  ordered_json edges = ordered_json::array();
  for (const GraphEdge& e : graph.edges)
    edges.push_back({{"subject", e.subject}, {"relation", e.relation}, {"object", e.object}});
  j["edges"] = std::move(edges);
  return j.dump(2) + "\n";
}

std::vector<std::string> validate_graph(const SceneGraph& graph) {
  std::vector<std::string> out;
  const int n = static_cast<int>(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i)
    if (graph.nodes[i].name.empty())
      out.push_back("nodes[" + std::to_string(i) + "]: name must be non-empty");
  const auto& vocab = graph_relation_vocabulary();
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const GraphEdge& e = graph.edges[i];
    const std::string path = "edges[" + std::to_string(i) + "]";
    if (e.subject < 0 || e.subject >= n || e.object < 0 || e.object >= n)
      out.push_back(path + ": node index out of range");
    else if (e.subject == e.object)
      out.push_back(path + ": self-loops are not allowed");
    if (std::find(vocab.begin(), vocab.end(), e.relation) == vocab.end())
      out.push_back(path + ": unknown relation \"" + e.relation + "\"");
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorKind::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw_error(ErrorKind::io, "read failure on " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(ErrorKind::io, "cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw_error(ErrorKind::io, "write failure on " + path);
}

}  // namespace placekit
