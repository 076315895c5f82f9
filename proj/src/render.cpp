#include "placekit/render.hpp"

#include <cstdarg>
#include <cstdio>

#include "placekit/error.hpp"
#include "placekit/geometry.hpp"

namespace placekit {
namespace {

constexpr double kRadToDeg = 57.295779513082320876798154814105;

void appendf(std::string& out, const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  out += buffer;
}

std::string escape_text(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* role_fill(Role role) {
  switch (role) {
    case Role::key: return "#cde8c9";
    case Role::anchor: return "#f5d9a8";
    case Role::inference: return "#e3d3f0";
    case Role::filler: return "#dfe3e8";
  }
  return "#dfe3e8";
}

void append_polygon(std::string& out, const Polygon& poly, const char* attrs) {
  out += "  <polygon points=\"";
  for (std::size_t i = 0; i < poly.pts.size(); ++i) {
    if (i) out += ' ';
    appendf(out, "%.2f,%.2f", poly.pts[i].x * kPixelsPerMeter,
            poly.pts[i].y * kPixelsPerMeter);
  }
  appendf(out, "\" %s/>\n", attrs);
}

void append_door(std::string& out, const RoomSpec& room, const Door& door) {
  // Hinge at the lower-offset jamb; the panel swings a quarter circle into
  // the room, from the far jamb to the panel's open position.
  Vec2 hinge, jamb, open;
  switch (door.wall) {
    case Wall::south:
      hinge = {door.offset, 0.0};
      jamb = {door.offset + door.width, 0.0};
      open = {door.offset, door.width};
      break;
    case Wall::north:
      hinge = {door.offset, room.depth};
      jamb = {door.offset + door.width, room.depth};
      open = {door.offset, room.depth - door.width};
      break;
    case Wall::west:
      hinge = {0.0, door.offset};
      jamb = {0.0, door.offset + door.width};
      open = {door.width, door.offset};
      break;
    case Wall::east:
      hinge = {room.width, door.offset};
      jamb = {room.width, door.offset + door.width};
      open = {room.width - door.width, door.offset};
      break;
  }
  const double r = door.width * kPixelsPerMeter;
  appendf(out,
          "  <line class=\"door-panel\" x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
          "stroke=\"#8a6d3b\" stroke-width=\"3\"/>\n",
          hinge.x * kPixelsPerMeter, hinge.y * kPixelsPerMeter, open.x * kPixelsPerMeter,
          open.y * kPixelsPerMeter);
  appendf(out,
          "  <path class=\"door-swing\" d=\"M %.2f %.2f A %.2f %.2f 0 0 1 %.2f %.2f\" "
          "fill=\"none\" stroke=\"#8a6d3b\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n",
          jamb.x * kPixelsPerMeter, jamb.y * kPixelsPerMeter, r, r, open.x * kPixelsPerMeter,
          open.y * kPixelsPerMeter);
}

}  // namespace

std::string render_svg(const SceneSpec& scene, const Layout& layout,
                       const std::vector<ViewpointCandidate>& viewpoints) {
  const double w = scene.room.width * kPixelsPerMeter;
  const double h = scene.room.depth * kPixelsPerMeter;
  const double pad = 20.0;

  std::string out;
  appendf(out,
          "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.2f\" height=\"%.2f\" "
          "viewBox=\"%.2f %.2f %.2f %.2f\" font-family=\"sans-serif\">\n",
          w + 2.0 * pad, h + 2.0 * pad, -pad, -pad, w + 2.0 * pad, h + 2.0 * pad);
  appendf(out, "  <desc>room %.2f x %.2f m, %zu placed, scale 100 px/m</desc>\n",
          scene.room.width, scene.room.depth, layout.placements.size());
  appendf(out,
          "  <rect class=\"room\" x=\"0\" y=\"0\" width=\"%.2f\" height=\"%.2f\" "
          "fill=\"#fdfcf8\" stroke=\"#333333\" stroke-width=\"2\"/>\n",
          w, h);

  for (const Door& door : scene.room.doors) append_door(out, scene.room, door);

  // Dashed clearance regions first, so the object rectangles draw on top.
  for (const Placement& p : layout.placements) {
    const ObjectSpec* object = scene.find_object(p.object_id);
    if (object == nullptr)
      throw_error(ErrorKind::reference, "layout references unknown object " + p.object_id);
    if (!object->functional) continue;
    append_polygon(out, clearance_region(*object, p),
                   "class=\"clearance\" fill=\"none\" stroke=\"#b08968\" "
                   "stroke-width=\"1\" stroke-dasharray=\"6 4\"");
  }

  for (const Placement& p : layout.placements) {
    const ObjectSpec& object = *scene.find_object(p.object_id);
    const double cx = p.x * kPixelsPerMeter;
    const double cy = p.y * kPixelsPerMeter;
    const double ow = object.dims[0] * kPixelsPerMeter;
    const double od = object.dims[1] * kPixelsPerMeter;
    appendf(out,
            "  <rect class=\"object\" x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
            "transform=\"rotate(%.2f %.2f %.2f)\" fill=\"%s\" stroke=\"#1f4e79\" "
            "stroke-width=\"1.5\"/>\n",
            cx - ow / 2.0, cy - od / 2.0, ow, od, p.theta * kRadToDeg, cx, cy,
            role_fill(object.role));
    appendf(out,
            "  <text class=\"label\" x=\"%.2f\" y=\"%.2f\" font-size=\"12\" "
            "text-anchor=\"middle\" fill=\"#1a1a1a\">%s</text>\n",
            cx, cy + 4.0, escape_text(object.name).c_str());
  }

  const Vec2 start = scene.room.start();
  appendf(out,
          "  <circle class=\"start\" cx=\"%.2f\" cy=\"%.2f\" r=\"8\" fill=\"none\" "
          "stroke=\"#c0392b\" stroke-width=\"2\"/>\n",
          start.x * kPixelsPerMeter, start.y * kPixelsPerMeter);
  appendf(out,
          "  <circle class=\"start\" cx=\"%.2f\" cy=\"%.2f\" r=\"2\" fill=\"#c0392b\"/>\n",
          start.x * kPixelsPerMeter, start.y * kPixelsPerMeter);

  for (const ViewpointCandidate& v : viewpoints) {
    const double vx = v.position.x * kPixelsPerMeter;
    const double vy = v.position.y * kPixelsPerMeter;
    appendf(out,
            "  <circle class=\"viewpoint\" cx=\"%.2f\" cy=\"%.2f\" r=\"10\" "
            "fill=\"#2980b9\" fill-opacity=\"0.35\" stroke=\"#2980b9\" "
            "stroke-width=\"1.5\"/>\n",
            vx, vy);
    appendf(out,
            "  <line class=\"gaze\" x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
            "stroke=\"#2980b9\" stroke-width=\"1.5\"/>\n",
            vx, vy, vx + v.direction.x * 25.0, vy + v.direction.y * 25.0);
  }

  out += "</svg>\n";
  return out;
}

}  // namespace placekit
