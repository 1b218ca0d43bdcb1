#include "navstack/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "navstack/errors.hpp"

namespace navstack::plot {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

struct Frame {
  double min_x = 0.0;
  double max_y = 0.0;
  double width = 0.0;
  double height = 0.0;
  Style style;

  double px(double x) const { return style.margin + (x - min_x) * style.pixels_per_meter; }
  double py(double y) const { return style.margin + (max_y - y) * style.pixels_per_meter; }
  std::string pt(Vec2 p) const { return num(px(p.x)) + "," + num(py(p.y)); }
};

Frame frame_of(const World& w, const Style& style) {
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  bool first = true;
  const auto add = [&](Vec2 p) {
    if (first) {
      min_x = max_x = p.x;
      min_y = max_y = p.y;
      first = false;
    }
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  };
  for (const auto& s : w.walls) {
    add(s.a);
    add(s.b);
  }
  for (const auto& [id, p] : w.nodes) add(p);
  for (const auto& [name, l] : w.locations) {
    add(l.center - Vec2{l.radius, l.radius});
    add(l.center + Vec2{l.radius, l.radius});
  }
  Frame f;
  f.style = style;
  f.min_x = min_x;
  f.max_y = max_y;
  f.width = (max_x - min_x) * style.pixels_per_meter + 2.0 * style.margin;
  f.height = (max_y - min_y) * style.pixels_per_meter + 2.0 * style.margin;
  return f;
}

void draw_world(std::ostringstream& os, const World& w, const Frame& f) {
  os << "<g id=\"oneways\">\n";
  for (const auto& o : w.oneways) {
    const bool east = o.direction == "eastway";
    os << "<polygon points=\"";
    for (std::size_t i = 0; i < o.polygon.size(); ++i) os << (i ? " " : "") << f.pt(o.polygon[i]);
    os << "\" fill=\"" << (east ? "#dbe9f6" : "#f6e3db") << "\" stroke=\"none\"/>\n";
    Vec2 c;
    for (const auto& p : o.polygon) c = c + p;
    c = (1.0 / static_cast<double>(o.polygon.size())) * c;
    const double half = 0.6;
    const Vec2 a = c - Vec2{east ? half : -half, 0.0};
    const Vec2 b = c + Vec2{east ? half : -half, 0.0};
    os << "<line x1=\"" << num(f.px(a.x)) << "\" y1=\"" << num(f.py(a.y)) << "\" x2=\""
       << num(f.px(b.x)) << "\" y2=\"" << num(f.py(b.y))
       << "\" stroke=\"#777777\" stroke-width=\"2.000000\" marker-end=\"url(#arrow)\"/>\n";
  }
  os << "</g>\n<g id=\"locations\">\n";
  for (const auto& [name, l] : w.locations) {
    os << "<circle cx=\"" << num(f.px(l.center.x)) << "\" cy=\"" << num(f.py(l.center.y))
       << "\" r=\"" << num(l.radius * f.style.pixels_per_meter)
       << "\" fill=\"#e8f5e0\" stroke=\"#4a8a2a\" stroke-width=\"1.000000\"/>\n";
    os << "<text x=\"" << num(f.px(l.center.x)) << "\" y=\"" << num(f.py(l.center.y) + 5.0)
       << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" << name
       << "</text>\n";
  }
  os << "</g>\n<g id=\"nodes\">\n";
  for (const auto& [id, p] : w.nodes) {
    if (w.locations.contains(id)) continue;
    os << "<circle cx=\"" << num(f.px(p.x)) << "\" cy=\"" << num(f.py(p.y))
       << "\" r=\"2.000000\" fill=\"#999999\"/>\n";
  }
  os << "</g>\n<g id=\"walls\" stroke=\"#222222\" stroke-width=\"3.000000\" stroke-linecap=\"round\">\n";
  for (const auto& s : w.walls) {
    os << "<line x1=\"" << num(f.px(s.a.x)) << "\" y1=\"" << num(f.py(s.a.y)) << "\" x2=\""
       << num(f.px(s.b.x)) << "\" y2=\"" << num(f.py(s.b.y)) << "\"/>\n";
  }
  os << "</g>\n";
}

std::string header(const Frame& f) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(f.width) << "\" height=\""
     << num(f.height) << "\" viewBox=\"0 0 " << num(f.width) << " " << num(f.height) << "\">\n"
     << "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"5\" refY=\"5\" markerWidth=\"6\" "
        "markerHeight=\"6\" orient=\"auto-start-reverse\"><path d=\"M 0 0 L 10 5 L 0 10 z\" "
        "fill=\"#777777\"/></marker></defs>\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << num(f.width) << "\" height=\"" << num(f.height)
     << "\" fill=\"white\"/>\n";
  return os.str();
}

std::string star(const Frame& f, Vec2 c, double outer_px) {
  std::ostringstream os;
  os << "<polygon points=\"";
  for (int i = 0; i < 10; ++i) {
    const double r = (i % 2 == 0 ? outer_px : outer_px * 0.45);
    const double a = std::numbers::pi / 2.0 + i * std::numbers::pi / 5.0;
    os << (i ? " " : "") << num(f.px(c.x) + r * std::cos(a)) << ","
       << num(f.py(c.y) - r * std::sin(a));
  }
  os << "\" fill=\"#f5c400\" stroke=\"#8a6d00\" stroke-width=\"1.000000\"/>\n";
  return os.str();
}

}  // namespace

std::string render_world(const World& world, const Style& style) {
  const Frame f = frame_of(world, style);
  std::ostringstream os;
  os << header(f);
  draw_world(os, world, f);
  os << "</svg>\n";
  return os.str();
}

std::string render_trajectory(const World& world, const sim::SimLog& log, const std::string& robot,
                              const Style& style) {
  const bool empty = log.header.robots.empty() && log.entries.empty();
  if (!empty) {
    const bool known = std::any_of(log.header.robots.begin(), log.header.robots.end(),
                                   [&](const auto& r) { return r.first == robot; });
    if (!known) throw InvariantViolation("log has no robot named '" + robot + "'");
  }
  const Frame f = frame_of(world, style);
  std::ostringstream os;
  os << header(f);
  draw_world(os, world, f);
  const auto steps = log.steps(robot);
  if (!steps.empty()) {
    os << "<polyline id=\"trajectory\" fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.500000\" "
          "points=\"";
    for (std::size_t i = 0; i < steps.size(); ++i) {
      os << (i ? " " : "") << f.pt(steps[i]->pose.position());
    }
    os << "\"/>\n";
    os << star(f, steps.front()->pose.position(), 9.0);
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace navstack::plot
