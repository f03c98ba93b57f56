#include "finverify/layout.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include <json.hpp>

namespace fv {

using json = nlohmann::json;

orient parse_orient(const std::string& s) {
  if (s == "R0") return orient::r0;
  if (s == "R90") return orient::r90;
  if (s == "R180") return orient::r180;
  if (s == "R270") return orient::r270;
  if (s == "MX") return orient::mx;
  if (s == "MY") return orient::my;
  if (s == "MXR90") return orient::mxr90;
  if (s == "MYR90") return orient::myr90;
  throw error(strf("layout: unknown orientation '%s'", s.c_str()));
}

std::string to_string(orient o) {
  switch (o) {
    case orient::r0: return "R0";
    case orient::r90: return "R90";
    case orient::r180: return "R180";
    case orient::r270: return "R270";
    case orient::mx: return "MX";
    case orient::my: return "MY";
    case orient::mxr90: return "MXR90";
    case orient::myr90: return "MYR90";
  }
  return "R0";
}

Point transform_point(Point p, Point at, orient o) {
  // mirror across the x axis first where the orientation asks for it
  switch (o) {
    case orient::mx: case orient::mxr90: p.y = -p.y; break;
    case orient::my: case orient::myr90: p.x = -p.x; break;
    default: break;
  }
  Point r = p;
  switch (o) {
    case orient::r90: case orient::mxr90: case orient::myr90:
      r = {-p.y, p.x};
      break;
    case orient::r180: r = {-p.x, -p.y}; break;
    case orient::r270: r = {p.y, -p.x}; break;
    default: break;
  }
  return {r.x + at.x, r.y + at.y};
}

Polygon transform_polygon(const Polygon& p, Point at, orient o) {
  std::vector<Point> v;
  v.reserve(p.v.size());
  for (const Point& q : p.v) v.push_back(transform_point(q, at, o));
  return validate_polygon(v, "transformed polygon");
}

namespace {

i64 coord(const json& v, const char* what, const std::string& ctx) {
  if (v.is_number_integer()) return v.get<i64>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    double frac = d - std::floor(d);
    throw error(strf("layout: %s in %s is off-grid: %g (%g nm off the 1 nm grid)", what,
                     ctx.c_str(), d, frac == 0 ? 0.0 : std::min(frac, 1 - frac)));
  }
  throw error(strf("layout: %s in %s is not a number", what, ctx.c_str()));
}

}  // namespace

cell_library cell_library::load(const std::string& path, const tech_db& tech) {
  return parse(read_file(path), path, tech);
}

cell_library cell_library::parse(const std::string& text, const std::string& origin,
                                 const tech_db& tech) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw error(strf("%s: %s", origin.c_str(), e.what()));
  }
  cell_library lib;
  try {
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
      throw error("layout: unsupported or missing schema_version (expected 1)");
    for (const json& jc : j.at("cells")) {
      cell c;
      c.name = jc.at("name").get<std::string>();
      if (lib.cells_.count(c.name))
        throw error(strf("layout: duplicate cell '%s'", c.name.c_str()));
      std::string ctx = "cell " + c.name;
      const json jlayers = jc.value("layers", json::object());
      for (const auto& [layer, jshapes] : jlayers.items()) {
        ShapeList& sl = c.shapes[layer];
        for (const json& js : jshapes) {
          if (js.contains("rect")) {
            const json& r = js.at("rect");
            if (!r.is_array() || r.size() != 4)
              throw error(strf("layout: %s: rect needs [x1,y1,x2,y2]", ctx.c_str()));
            Rect rc{coord(r[0], "x1", ctx), coord(r[1], "y1", ctx), coord(r[2], "x2", ctx),
                    coord(r[3], "y2", ctx)};
            if (rc.x2 <= rc.x1 || rc.y2 <= rc.y1)
              throw error(strf("layout: %s: degenerate rect on %s", ctx.c_str(), layer.c_str()));
            sl.push_back(rect_poly(rc));
          } else if (js.contains("poly")) {
            std::vector<Point> pts;
            for (const json& jp : js.at("poly"))
              pts.push_back({coord(jp.at(0), "x", ctx), coord(jp.at(1), "y", ctx)});
            sl.push_back(validate_polygon(pts, ctx + " polygon on " + layer));
          } else {
            throw error(strf("layout: %s: shape needs 'rect' or 'poly'", ctx.c_str()));
          }
        }
      }
      int idx = 0;
      for (const json& ji : jc.value("instances", json::array())) {
        instance in;
        in.cell = ji.at("cell").get<std::string>();
        in.name = ji.value("name", strf("I%d", idx));
        in.at = {coord(ji.at("at").at(0), "x", ctx), coord(ji.at("at").at(1), "y", ctx)};
        in.o = parse_orient(ji.value("orient", std::string("R0")));
        c.instances.push_back(in);
        ++idx;
      }
      for (const json& jp : jc.value("pins", json::array())) {
        pin p;
        p.label = jp.at("label").get<std::string>();
        p.layer = jp.at("layer").get<std::string>();
        p.at = {coord(jp.at("at").at(0), "x", ctx), coord(jp.at("at").at(1), "y", ctx)};
        if (p.label.empty()) throw error(strf("layout: %s: empty pin label", ctx.c_str()));
        c.pins.push_back(p);
      }
      lib.cells_[c.name] = std::move(c);
    }
  } catch (const json::exception& e) {
    throw error(strf("%s: %s", origin.c_str(), e.what()));
  }
  lib.validate(tech);
  return lib;
}

void cell_library::validate(const tech_db& tech) {
  // layer and instance references
  for (const auto& [name, c] : cells_) {
    for (const auto& [layer, sl] : c.shapes)
      if (!tech.has_layer(layer))
        throw error(strf("layout: cell %s uses unknown layer '%s'", name.c_str(), layer.c_str()));
    for (const pin& p : c.pins)
      if (!tech.has_layer(p.layer))
        throw error(strf("layout: cell %s pin %s on unknown layer '%s'", name.c_str(),
                         p.label.c_str(), p.layer.c_str()));
    std::set<std::string> inames;
    for (const instance& in : c.instances) {
      if (!cells_.count(in.cell))
        throw error(strf("layout: cell %s instantiates undefined cell '%s'", name.c_str(),
                         in.cell.c_str()));
      if (!inames.insert(in.name).second)
        throw error(strf("layout: cell %s has duplicate instance name '%s'", name.c_str(),
                         in.name.c_str()));
    }
  }

  // no instantiation cycles: DFS with colors
  std::map<std::string, int> state;  // 0 unseen, 1 in progress, 2 done
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    int& s = state[n];
    if (s == 2) return;
    if (s == 1) throw error(strf("layout: instantiation cycle through cell '%s'", n.c_str()));
    s = 1;
    for (const instance& in : cells_.at(n).instances) visit(in.cell);
    s = 2;
  };
  for (const auto& [name, c] : cells_) visit(name);

  // pins must land inside same-layer geometry of the flattened cell
  for (const auto& [name, c] : cells_) {
    if (c.pins.empty()) continue;
    flat_layout f = flatten(name);
    for (const pin& p : c.pins) {
      bool inside = false;
      auto it = f.layers.find(p.layer);
      if (it != f.layers.end())
        for (const Polygon& poly : it->second)
          if (contains(poly, p.at)) { inside = true; break; }
      if (!inside)
        throw error(strf("layout: cell %s pin %s at (%lld,%lld) lies outside %s geometry",
                         name.c_str(), p.label.c_str(), (long long)p.at.x, (long long)p.at.y,
                         p.layer.c_str()));
    }
  }
}

bool cell_library::has(const std::string& name) const { return cells_.count(name) > 0; }

const cell& cell_library::at(const std::string& name) const {
  auto it = cells_.find(name);
  if (it == cells_.end()) throw error(strf("layout: unknown cell '%s'", name.c_str()));
  return it->second;
}

std::vector<std::string> cell_library::names() const {
  std::vector<std::string> out;
  for (const auto& [n, c] : cells_) out.push_back(n);
  return out;
}

void cell_library::flatten_into(const cell& c, Point at, orient o, const std::string& prefix,
                                int depth, flat_layout& out) const {
  for (const auto& [layer, sl] : c.shapes)
    for (const Polygon& p : sl) out.layers[layer].push_back(transform_polygon(p, at, o));
  for (const pin& p : c.pins)
    out.pins.push_back({prefix + p.label, depth, p.layer, transform_point(p.at, at, o)});
  for (const instance& in : c.instances) {
    // compose: child point -> child-local transform -> this cell's transform
    const cell& child = cells_.at(in.cell);
    // transform the child's placement into the outer frame by transforming two
    // reference points; composition of axis-aligned maps is axis-aligned
    flat_layout sub;
    flatten_into(child, in.at, in.o, prefix + in.name + "/", depth + 1, sub);
    for (auto& [layer, sl] : sub.layers)
      for (Polygon& p : sl) out.layers[layer].push_back(transform_polygon(p, at, o));
    for (flat_pin& p : sub.pins)
      out.pins.push_back({p.label, p.depth, p.layer, transform_point(p.at, at, o)});
  }
}

flat_layout cell_library::flatten(const std::string& top) const {
  const cell& root = at(top);
  flat_layout out;
  flatten_into(root, {0, 0}, orient::r0, "", 0, out);
  for (auto& [layer, sl] : out.layers) sl = normalize(sl);
  std::sort(out.pins.begin(), out.pins.end(), [](const flat_pin& a, const flat_pin& b) {
    return std::tie(a.depth, a.label, a.layer, a.at) < std::tie(b.depth, b.label, b.layer, b.at);
  });
  return out;
}

Rect flat_layout::bbox() const {
  Rect r{0, 0, 0, 0};
  bool first = true;
  for (const auto& [layer, sl] : layers)
    for (const Polygon& p : sl) {
      Rect b = p.bbox();
      if (first) { r = b; first = false; continue; }
      r.x1 = std::min(r.x1, b.x1);
      r.y1 = std::min(r.y1, b.y1);
      r.x2 = std::max(r.x2, b.x2);
      r.y2 = std::max(r.y2, b.y2);
    }
  return r;
}

std::string cell_library::save() const {
  json j;
  j["schema_version"] = 1;
  json jcells = json::array();
  for (const auto& [name, c] : cells_) {
    json jc;
    jc["name"] = name;
    json jl = json::object();
    for (const auto& [layer, sl] : c.shapes) {
      json arr = json::array();
      for (const Polygon& p : sl) {
        if (p.is_rect()) {
          Rect r = p.bbox();
          arr.push_back({{"rect", {r.x1, r.y1, r.x2, r.y2}}});
        } else {
          json pts = json::array();
          for (const Point& q : p.v) pts.push_back({q.x, q.y});
          arr.push_back({{"poly", pts}});
        }
      }
      jl[layer] = arr;
    }
    if (!jl.empty()) jc["layers"] = jl;
    if (!c.instances.empty()) {
      json arr = json::array();
      for (const instance& in : c.instances)
        arr.push_back({{"name", in.name},
                       {"cell", in.cell},
                       {"at", {in.at.x, in.at.y}},
                       {"orient", to_string(in.o)}});
      jc["instances"] = arr;
    }
    if (!c.pins.empty()) {
      json arr = json::array();
      for (const pin& p : c.pins)
        arr.push_back({{"label", p.label}, {"layer", p.layer}, {"at", {p.at.x, p.at.y}}});
      jc["pins"] = arr;
    }
    jcells.push_back(jc);
  }
  j["cells"] = jcells;
  return j.dump(2) + "\n";
}

}  // namespace fv
