#pragma once

#include <map>
#include <string>
#include <vector>

#include "finverify/geometry.hpp"
#include "finverify/techdb.hpp"

namespace fv {

enum class orient { r0, r90, r180, r270, mx, my, mxr90, myr90 };

orient parse_orient(const std::string& s);
std::string to_string(orient o);

struct pin {
  std::string label;
  std::string layer;
  Point at;
};

struct instance {
  std::string name;  // defaults to I<index>
  std::string cell;
  Point at{0, 0};
  orient o = orient::r0;
};

struct cell {
  std::string name;
  std::map<std::string, ShapeList> shapes;  // as drawn, validated, not merged
  std::vector<instance> instances;
  std::vector<pin> pins;
};

struct flat_pin {
  std::string label;  // instance path prefix, e.g. "I0/A"
  int depth = 0;      // path length; 0 for root pins
  std::string layer;
  Point at;
};

struct flat_layout {
  std::map<std::string, ShapeList> layers;  // normalized
  std::vector<flat_pin> pins;
  Rect bbox() const;
};

class cell_library {
 public:
  static cell_library load(const std::string& path, const tech_db& tech);
  static cell_library parse(const std::string& text, const std::string& origin,
                            const tech_db& tech);

  bool has(const std::string& name) const;
  const cell& at(const std::string& name) const;
  std::vector<std::string> names() const;  // sorted

  flat_layout flatten(const std::string& top) const;
  std::string save() const;  // deterministic JSON, round-trips through parse

 private:
  std::map<std::string, cell> cells_;
  void validate(const tech_db& tech);
  void flatten_into(const cell& c, Point at, orient o, const std::string& prefix,
                    int depth, flat_layout& out) const;
};

Point transform_point(Point p, Point at, orient o);
Polygon transform_polygon(const Polygon& p, Point at, orient o);

}  // namespace fv
