#include "finverify/drc.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

#include <json.hpp>

namespace fv {

namespace {

using json = nlohmann::ordered_json;

struct layer_shapes {
  std::string name;
  const ShapeList* shapes;  // normalized, owned by the layout
};

// geometry of every color-family member actually drawn in the layout
std::vector<layer_shapes> family_shapes(const flat_layout& fl, const tech_db& tech,
                                        const std::string& base) {
  std::vector<layer_shapes> out;
  for (const std::string& n : tech.color_family(base)) {
    auto it = fl.layers.find(n);
    if (it != fl.layers.end() && !it->second.empty()) out.push_back({n, &it->second});
  }
  return out;
}

std::vector<layer_shapes> subject_shapes(const flat_layout& fl, const tech_db& tech,
                                         const rule& r) {
  std::vector<layer_shapes> out;
  for (const std::string& n : r.layers)
    for (auto& ls : family_shapes(fl, tech, n)) out.push_back(ls);
  return out;
}

ShapeList union_of(const flat_layout& fl, const tech_db& tech,
                   const std::vector<std::string>& names) {
  ShapeList all;
  for (const std::string& n : names)
    for (auto& ls : family_shapes(fl, tech, n))
      all.insert(all.end(), ls.shapes->begin(), ls.shapes->end());
  return normalize(all);
}

Rect cover(const Rect& a, const Rect& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
          std::max(a.y2, b.y2)};
}

struct dsu {
  std::vector<int> p;
  explicit dsu(size_t n) : p(n) { for (size_t i = 0; i < n; ++i) p[i] = int(i); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

// connected components over every shape of the family: touching or overlapping
// shapes are one electrical shape (cross-color stitching included) and are
// exempt from spacing checks against each other
struct family_components {
  std::vector<layer_shapes> members;
  std::vector<size_t> offset;  // start index of each member's shapes
  dsu comp;

  family_components(const flat_layout& fl, const tech_db& tech, const std::string& base)
      : members(family_shapes(fl, tech, base)), comp(0) {
    size_t total = 0;
    for (auto& m : members) {
      offset.push_back(total);
      total += m.shapes->size();
    }
    comp = dsu(total);
    for (size_t a = 0; a < members.size(); ++a)
      for (size_t b = a; b < members.size(); ++b)
        for (size_t i = 0; i < members[a].shapes->size(); ++i) {
          size_t j0 = (a == b) ? i + 1 : 0;
          for (size_t j = j0; j < members[b].shapes->size(); ++j)
            if (touches((*members[a].shapes)[i], (*members[b].shapes)[j]))
              comp.unite(int(offset[a] + i), int(offset[b] + j));
        }
  }

  bool connected(size_t ma, size_t i, size_t mb, size_t j) {
    return comp.find(int(offset[ma] + i)) == comp.find(int(offset[mb] + j));
  }
};

std::vector<violation> check_min_width(const flat_layout& fl, const tech_db& tech,
                                       const rule& r) {
  std::vector<violation> out;
  for (auto& ls : subject_shapes(fl, tech, r))
    for (const Polygon& p : *ls.shapes) {
      i64 w = interior_min_width(p);
      if (w < r.value)
        out.push_back({r.id, {ls.name}, p.bbox(), w, r.value,
                       strf("%s width %lld nm < %lld nm", ls.name.c_str(),
                            (long long)w, (long long)r.value)});
    }
  return out;
}

std::vector<violation> check_min_area(const flat_layout& fl, const tech_db& tech,
                                      const rule& r) {
  std::vector<violation> out;
  for (auto& ls : subject_shapes(fl, tech, r))
    for (const Polygon& p : *ls.shapes) {
      i64 a = p.area();
      if (a < r.value)
        out.push_back({r.id, {ls.name}, p.bbox(), a, r.value,
                       strf("%s area %lld nm^2 < %lld nm^2", ls.name.c_str(),
                            (long long)a, (long long)r.value)});
    }
  return out;
}

std::vector<violation> check_spacing(const flat_layout& fl, const tech_db& tech,
                                     const rule& r) {
  std::vector<violation> out;
  bool diff = r.kind == rule_kind::min_spacing_diff_color;
  family_components fam(fl, tech, r.layers.at(0));
  for (size_t a = 0; a < fam.members.size(); ++a)
    for (size_t b = a; b < fam.members.size(); ++b) {
      layer_color ca = tech.layer(fam.members[a].name).color;
      layer_color cb = tech.layer(fam.members[b].name).color;
      if (diff) {
        // only A against B of the same level
        if (!((ca == layer_color::a && cb == layer_color::b) ||
              (ca == layer_color::b && cb == layer_color::a)))
          continue;
      } else {
        if (a != b) continue;  // pairs within one drawn layer
      }
      const ShapeList& sa = *fam.members[a].shapes;
      const ShapeList& sb = *fam.members[b].shapes;
      for (size_t i = 0; i < sa.size(); ++i) {
        size_t j0 = (a == b) ? i + 1 : 0;
        for (size_t j = j0; j < sb.size(); ++j) {
          if (fam.connected(a, i, b, j)) continue;
          i64 d = min_separation(sa[i], sb[j]);
          if (d < r.value) {
            std::vector<std::string> names{fam.members[a].name};
            if (a != b) names.push_back(fam.members[b].name);
            out.push_back({r.id, names, cover(sa[i].bbox(), sb[j].bbox()), d, r.value,
                           a == b ? strf("%s spacing %lld nm < %lld nm",
                                         fam.members[a].name.c_str(), (long long)d,
                                         (long long)r.value)
                                  : strf("%s to %s spacing %lld nm < %lld nm",
                                         fam.members[a].name.c_str(),
                                         fam.members[b].name.c_str(), (long long)d,
                                         (long long)r.value)});
          }
        }
      }
    }
  return out;
}

std::vector<violation> check_enclosure(const flat_layout& fl, const tech_db& tech,
                                       const rule& r) {
  std::vector<violation> out;
  ShapeList outer = union_of(fl, tech, r.outers);
  std::string outer_name;
  for (const std::string& n : r.outers)
    outer_name += (outer_name.empty() ? "" : "/") + n;
  for (auto& ls : subject_shapes(fl, tech, r))
    for (const Polygon& p : *ls.shapes) {
      if (geo_subtract(dilate({p}, r.value), outer).empty()) continue;
      // report the margin the shape actually achieves
      i64 got = -1;
      for (i64 t = r.value - 1; t >= 0; --t)
        if (geo_subtract(dilate({p}, t), outer).empty()) { got = t; break; }
      out.push_back({r.id, {ls.name}, p.bbox(), got, r.value,
                     got < 0 ? strf("%s not covered by %s", ls.name.c_str(),
                                    outer_name.c_str())
                             : strf("%s enclosure by %s %lld nm < %lld nm",
                                    ls.name.c_str(), outer_name.c_str(),
                                    (long long)got, (long long)r.value)});
    }
  return out;
}

std::vector<violation> check_overlap(const flat_layout& fl, const tech_db& tech,
                                     const rule& r) {
  std::vector<violation> out;
  ShapeList outer = union_of(fl, tech, r.outers);
  std::string outer_name;
  for (const std::string& n : r.outers)
    outer_name += (outer_name.empty() ? "" : "/") + n;
  for (auto& ls : subject_shapes(fl, tech, r))
    for (const Polygon& p : *ls.shapes) {
      i64 a = area(geo_intersect({p}, outer));
      if (a < r.value)
        out.push_back({r.id, {ls.name}, p.bbox(), a, r.value,
                       strf("%s overlap with %s %lld nm^2 < %lld nm^2",
                            ls.name.c_str(), outer_name.c_str(), (long long)a,
                            (long long)r.value)});
    }
  return out;
}

std::vector<violation> check_quantized(const flat_layout& fl, const tech_db& tech,
                                       const rule& r) {
  std::vector<violation> out;
  bool vertical = tech.fins().fins_horizontal;  // fins stack across their run
  for (auto& ls : subject_shapes(fl, tech, r))
    for (const Polygon& p : *ls.shapes) {
      if (!p.is_rect()) continue;  // the RECT_ONLY companion flags these
      Rect b = p.bbox();
      i64 w = vertical ? b.h() : b.w();
      if (w >= r.base && (w - r.base) % r.step == 0) continue;
      i64 k = w <= r.base ? 0 : (w - r.base + r.step / 2) / r.step;
      out.push_back({r.id, {ls.name}, b, w, r.base + k * r.step,
                     strf("%s drawn width %lld nm is not %lld + k*%lld nm",
                          ls.name.c_str(), (long long)w, (long long)r.base,
                          (long long)r.step)});
    }
  return out;
}

std::vector<violation> check_discrete_length(const flat_layout& fl, const tech_db& tech,
                                             const rule& r) {
  std::vector<violation> out;
  ShapeList act = union_of(fl, tech, {tech.active_layer()});
  std::string allowed;
  for (i64 v : r.allowed) allowed += strf("%s%lld", allowed.empty() ? "" : ", ", (long long)v);
  for (auto& ls : subject_shapes(fl, tech, r))
    for (const Polygon& p : *ls.shapes) {
      if (!p.is_rect()) continue;  // the RECT_ONLY companion flags these
      Rect b = p.bbox();
      i64 len;
      if (area(geo_intersect({p}, act)) > 0)
        len = tech.fins().fins_horizontal ? b.w() : b.h();
      else
        len = std::min(b.w(), b.h());
      if (std::find(r.allowed.begin(), r.allowed.end(), len) != r.allowed.end()) continue;
      i64 best = r.allowed.empty() ? 0 : r.allowed.front();
      for (i64 v : r.allowed)
        if (std::llabs(v - len) < std::llabs(best - len)) best = v;
      out.push_back({r.id, {ls.name}, b, len, best,
                     strf("%s length %lld nm not in {%s} nm", ls.name.c_str(),
                          (long long)len, allowed.c_str())});
    }
  return out;
}

std::vector<violation> check_rect_only(const flat_layout& fl, const tech_db& tech,
                                       const rule& r) {
  std::vector<violation> out;
  for (auto& ls : subject_shapes(fl, tech, r))
    for (const Polygon& p : *ls.shapes)
      if (p.v.size() > 4)
        out.push_back({r.id, {ls.name}, p.bbox(), i64(p.v.size()), 4,
                       strf("%s polygon has %zu vertices; rectangles only",
                            ls.name.c_str(), p.v.size())});
  return out;
}

void finish(std::vector<violation>& v) {
  std::stable_sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

std::vector<violation> check_rule(const flat_layout& layout, const tech_db& tech,
                                  const rule& r) {
  std::vector<violation> out;
  switch (r.kind) {
    case rule_kind::min_width: out = check_min_width(layout, tech, r); break;
    case rule_kind::min_spacing_same_color:
    case rule_kind::min_spacing_diff_color: out = check_spacing(layout, tech, r); break;
    case rule_kind::min_area: out = check_min_area(layout, tech, r); break;
    case rule_kind::enclosure: out = check_enclosure(layout, tech, r); break;
    case rule_kind::overlap: out = check_overlap(layout, tech, r); break;
    case rule_kind::width_quantized: out = check_quantized(layout, tech, r); break;
    case rule_kind::discrete_length: out = check_discrete_length(layout, tech, r); break;
    case rule_kind::rect_only: out = check_rect_only(layout, tech, r); break;
  }
  finish(out);
  return out;
}

drc_report run_drc(const flat_layout& layout, const tech_db& tech, int workers) {
  const auto& rules = tech.rules();
  std::vector<std::vector<violation>> per(rules.size());
  int n = std::max(1, workers);
  if (n == 1) {
    for (size_t i = 0; i < rules.size(); ++i)
      per[i] = check_rule(layout, tech, rules[i]);
  } else {
    std::atomic<size_t> next{0};
    auto work = [&] {
      for (size_t i; (i = next.fetch_add(1)) < rules.size();)
        per[i] = check_rule(layout, tech, rules[i]);
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  drc_report rep;
  for (auto& v : per)
    rep.violations.insert(rep.violations.end(), v.begin(), v.end());
  finish(rep.violations);
  return rep;
}

std::string drc_report::to_json() const {
  json j;
  j["violations"] = json::array();
  for (const violation& v : violations) {
    json e;
    e["rule_id"] = v.rule_id;
    e["layers"] = v.layers;
    e["location"] = {v.location.x1, v.location.y1, v.location.x2, v.location.y2};
    e["measured"] = v.measured;
    e["required"] = v.required;
    e["message"] = v.message;
    j["violations"].push_back(e);
  }
  j["count"] = violations.size();
  return j.dump(2) + "\n";
}

}  // namespace fv
