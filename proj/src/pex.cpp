#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "finverify/pex.hpp"

namespace fv {

namespace {

constexpr double eps0 = 8.854;  // aF per µm

double um(i64 nm) { return double(nm) / 1000.0; }
double um2(i64 nm2) { return double(nm2) / 1e6; }

double poly_perimeter_um(const Polygon& p) {
  double sum = 0;
  for (size_t i = 0; i < p.v.size(); ++i) {
    const Point& a = p.v[i];
    const Point& b = p.v[(i + 1) % p.v.size()];
    sum += std::abs(double(b.x - a.x)) + std::abs(double(b.y - a.y));
  }
  return sum / 1000.0;
}

void window_note(double r, const char* name, std::vector<std::string>* w) {
  if (w && (r < 0.3 || r > 30.0))
    w->push_back(strf("%s=%.4g outside the fitted window [0.3, 30]", name, r));
}

// lateral face between two rectangles: overlap run and edge-to-edge gap;
// gap < 0 means they overlap or only meet at a corner
struct facing {
  i64 run = 0;
  i64 gap = -1;
};

facing face_between(const Rect& a, const Rect& b) {
  i64 xo = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  i64 yo = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (xo > 0 && yo <= 0) return {xo, -yo};
  if (yo > 0 && xo <= 0) return {yo, -xo};
  return {};
}

bool xy_overlaps(const Polygon& a, const Polygon& b) {
  Rect ab = a.bbox(), bb = b.bbox();
  if (ab.x2 <= bb.x1 || bb.x2 <= ab.x1 || ab.y2 <= bb.y1 || bb.y2 <= ab.y1)
    return false;
  return area(geo_intersect({a}, {b})) > 0;
}

}  // namespace

std::string to_string(parasitic_origin o) {
  switch (o) {
    case parasitic_origin::plate: return "PLATE";
    case parasitic_origin::fringe: return "FRINGE";
    case parasitic_origin::coupling: return "COUPLING";
    case parasitic_origin::sheet: return "SHEET";
    case parasitic_origin::via: return "VIA";
    case parasitic_origin::gate_contact: return "GATE_CONTACT";
    case parasitic_origin::contact_contact: return "CONTACT_CONTACT";
  }
  return "?";
}

std::string to_string(pex_model m) {
  switch (m) {
    case pex_model::plate: return "plate";
    case pex_model::sakurai: return "sakurai";
    case pex_model::sakurai_coupling: return "sakurai+coupling";
  }
  return "?";
}

pex_model parse_pex_model(const std::string& flag) {
  if (flag == "plate") return pex_model::plate;
  if (flag == "sakurai") return pex_model::sakurai;
  if (flag == "sakurai+coupling") return pex_model::sakurai_coupling;
  throw error(strf("unknown capacitance model '%s' (use plate, sakurai, or "
                   "sakurai+coupling)",
                   flag.c_str()));
}

double cap_parallel_plate(double area_um2, double d_um, double k) {
  if (!(area_um2 > 0) || !(d_um > 0) || !(k >= 1))
    throw error("plate capacitance needs positive area and gap and k >= 1");
  return k * eps0 * area_um2 / d_um;
}

double cap_sakurai_total(const wire_geometry& g, double k,
                         std::vector<std::string>* warnings) {
  if (!(g.w > 0) || !(g.t > 0) || !(g.h > 0) || !(g.length > 0) || !(k >= 1))
    throw error("wire capacitance needs positive w, t, h, length and k >= 1");
  window_note(g.w / g.h, "w/h", warnings);
  window_note(g.t / g.h, "t/h", warnings);
  return k * eps0 * (1.15 * (g.w / g.h) + 2.80 * std::pow(g.t / g.h, 0.222)) *
         g.length;
}

double cap_sakurai_coupling(const wire_geometry& g, double k,
                            std::vector<std::string>* warnings) {
  if (!(g.w > 0) || !(g.t > 0) || !(g.h > 0) || !(g.s > 0) || !(g.length > 0) ||
      !(k >= 1))
    throw error("coupling capacitance needs positive w, t, h, s, length and k >= 1");
  window_note(g.w / g.h, "w/h", warnings);
  window_note(g.t / g.h, "t/h", warnings);
  return k * eps0 *
         (0.03 * (g.w / g.h) + 0.83 * (g.t / g.h) -
          0.07 * std::pow(g.t / g.h, 0.222)) *
         std::pow(g.s / g.h, -1.34) * g.length;
}

// ---------------------------------------------------------------------------

namespace {

struct pex_extractor {
  const flat_layout& fl;
  const tech_db& tech;
  const netlist& nl;
  pex_model model;
  pex_result out;

  std::vector<bool> wire;                 // conductor takes part in the wire model
  std::vector<std::vector<Rect>> crects;  // tile decomposition per conductor
  std::map<std::string, std::vector<int>> by_layer;
  std::map<std::tuple<int, int, int>, int> face_index;  // (cond, tile, end) -> id
  std::vector<int> parent;                              // dsu over face ids
  std::vector<std::string> names;                       // per face id, on roots
  std::vector<std::string> net_first;                   // first node name per net

  struct pending_r {
    int fa, fb;
    double value;
    parasitic_origin origin;
  };
  std::vector<pending_r> pending;

  pex_extractor(const flat_layout& f, const tech_db& t, const netlist& n, pex_model m)
      : fl(f), tech(t), nl(n), model(m) {}

  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  static bool horizontal(const Rect& r) { return r.w() >= r.h(); }

  Point face_mid(const Rect& r, int f) const {
    if (horizontal(r)) return {f ? r.x2 : r.x1, (r.y1 + r.y2) / 2};
    return {(r.x1 + r.x2) / 2, f ? r.y2 : r.y1};
  }

  int face_of(int c, int r, int f) const { return face_index.at({c, r, f}); }

  int nearest_face(int c, int r, Point p) const {
    const Rect& rc = crects[c][r];
    auto d2 = [&](Point m) {
      double dx = double(m.x - p.x), dy = double(m.y - p.y);
      return dx * dx + dy * dy;
    };
    return d2(face_mid(rc, 0)) <= d2(face_mid(rc, 1)) ? face_of(c, r, 0)
                                                      : face_of(c, r, 1);
  }

  // face node for an interface point: an exact end face when the point sits on
  // one, the nearest end face otherwise (first-order junction lumping)
  int attach_face(int c, int r, Point p) const {
    const Rect& rc = crects[c][r];
    if (horizontal(rc)) {
      if (p.x == rc.x1) return face_of(c, r, 0);
      if (p.x == rc.x2) return face_of(c, r, 1);
    } else {
      if (p.y == rc.y1) return face_of(c, r, 0);
      if (p.y == rc.y2) return face_of(c, r, 1);
    }
    return nearest_face(c, r, p);
  }

  // face node for an arbitrary point of a conductor
  int tile_node(int c, Point p) const {
    for (size_t r = 0; r < crects[c].size(); ++r) {
      const Rect& t = crects[c][r];
      if (t.x1 <= p.x && p.x <= t.x2 && t.y1 <= p.y && p.y <= t.y2)
        return attach_face(c, int(r), p);
    }
    size_t best = 0;
    double bd = 1e300;
    for (size_t r = 0; r < crects[c].size(); ++r) {
      const Rect& t = crects[c][r];
      double dx = double(t.x1 + t.x2) / 2 - double(p.x);
      double dy = double(t.y1 + t.y2) / 2 - double(p.y);
      if (dx * dx + dy * dy < bd) {
        bd = dx * dx + dy * dy;
        best = r;
      }
    }
    return nearest_face(c, int(best), p);
  }

  std::string node_name(int face) { return names[find(face)]; }

  std::string base_of(const std::string& n) const {
    const layer_def& d = tech.layer(n);
    return d.base.empty() ? n : d.base;
  }

  // conductor ids for a connectivity-table name (bases stand for families)
  std::vector<int> layer_nodes(const std::string& name) const {
    std::vector<int> ids;
    if (name == tech.gate_base_layer() || name == tech.active_layer()) {
      auto it = by_layer.find(name);
      if (it != by_layer.end()) ids = it->second;
      return ids;
    }
    for (const std::string& n : tech.color_family(name)) {
      auto it = by_layer.find(n);
      if (it != by_layer.end()) ids.insert(ids.end(), it->second.begin(), it->second.end());
    }
    return ids;
  }

  void setup() {
    wire.assign(nl.conductors.size(), false);
    crects.resize(nl.conductors.size());
    for (size_t i = 0; i < nl.conductors.size(); ++i) {
      const conductor& c = nl.conductors[i];
      by_layer[c.layer].push_back(int(i));
      layer_class cls = tech.layer(c.layer).cls;
      wire[i] = cls == layer_class::metal || cls == layer_class::mol ||
                cls == layer_class::gate;
      if (wire[i]) crects[i] = decompose({c.shape});
    }
    for (size_t c = 0; c < crects.size(); ++c)
      for (size_t r = 0; r < crects[c].size(); ++r)
        for (int f = 0; f < 2; ++f) {
          face_index[{int(c), int(r), f}] = int(parent.size());
          parent.push_back(int(parent.size()));
        }
  }

  // midpoint of the shared boundary between two touching tiles
  static bool shared_edge_mid(const Rect& a, const Rect& b, Point& mid) {
    if (a.x2 == b.x1 || b.x2 == a.x1) {
      i64 x = a.x2 == b.x1 ? a.x2 : b.x2;
      i64 lo = std::max(a.y1, b.y1), hi = std::min(a.y2, b.y2);
      if (hi <= lo) return false;
      mid = {x, (lo + hi) / 2};
      return true;
    }
    if (a.y2 == b.y1 || b.y2 == a.y1) {
      i64 y = a.y2 == b.y1 ? a.y2 : b.y2;
      i64 lo = std::max(a.x1, b.x1), hi = std::min(a.x2, b.x2);
      if (hi <= lo) return false;
      mid = {(lo + hi) / 2, y};
      return true;
    }
    return false;
  }

  void unify() {
    // tiles within one conductor
    for (size_t c = 0; c < crects.size(); ++c)
      for (size_t i = 0; i < crects[c].size(); ++i)
        for (size_t j = i + 1; j < crects[c].size(); ++j) {
          Point mid;
          if (shared_edge_mid(crects[c][i], crects[c][j], mid))
            unite(attach_face(int(c), int(i), mid), attach_face(int(c), int(j), mid));
        }
    // colored-sibling stitches are seamless metal: zero-ohm junction
    for (size_t a = 0; a < nl.conductors.size(); ++a)
      for (size_t b = a + 1; b < nl.conductors.size(); ++b) {
        if (!wire[a] || !wire[b]) continue;
        if (nl.conductors[a].layer == nl.conductors[b].layer) continue;
        if (base_of(nl.conductors[a].layer) != base_of(nl.conductors[b].layer))
          continue;
        if (!touches(nl.conductors[a].shape, nl.conductors[b].shape)) continue;
        bool done = false;
        for (size_t i = 0; i < crects[a].size() && !done; ++i)
          for (size_t j = 0; j < crects[b].size() && !done; ++j) {
            Point mid;
            if (shared_edge_mid(crects[a][i], crects[b][j], mid)) {
              unite(attach_face(int(a), int(i), mid), attach_face(int(b), int(j), mid));
              done = true;
            }
          }
      }
    // overlap-mode connections carry no via: zero-ohm junction at the overlap
    for (const connect_entry& e : tech.connectivity()) {
      if (e.mode != connect_mode::overlap) continue;
      for (int a : layer_nodes(e.layer_a))
        for (int b : layer_nodes(e.layer_b)) {
          if (!wire[a] || !wire[b]) continue;
          if (!xy_overlaps(nl.conductors[a].shape, nl.conductors[b].shape)) continue;
          ShapeList ov =
              geo_intersect({nl.conductors[a].shape}, {nl.conductors[b].shape});
          Rect r0 = ov[0].bbox();
          Point mid{(r0.x1 + r0.x2) / 2, (r0.y1 + r0.y2) / 2};
          unite(tile_node(int(a), mid), tile_node(int(b), mid));
        }
    }
  }

  void link_vias() {
    std::map<std::string, std::set<std::string>> partners;
    for (const connect_entry& e : tech.connectivity())
      if (e.mode == connect_mode::through_via) {
        partners[e.via].insert(e.layer_a);
        partners[e.via].insert(e.layer_b);
      }
    for (const auto& [via, parts] : partners) {
      auto itv = fl.layers.find(via);
      if (itv == fl.layers.end()) continue;
      double rv = tech.layer(via).via_resistance;
      std::vector<int> cand;
      for (const std::string& p : parts)
        for (int c : layer_nodes(p))
          if (wire[c]) cand.push_back(c);
      std::sort(cand.begin(), cand.end());
      for (const Polygon& v : itv->second) {
        Rect vb = v.bbox();
        Point mid{(vb.x1 + vb.x2) / 2, (vb.y1 + vb.y2) / 2};
        int first = -1;
        for (int c : cand) {
          if (!xy_overlaps(v, nl.conductors[c].shape)) continue;
          int node = tile_node(c, mid);
          if (first < 0) first = node;
          else pending.push_back({first, node, rv, parasitic_origin::via});
        }
      }
    }
  }

  void name_nodes() {
    names.assign(parent.size(), "");
    net_first.assign(nl.nets.size(), "");
    std::vector<int> counter(nl.nets.size(), 0);
    for (const auto& [key, id] : face_index) {
      int root = find(id);
      if (!names[root].empty()) continue;
      int net = nl.net_of(std::get<0>(key));
      names[root] = strf("%s:seg%d", nl.nets[net].name.c_str(), counter[net]++);
      out.node_net[names[root]] = net;
      if (net_first[net].empty()) net_first[net] = names[root];
    }
  }

  void sheet_elements() {
    for (size_t c = 0; c < crects.size(); ++c) {
      double rs = wire.empty() || !wire[c] ? 0 : tech.sheet_resistance(nl.conductors[c].layer);
      for (size_t r = 0; r < crects[c].size(); ++r) {
        const Rect& t = crects[c][r];
        double length = double(std::max(t.w(), t.h()));
        double width = double(std::min(t.w(), t.h()));
        std::string a = node_name(face_of(int(c), int(r), 0));
        std::string b = node_name(face_of(int(c), int(r), 1));
        if (a == b) continue;  // ring tile closed on itself
        out.elements.push_back({element_kind::res, a, b, rs * length / width,
                                parasitic_origin::sheet});
      }
    }
    for (const pending_r& p : pending)
      out.elements.push_back({element_kind::res, node_name(p.fa), node_name(p.fb),
                              p.value, p.origin});
  }

  void ground_caps() {
    std::map<std::string, double> per_node;
    for (size_t c = 0; c < crects.size(); ++c) {
      if (!wire[c] || crects[c].empty()) continue;
      const layer_def& def = tech.layer(nl.conductors[c].layer);
      if (def.height <= 0) continue;
      double k = tech.k_eff_between(0, def.height);
      double total = 0;
      for (const Rect& t : crects[c]) {
        double w = um(std::min(t.w(), t.h()));
        double len = um(std::max(t.w(), t.h()));
        if (model == pex_model::plate) {
          total += cap_parallel_plate(w * len, um(def.height), k);
        } else {
          wire_geometry g{w, um(def.thickness), um(def.height), 0, len};
          total += cap_sakurai_total(g, k, &out.warnings);
        }
      }
      per_node[node_name(face_of(int(c), 0, 0))] += total;
    }
    for (const auto& [node, total] : per_node)
      out.elements.push_back(
          {element_kind::cap, node, "GND", total, parasitic_origin::plate});
  }

  // MOL-origin bucket for a cross-layer pair; plate for plain metal pairs
  parasitic_origin bucket(const std::string& la, const std::string& lb) const {
    auto gateish = [&](const std::string& n) {
      return n == tech.gate_base_layer() || n == "GIL";
    };
    auto contactish = [&](const std::string& n) { return n == "AIL1" || n == "AIL2"; };
    if ((gateish(la) && contactish(lb)) || (gateish(lb) && contactish(la)))
      return parasitic_origin::gate_contact;
    if (gateish(la) || gateish(lb) || contactish(la) || contactish(lb))
      return parasitic_origin::contact_contact;
    return parasitic_origin::plate;
  }

  using pair_key = std::tuple<int, int, parasitic_origin>;

  void add_pair(std::map<pair_key, double>& acc, int na, int nb,
                parasitic_origin o, double v) {
    if (na == nb || v <= 0) return;
    acc[{std::min(na, nb), std::max(na, nb), o}] += v;
  }

  void lateral_caps(std::map<pair_key, double>& acc) {
    // same-level coupling between drawn wires, Sakurai closed form
    if (model == pex_model::sakurai_coupling) {
      for (const auto& [layer, ids] : by_layer) {
        const layer_def& def = tech.layer(layer);
        bool wirelike = def.cls == layer_class::metal ||
                        layer == tech.gate_base_layer() || layer == "GIL";
        if (!wirelike || def.height <= 0) continue;
        double k = tech.k_eff_between(0, def.height);
        for (size_t x = 0; x < ids.size(); ++x)
          for (size_t y = x + 1; y < ids.size(); ++y) {
            int a = ids[x], b = ids[y];
            if (nl.net_of(a) == nl.net_of(b)) continue;
            for (const Rect& ra : crects[a])
              for (const Rect& rb : crects[b]) {
                facing f = face_between(ra, rb);
                if (f.gap <= 0 || f.run < 1) continue;
                if (f.gap > 10 * def.height) continue;
                double w = um(std::min({ra.w(), ra.h(), rb.w(), rb.h()}));
                wire_geometry g{w, um(def.thickness), um(def.height), um(f.gap),
                                um(f.run)};
                add_pair(acc, nl.net_of(a), nl.net_of(b),
                         parasitic_origin::coupling,
                         cap_sakurai_coupling(g, k, &out.warnings));
              }
          }
      }
    }
    // sidewall facing between gate-level and contact-level bars; the z-band
    // overlap is the facing height
    std::vector<std::string> mol_layers;
    for (const auto& [layer, ids] : by_layer)
      if (layer == tech.gate_base_layer() || layer == "GIL" || layer == "AIL1" ||
          layer == "AIL2")
        mol_layers.push_back(layer);
    for (size_t li = 0; li < mol_layers.size(); ++li)
      for (size_t lj = li; lj < mol_layers.size(); ++lj) {
        const std::string &la = mol_layers[li], &lb = mol_layers[lj];
        parasitic_origin o = bucket(la, lb);
        if (o == parasitic_origin::plate) continue;
        auto gateish = [&](const std::string& n) {
          return n == tech.gate_base_layer() || n == "GIL";
        };
        if (gateish(la) && gateish(lb)) continue;  // gate-side pairs are coupling's job
        const layer_def& da = tech.layer(la);
        const layer_def& db = tech.layer(lb);
        i64 zlo = std::max(da.height, db.height);
        i64 zhi = std::min(da.height + da.thickness, db.height + db.thickness);
        i64 t_face = zhi - zlo;
        if (t_face <= 0) continue;
        double k = tech.dielectric_k_at((zlo + zhi) / 2);
        for (int a : by_layer[la])
          for (int b : by_layer[lb]) {
            if (la == lb && b <= a) continue;
            if (nl.net_of(a) == nl.net_of(b)) continue;
            for (const Rect& ra : crects[a])
              for (const Rect& rb : crects[b]) {
                facing f = face_between(ra, rb);
                if (f.gap <= 0 || f.run < 1) continue;
                if (f.gap > 10 * t_face) continue;
                double area_f = um(f.run) * um(t_face);
                double d = um(f.gap);
                double v = cap_parallel_plate(area_f, d, k);
                if (model != pex_model::plate)
                  v += k * eps0 * 2.80 * std::pow(um(t_face) / d, 0.222) *
                       (2 * (um(f.run) + um(t_face)));
                add_pair(acc, nl.net_of(a), nl.net_of(b), o, v);
              }
          }
      }
  }

  void vertical_caps(std::map<pair_key, double>& acc) {
    // xy-overlapping conductors on z-separated layers with nothing between
    std::vector<std::string> layers;
    for (const auto& [layer, ids] : by_layer)
      if (!ids.empty() && wire[ids[0]]) layers.push_back(layer);
    for (size_t i = 0; i < layers.size(); ++i)
      for (size_t j = i + 1; j < layers.size(); ++j) {
        const layer_def& d1 = tech.layer(layers[i]);
        const layer_def& d2 = tech.layer(layers[j]);
        const std::string& lower = d1.height <= d2.height ? layers[i] : layers[j];
        const std::string& upper = d1.height <= d2.height ? layers[j] : layers[i];
        const layer_def& dl = tech.layer(lower);
        const layer_def& du = tech.layer(upper);
        i64 gap_lo = dl.height + dl.thickness;
        i64 gap_hi = du.height;
        if (gap_hi <= gap_lo) continue;  // same band or abutting: not a plate pair
        bool blocked = false;
        for (const std::string& other : layers) {
          if (other == lower || other == upper) continue;
          const layer_def& od = tech.layer(other);
          if (od.height >= gap_lo && od.height + od.thickness <= gap_hi) {
            blocked = true;
            break;
          }
        }
        if (blocked) continue;
        double dk = tech.k_eff_between(gap_lo, gap_hi);
        double d = um(gap_hi - gap_lo);
        parasitic_origin o = bucket(lower, upper);
        for (int a : by_layer[lower])
          for (int b : by_layer[upper]) {
            if (nl.net_of(a) == nl.net_of(b)) continue;
            if (!xy_overlaps(nl.conductors[a].shape, nl.conductors[b].shape))
              continue;
            ShapeList ov =
                geo_intersect({nl.conductors[a].shape}, {nl.conductors[b].shape});
            double a_um2 = um2(area(ov));
            double perim = 0;
            for (const Polygon& p : ov) perim += poly_perimeter_um(p);
            double plate = cap_parallel_plate(a_um2, d, dk);
            double fringe =
                dk * eps0 * 2.80 * std::pow(um(du.thickness) / d, 0.222) * perim;
            if (o == parasitic_origin::plate) {
              add_pair(acc, nl.net_of(a), nl.net_of(b), parasitic_origin::plate,
                       plate);
              if (model != pex_model::plate)
                add_pair(acc, nl.net_of(a), nl.net_of(b), parasitic_origin::fringe,
                         fringe);
            } else {
              double v = model == pex_model::plate ? plate : plate + fringe;
              add_pair(acc, nl.net_of(a), nl.net_of(b), o, v);
            }
          }
      }
  }

  void pins_and_terminals() {
    std::set<std::string> gate_family;
    for (const std::string& n : tech.color_family(tech.gate_base_layer()))
      gate_family.insert(n);
    for (const flat_pin& p : fl.pins) {
      if (out.pin_node.count(p.label)) continue;
      std::string want = gate_family.count(p.layer) ? tech.gate_base_layer() : p.layer;
      auto it = by_layer.find(want);
      if (it == by_layer.end()) continue;
      for (int c : it->second) {
        if (!wire[c] || crects[c].empty()) continue;
        if (!contains(nl.conductors[c].shape, p.at)) continue;
        out.pin_node[p.label] = node_name(tile_node(c, p.at));
        break;
      }
    }
    for (size_t i = 0; i < nl.devices.size(); ++i) {
      const fin_device& d = nl.devices[i];
      Point gm{(d.location.x1 + d.location.x2) / 2,
               (d.location.y1 + d.location.y2) / 2};
      auto itg = by_layer.find(tech.gate_base_layer());
      if (itg != by_layer.end())
        for (int c : itg->second)
          if (!crects[c].empty() && contains(nl.conductors[c].shape, gm)) {
            out.terminal_node[strf("X%zu.g", i)] = node_name(tile_node(c, gm));
            break;
          }
      if (!net_first[d.source].empty())
        out.terminal_node[strf("X%zu.s", i)] = net_first[d.source];
      if (!net_first[d.drain].empty())
        out.terminal_node[strf("X%zu.d", i)] = net_first[d.drain];
    }
  }

  void gate_top_caps() {
    const layer_def& act = tech.layer(tech.active_layer());
    const layer_def& gate = tech.layer(tech.gate_base_layer());
    i64 act_top = act.height + act.thickness;
    i64 gap = gate.height - act_top;
    if (gap <= 0) return;
    double k = tech.k_eff_between(act_top, gate.height);
    std::map<std::pair<std::string, std::string>, double> per_pair;
    for (size_t i = 0; i < nl.devices.size(); ++i) {
      const fin_device& d = nl.devices[i];
      auto itg = out.terminal_node.find(strf("X%zu.g", i));
      if (itg == out.terminal_node.end()) continue;
      double half = um2(d.location.w() * d.location.h()) / 2;
      double v = cap_parallel_plate(half, um(gap), k);
      auto push = [&](int net) {
        if (net_first[net].empty() || net_first[net] == itg->second) return;
        per_pair[{itg->second, net_first[net]}] += v;
      };
      push(d.source);
      push(d.drain);
    }
    for (const auto& [pr, v] : per_pair)
      out.elements.push_back(
          {element_kind::cap, pr.first, pr.second, v, parasitic_origin::fringe});
  }

  pex_result run() {
    setup();
    unify();
    link_vias();
    name_nodes();
    ground_caps();
    std::map<pair_key, double> acc;
    lateral_caps(acc);
    vertical_caps(acc);
    for (const auto& [key, v] : acc) {
      auto [na, nb, o] = key;
      if (net_first[na].empty() || net_first[nb].empty()) continue;
      out.elements.push_back(
          {element_kind::cap, net_first[na], net_first[nb], v, o});
    }
    pins_and_terminals();
    gate_top_caps();
    sheet_elements();
    // keep each distinct warning once, first occurrence order
    std::set<std::string> seen;
    std::vector<std::string> w;
    for (std::string& s : out.warnings)
      if (seen.insert(s).second) w.push_back(std::move(s));
    out.warnings = std::move(w);
    return std::move(out);
  }
};

}  // namespace

pex_result extract_parasitics(const flat_layout& fl, const tech_db& tech,
                              const netlist& nl, pex_model model) {
  return pex_extractor(fl, tech, nl, model).run();
}

std::string annotated_netlist_text(const netlist& nl, const pex_result& px) {
  std::vector<const parasitic_element*> caps, ress;
  std::set<std::tuple<std::string, std::string, std::string>> dup;
  for (const parasitic_element& e : px.elements) {
    // capacitors are aggregated at extraction; a repeat means double emission.
    // Parallel resistors (multi-cut vias) are real and allowed.
    if (e.kind == element_kind::cap &&
        !dup.insert({e.a, e.b, to_string(e.origin)}).second)
      throw error(strf("duplicate parasitic capacitor %s %s %s", e.a.c_str(),
                       e.b.c_str(), to_string(e.origin).c_str()));
    (e.kind == element_kind::cap ? caps : ress).push_back(&e);
  }
  auto by_nodes = [](const parasitic_element* x, const parasitic_element* y) {
    return std::tie(x->a, x->b, x->value) < std::tie(y->a, y->b, y->value);
  };
  std::sort(caps.begin(), caps.end(), by_nodes);
  std::sort(ress.begin(), ress.end(), by_nodes);
  std::string text = netlist_text(nl);
  for (size_t i = 0; i < caps.size(); ++i)
    text += strf("C%zu %s %s %.6gaF * %s\n", i, caps[i]->a.c_str(),
                 caps[i]->b.c_str(), caps[i]->value,
                 to_string(caps[i]->origin).c_str());
  for (size_t i = 0; i < ress.size(); ++i)
    text += strf("R%zu %s %s %.6g * %s\n", i, ress[i]->a.c_str(),
                 ress[i]->b.c_str(), ress[i]->value,
                 to_string(ress[i]->origin).c_str());
  return text;
}

std::string pex_report_json(const netlist& nl, const pex_result& px,
                            pex_model model) {
  std::vector<double> cg(nl.nets.size(), 0), cc(nl.nets.size(), 0),
      rt(nl.nets.size(), 0);
  for (const parasitic_element& e : px.elements) {
    auto net_of = [&](const std::string& n) -> int {
      auto it = px.node_net.find(n);
      return it == px.node_net.end() ? -1 : it->second;
    };
    int na = net_of(e.a), nb = net_of(e.b);
    if (e.kind == element_kind::res) {
      if (na >= 0 && na == nb) rt[na] += e.value;
      continue;
    }
    if (e.b == "GND") {
      if (na >= 0) cg[na] += e.value;
    } else if (na >= 0 && nb >= 0 && na != nb) {
      cc[na] += e.value;
      cc[nb] += e.value;
    }
  }
  nlohmann::ordered_json j;
  j["model"] = to_string(model);
  j["nets"] = nlohmann::ordered_json::object();
  for (size_t i = 0; i < nl.nets.size(); ++i) {
    nlohmann::ordered_json n;
    n["C_ground_aF"] = cg[i];
    n["C_coupling_aF"] = cc[i];
    n["R_total_ohm"] = rt[i];
    j["nets"][nl.nets[i].name] = n;
  }
  j["warnings"] = px.warnings;
  return j.dump(2) + "\n";
}

double elmore_delay(const std::vector<parasitic_element>& elements,
                    const std::string& root, const std::string& sink) {
  struct edge {
    std::string to;
    double r;
    int id;
  };
  std::map<std::string, std::vector<edge>> adj;
  int eid = 0;
  for (const parasitic_element& e : elements)
    if (e.kind == element_kind::res) {
      if (e.a == e.b) continue;
      adj[e.a].push_back({e.b, e.value, eid});
      adj[e.b].push_back({e.a, e.value, eid});
      ++eid;
    }
  std::map<std::string, double> cap;
  for (const parasitic_element& e : elements)
    if (e.kind == element_kind::cap) {
      if (e.a != "GND") cap[e.a] += e.value;
      if (e.b != "GND") cap[e.b] += e.value;
    }

  std::map<std::string, std::pair<std::string, double>> par;  // node -> parent, R
  std::map<std::string, double> rdist;
  std::map<std::string, int> via_edge;
  std::vector<std::string> order{root};
  rdist[root] = 0;
  via_edge[root] = -1;
  for (size_t i = 0; i < order.size(); ++i) {
    std::string n = order[i];
    for (const edge& e : adj[n]) {
      if (e.id == via_edge[n]) continue;
      if (rdist.count(e.to))
        throw error(strf("resistive loop through node %s", e.to.c_str()));
      rdist[e.to] = rdist[n] + e.r;
      par[e.to] = {n, e.r};
      via_edge[e.to] = e.id;
      order.push_back(e.to);
    }
  }
  if (!rdist.count(sink))
    throw error(strf("no resistive path from %s to %s", root.c_str(), sink.c_str()));

  std::set<std::string> on_path;
  for (std::string n = sink;; n = par[n].first) {
    on_path.insert(n);
    if (n == root) break;
  }
  double total = 0;  // aF * ohm = 1e-18 s
  for (const auto& [node, c] : cap) {
    if (!rdist.count(node)) continue;
    std::string n = node;
    while (!on_path.count(n)) n = par[n].first;
    total += c * rdist[n];
  }
  return total * 1e-18;
}

delay_study chain_delay(const netlist& nl, const pex_result& px, const tech_db& tech,
                        const std::string& in_pin, const std::string& out_pin) {
  std::map<std::string, int> net_ix;
  for (size_t i = 0; i < nl.nets.size(); ++i) net_ix[nl.nets[i].name] = int(i);
  auto need = [&](const std::string& n) {
    auto it = net_ix.find(n);
    if (it == net_ix.end()) throw error(strf("no net named %s", n.c_str()));
    return it->second;
  };
  int cur = need(in_pin), target = need(out_pin);
  const delay_params& dp = tech.delay();

  delay_study study;
  std::set<int> seen;
  while (cur != target) {
    if (!seen.insert(cur).second)
      throw error(strf("the chain loops back through net %s",
                       nl.nets[cur].name.c_str()));
    int di = -1;
    for (size_t i = 0; i < nl.devices.size(); ++i)
      if (nl.devices[i].kind == device_kind::nfin && nl.devices[i].gate == cur) {
        di = int(i);
        break;
      }
    if (di < 0)
      throw error(strf("no stage drives onward from net %s",
                       nl.nets[cur].name.c_str()));
    const fin_device& drv = nl.devices[di];
    int stage = drv.drain;
    double r_sw = dp.switch_resistance_per_fin_ohm / double(drv.n_fin);

    double c_gate = 0;
    std::string sink;
    for (size_t i = 0; i < nl.devices.size(); ++i)
      if (nl.devices[i].gate == stage) {
        c_gate += dp.gate_cap_af_per_nm2 *
                  double(nl.devices[i].l * nl.devices[i].location.h());
        if (sink.empty()) {
          auto it = px.terminal_node.find(strf("X%zu.g", i));
          if (it != px.terminal_node.end()) sink = it->second;
        }
      }
    if (sink.empty() && stage == target) {
      auto it = px.pin_node.find(out_pin);
      if (it != px.pin_node.end()) sink = it->second;
    }
    junction_geometry jg = fin_junctions(drv);
    double c_junc = dp.junction_cap_af_per_nm2 * double(jg.area_d) +
                    dp.junction_cap_af_per_nm * double(jg.perim_d);

    study.none += r_sw * c_gate * 1e-18;
    study.geometry += r_sw * (c_gate + c_junc) * 1e-18;

    double c_wire = 0;
    std::vector<parasitic_element> local;
    for (const parasitic_element& e : px.elements) {
      auto net_of = [&](const std::string& n) -> int {
        auto it = px.node_net.find(n);
        return it == px.node_net.end() ? -1 : it->second;
      };
      int na = net_of(e.a), nb = net_of(e.b);
      if (e.kind == element_kind::res) {
        if (na == stage && nb == stage) local.push_back(e);
        continue;
      }
      if (na == stage) {
        local.push_back({element_kind::cap, e.a, "GND", e.value, e.origin});
        c_wire += e.value;
      } else if (nb == stage) {
        local.push_back({element_kind::cap, e.b, "GND", e.value, e.origin});
        c_wire += e.value;
      }
    }
    double ext = r_sw * (c_gate + c_junc + c_wire) * 1e-18;
    auto itr = px.terminal_node.find(strf("X%d.d", di));
    if (itr != px.terminal_node.end() && !sink.empty() && itr->second != sink) {
      if (c_gate > 0)
        local.push_back({element_kind::cap, sink, "GND", c_gate,
                         parasitic_origin::plate});
      ext += elmore_delay(local, itr->second, sink);
    }
    study.extracted += ext;
    cur = stage;
  }
  return study;
}

}  // namespace fv
