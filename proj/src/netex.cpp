#include "finverify/netex.hpp"

#include <algorithm>
#include <set>

namespace fv {

std::string to_string(device_kind k) {
  return k == device_kind::nfin ? "NFIN" : "PFIN";
}

ShapeList effective_gate(const flat_layout& fl, const tech_db& tech) {
  ShapeList gate, cut;
  for (const std::string& n : tech.color_family(tech.gate_base_layer())) {
    auto it = fl.layers.find(n);
    if (it != fl.layers.end()) gate.insert(gate.end(), it->second.begin(), it->second.end());
  }
  auto itc = fl.layers.find(tech.gate_cut_layer());
  if (itc != fl.layers.end()) cut = itc->second;
  return geo_subtract(normalize(gate), cut);
}

junction_geometry fin_junctions(const fin_device& d) {
  junction_geometry g;
  g.area_d = d.n_fin * d.w_fin * d.l_fin_d;
  g.area_s = d.n_fin * d.w_fin * d.l_fin_s;
  g.perim_d = 2 * d.l_fin_d * d.n_fin + d.w_fin * d.n_fin;
  g.perim_s = 2 * d.l_fin_s * d.n_fin + d.w_fin * d.n_fin;
  return g;
}

junction_geometry planar_junctions(i64 w, i64 l_ds) {
  junction_geometry g;
  g.area_d = g.area_s = w * l_ds;
  g.perim_d = g.perim_s = 2 * l_ds + w;
  return g;
}

int netlist::net_of(int conductor_index) const {
  for (size_t i = 0; i < nets.size(); ++i)
    for (int m : nets[i].members)
      if (m == conductor_index) return int(i);
  return -1;
}

namespace {

struct dsu {
  mutable std::vector<int> p;
  explicit dsu(size_t n) : p(n) { for (size_t i = 0; i < n; ++i) p[i] = int(i); }
  int find(int x) const { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

bool xy_overlaps(const Polygon& a, const Polygon& b) {
  Rect ra = a.bbox(), rb = b.bbox();
  if (ra.x1 >= rb.x2 || rb.x1 >= ra.x2 || ra.y1 >= rb.y2 || rb.y1 >= ra.y2) return false;
  return area(geo_intersect({a}, {b})) > 0;
}

struct extractor {
  const flat_layout& fl;
  const tech_db& tech;

  std::vector<conductor> nodes;
  std::map<std::string, std::vector<int>> by_layer;  // conductor layer -> node ids
  ShapeList act_raw;                                 // drawn active, normalized

  dsu comp{0};
  // full label -> (depth, node ids); gathered before merging
  struct label_use { std::string label; int depth; int node; };
  std::vector<label_use> labels;

  explicit extractor(const flat_layout& f, const tech_db& t) : fl(f), tech(t) {}

  void add_nodes(const std::string& layer, const ShapeList& shapes) {
    for (const Polygon& p : shapes) {
      by_layer[layer].push_back(int(nodes.size()));
      nodes.push_back({layer, p});
    }
  }

  // node lists for a connectivity-table name (base names stand for families)
  std::vector<int> lists_for(const std::string& base) const {
    std::vector<int> out;
    if (base == tech.gate_base_layer() || base == tech.active_layer()) {
      auto it = by_layer.find(base);
      if (it != by_layer.end()) out = it->second;
      return out;
    }
    for (const std::string& n : tech.color_family(base)) {
      auto it = by_layer.find(n);
      if (it != by_layer.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
  }

  void build_nodes() {
    ShapeList raw;
    auto ita = fl.layers.find(tech.active_layer());
    if (ita != fl.layers.end()) raw = ita->second;
    act_raw = normalize(raw);

    ShapeList egate = effective_gate(fl, tech);
    add_nodes(tech.gate_base_layer(), egate);
    add_nodes(tech.active_layer(), geo_subtract(act_raw, egate));
    auto itw = fl.layers.find(tech.well_layer());
    if (itw != fl.layers.end()) add_nodes(tech.well_layer(), normalize(itw->second));

    std::set<std::string> gate_family;
    for (const std::string& n : tech.color_family(tech.gate_base_layer()))
      gate_family.insert(n);
    for (const auto& [name, shapes] : fl.layers) {
      const layer_def& def = tech.layer(name);
      if (gate_family.count(name) || name == tech.gate_cut_layer() ||
          name == tech.active_layer() || name == tech.well_layer())
        continue;
      if (def.cls == layer_class::via) continue;  // vias link, they are not nodes
      add_nodes(name, normalize(shapes));
    }
    comp = dsu(nodes.size());
  }

  void link_geometry() {
    // cross-color stitching within each metal family
    std::set<std::string> seen;
    for (const auto& [name, ids] : by_layer) {
      const layer_def& def = tech.layer(name);
      if (def.cls != layer_class::metal) continue;
      std::string base = def.base.empty() ? name : def.base;
      if (!seen.insert(base).second) continue;
      std::vector<int> fam = lists_for(base);
      for (size_t i = 0; i < fam.size(); ++i)
        for (size_t j = i + 1; j < fam.size(); ++j)
          if (nodes[fam[i]].layer != nodes[fam[j]].layer &&
              touches(nodes[fam[i]].shape, nodes[fam[j]].shape))
            comp.unite(fam[i], fam[j]);
    }

    // the connectivity table: direct overlaps and via-made links
    std::map<std::string, std::set<std::string>> via_partners;
    for (const connect_entry& e : tech.connectivity()) {
      if (e.mode == connect_mode::through_via) {
        via_partners[e.via].insert(e.layer_a);
        via_partners[e.via].insert(e.layer_b);
        continue;
      }
      for (int a : lists_for(e.layer_a))
        for (int b : lists_for(e.layer_b))
          if (xy_overlaps(nodes[a].shape, nodes[b].shape)) comp.unite(a, b);
    }
    for (const auto& [via, partners] : via_partners) {
      auto itv = fl.layers.find(via);
      if (itv == fl.layers.end()) continue;
      std::vector<int> reach;
      for (const std::string& p : partners) {
        auto ids = lists_for(p);
        reach.insert(reach.end(), ids.begin(), ids.end());
      }
      for (const Polygon& v : itv->second) {
        int first = -1;
        for (int n : reach)
          if (xy_overlaps(v, nodes[n].shape)) {
            if (first < 0) first = n;
            else comp.unite(first, n);
          }
      }
    }
  }

  void place_pins() {
    std::set<std::string> gate_family;
    for (const std::string& n : tech.color_family(tech.gate_base_layer()))
      gate_family.insert(n);
    for (const flat_pin& p : fl.pins) {
      std::string want = p.layer;
      if (gate_family.count(want)) want = tech.gate_base_layer();
      if (tech.layer(p.layer).cls == layer_class::via)
        throw error(strf("pin %s at (%lld,%lld) sits on via layer %s", p.label.c_str(),
                         (long long)p.at.x, (long long)p.at.y, p.layer.c_str()));
      int node = -1;
      auto it = by_layer.find(want);
      if (it != by_layer.end())
        for (int n : it->second)
          if (contains(nodes[n].shape, p.at)) { node = n; break; }
      if (node < 0)
        throw error(strf("pin %s at (%lld,%lld) lies on no %s conductor",
                         p.label.c_str(), (long long)p.at.x, (long long)p.at.y,
                         p.layer.c_str()));
      labels.push_back({p.label, p.depth, node});
    }
    // identically labelled components are one net (rails, well taps)
    std::map<std::string, int> first_with;
    for (const label_use& u : labels) {
      auto [it, fresh] = first_with.try_emplace(u.label, u.node);
      if (!fresh) comp.unite(it->second, u.node);
    }
  }

  void check_conflicts() const {
    // two different labels from the same instance scope on one component is a
    // short between nets the designer named apart
    std::map<std::pair<int, std::string>, std::string> claim;  // (root, scope) -> label
    for (const label_use& u : labels) {
      std::string scope;
      if (auto cut = u.label.rfind('/'); cut != std::string::npos)
        scope = u.label.substr(0, cut);
      auto key = std::make_pair(comp.find(u.node), scope);
      auto [it, fresh] = claim.try_emplace(key, u.label);
      if (!fresh && it->second != u.label)
        throw error(strf("net label conflict: %s and %s are wired together",
                         it->second.c_str(), u.label.c_str()));
    }
  }

  // -------------------------------------------------------------------------

  netlist finish_nets() {
    netlist nl;
    nl.conductors = nodes;
    std::map<int, int> net_of_root;
    // best label per component: lowest depth, then lexicographic
    std::map<int, std::pair<int, std::string>> best;
    for (const label_use& u : labels) {
      int r = comp.find(u.node);
      auto it = best.find(r);
      std::pair<int, std::string> cand{u.depth, u.label};
      if (it == best.end() || cand < it->second) best[r] = cand;
    }
    int anon = 0;
    for (int n = 0; n < int(nodes.size()); ++n) {
      int r = comp.find(n);
      auto [it, fresh] = net_of_root.try_emplace(r, int(nl.nets.size()));
      if (fresh) {
        net fresh_net;
        auto itb = best.find(r);
        fresh_net.name = itb != best.end() ? itb->second.second : strf("n%d", anon++);
        nl.nets.push_back(fresh_net);
      }
      nl.nets[it->second].members.push_back(n);
    }
    return nl;
  }

  int bulk_net(netlist& nl, const Polygon& channel, device_kind kind,
               std::map<int, int>& net_by_node) {
    if (kind == device_kind::pfin) {
      for (int w : lists_for(tech.well_layer())) {
        i64 c_area = channel.area();
        if (area(geo_intersect({channel}, {nodes[w].shape})) == c_area)
          return net_by_node[w];
      }
      Rect b = channel.bbox();
      throw error(strf("channel at (%lld,%lld) is not fully inside one %s region",
                       (long long)b.x1, (long long)b.y1, tech.well_layer().c_str()));
    }
    // the substrate is an implicit global net
    for (size_t i = 0; i < nl.nets.size(); ++i)
      if (nl.nets[i].name == "SUB") return int(i);
    nl.nets.push_back({"SUB", {}});
    return int(nl.nets.size()) - 1;
  }

  void recognize(netlist& nl) {
    std::map<int, int> net_by_node;
    for (size_t i = 0; i < nl.nets.size(); ++i)
      for (int m : nl.nets[i].members) net_by_node[m] = int(i);

    const fin_params& fp = tech.fins();
    struct channel { Rect r; int gate_node; };
    for (const Polygon& act : act_raw) {
      std::vector<channel> row;
      for (int g : lists_for(tech.gate_base_layer()))
        for (const Polygon& piece : geo_intersect({nodes[g].shape}, {act})) {
          if (!piece.is_rect())
            throw error(strf("gate over active at (%lld,%lld) is not rectangular",
                             (long long)piece.bbox().x1, (long long)piece.bbox().y1));
          row.push_back({piece.bbox(), g});
        }
      if (row.empty()) continue;
      if (!act.is_rect())
        throw error(strf("active region at (%lld,%lld) with gates is not rectangular",
                         (long long)act.bbox().x1, (long long)act.bbox().y1));
      Rect a = act.bbox();
      std::sort(row.begin(), row.end(),
                [](const channel& x, const channel& y) { return x.r.x1 < y.r.x1; });
      for (const channel& c : row)
        if (c.r.y1 != a.y1 || c.r.y2 != a.y2)
          throw error(strf("gate at (%lld,%lld) does not fully cross its active region",
                           (long long)c.r.x1, (long long)c.r.y1));

      for (size_t i = 0; i < row.size(); ++i) {
        const Rect& c = row[i].r;
        if (c.x1 == a.x1 || c.x2 == a.x2) continue;  // dummy: no diffusion beyond

        fin_device d;
        i64 w = c.h();
        if (w < fp.w_fin || (w - fp.w_fin) % fp.pitch_fin != 0)
          throw error(strf(
              "active width %lld nm at (%lld,%lld) does not solve "
              "W_fin + (n_fin-1)*Pitch_fin with W_fin=%lld Pitch_fin=%lld",
              (long long)w, (long long)c.x1, (long long)c.y1, (long long)fp.w_fin,
              (long long)fp.pitch_fin));
        d.n_fin = (w - fp.w_fin) / fp.pitch_fin + 1;
        d.w_fin = fp.w_fin;
        d.l = c.w();
        if (std::find(fp.allowed_gate_lengths.begin(), fp.allowed_gate_lengths.end(),
                      d.l) == fp.allowed_gate_lengths.end())
          throw error(strf("gate length %lld nm at (%lld,%lld) is not an allowed length",
                           (long long)d.l, (long long)c.x1, (long long)c.y1));
        d.location = c;

        // diffusion extents: to the active edge, to a dummy's channel edge, or
        // half-way to the next device gate
        auto side = [&](size_t idx, bool left) -> i64 {
          i64 edge = left ? c.x1 : c.x2;
          if (left) {
            if (idx == 0) return edge - a.x1;
            const Rect& n = row[idx - 1].r;
            bool n_dummy = n.x1 == a.x1 || n.x2 == a.x2;
            i64 gap = edge - n.x2;
            return n_dummy ? gap : gap / 2;
          }
          if (idx + 1 == row.size()) return a.x2 - edge;
          const Rect& n = row[idx + 1].r;
          bool n_dummy = n.x1 == a.x1 || n.x2 == a.x2;
          i64 gap = n.x1 - edge;
          return n_dummy ? gap : gap - gap / 2;
        };
        d.l_fin_s = side(i, true);
        d.l_fin_d = side(i, false);

        // terminal nets: the diffusion pieces sharing the channel's edges
        Polygon cp = rect_poly(c);
        int src = -1, drn = -1;
        for (int n : lists_for(tech.active_layer())) {
          if (!touches(nodes[n].shape, cp)) continue;
          Rect nb = nodes[n].shape.bbox();
          if (nb.x2 == c.x1) src = n;
          if (nb.x1 == c.x2) drn = n;
        }
        if (src < 0 || drn < 0)
          throw error(strf("device at (%lld,%lld) is missing a diffusion terminal",
                           (long long)c.x1, (long long)c.y1));
        d.source = net_by_node[src];
        d.drain = net_by_node[drn];
        d.gate = net_by_node[row[i].gate_node];

        i64 c_area = cp.area();
        i64 in_well = 0;
        for (int wn : lists_for(tech.well_layer()))
          in_well += area(geo_intersect({cp}, {nodes[wn].shape}));
        if (in_well != 0 && in_well != c_area)
          throw error(strf("channel at (%lld,%lld) straddles a %s boundary",
                           (long long)c.x1, (long long)c.y1, tech.well_layer().c_str()));
        d.kind = in_well == c_area ? device_kind::pfin : device_kind::nfin;
        d.bulk = bulk_net(nl, cp, d.kind, net_by_node);
        nl.devices.push_back(d);
      }
    }
    std::sort(nl.devices.begin(), nl.devices.end(),
              [](const fin_device& x, const fin_device& y) {
                return std::tie(x.location.y1, x.location.x1, x.location.y2,
                                x.location.x2) <
                       std::tie(y.location.y1, y.location.x1, y.location.y2,
                                y.location.x2);
              });
  }

  netlist run() {
    build_nodes();
    link_geometry();
    place_pins();
    check_conflicts();
    netlist nl = finish_nets();
    recognize(nl);
    return nl;
  }
};

}  // namespace

netlist extract(const flat_layout& fl, const tech_db& tech) {
  return extractor(fl, tech).run();
}

std::string netlist_text(const netlist& nl) {
  std::string out = "* extracted netlist\n";
  for (size_t i = 0; i < nl.devices.size(); ++i) {
    const fin_device& d = nl.devices[i];
    junction_geometry g = fin_junctions(d);
    out += strf("X%zu %s %s %s %s %s nfin=%lld l=%lldn adej=%lld asej=%lld "
                "pdej=%lld psej=%lld\n",
                i, nl.nets[d.drain].name.c_str(), nl.nets[d.gate].name.c_str(),
                nl.nets[d.source].name.c_str(), nl.nets[d.bulk].name.c_str(),
                to_string(d.kind).c_str(), (long long)d.n_fin, (long long)d.l,
                (long long)g.area_d, (long long)g.area_s, (long long)g.perim_d,
                (long long)g.perim_s);
  }
  return out;
}

void write_netlist(const netlist& nl, const std::string& path) {
  atomic_write(path, netlist_text(nl));
}

}  // namespace fv
