#include "finverify/techdb.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <set>

#include <json.hpp>

namespace fv {

using json = nlohmann::json;

std::string to_string(layer_class c) {
  switch (c) {
    case layer_class::active: return "ACTIVE";
    case layer_class::gate: return "GATE";
    case layer_class::gate_cut: return "GATE_CUT";
    case layer_class::mol: return "MOL";
    case layer_class::metal: return "METAL";
    case layer_class::via: return "VIA";
  }
  return "?";
}

std::string to_string(layer_color c) {
  switch (c) {
    case layer_color::none: return "NONE";
    case layer_color::a: return "A";
    case layer_color::b: return "B";
  }
  return "?";
}

std::string to_string(rule_kind k) {
  switch (k) {
    case rule_kind::min_width: return "MIN_WIDTH";
    case rule_kind::min_spacing_same_color: return "MIN_SPACING_SAME_COLOR";
    case rule_kind::min_spacing_diff_color: return "MIN_SPACING_DIFF_COLOR";
    case rule_kind::min_area: return "MIN_AREA";
    case rule_kind::enclosure: return "ENCLOSURE";
    case rule_kind::overlap: return "OVERLAP";
    case rule_kind::width_quantized: return "WIDTH_QUANTIZED";
    case rule_kind::discrete_length: return "DISCRETE_LENGTH";
    case rule_kind::rect_only: return "RECT_ONLY";
  }
  return "?";
}

namespace {

layer_class parse_class(const std::string& s, const std::string& layer) {
  if (s == "ACTIVE") return layer_class::active;
  if (s == "GATE") return layer_class::gate;
  if (s == "GATE_CUT") return layer_class::gate_cut;
  if (s == "MOL") return layer_class::mol;
  if (s == "METAL") return layer_class::metal;
  if (s == "VIA") return layer_class::via;
  throw error(strf("tech: layer %s has unknown class '%s'", layer.c_str(), s.c_str()));
}

rule_kind parse_kind(const std::string& s, const std::string& id) {
  if (s == "MIN_WIDTH") return rule_kind::min_width;
  if (s == "MIN_SPACING_SAME_COLOR") return rule_kind::min_spacing_same_color;
  if (s == "MIN_SPACING_DIFF_COLOR") return rule_kind::min_spacing_diff_color;
  if (s == "MIN_AREA") return rule_kind::min_area;
  if (s == "ENCLOSURE") return rule_kind::enclosure;
  if (s == "OVERLAP") return rule_kind::overlap;
  if (s == "WIDTH_QUANTIZED") return rule_kind::width_quantized;
  if (s == "DISCRETE_LENGTH") return rule_kind::discrete_length;
  if (s == "RECT_ONLY") return rule_kind::rect_only;
  throw error(strf("tech: rule %s has unknown kind '%s'", id.c_str(), s.c_str()));
}

i64 get_nm(const json& j, const char* key, const std::string& ctx, i64 dflt = 0,
           bool required = false) {
  if (!j.contains(key)) {
    if (required) throw error(strf("tech: %s missing '%s'", ctx.c_str(), key));
    return dflt;
  }
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw error(strf("tech: %s field '%s' must be an integer nm value", ctx.c_str(), key));
  return v.get<i64>();
}

}  // namespace

tech_db tech_db::load(const std::string& path) {
  return parse(read_file(path), path);
}

tech_db tech_db::parse(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw error(strf("%s: %s", origin.c_str(), e.what()));
  }
  tech_db t;
  try {
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
      throw error("tech: unsupported or missing schema_version (expected 1)");
    t.name_ = j.value("name", std::string("unnamed"));

    for (const json& jl : j.at("layers")) {
      layer_def l;
      l.name = jl.at("name").get<std::string>();
      if (t.index_.count(l.name))
        throw error(strf("tech: duplicate layer '%s'", l.name.c_str()));
      l.cls = parse_class(jl.value("class", std::string()), l.name);
      l.level = (int)get_nm(jl, "level", "layer " + l.name);
      std::string col = jl.value("color", std::string("NONE"));
      if (col == "A") l.color = layer_color::a;
      else if (col == "B") l.color = layer_color::b;
      else if (col == "NONE") l.color = layer_color::none;
      else throw error(strf("tech: layer %s has unknown color '%s'", l.name.c_str(), col.c_str()));
      l.base = jl.value("base", std::string());
      l.marker = jl.value("marker", false);
      l.thickness = get_nm(jl, "thickness", "layer " + l.name);
      l.height = get_nm(jl, "height", "layer " + l.name);
      l.resistivity = jl.value("resistivity", 0.0);
      l.via_resistance = jl.value("via_resistance", 0.0);
      t.index_[l.name] = t.layers_.size();
      t.layers_.push_back(l);
    }

    // colored variants inherit geometry/electricals from their base
    for (layer_def& l : t.layers_) {
      if (l.base.empty()) continue;
      if (!t.index_.count(l.base))
        throw error(strf("tech: layer %s references undefined base '%s'", l.name.c_str(),
                         l.base.c_str()));
      const layer_def& b = t.layers_[t.index_.at(l.base)];
      if (l.cls != b.cls)
        throw error(strf("tech: colored layer %s class differs from base %s", l.name.c_str(),
                         b.name.c_str()));
      if (l.level == 0) l.level = b.level;
      if (l.level != b.level)
        throw error(strf("tech: colored layer %s level differs from base %s", l.name.c_str(),
                         b.name.c_str()));
      if (l.thickness == 0) l.thickness = b.thickness;
      if (l.height == 0) l.height = b.height;
      if (l.resistivity == 0) l.resistivity = b.resistivity;
      if (l.via_resistance == 0) l.via_resistance = b.via_resistance;
    }

    if (j.contains("fin_params")) {
      const json& jf = j.at("fin_params");
      t.fins_.w_fin = get_nm(jf, "w_fin", "fin_params", 0, true);
      t.fins_.pitch_fin = get_nm(jf, "pitch_fin", "fin_params", 0, true);
      for (const json& v : jf.at("allowed_gate_lengths"))
        t.fins_.allowed_gate_lengths.push_back(v.get<i64>());
      t.fins_.fins_horizontal = jf.value("fin_direction", std::string("horizontal")) != "vertical";
    }

    for (const json& jc : j.value("connectivity", json::array())) {
      connect_entry c;
      c.layer_a = jc.at("a").get<std::string>();
      c.layer_b = jc.at("b").get<std::string>();
      std::string m = jc.at("mode").get<std::string>();
      if (m == "OVERLAP") {
        c.mode = connect_mode::overlap;
      } else if (m == "THROUGH_VIA") {
        c.mode = connect_mode::through_via;
        c.via = jc.at("via").get<std::string>();
      } else {
        throw error(strf("tech: connectivity %s-%s has unknown mode '%s'", c.layer_a.c_str(),
                         c.layer_b.c_str(), m.c_str()));
      }
      t.connect_.push_back(c);
    }

    for (const json& jr : j.value("rules", json::array())) {
      rule r;
      r.id = jr.at("id").get<std::string>();
      r.kind = parse_kind(jr.at("kind").get<std::string>(), r.id);
      for (const json& v : jr.value("layers", json::array()))
        r.layers.push_back(v.get<std::string>());
      for (const json& v : jr.value("outers", json::array()))
        r.outers.push_back(v.get<std::string>());
      r.value = get_nm(jr, "value", "rule " + r.id);
      r.base = get_nm(jr, "base", "rule " + r.id);
      r.step = get_nm(jr, "step", "rule " + r.id);
      for (const json& v : jr.value("values", json::array()))
        r.allowed.push_back(v.get<i64>());
      t.rules_.push_back(r);
    }

    for (const json& jd : j.value("dielectrics", json::array())) {
      dielectric_slab d;
      d.name = jd.at("name").get<std::string>();
      d.z_lo = get_nm(jd, "from", "dielectric " + d.name, 0, true);
      d.z_hi = get_nm(jd, "to", "dielectric " + d.name, 0, true);
      d.k = jd.at("k").get<double>();
      t.diel_.push_back(d);
    }

    if (j.contains("delay_model")) {
      const json& jm = j.at("delay_model");
      t.delay_.switch_resistance_per_fin_ohm = jm.value("switch_resistance_per_fin_ohm", 0.0);
      t.delay_.gate_cap_af_per_nm2 = jm.value("gate_cap_af_per_nm2", 0.0);
      t.delay_.junction_cap_af_per_nm2 = jm.value("junction_cap_af_per_nm2", 0.0);
      t.delay_.junction_cap_af_per_nm = jm.value("junction_cap_af_per_nm", 0.0);
    }
  } catch (const json::exception& e) {
    throw error(strf("%s: %s", origin.c_str(), e.what()));
  }
  t.validate();
  return t;
}

void tech_db::validate() {
  // single gate-cut layer, class bookkeeping
  std::vector<std::string> cuts;
  for (const layer_def& l : layers_) {
    if (l.cls == layer_class::gate_cut) cuts.push_back(l.name);
    if (l.cls == layer_class::gate && l.base.empty() && !l.marker) gate_base_ = l.name;
    if (l.cls == layer_class::active && !l.marker) {
      if (!active_.empty())
        throw error("tech: more than one non-marker ACTIVE layer");
      active_ = l.name;
    }
    if (l.cls == layer_class::active && l.marker) well_ = l.name;
  }
  if (cuts.empty()) throw error("tech: missing GATE_CUT layer");
  if (cuts.size() > 1)
    throw error(strf("tech: more than one GATE_CUT layer (%s, %s)", cuts[0].c_str(),
                     cuts[1].c_str()));
  gate_cut_ = cuts[0];
  if (gate_base_.empty()) throw error("tech: no uncolored GATE layer");
  if (active_.empty()) throw error("tech: no ACTIVE layer");

  // metal stack: contiguous levels from 1, strictly increasing heights
  std::map<int, const layer_def*> metals;
  for (const layer_def& l : layers_) {
    if (l.cls != layer_class::metal || !l.base.empty()) continue;
    if (l.level < 1 || l.level > 13)
      throw error(strf("tech: metal %s level %d outside 1..13", l.name.c_str(), l.level));
    if (metals.count(l.level))
      throw error(strf("tech: duplicate metal level %d (%s, %s)", l.level,
                       metals[l.level]->name.c_str(), l.name.c_str()));
    metals[l.level] = &l;
  }
  if (metals.empty()) throw error("tech: no metal layers");
  int want = 1;
  i64 prev_h = -1;
  for (const auto& [lvl, l] : metals) {
    if (lvl != want)
      throw error(strf("tech: metal levels not contiguous, missing level %d", want));
    ++want;
    if (l->height <= prev_h)
      throw error(strf("tech: metal %s height %lld not above the level below", l->name.c_str(),
                       (long long)l->height));
    prev_h = l->height;
  }

  // per-layer electrical invariants
  for (const layer_def& l : layers_) {
    if (l.marker || l.cls == layer_class::gate_cut || l.cls == layer_class::via) continue;
    if (l.thickness <= 0)
      throw error(strf("tech: layer %s thickness must be > 0", l.name.c_str()));
    if (l.height < 0)
      throw error(strf("tech: layer %s height must be >= 0", l.name.c_str()));
    if (l.resistivity <= 0)
      throw error(strf("tech: layer %s resistivity must be > 0", l.name.c_str()));
  }
  for (const layer_def& l : layers_) {
    if (l.cls == layer_class::via && l.via_resistance <= 0)
      throw error(strf("tech: via %s needs via_resistance > 0", l.name.c_str()));
  }

  // color family consistency
  for (const layer_def& l : layers_) {
    if (l.color != layer_color::none && l.base.empty())
      throw error(strf("tech: colored layer %s lacks a base", l.name.c_str()));
    if (l.color == layer_color::none && !l.base.empty())
      throw error(strf("tech: layer %s has a base but no color", l.name.c_str()));
  }

  // rules reference defined layers; ids unique; parameter shapes
  std::set<std::string> rule_ids;
  for (const rule& r : rules_) {
    if (!rule_ids.insert(r.id).second)
      throw error(strf("tech: duplicate rule id '%s'", r.id.c_str()));
    if (r.layers.empty())
      throw error(strf("tech: rule %s lists no layers", r.id.c_str()));
    for (const std::string& n : r.layers)
      if (!index_.count(n))
        throw error(strf("tech: rule %s references undefined layer '%s'", r.id.c_str(), n.c_str()));
    for (const std::string& n : r.outers)
      if (!index_.count(n))
        throw error(strf("tech: rule %s references undefined layer '%s'", r.id.c_str(), n.c_str()));
    switch (r.kind) {
      case rule_kind::width_quantized:
        if (r.base <= 0 || r.step <= 0)
          throw error(strf("tech: rule %s needs base > 0 and step > 0", r.id.c_str()));
        break;
      case rule_kind::discrete_length:
        if (r.allowed.empty())
          throw error(strf("tech: rule %s needs a non-empty value set", r.id.c_str()));
        break;
      case rule_kind::enclosure:
      case rule_kind::overlap:
        if (r.outers.empty())
          throw error(strf("tech: rule %s needs outer layers", r.id.c_str()));
        break;
      case rule_kind::rect_only:
        break;
      default:
        if (r.value <= 0)
          throw error(strf("tech: rule %s needs value > 0", r.id.c_str()));
    }
  }

  // connectivity references and via placement
  std::set<std::string> vias_seen;
  for (const connect_entry& c : connect_) {
    for (const std::string& n : {c.layer_a, c.layer_b}) {
      if (!index_.count(n))
        throw error(strf("tech: connectivity references undefined layer '%s'", n.c_str()));
      if (layer(n).cls == layer_class::via)
        throw error(strf("tech: via %s may appear only as a THROUGH_VIA carrier", n.c_str()));
    }
    if (c.mode == connect_mode::through_via) {
      if (!index_.count(c.via))
        throw error(strf("tech: connectivity references undefined via '%s'", c.via.c_str()));
      if (layer(c.via).cls != layer_class::via)
        throw error(strf("tech: THROUGH_VIA carrier %s is not a VIA layer", c.via.c_str()));
      vias_seen.insert(c.via);
      const layer_def& a = layer(c.layer_a);
      const layer_def& b = layer(c.layer_b);
      if (a.cls == layer_class::metal && b.cls == layer_class::metal &&
          std::abs(a.level - b.level) != 1)
        throw error(strf("tech: via %s joins non-adjacent metal levels %d and %d", c.via.c_str(),
                         a.level, b.level));
    }
  }
  for (const layer_def& l : layers_)
    if (l.cls == layer_class::via && !vias_seen.count(l.name))
      throw error(strf("tech: via %s not used by any connectivity entry", l.name.c_str()));

  // the stack must be climbable: ACTIVE and GATE reach the top metal
  std::map<std::string, std::string> parent;
  for (const layer_def& l : layers_) parent[l.name] = l.name;
  std::function<std::string(std::string)> find = [&](std::string x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](const std::string& a, const std::string& b) { parent[find(a)] = find(b); };
  for (const layer_def& l : layers_)
    if (!l.base.empty()) unite(l.name, l.base);
  for (const connect_entry& c : connect_) unite(c.layer_a, c.layer_b);
  const std::string top = metals_in_order().back();
  if (find(active_) != find(top))
    throw error(strf("tech: connectivity does not link %s up to %s", active_.c_str(), top.c_str()));
  if (find(gate_base_) != find(top))
    throw error(strf("tech: connectivity does not link %s up to %s", gate_base_.c_str(),
                     top.c_str()));

  // fin parameters
  if (fins_.w_fin <= 0 || fins_.w_fin >= fins_.pitch_fin)
    throw error("tech: fin_params requires 0 < w_fin < pitch_fin");
  if (fins_.allowed_gate_lengths.empty())
    throw error("tech: fin_params requires non-empty allowed_gate_lengths");

  // dielectric stack: contiguous from substrate, k >= 1
  i64 z = 0;
  for (const dielectric_slab& d : diel_) {
    if (d.z_lo != z)
      throw error(strf("tech: dielectric %s starts at %lld, expected %lld", d.name.c_str(),
                       (long long)d.z_lo, (long long)z));
    if (d.z_hi <= d.z_lo)
      throw error(strf("tech: dielectric %s has non-positive extent", d.name.c_str()));
    if (d.k < 1.0)
      throw error(strf("tech: dielectric %s has k < 1", d.name.c_str()));
    z = d.z_hi;
  }
}

bool tech_db::has_layer(const std::string& n) const { return index_.count(n) > 0; }

const layer_def& tech_db::layer(const std::string& n) const {
  auto it = index_.find(n);
  if (it == index_.end()) throw error(strf("tech: unknown layer '%s'", n.c_str()));
  return layers_[it->second];
}

std::vector<std::string> tech_db::color_family(const std::string& n) const {
  const layer_def& l = layer(n);
  const std::string& base = l.base.empty() ? l.name : l.base;
  std::vector<std::string> out;
  for (const layer_def& m : layers_)
    if (m.name == base || m.base == base) out.push_back(m.name);
  std::sort(out.begin(), out.end());
  if (out.size() == 1) return out;  // unpatterned layer: singleton
  return out;
}

double tech_db::sheet_resistance(const std::string& n) const {
  const layer_def& l = layer(n);
  if (l.resistivity <= 0 || l.thickness <= 0)
    throw error(strf("tech: layer %s has no sheet electrical data", n.c_str()));
  return l.resistivity / ((double)l.thickness * 1e-3);  // ohm*um / um
}

std::vector<std::string> tech_db::metals_in_order() const {
  std::map<int, std::string> by_level;
  for (const layer_def& l : layers_)
    if (l.cls == layer_class::metal && l.base.empty()) by_level[l.level] = l.name;
  std::vector<std::string> out;
  for (const auto& [lvl, n] : by_level) out.push_back(n);
  return out;
}

double tech_db::dielectric_k_at(i64 z) const {
  for (const dielectric_slab& d : diel_)
    if (z >= d.z_lo && z < d.z_hi) return d.k;
  if (!diel_.empty()) return diel_.back().k;
  return 1.0;
}

double tech_db::k_eff_between(i64 z_lo, i64 z_hi) const {
  if (z_hi <= z_lo) throw error("tech: k_eff_between needs z_hi > z_lo");
  double denom = 0;  // sum of t_i / k_i over the slabs crossed
  for (const dielectric_slab& d : diel_) {
    i64 lo = std::max(z_lo, d.z_lo), hi = std::min(z_hi, d.z_hi);
    if (hi > lo) denom += (double)(hi - lo) / d.k;
  }
  // anything above the defined stack continues with the top slab's k
  if (!diel_.empty() && z_hi > diel_.back().z_hi) {
    i64 lo = std::max(z_lo, diel_.back().z_hi);
    denom += (double)(z_hi - lo) / diel_.back().k;
  }
  if (denom <= 0) return 1.0;
  return (double)(z_hi - z_lo) / denom;
}

}  // namespace fv
